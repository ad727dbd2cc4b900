"""Extended Hamiltonian and canonical flow on the enlarged space (qbar, q, pbar, p)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .model import (
    CompositionRule,
    NonFiniteInput,
    WorkhorseModel,
    as_vector,
    omega,
)
from .numeric import FD_STEP, central_difference
from .projection import bundle_at

if TYPE_CHECKING:
    from .trajectory import Trajectory


class TooFewSamples(ValueError):
    pass


class NonUniformGrid(ValueError):
    pass


@dataclass(frozen=True)
class PhaseState:
    t: float
    qbar: np.ndarray
    q: np.ndarray
    pbar: np.ndarray
    p: np.ndarray

    def __post_init__(self) -> None:
        for name in ("qbar", "q", "pbar", "p"):
            value = np.asarray(getattr(self, name), dtype=float).reshape(-1)
            object.__setattr__(self, name, value)
        object.__setattr__(self, "t", float(self.t))

        if self.qbar.size != self.pbar.size or self.q.size != self.p.size:
            raise ValueError(
                "qbar/pbar and q/p must have matching sizes, got "
                f"{self.qbar.size}/{self.pbar.size} and {self.q.size}/{self.p.size}"
            )
        if not np.isfinite(self.t) or not np.all(np.isfinite(self.to_vector())):
            raise NonFiniteInput(f"phase state at t={self.t} is not finite")

    @property
    def dim_k(self) -> int:
        return self.qbar.size

    @property
    def dim_i(self) -> int:
        return self.q.size

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.qbar, self.q, self.pbar, self.p])

    @classmethod
    def from_vector(cls, t: float, y: np.ndarray, dim_k: int, dim_i: int):
        cuts = np.cumsum([dim_k, dim_i, dim_k])
        qbar, q, pbar, p = np.split(np.asarray(y, dtype=float), cuts)
        return cls(t=t, qbar=qbar, q=q, pbar=pbar, p=p)


@dataclass(frozen=True)
class FieldEval:
    d_qbar: np.ndarray
    d_q: np.ndarray
    d_pbar: np.ndarray
    d_p: np.ndarray

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.d_qbar, self.d_q, self.d_pbar, self.d_p])


@dataclass(frozen=True)
class PbarIdentification:
    pbar: np.ndarray
    out_of_range: np.ndarray

    @property
    def residual_norm(self) -> float:
        return float(np.linalg.norm(self.out_of_range))


@dataclass(frozen=True)
class ResidualSeries:
    t: np.ndarray
    values: np.ndarray

    @property
    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.values, axis=1)

    @property
    def max_norm(self) -> float:
        return float(self.norms.max()) if self.values.size else 0.0


def _check_state(model: WorkhorseModel, rule: CompositionRule, s: PhaseState) -> None:
    as_vector(s.q, model.dim_i, "q")
    as_vector(s.qbar, rule.dim_k, "qbar")


def workhorse_hamiltonian(model: WorkhorseModel, q, p) -> float:
    q = as_vector(q, model.dim_i, "q")
    p = as_vector(p, model.dim_i, "p")
    kinetic = p - model.u(q)
    return float(kinetic @ kinetic / (2 * model.mass) + model.V(q))


def hamiltonian(model: WorkhorseModel, rule: CompositionRule, s: PhaseState) -> float:
    _check_state(model, rule, s)
    bundle = bundle_at(rule, s.qbar)
    coupling = (s.q - bundle.alpha_val) @ bundle.beta_inv @ s.pbar
    return workhorse_hamiltonian(model, s.q, s.p) + float(coupling)


def _workhorse_rates(
    model: WorkhorseModel, q: np.ndarray, p: np.ndarray, force: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    du = np.asarray(model.du_dq(q), dtype=float)
    velocity = (p - model.u(q)) / model.mass
    # rate of the kinetic momentum p - u; plain p picks up du/dq . qdot
    d_kinetic = -((du - du.T) @ velocity + model.dV_dq(q) + force)
    return velocity, d_kinetic + du @ velocity


def workhorse_field(model: WorkhorseModel, q, p) -> tuple[np.ndarray, np.ndarray]:
    q = as_vector(q, model.dim_i, "q")
    p = as_vector(p, model.dim_i, "p")
    return _workhorse_rates(model, q, p, np.zeros(model.dim_i))


def canonical_field(
    model: WorkhorseModel, rule: CompositionRule, s: PhaseState
) -> FieldEval:
    _check_state(model, rule, s)
    bundle = bundle_at(rule, s.qbar)

    displacement = s.q - bundle.alpha_val
    d_qbar = bundle.beta_inv.T @ displacement
    force = bundle.beta_inv @ s.pbar
    d_q, d_p = _workhorse_rates(model, s.q, s.p, force)

    transport = bundle.dalpha_val.T @ force + np.einsum(
        "l,ilk,i->k", d_qbar, bundle.dbeta_val, force
    )
    # vanishes on the primary constraint surface
    off_surface = np.einsum(
        "j,jlk,l->k",
        bundle.complement @ displacement,
        bundle.dbeta_val,
        bundle.B @ s.pbar,
    )

    field = FieldEval(d_qbar=d_qbar, d_q=d_q, d_pbar=transport - off_surface, d_p=d_p)
    if not np.all(np.isfinite(field.to_vector())):
        raise NonFiniteInput(f"canonical field is not finite at t={s.t}")
    return field


def symplectic_gradient(
    model: WorkhorseModel,
    rule: CompositionRule,
    s: PhaseState,
    step: float = FD_STEP,
) -> FieldEval:
    """``J grad H`` by central differences over all phase coordinates."""
    dim_k, dim_i = s.dim_k, s.dim_i

    def energy(y: np.ndarray) -> float:
        return hamiltonian(model, rule, PhaseState.from_vector(s.t, y, dim_k, dim_i))

    grad = central_difference(energy, s.to_vector(), step)
    g_qbar, g_q, g_pbar, g_p = np.split(grad, np.cumsum([dim_k, dim_i, dim_k]))
    return FieldEval(d_qbar=g_pbar, d_q=g_p, d_pbar=-g_qbar, d_p=-g_q)


def pbar_identify(
    model: WorkhorseModel, rule: CompositionRule, qbar, q, qdot, qddot
) -> PbarIdentification:
    q = as_vector(q, model.dim_i, "q")
    qdot = as_vector(qdot, model.dim_i, "qdot")
    qddot = as_vector(qddot, model.dim_i, "qddot")
    bundle = bundle_at(rule, qbar)

    rhs = -(model.mass * qddot + omega(model, q) @ qdot + model.dV_dq(q))
    return PbarIdentification(
        pbar=bundle.beta_val.T @ rhs,
        out_of_range=bundle.complement @ rhs,
    )


def composite_residual(
    model: WorkhorseModel, rule: CompositionRule, traj: "Trajectory"
) -> ResidualSeries:
    """Fourth-order composite equations evaluated along a sampled trajectory.

    ``qdot`` comes from the momenta, ``qddot`` and the outer time derivative
    from central differences on the (uniform) sample grid. Residuals are
    returned at samples ``2 .. N-3``.
    """
    n = len(traj)
    if n < 5:
        raise TooFewSamples(f"need at least 5 samples, got {n}")
    steps = np.diff(traj.t)
    h = float(steps[0])
    if not np.allclose(steps, h, rtol=1e-8, atol=0.0):
        raise NonUniformGrid(
            f"sample spacing varies between {steps.min():.6e} and {steps.max():.6e}"
        )

    qdot = np.array(
        [(p - model.u(q)) / model.mass for q, p in zip(traj.q, traj.p)]
    )
    qddot = (qdot[2:] - qdot[:-2]) / (2 * h)

    weights = np.zeros((n - 2, rule.dim_k))
    projected = np.zeros((n - 2, rule.dim_k))
    for j, i in enumerate(range(1, n - 1)):
        q = traj.q[i]
        bundle = bundle_at(rule, traj.qbar[i])
        velocity_bar = bundle.beta_inv.T @ (q - bundle.alpha_val)
        euler_lagrange = (
            model.mass * qddot[j] + omega(model, q) @ qdot[i] + model.dV_dq(q)
        )
        weights[j] = bundle.dalpha_val.T @ euler_lagrange + np.einsum(
            "ilk,l,i->k", bundle.dbeta_val, velocity_bar, euler_lagrange
        )
        projected[j] = bundle.beta_val.T @ euler_lagrange

    d_projected = (projected[2:] - projected[:-2]) / (2 * h)
    return ResidualSeries(t=traj.t[2:-2].copy(), values=weights[1:-1] - d_projected)
