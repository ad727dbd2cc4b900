"""Constraint hierarchy of the composite theory.

Primary constraints ``(1 - P)(q - alpha) = 0`` keep ``q`` no richer than
``qbardot``; the secondary constraints are their time derivatives along the
flow; ``pbar = 0`` closes the chain and bounds the Hamiltonian from below.
General tertiary and later constraints are not generated symbolically:
preservation is monitored with :func:`drift_report`, and the two oscillator
families carry their analytic chains in :func:`example_chain_residual`.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .dynamics import PhaseState, canonical_field, hamiltonian
from .model import CompositionRule, DimensionMismatch, WorkhorseModel, as_vector
from .oracles import Family, FamilyParams, ThreeOscParams, TwoOscParams
from .projection import bundle_at, qbar_dot

if TYPE_CHECKING:
    from .trajectory import Trajectory


@dataclass(frozen=True)
class ConstraintReport:
    """Per-sample constraint norms (a single state gives length-one series)."""

    primary_norm: np.ndarray
    secondary_norm: np.ndarray
    pbar_norm: np.ndarray

    def __post_init__(self) -> None:
        for name in ("primary_norm", "secondary_norm", "pbar_norm"):
            object.__setattr__(
                self, name, np.asarray(getattr(self, name), dtype=float).reshape(-1)
            )

    @property
    def max_primary(self) -> float:
        return float(self.primary_norm.max(initial=0.0))

    @property
    def max_secondary(self) -> float:
        return float(self.secondary_norm.max(initial=0.0))

    @property
    def max_pbar(self) -> float:
        return float(self.pbar_norm.max(initial=0.0))

    def summary(self) -> dict[str, float]:
        return {
            "primary_norm": self.max_primary,
            "secondary_norm": self.max_secondary,
            "pbar_norm": self.max_pbar,
        }


def primary_residual(rule: CompositionRule, qbar, q) -> np.ndarray:
    q = as_vector(q, rule.dim_i, "q")
    bundle = bundle_at(rule, qbar)
    return bundle.complement @ (q - bundle.alpha_val)


def secondary_residual(
    model: WorkhorseModel, rule: CompositionRule, s: PhaseState
) -> np.ndarray:
    q = as_vector(s.q, model.dim_i, "q")
    bundle = bundle_at(rule, s.qbar)
    velocity = (s.p - model.u(q)) / model.mass
    velocity_bar = qbar_dot(bundle, q)
    composed = (
        velocity
        - bundle.dalpha_val @ velocity_bar
        - np.einsum("jkl,k,l->j", bundle.dbeta_val, velocity_bar, velocity_bar)
    )
    return bundle.complement @ composed


def pbar_residual(s: PhaseState) -> float:
    return float(np.linalg.norm(s.pbar))


def project_initial(
    rule: CompositionRule, raw: PhaseState, zero_pbar: bool = False
) -> PhaseState:
    """Closest state on the primary surface at fixed ``qbar``; ``p`` is untouched."""
    bundle = bundle_at(rule, raw.qbar)
    q = bundle.alpha_val + bundle.P @ (raw.q - bundle.alpha_val)
    pbar = np.zeros_like(raw.pbar) if zero_pbar else raw.pbar
    return dataclasses.replace(raw, q=q, pbar=pbar)


def state_report(
    model: WorkhorseModel, rule: CompositionRule, s: PhaseState
) -> ConstraintReport:
    return ConstraintReport(
        primary_norm=[np.linalg.norm(primary_residual(rule, s.qbar, s.q))],
        secondary_norm=[np.linalg.norm(secondary_residual(model, rule, s))],
        pbar_norm=[pbar_residual(s)],
    )


def drift_report(
    model: WorkhorseModel, rule: CompositionRule, traj: "Trajectory"
) -> ConstraintReport:
    if len(traj) == 0:
        raise ValueError("drift report needs at least one sample")

    primary, secondary, pbar = [], [], []
    for s in traj.samples:
        primary.append(np.linalg.norm(primary_residual(rule, s.qbar, s.q)))
        secondary.append(np.linalg.norm(secondary_residual(model, rule, s)))
        pbar.append(pbar_residual(s))

    return ConstraintReport(primary, secondary, pbar)


def energy_series(
    model: WorkhorseModel, rule: CompositionRule, traj: "Trajectory"
) -> np.ndarray:
    return np.array([hamiltonian(model, rule, s) for s in traj.samples])


def example_chain_residual(
    family: Family, params: FamilyParams, s: PhaseState
) -> np.ndarray:
    """Stacked residuals of a family's complete analytic constraint chain."""
    family = Family(family)

    if family is Family.TWO_OSC:
        if not isinstance(params, TwoOscParams) or (s.dim_i, s.dim_k) != (2, 1):
            raise DimensionMismatch("two_osc chain needs TwoOscParams and I=2, K=1")
        m, lam, h1, h2 = params.m, params.lam, params.h1, params.h2
        (qbar1,), (q1, q2), (pbar1,), (p1, p2) = s.qbar, s.q, s.pbar, s.p
        return np.array(
            [
                q1 - qbar1,
                p1 - (m / lam) * (q2 - q1),
                p2 - p1 + lam * h1 * q1,
                pbar1 - lam * (h1 - h2) * q2,
            ]
        )

    if not isinstance(params, ThreeOscParams) or (s.dim_i, s.dim_k) != (3, 2):
        raise DimensionMismatch("three_osc chain needs ThreeOscParams and I=3, K=2")
    m, lam, h = params.m, params.lam, params.h
    qbar1, qbar2 = s.qbar
    q1, q2, q3 = s.q
    pbar1, pbar2 = s.pbar
    p1, p2, p3 = s.p
    return np.array(
        [
            q2 - qbar2,
            p2 - (m / lam) * (q1 - qbar1),
            p1 - (m / lam) * q3 + lam * h * qbar2,
            p3 + lam * h * qbar1,
            pbar1,
            pbar2,
        ]
    )


def _basis_states(dim_k: int, dim_i: int) -> list[PhaseState]:
    n = 2 * (dim_k + dim_i)
    return [
        PhaseState.from_vector(0.0, y, dim_k, dim_i)
        for y in np.vstack([np.zeros(n), np.eye(n)])
    ]


def linear_field_matrix(model: WorkhorseModel, rule: CompositionRule) -> np.ndarray:
    """Matrix of the canonical field for systems linear in the phase variables."""
    zero, *basis = _basis_states(rule.dim_k, rule.dim_i)
    offset = canonical_field(model, rule, zero).to_vector()
    return np.column_stack(
        [canonical_field(model, rule, s).to_vector() - offset for s in basis]
    )


def chain_matrix(family: Family, params: FamilyParams) -> np.ndarray:
    """Rows of the (linear) analytic constraint chain as a matrix."""
    dims = (1, 2) if Family(family) is Family.TWO_OSC else (2, 3)
    zero, *basis = _basis_states(*dims)
    offset = example_chain_residual(family, params, zero)
    return np.column_stack(
        [example_chain_residual(family, params, s) - offset for s in basis]
    )


def constraint_closure_nullity(model: WorkhorseModel, rule: CompositionRule) -> int:
    """Dimension of the largest flow-invariant subspace on the primary surface.

    Valid for linear systems: stacks ``C A^j`` for ``j < n`` where ``C`` maps
    a phase vector to its primary residual and ``A`` is the field matrix.
    """
    zero, *basis = _basis_states(rule.dim_k, rule.dim_i)
    offset = primary_residual(rule, zero.qbar, zero.q)
    C = np.column_stack(
        [primary_residual(rule, s.qbar, s.q) - offset for s in basis]
    )
    A = linear_field_matrix(model, rule)

    n = A.shape[0]
    blocks = [C]
    for _ in range(n - 1):
        blocks.append(blocks[-1] @ A)

    return n - int(np.linalg.matrix_rank(np.vstack(blocks)))
