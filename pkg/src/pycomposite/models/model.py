"""Workhorse theory and composition rule.

The workhorse is a mechanical system with Lagrangian
``L = m/2 qdot.qdot + qdot.u(q) - V(q)``; the composition rule expresses its
variables through more fundamental ones, ``q = alpha(qbar) + beta(qbar) qbardot``.
Both carry analytic derivatives. Finite differences only appear in
:func:`validate`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .numeric import central_difference, relative_error

RANK_TOLERANCE = 1e-10
DERIVATIVE_TOLERANCE = 1e-5

VectorMap = Callable[[np.ndarray], np.ndarray]


class DimensionMismatch(ValueError):
    pass


class NonFiniteInput(ValueError):
    pass


def as_vector(x, dim: int, name: str) -> np.ndarray:
    x = np.asarray(x, dtype=float).reshape(-1) if np.ndim(x) else np.array([x], float)
    if x.shape != (dim,):
        raise DimensionMismatch(f"{name} must have {dim} components, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise NonFiniteInput(f"{name} contains non-finite entries: {x}")
    return x


@dataclass(frozen=True)
class WorkhorseModel:
    """``L = m/2 qdot^2 + qdot . u(q) - V(q)``; callers keep V bounded below."""

    dim_i: int
    mass: float
    u: VectorMap
    du_dq: VectorMap
    V: Callable[[np.ndarray], float]
    dV_dq: VectorMap

    def __post_init__(self) -> None:
        if self.dim_i < 1:
            raise DimensionMismatch(f"dim_i must be positive, got {self.dim_i}")
        if not self.mass > 0:
            raise ValueError(f"mass must be positive, got {self.mass}")


@dataclass(frozen=True)
class CompositionRule:
    dim_i: int
    dim_k: int
    alpha: VectorMap
    beta: VectorMap
    dalpha: VectorMap
    dbeta: VectorMap
    lambda_hint: Optional[float] = None

    def __post_init__(self) -> None:
        if self.dim_i < 1 or self.dim_k < 1:
            raise DimensionMismatch(
                f"dimensions must be positive, got I={self.dim_i}, K={self.dim_k}"
            )
        if self.dim_k > self.dim_i:
            raise DimensionMismatch(
                f"composition rule needs K <= I, got I={self.dim_i}, K={self.dim_k}"
            )


@dataclass(frozen=True)
class PolynomialMatrix:
    """Matrix whose entries are polynomials in ``x``.

    Term ``t`` contributes ``coefficients[t] * prod(x ** exponents[t])`` to
    entry ``(rows[t], cols[t])``.
    """

    shape: tuple[int, int]
    coefficients: np.ndarray
    exponents: np.ndarray
    rows: np.ndarray
    cols: np.ndarray

    @classmethod
    def from_nested(cls, nested: Sequence[Sequence[Sequence[Sequence[float]]]]):
        """Build from ``nested[i][l] = [[coef, e_1, ..., e_K], ...]``."""
        n_rows = len(nested)
        n_cols = len(nested[0]) if n_rows else 0
        coefficients, exponents, rows, cols = [], [], [], []

        for i, row in enumerate(nested):
            if len(row) != n_cols:
                raise DimensionMismatch(f"row {i} has {len(row)} entries, not {n_cols}")
            for l, entry in enumerate(row):
                for term in entry:
                    coefficients.append(float(term[0]))
                    exponents.append([int(e) for e in term[1:]])
                    rows.append(i)
                    cols.append(l)

        n_vars = len(exponents[0]) if exponents else n_cols
        if any(len(e) != n_vars for e in exponents) or any(
            e < 0 for exps in exponents for e in exps
        ):
            raise DimensionMismatch("monomial exponents must be non-negative, length K")

        return cls(
            shape=(n_rows, n_cols),
            coefficients=np.array(coefficients, dtype=float),
            exponents=np.array(exponents, dtype=int).reshape(-1, n_vars),
            rows=np.array(rows, dtype=int),
            cols=np.array(cols, dtype=int),
        )

    def to_nested(self) -> list[list[list[list[float]]]]:
        n_rows, n_cols = self.shape
        nested: list = [[[] for _ in range(n_cols)] for _ in range(n_rows)]
        for coef, exps, i, l in zip(
            self.coefficients, self.exponents, self.rows, self.cols
        ):
            nested[i][l].append([float(coef), *(int(e) for e in exps)])
        return nested

    def value(self, x: np.ndarray) -> np.ndarray:
        monomials = self.coefficients * np.prod(x**self.exponents, axis=1)
        out = np.zeros(self.shape)
        np.add.at(out, (self.rows, self.cols), monomials)
        return out

    def derivative(self, x: np.ndarray) -> np.ndarray:
        out = np.zeros(self.shape + (x.size,))
        for k in range(x.size):
            exps = self.exponents.copy()
            factor = self.coefficients * exps[:, k]
            exps[:, k] = np.maximum(exps[:, k] - 1, 0)
            monomials = factor * np.prod(x**exps, axis=1)
            np.add.at(out[..., k], (self.rows, self.cols), monomials)
        return out


def oscillator_workhorse(
    mass: float,
    spring_constants: Sequence[float],
    vector_potential: Optional[np.ndarray] = None,
) -> WorkhorseModel:
    """Independent oscillators ``V = 1/2 sum h_i q_i^2`` with optional ``u = U q``."""
    h = np.asarray(spring_constants, dtype=float)
    dim_i = h.size
    U = (
        np.zeros((dim_i, dim_i))
        if vector_potential is None
        else np.asarray(vector_potential, dtype=float)
    )
    if U.shape != (dim_i, dim_i):
        raise DimensionMismatch(f"vector_potential must be {dim_i}x{dim_i}")

    return WorkhorseModel(
        dim_i=dim_i,
        mass=float(mass),
        u=lambda q: U @ q,
        du_dq=lambda q: U.copy(),
        V=lambda q: 0.5 * float(np.dot(h * q, q)),
        dV_dq=lambda q: h * q,
    )


def affine_rule(
    alpha_matrix: np.ndarray,
    alpha_offset: np.ndarray,
    beta_matrix: np.ndarray,
    lam: float = 1.0,
) -> CompositionRule:
    """``alpha = A qbar + a`` with constant ``beta = lam * M``."""
    A, a = _affine_parts(alpha_matrix, alpha_offset)
    M = lam * np.asarray(beta_matrix, dtype=float)
    if M.shape != A.shape:
        raise DimensionMismatch(f"beta_matrix must be {A.shape}, got {M.shape}")
    dim_i, dim_k = A.shape

    return CompositionRule(
        dim_i=dim_i,
        dim_k=dim_k,
        alpha=lambda qbar: A @ qbar + a,
        beta=lambda qbar: M.copy(),
        dalpha=lambda qbar: A.copy(),
        dbeta=lambda qbar: np.zeros((dim_i, dim_k, dim_k)),
        lambda_hint=float(lam),
    )


def polynomial_rule(
    alpha_matrix: np.ndarray,
    alpha_offset: np.ndarray,
    beta_polynomial: PolynomialMatrix,
    lam: float = 1.0,
) -> CompositionRule:
    """``alpha = A qbar + a`` with ``beta = lam * M(qbar)`` polynomial per entry."""
    A, a = _affine_parts(alpha_matrix, alpha_offset)
    if beta_polynomial.shape != A.shape:
        raise DimensionMismatch(
            f"beta_polynomials must be {A.shape}, got {beta_polynomial.shape}"
        )
    dim_i, dim_k = A.shape
    if beta_polynomial.exponents.shape[1] != dim_k:
        raise DimensionMismatch(
            f"beta monomials need {dim_k} exponents, "
            f"got {beta_polynomial.exponents.shape[1]}"
        )

    return CompositionRule(
        dim_i=dim_i,
        dim_k=dim_k,
        alpha=lambda qbar: A @ qbar + a,
        beta=lambda qbar: lam * beta_polynomial.value(qbar),
        dalpha=lambda qbar: A.copy(),
        dbeta=lambda qbar: lam * beta_polynomial.derivative(qbar),
        lambda_hint=float(lam),
    )


def _affine_parts(alpha_matrix, alpha_offset):
    A = np.atleast_2d(np.asarray(alpha_matrix, dtype=float))
    a = np.asarray(alpha_offset, dtype=float).reshape(-1)
    if a.shape != (A.shape[0],):
        raise DimensionMismatch(f"alpha_offset must have {A.shape[0]} components")
    return A, a


def workhorse_lagrangian(model: WorkhorseModel, q, qdot) -> float:
    q = as_vector(q, model.dim_i, "q")
    qdot = as_vector(qdot, model.dim_i, "qdot")
    return float(
        0.5 * model.mass * qdot @ qdot + qdot @ model.u(q) - model.V(q)
    )


def compose(rule: CompositionRule, qbar, qbardot) -> np.ndarray:
    qbar = as_vector(qbar, rule.dim_k, "qbar")
    qbardot = as_vector(qbardot, rule.dim_k, "qbardot")
    return rule.alpha(qbar) + rule.beta(qbar) @ qbardot


def composed_velocity(rule: CompositionRule, qbar, qbardot, qbarddot) -> np.ndarray:
    """Time derivative of :func:`compose` along a path (chain rule)."""
    qbar = as_vector(qbar, rule.dim_k, "qbar")
    qbardot = as_vector(qbardot, rule.dim_k, "qbardot")
    qbarddot = as_vector(qbarddot, rule.dim_k, "qbarddot")
    return (
        rule.dalpha(qbar) @ qbardot
        + np.einsum("ilk,l,k->i", rule.dbeta(qbar), qbardot, qbardot)
        + rule.beta(qbar) @ qbarddot
    )


def composite_lagrangian(
    model: WorkhorseModel, rule: CompositionRule, qbar, qbardot, qbarddot
) -> float:
    _check_pair(model, rule)
    q = compose(rule, qbar, qbardot)
    qdot = composed_velocity(rule, qbar, qbardot, qbarddot)
    return workhorse_lagrangian(model, q, qdot)


def omega(model: WorkhorseModel, q) -> np.ndarray:
    q = as_vector(q, model.dim_i, "q")
    du = np.asarray(model.du_dq(q), dtype=float)
    return du - du.T


def conjugate_momentum(model: WorkhorseModel, q, qdot) -> np.ndarray:
    q = as_vector(q, model.dim_i, "q")
    qdot = as_vector(qdot, model.dim_i, "qdot")
    return model.mass * qdot + model.u(q)


def gram_ratio(beta_val: np.ndarray) -> float:
    """Smallest over largest eigenvalue of ``beta^T beta``."""
    eigenvalues = np.linalg.eigvalsh(beta_val.T @ beta_val)
    if eigenvalues[-1] <= 0:
        return 0.0
    return float(eigenvalues[0] / eigenvalues[-1])


def _check_pair(model: WorkhorseModel, rule: CompositionRule) -> None:
    if model.dim_i != rule.dim_i:
        raise DimensionMismatch(
            f"workhorse has I={model.dim_i} but composition rule has I={rule.dim_i}"
        )


@dataclass
class CheckResult:
    name: str
    passed: bool
    worst: float
    tolerance: float
    detail: str = ""


@dataclass
class ValidationReport:
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def failures(self) -> list[CheckResult]:
        return [check for check in self.checks if not check.passed]


@dataclass(frozen=True)
class SamplePoints:
    qbar: np.ndarray
    q: np.ndarray


def sample_points(
    rng: np.random.Generator,
    dim_i: int,
    dim_k: int,
    n: int = 100,
    half_width: float = 1.0,
) -> SamplePoints:
    return SamplePoints(
        qbar=rng.uniform(-half_width, half_width, size=(n, dim_k)),
        q=rng.uniform(-half_width, half_width, size=(n, dim_i)),
    )


def validate(
    model: WorkhorseModel, rule: CompositionRule, points: SamplePoints
) -> ValidationReport:
    """Finite-difference and rank checks; failures are reported, not raised."""
    _check_pair(model, rule)
    report = ValidationReport()

    report.checks.append(
        _derivative_check("du_dq", model.u, model.du_dq, points.q)
    )
    report.checks.append(
        _derivative_check("dV_dq", model.V, model.dV_dq, points.q)
    )
    report.checks.append(
        _derivative_check("dalpha", rule.alpha, rule.dalpha, points.qbar)
    )
    report.checks.append(
        _derivative_check("dbeta", rule.beta, rule.dbeta, points.qbar)
    )
    report.checks.append(_rank_check(rule, points.qbar))

    return report


def _derivative_check(
    name: str, fn: Callable, dfn: Callable, points: np.ndarray
) -> CheckResult:
    worst = 0.0
    try:
        for x in points:
            analytic = np.asarray(dfn(x), dtype=float)
            numeric = central_difference(fn, x)
            numeric = numeric.reshape(analytic.shape)
            worst = max(worst, relative_error(analytic, numeric))
    except Exception as e:
        return CheckResult(name, False, float("inf"), DERIVATIVE_TOLERANCE, str(e))

    passed = worst <= DERIVATIVE_TOLERANCE
    return CheckResult(name, passed, worst, DERIVATIVE_TOLERANCE)


def _rank_check(rule: CompositionRule, points: np.ndarray) -> CheckResult:
    worst = np.inf
    for qbar in points:
        worst = min(worst, gram_ratio(np.asarray(rule.beta(qbar), dtype=float)))

    passed = worst > RANK_TOLERANCE
    detail = "" if passed else f"rank deficient beta (ratio {worst:.3e})"
    return CheckResult("rank", passed, float(worst), RANK_TOLERANCE, detail)
