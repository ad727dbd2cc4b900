from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .model import RANK_TOLERANCE, CompositionRule, as_vector, gram_ratio


class RankDeficient(ArithmeticError):
    def __init__(self, ratio: float, qbar: np.ndarray) -> None:
        super().__init__(
            f"beta loses column rank at qbar={np.array2string(qbar, precision=6)}: "
            f"eigenvalue ratio of beta^T beta is {ratio:.3e} "
            f"(tolerance {RANK_TOLERANCE:.0e})"
        )
        self.ratio = ratio
        self.qbar = qbar


@dataclass(frozen=True)
class ProjectionBundle:
    """Composition-rule algebra evaluated at one point ``qbar``."""

    qbar: np.ndarray
    beta_val: np.ndarray
    B: np.ndarray
    beta_inv: np.ndarray
    P: np.ndarray
    alpha_val: np.ndarray
    dalpha_val: np.ndarray
    dbeta_val: np.ndarray

    @property
    def complement(self) -> np.ndarray:
        """``1 - P``, the projector onto the constraint directions."""
        return np.eye(self.P.shape[0]) - self.P

    def identity_errors(self) -> dict[str, float]:
        """Deviations from the Gram-inverse and projector identities."""
        dim_k = self.B.shape[0]
        gram = self.beta_val.T @ self.beta_val
        return {
            "gram_inverse": float(np.max(np.abs(self.B @ gram - np.eye(dim_k)))),
            "left_inverse": float(
                np.max(np.abs(self.beta_inv.T @ self.beta_val - np.eye(dim_k)))
            ),
            "symmetry": float(np.max(np.abs(self.P - self.P.T))),
            "idempotence": float(np.max(np.abs(self.P @ self.P - self.P))),
            "range": float(np.max(np.abs(self.P @ self.beta_val - self.beta_val))),
            "trace": float(abs(np.trace(self.P) - dim_k)),
        }


def bundle_at(rule: CompositionRule, qbar) -> ProjectionBundle:
    qbar = as_vector(qbar, rule.dim_k, "qbar")
    beta_val = np.asarray(rule.beta(qbar), dtype=float).reshape(rule.dim_i, rule.dim_k)

    ratio = gram_ratio(beta_val)
    if not ratio > RANK_TOLERANCE:
        raise RankDeficient(ratio, qbar)

    gram = beta_val.T @ beta_val
    try:
        factor = cho_factor(gram)
    except LinAlgError:
        raise RankDeficient(ratio, qbar)
    B = cho_solve(factor, np.eye(rule.dim_k))
    B = 0.5 * (B + B.T)

    beta_inv = beta_val @ B
    P = beta_inv @ beta_val.T

    return ProjectionBundle(
        qbar=qbar,
        beta_val=beta_val,
        B=B,
        beta_inv=beta_inv,
        P=0.5 * (P + P.T),
        alpha_val=np.asarray(rule.alpha(qbar), dtype=float),
        dalpha_val=np.asarray(rule.dalpha(qbar), dtype=float).reshape(
            rule.dim_i, rule.dim_k
        ),
        dbeta_val=np.asarray(rule.dbeta(qbar), dtype=float).reshape(
            rule.dim_i, rule.dim_k, rule.dim_k
        ),
    )


def qbar_dot(bundle: ProjectionBundle, q) -> np.ndarray:
    q = as_vector(q, bundle.P.shape[0], "q")
    return bundle.beta_inv.T @ (q - bundle.alpha_val)


def projector_derivative(rule: CompositionRule, qbar) -> np.ndarray:
    """``dP[i, j, k] = d P_ij / d qbar_k`` from beta_inv, P and beta'."""
    bundle = bundle_at(rule, qbar)
    Q = bundle.complement
    left = np.einsum("il,aj,alk->ijk", bundle.beta_inv, Q, bundle.dbeta_val)
    right = np.einsum("ia,jl,alk->ijk", Q, bundle.beta_inv, bundle.dbeta_val)
    return left + right
