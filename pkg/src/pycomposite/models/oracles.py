"""Closed-form solutions of the two- and three-oscillator composite systems.

Two oscillators (I=2, K=1): ``alpha = (qbar_1, qbar_1)``, ``beta = lam (0, 1)^T``.
Three oscillators (I=3, K=2): ``alpha = (qbar_1, qbar_2, 0)``,
``beta = lam [[0, 1], [0, 0], [1, 0]]``. Every workhorse mode is harmonic,
``q = c cos(w t) + c' sin(w t)`` with ``w = sqrt(h / m)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Union

import numpy as np

from .dynamics import PhaseState
from .model import CompositionRule, WorkhorseModel, affine_rule, oscillator_workhorse


class Family(str, Enum):
    TWO_OSC = "two_osc"
    THREE_OSC = "three_osc"


def _check_params(m: float, lam: float, *spring_constants: float) -> None:
    if not m > 0:
        raise ValueError(f"mass must be positive, got {m}")
    if lam == 0:
        raise ValueError("lambda must be non-zero")
    if any(h < 0 for h in spring_constants):
        raise ValueError(f"spring constants must be non-negative: {spring_constants}")


@dataclass(frozen=True)
class TwoOscParams:
    m: float = 1.0
    h1: float = 1.0
    h2: float = 1.0
    lam: float = 1.0

    def __post_init__(self) -> None:
        _check_params(self.m, self.lam, self.h1, self.h2)

    @property
    def omega1(self) -> float:
        return math.sqrt(self.h1 / self.m)

    @property
    def omega2(self) -> float:
        return math.sqrt(self.h2 / self.m)

    @property
    def equal_springs(self) -> bool:
        return math.isclose(self.h1, self.h2, rel_tol=1e-12, abs_tol=0.0)

    def model(self) -> WorkhorseModel:
        return oscillator_workhorse(self.m, [self.h1, self.h2])

    def rule(self) -> CompositionRule:
        return affine_rule([[1.0], [1.0]], [0.0, 0.0], [[0.0], [1.0]], self.lam)


@dataclass(frozen=True)
class TwoOscConstants:
    c1: float = 0.0
    c1p: float = 0.0
    c2: float = 0.0
    c2p: float = 0.0
    cbar: float = 0.0
    cbarp: float = 0.0


@dataclass(frozen=True)
class ThreeOscParams:
    m: float = 1.0
    h: float = 1.0
    lam: float = 1.0

    def __post_init__(self) -> None:
        _check_params(self.m, self.lam, self.h)

    @property
    def omega(self) -> float:
        return math.sqrt(self.h / self.m)

    def model(self) -> WorkhorseModel:
        return oscillator_workhorse(self.m, [self.h, self.h, self.h])

    def rule(self) -> CompositionRule:
        return affine_rule(
            [[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]],
            [0.0, 0.0, 0.0],
            [[0.0, 1.0], [0.0, 0.0], [1.0, 0.0]],
            self.lam,
        )


FamilyParams = Union[TwoOscParams, ThreeOscParams]


def oscillator_state(
    m: float, h: float, c: float, cp: float, t: float
) -> tuple[float, float]:
    """Position and momentum of ``m qddot + h q = 0`` with constants ``c, c'``."""
    w = math.sqrt(h / m)
    q = c * math.cos(w * t) + cp * math.sin(w * t)
    p = m * w * (cp * math.cos(w * t) - c * math.sin(w * t))
    return q, p


def _harmonic(
    w: float, c: float, cp: float, t: float
) -> tuple[float, float, float, float]:
    """q and its first three time derivatives."""
    cos, sin = math.cos(w * t), math.sin(w * t)
    q = c * cos + cp * sin
    dq = w * (cp * cos - c * sin)
    return q, dq, -w * w * q, -w * w * dq


def two_osc_state(
    params: TwoOscParams, consts: TwoOscConstants, t: float
) -> PhaseState:
    m, lam = params.m, params.lam
    w2 = params.omega2
    damping = 1.0 + lam**2 * w2**2
    grow = math.exp(t / lam)

    q1, p1 = oscillator_state(m, params.h1, consts.c1, consts.c1p, t)
    q2_h, p2_h = oscillator_state(m, params.h2, consts.c2, consts.c2p, t)
    cos, sin = math.cos(w2 * t), math.sin(w2 * t)

    qbar1 = (
        consts.cbarp * math.exp(-t / lam)
        - consts.cbar * lam / (2 * m) / damping * grow
        + (
            (consts.c2 - lam * w2 * consts.c2p) * cos
            + (consts.c2p + lam * w2 * consts.c2) * sin
        )
        / damping
    )
    q2 = q2_h - consts.cbar * lam / m / damping * grow
    p2 = p2_h - consts.cbar / damping * grow

    return PhaseState(
        t=t,
        qbar=[qbar1],
        q=[q1, q2],
        pbar=[consts.cbar * grow],
        p=[p1, p2],
    )


def two_osc_match(params: TwoOscParams, c2: float, c2p: float) -> tuple[float, float]:
    """Constants of the first oscillator that keep ``q_1 = qbar_1`` (equal springs)."""
    lw = params.lam * params.omega2
    damping = 1.0 + lw**2
    return (c2 - lw * c2p) / damping, (c2p + lw * c2) / damping


def two_osc_constrained_constants(
    params: TwoOscParams, c2: float, c2p: float
) -> TwoOscConstants:
    c1, c1p = two_osc_match(params, c2, c2p)
    return TwoOscConstants(c1=c1, c1p=c1p, c2=c2, c2p=c2p)


def three_osc_constrained_state(
    params: ThreeOscParams, c1: float, c1p: float, c2: float, c2p: float, t: float
) -> PhaseState:
    m, lam, w = params.m, params.lam, params.omega
    q1, dq1, ddq1, _ = _harmonic(w, c1, c1p, t)
    q2, dq2, ddq2, dddq2 = _harmonic(w, c2, c2p, t)

    q3 = lam * dq1 - lam**2 * ddq2
    dq3 = lam * ddq1 - lam**2 * dddq2

    return PhaseState(
        t=t,
        qbar=[q1 - lam * dq2, q2],
        q=[q1, q2, q3],
        pbar=[0.0, 0.0],
        p=[m * dq1, m * dq2, m * dq3],
    )


def mode_count(family: Family, params: FamilyParams) -> int:
    """Free real parameters of the fully constrained solution family."""
    family = Family(family)
    if family is Family.TWO_OSC:
        return 2 if params.equal_springs else 0
    return 4
