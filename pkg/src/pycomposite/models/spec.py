"""TOML model specifications.

A spec file carries a ``[workhorse]`` and a ``[composition]`` section plus
optional ``[initial]`` and ``[sweep]`` sections::

    [workhorse]
    mass = 1.0
    spring_constants = [1.0, 1.0]

    [composition]
    alpha_matrix = [[1.0], [1.0]]
    alpha_offset = [0.0, 0.0]
    beta_matrix = [[0.0], [1.0]]
    lambda = 1.0

    [initial]
    source = "oracle"
    family = "two_osc"
    matched = true
    constants = { c2 = 1.0 }
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np
import tomli
import tomli_w

from .dynamics import PhaseState
from .model import (
    CompositionRule,
    PolynomialMatrix,
    WorkhorseModel,
    affine_rule,
    oscillator_workhorse,
    polynomial_rule,
)
from .oracles import (
    Family,
    FamilyParams,
    ThreeOscParams,
    TwoOscConstants,
    TwoOscParams,
    three_osc_constrained_state,
    two_osc_match,
    two_osc_state,
)

TWO_OSC_CONSTANTS = ("c1", "c1p", "c2", "c2p", "cbar", "cbarp")
THREE_OSC_CONSTANTS = ("c1", "c1p", "c2", "c2p")


class SpecError(ValueError):
    pass


@dataclass
class WorkhorseSpec:
    mass: float
    spring_constants: list[float]
    vector_potential: Optional[list[list[float]]] = None

    def build(self) -> WorkhorseModel:
        return oscillator_workhorse(
            self.mass, self.spring_constants, self.vector_potential
        )

    @property
    def has_vector_potential(self) -> bool:
        return self.vector_potential is not None and bool(
            np.any(np.asarray(self.vector_potential, dtype=float))
        )


@dataclass
class CompositionSpec:
    alpha_matrix: list[list[float]]
    alpha_offset: list[float]
    beta_matrix: Optional[list[list[float]]] = None
    beta_polynomials: Optional[list] = None
    lam: float = 1.0

    def build(self) -> CompositionRule:
        if self.beta_polynomials is not None:
            return polynomial_rule(
                self.alpha_matrix,
                self.alpha_offset,
                PolynomialMatrix.from_nested(self.beta_polynomials),
                self.lam,
            )
        return affine_rule(
            self.alpha_matrix, self.alpha_offset, self.beta_matrix, self.lam
        )


@dataclass
class InitialSpec:
    source: str = "explicit"
    qbar: Optional[list[float]] = None
    q: Optional[list[float]] = None
    pbar: Optional[list[float]] = None
    p: Optional[list[float]] = None
    family: Optional[Family] = None
    constants: dict[str, float] = field(default_factory=dict)
    matched: bool = False
    time: float = 0.0


@dataclass
class SweepSpec:
    lambdas: list[float] = field(default_factory=lambda: [0.5, 1.0, 2.0])
    epsilons: list[float] = field(default_factory=lambda: [1e-8])
    background: float = 1.0


@dataclass
class ModelSpec:
    workhorse: WorkhorseSpec
    composition: CompositionSpec
    initial: Optional[InitialSpec] = None
    sweep: Optional[SweepSpec] = None

    def build(self) -> tuple[WorkhorseModel, CompositionRule]:
        try:
            model = self.workhorse.build()
            rule = self.composition.build()
        except (ValueError, IndexError, TypeError) as e:
            raise SpecError(f"invalid model: {e}") from e
        if model.dim_i != rule.dim_i:
            raise SpecError(
                f"workhorse has {model.dim_i} coordinates, "
                f"composition rule {rule.dim_i}"
            )
        return model, rule

    def family_params(self) -> Optional[tuple[Family, FamilyParams]]:
        """The oscillator family this spec describes, if any."""
        if self.workhorse.has_vector_potential or self.composition.beta_matrix is None:
            return None

        alpha = np.asarray(self.composition.alpha_matrix, dtype=float)
        offset = np.asarray(self.composition.alpha_offset, dtype=float)
        beta = np.asarray(self.composition.beta_matrix, dtype=float)
        springs = [float(h) for h in self.workhorse.spring_constants]
        m, lam = float(self.workhorse.mass), float(self.composition.lam)
        if np.any(offset) or lam == 0 or not m > 0 or any(h < 0 for h in springs):
            return None

        def matches(a, b) -> bool:
            return np.array_equal(alpha, a) and np.array_equal(beta, b)

        if len(springs) == 2 and matches([[1.0], [1.0]], [[0.0], [1.0]]):
            h1, h2 = springs
            return Family.TWO_OSC, TwoOscParams(m=m, h1=h1, h2=h2, lam=lam)
        if (
            len(springs) == 3
            and len(set(springs)) == 1
            and matches(
                [[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]],
                [[0.0, 1.0], [0.0, 0.0], [1.0, 0.0]],
            )
        ):
            return Family.THREE_OSC, ThreeOscParams(m=m, h=springs[0], lam=lam)
        return None

    def initial_state(self) -> PhaseState:
        if self.initial is None:
            raise SpecError("spec has no [initial] section")
        init = self.initial

        if init.source == "explicit":
            names = ("qbar", "q", "pbar", "p")
            missing = [n for n in names if getattr(init, n) is None]
            if missing:
                raise SpecError(
                    f"explicit initial state is missing {', '.join(missing)}"
                )
            try:
                return PhaseState(init.time, init.qbar, init.q, init.pbar, init.p)
            except ValueError as e:
                raise SpecError(f"invalid initial state: {e}") from e

        known = self.family_params()
        if known is None or known[0] is not init.family:
            raise SpecError(
                f"oracle initial state '{init.family.value}' does not match the model"
            )
        params = known[1]

        if init.family is Family.TWO_OSC:
            consts = TwoOscConstants(**init.constants)
            if init.matched:
                c1, c1p = two_osc_match(params, consts.c2, consts.c2p)
                consts = TwoOscConstants(
                    c1, c1p, consts.c2, consts.c2p, consts.cbar, consts.cbarp
                )
            return two_osc_state(params, consts, init.time)

        c = {name: init.constants.get(name, 0.0) for name in THREE_OSC_CONSTANTS}
        return three_osc_constrained_state(params, t=init.time, **c)

    def to_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {
            "workhorse": _drop_none(
                {
                    "mass": self.workhorse.mass,
                    "spring_constants": self.workhorse.spring_constants,
                    "vector_potential": self.workhorse.vector_potential,
                }
            ),
            "composition": _drop_none(
                {
                    "alpha_matrix": self.composition.alpha_matrix,
                    "alpha_offset": self.composition.alpha_offset,
                    "beta_matrix": self.composition.beta_matrix,
                    "beta_polynomials": self.composition.beta_polynomials,
                    "lambda": self.composition.lam,
                }
            ),
        }
        if self.initial is not None:
            init = self.initial
            data["initial"] = _drop_none(
                {
                    "source": init.source,
                    "time": init.time,
                    "qbar": init.qbar,
                    "q": init.q,
                    "pbar": init.pbar,
                    "p": init.p,
                    "family": init.family.value if init.family else None,
                    "matched": init.matched if init.family else None,
                    "constants": dict(init.constants) if init.family else None,
                }
            )
        if self.sweep is not None:
            data["sweep"] = {
                "lambdas": self.sweep.lambdas,
                "epsilons": self.sweep.epsilons,
                "background": self.sweep.background,
            }
        return data


def _drop_none(table: dict[str, Any]) -> dict[str, Any]:
    return {k: v for k, v in table.items() if v is not None}


def _floats(value, name: str) -> list[float]:
    if not isinstance(value, list) or not all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
    ):
        raise SpecError(f"{name} must be a list of numbers")
    return [float(v) for v in value]


def _matrix(value, name: str) -> list[list[float]]:
    if not isinstance(value, list) or not value:
        raise SpecError(f"{name} must be a non-empty list of rows")
    rows = [_floats(row, f"{name} row {i + 1}") for i, row in enumerate(value)]
    if len({len(row) for row in rows}) != 1:
        raise SpecError(f"{name} rows must have equal length")
    return rows


def _number(value, name: str) -> float:
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise SpecError(f"{name} must be a number")
    return float(value)


def _table(data: dict, name: str, required: bool = True) -> Optional[dict]:
    table = data.get(name)
    if table is None:
        if required:
            raise SpecError(f"missing [{name}] section")
        return None
    if not isinstance(table, dict):
        raise SpecError(f"[{name}] must be a table")
    return table


def _require(table: dict, section: str, key: str):
    if key not in table:
        raise SpecError(f"[{section}] is missing '{key}'")
    return table[key]


def _parse_workhorse(table: dict) -> WorkhorseSpec:
    potential = table.get("vector_potential")
    return WorkhorseSpec(
        mass=_number(_require(table, "workhorse", "mass"), "mass"),
        spring_constants=_floats(
            _require(table, "workhorse", "spring_constants"), "spring_constants"
        ),
        vector_potential=None
        if potential is None
        else _matrix(potential, "vector_potential"),
    )


def _parse_composition(table: dict) -> CompositionSpec:
    beta, polynomials = table.get("beta_matrix"), table.get("beta_polynomials")
    if (beta is None) == (polynomials is None):
        raise SpecError(
            "[composition] needs exactly one of beta_matrix, beta_polynomials"
        )
    if polynomials is not None and not isinstance(polynomials, list):
        raise SpecError("beta_polynomials must be a nested list of monomials")

    return CompositionSpec(
        alpha_matrix=_matrix(
            _require(table, "composition", "alpha_matrix"), "alpha_matrix"
        ),
        alpha_offset=_floats(
            _require(table, "composition", "alpha_offset"), "alpha_offset"
        ),
        beta_matrix=None if beta is None else _matrix(beta, "beta_matrix"),
        beta_polynomials=polynomials,
        lam=_number(table.get("lambda", 1.0), "lambda"),
    )


def _parse_initial(table: dict) -> InitialSpec:
    source = table.get("source", "explicit")
    time = _number(table.get("time", 0.0), "time")

    if source == "explicit":
        return InitialSpec(
            source=source,
            time=time,
            **{
                name: _floats(table[name], name)
                for name in ("qbar", "q", "pbar", "p")
                if name in table
            },
        )
    if source != "oracle":
        raise SpecError(f"unknown initial source '{source}', use explicit or oracle")

    name = _require(table, "initial", "family")
    try:
        family = Family(name)
    except ValueError:
        raise SpecError(f"unknown family '{name}', use two_osc or three_osc")

    allowed = TWO_OSC_CONSTANTS if family is Family.TWO_OSC else THREE_OSC_CONSTANTS
    constants = table.get("constants", {})
    if not isinstance(constants, dict):
        raise SpecError("[initial] constants must be a table")
    unknown = sorted(set(constants) - set(allowed))
    if unknown:
        raise SpecError(f"unknown {family.value} constants: {', '.join(unknown)}")

    return InitialSpec(
        source=source,
        time=time,
        family=family,
        constants={k: _number(v, k) for k, v in constants.items()},
        matched=bool(table.get("matched", False)),
    )


def _parse_sweep(table: dict) -> SweepSpec:
    defaults = SweepSpec()
    sweep = SweepSpec(
        lambdas=_floats(table.get("lambdas", defaults.lambdas), "lambdas"),
        epsilons=_floats(table.get("epsilons", defaults.epsilons), "epsilons"),
        background=_number(table.get("background", defaults.background), "background"),
    )
    if not sweep.lambdas or any(lam == 0 for lam in sweep.lambdas):
        raise SpecError("sweep lambdas must be a non-empty list of non-zero values")
    if not sweep.epsilons:
        raise SpecError("sweep epsilons must not be empty")
    return sweep


def parse_spec(data: dict) -> ModelSpec:
    initial = _table(data, "initial", required=False)
    sweep = _table(data, "sweep", required=False)
    return ModelSpec(
        workhorse=_parse_workhorse(_table(data, "workhorse")),
        composition=_parse_composition(_table(data, "composition")),
        initial=None if initial is None else _parse_initial(initial),
        sweep=None if sweep is None else _parse_sweep(sweep),
    )


def load_spec(path: Union[Path, str]) -> ModelSpec:
    try:
        with open(path, "rb") as f:
            data = tomli.load(f)
    except FileNotFoundError:
        raise SpecError(f"spec file '{path}' does not exist")
    except tomli.TOMLDecodeError as e:
        raise SpecError(f"could not parse '{path}': {e}") from e
    return parse_spec(data)


def dump_spec(spec: ModelSpec, path: Union[Path, str]) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        tomli_w.dump(spec.to_dict(), f)
