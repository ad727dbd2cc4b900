from pathlib import Path

import numpy as np
import pytest

from pycomposite.config import config as app_config
from pycomposite.models.model import (
    CompositionRule,
    PolynomialMatrix,
    WorkhorseModel,
)

SPECS_DIR = Path(__file__).parent.parent / "specs"


def random_workhorse(rng: np.random.Generator, dim_i: int) -> WorkhorseModel:
    """Anharmonic oscillators with a nonlinear vector potential."""
    U = 0.3 * rng.standard_normal((dim_i, dim_i))
    h = rng.uniform(0.5, 2.0, dim_i)
    g = rng.uniform(0.1, 0.3, dim_i)
    s = rng.uniform(0.05, 0.2, dim_i)

    return WorkhorseModel(
        dim_i=dim_i,
        mass=float(rng.uniform(0.5, 2.0)),
        u=lambda q: U @ q + s * np.sin(q),
        du_dq=lambda q: U + np.diag(s * np.cos(q)),
        V=lambda q: float(0.5 * np.sum(h * q**2) + 0.25 * np.sum(g * q**4)),
        dV_dq=lambda q: h * q + g * q**3,
    )


def random_polynomial(
    rng: np.random.Generator, dim_i: int, dim_k: int
) -> PolynomialMatrix:
    """Orthonormal columns plus small degree <= 2 monomials, full rank on |x| <= 1."""
    base, _ = np.linalg.qr(rng.standard_normal((dim_i, dim_k)))
    nested = []
    for i in range(dim_i):
        row = []
        for l in range(dim_k):
            terms = [[float(base[i, l])] + [0] * dim_k]
            for _ in range(2):
                exps = [0] * dim_k
                for _ in range(int(rng.integers(1, 3))):
                    exps[int(rng.integers(dim_k))] += 1
                terms.append([0.05 * float(rng.uniform(-1, 1))] + exps)
            row.append(terms)
        nested.append(row)
    return PolynomialMatrix.from_nested(nested)


def random_rule(
    rng: np.random.Generator, dim_i: int, dim_k: int, constant_beta: bool = False
) -> CompositionRule:
    """Nonlinear ``alpha`` with a polynomial (or constant) ``beta``."""
    A = rng.standard_normal((dim_i, dim_k))
    a = rng.standard_normal(dim_i)
    C = 0.2 * rng.standard_normal((dim_i, dim_k))

    if constant_beta:
        M, _ = np.linalg.qr(rng.standard_normal((dim_i, dim_k)))
        beta = lambda qbar: M.copy()
        dbeta = lambda qbar: np.zeros((dim_i, dim_k, dim_k))
    else:
        poly = random_polynomial(rng, dim_i, dim_k)
        beta, dbeta = poly.value, poly.derivative

    return CompositionRule(
        dim_i=dim_i,
        dim_k=dim_k,
        alpha=lambda qbar: A @ qbar + a + np.sin(C @ qbar),
        beta=beta,
        dalpha=lambda qbar: A + np.cos(C @ qbar)[:, None] * C,
        dbeta=dbeta,
    )


PAIR_DIMENSIONS = [(2, 1), (3, 2), (4, 2), (5, 3), (3, 3)]


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture(params=PAIR_DIMENSIONS, ids=lambda d: f"I{d[0]}K{d[1]}")
def model_and_rule(request, rng) -> tuple[WorkhorseModel, CompositionRule]:
    dim_i, dim_k = request.param
    return random_workhorse(rng, dim_i), random_rule(rng, dim_i, dim_k)


@pytest.fixture(autouse=True)
def isolated_config(tmp_path, monkeypatch):
    """Keep the persisted defaults out of the user's application directory."""
    config_dir = tmp_path / "app"
    monkeypatch.setattr(app_config, "CONFIG_DIR", config_dir)
    monkeypatch.setattr(app_config, "CONFIG_FILE", config_dir / "config.json")
    return config_dir


@pytest.fixture
def specs_dir() -> Path:
    return SPECS_DIR
