"""Finite local-causal measures: a source matrix plus one positive apparatus
kernel per side.

The induced joint measure on S1 × S2 × M1 × M2 factorizes as

    P(s1, s2, λ1, λ2) = PS[s1, s2] * K1[s1, λ1] * K2[s2, λ2]

and all structure lives in that split. Kernel rows are positive measures, not
necessarily normalized; their row masses p1, p2 decide triviality. A measure
is trivial when p1(s1) * p2(s2) = 1 across the support of the source, and
trivial measures cannot push the CHSH functional past 2. Row-stochastic local
transport leaves the row masses untouched, which is why it preserves
triviality, and why permutations (stochastic with stochastic inverses)
preserve nontriviality as well.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .circle import TWO_PI, spin_values
from .models import TSIRELSON_SETTINGS

#: Source entries above this mass threshold count as support.
SUPPORT_EPS = 1e-12

#: Default tolerance for the triviality classification.
TRIVIAL_TOL = 1e-9


def _readonly(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class DiscreteLCMeasure:
    """Source matrix PS over S1×S2 and per-side kernels K1, K2 over S→M."""

    PS: np.ndarray
    K1: np.ndarray
    K2: np.ndarray

    def __post_init__(self) -> None:
        PS = _readonly(self.PS)
        K1 = _readonly(self.K1)
        K2 = _readonly(self.K2)
        for name, arr in (("PS", PS), ("K1", K1), ("K2", K2)):
            if arr.ndim != 2:
                raise ValueError(f"{name} must be a matrix, got shape {arr.shape}")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} must be finite")
            if np.any(arr < 0.0):
                raise ValueError(f"{name} must be entrywise nonnegative")
        if K1.shape[0] != PS.shape[0] or K2.shape[0] != PS.shape[1]:
            raise ValueError(
                f"kernel rows must match the source sides: PS {PS.shape}, "
                f"K1 {K1.shape}, K2 {K2.shape}"
            )
        total = float(PS.sum())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"source matrix must sum to 1, got {total!r}")
        object.__setattr__(self, "PS", PS)
        object.__setattr__(self, "K1", K1)
        object.__setattr__(self, "K2", K2)

    @property
    def n1(self) -> int:
        return self.PS.shape[0]

    @property
    def n2(self) -> int:
        return self.PS.shape[1]

    @property
    def m1(self) -> int:
        return self.K1.shape[1]

    @property
    def m2(self) -> int:
        return self.K2.shape[1]

    def support(self, threshold: float = SUPPORT_EPS) -> np.ndarray:
        return self.PS > threshold


@dataclass(frozen=True)
class TrivialityVerdict:
    """Outcome of the triviality test.

    c is the common row mass of side 1 when it is constant over the support
    (side 2 then carries 1/c); None when triviality holds pointwise without a
    constant split.
    """

    trivial: bool
    c: float | None
    max_deviation: float


def local_mass_functions(m: DiscreteLCMeasure) -> tuple[np.ndarray, np.ndarray]:
    """Row masses of the kernels: p1(s1) = Σ_λ K1[s1, λ], same on side 2."""
    return m.K1.sum(axis=1), m.K2.sum(axis=1)


def is_trivial(
    m: DiscreteLCMeasure,
    tol: float = TRIVIAL_TOL,
    support_threshold: float = SUPPORT_EPS,
) -> TrivialityVerdict:
    """Check p1(s1) * p2(s2) = 1 on the support of the source."""
    p1, p2 = local_mass_functions(m)
    supp = m.support(support_threshold)
    if supp.any():
        max_dev = float(np.abs(np.outer(p1, p2) - 1.0)[supp].max())
    else:
        max_dev = 0.0
    trivial = max_dev <= tol
    c = None
    if trivial:
        rows = supp.any(axis=1)
        vals = p1[rows]
        weights = m.PS.sum(axis=1)[rows]
        if vals.size and float(vals.max() - vals.min()) <= tol * max(1.0, float(vals.max())):
            c = float(np.average(vals, weights=weights)) if weights.sum() > 0 else float(vals.mean())
    return TrivialityVerdict(trivial=trivial, c=c, max_deviation=max_dev)


def rescale(m: DiscreteLCMeasure, q1, q2, tol: float = 1e-9) -> DiscreteLCMeasure:
    """Move positive factors q1 ⊗ q2 from the kernels into the source.

    The induced measure on the full space is unchanged entrywise, but a
    non-constant q1 ⊗ q2 on the support flips a trivial measure to nontrivial.
    """
    q1 = np.asarray(q1, dtype=float)
    q2 = np.asarray(q2, dtype=float)
    if q1.shape != (m.n1,) or q2.shape != (m.n2,):
        raise ValueError("rescaling vectors must match the source sides")
    if not (np.all(np.isfinite(q1)) and np.all(np.isfinite(q2))):
        raise ValueError("rescaling vectors must be finite")
    if np.any(q1 <= 0.0) or np.any(q2 <= 0.0):
        raise ValueError("rescaling vectors must be strictly positive")
    mass = float(q1 @ m.PS @ q2)
    if abs(mass - 1.0) > tol:
        raise ValueError(f"rescaled source must have unit mass, got {mass!r}")
    return DiscreteLCMeasure(
        PS=m.PS * np.outer(q1, q2),
        K1=m.K1 / q1[:, None],
        K2=m.K2 / q2[:, None],
    )


@dataclass(frozen=True)
class LocalMarkovOperator:
    """Positive linear maps acting separately on the one-side spaces
    Ω1 = S1 × M1 and Ω2 = S2 × M2, as square matrices T[ω, ω']."""

    T1: np.ndarray
    T2: np.ndarray

    def __post_init__(self) -> None:
        T1 = _readonly(self.T1)
        T2 = _readonly(self.T2)
        for name, arr in (("T1", T1), ("T2", T2)):
            if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
                raise ValueError(f"{name} must be square, got shape {arr.shape}")
            if not np.all(np.isfinite(arr)) or np.any(arr < 0.0):
                raise ValueError(f"{name} must be finite and nonnegative")
        object.__setattr__(self, "T1", T1)
        object.__setattr__(self, "T2", T2)

    def is_stochastic(self, tol: float = 1e-9) -> bool:
        return bool(
            np.all(np.abs(self.T1.sum(axis=1) - 1.0) <= tol)
            and np.all(np.abs(self.T2.sum(axis=1) - 1.0) <= tol)
        )

    def is_permutation(self) -> bool:
        def perm(t: np.ndarray) -> bool:
            binary = np.isin(t, (0.0, 1.0)).all()
            return bool(
                binary
                and np.all(t.sum(axis=0) == 1.0)
                and np.all(t.sum(axis=1) == 1.0)
            )

        return perm(self.T1) and perm(self.T2)

    @classmethod
    def identity(cls, dim1: int, dim2: int) -> "LocalMarkovOperator":
        return cls(np.eye(dim1), np.eye(dim2))

    @classmethod
    def random_stochastic(cls, rng: np.random.Generator, dim1: int, dim2: int) -> "LocalMarkovOperator":
        return cls(stochastic_matrix(rng, dim1, dim1), stochastic_matrix(rng, dim2, dim2))

    @classmethod
    def random_permutation(cls, rng: np.random.Generator, dim1: int, dim2: int) -> "LocalMarkovOperator":
        return cls(
            np.eye(dim1)[rng.permutation(dim1)],
            np.eye(dim2)[rng.permutation(dim2)],
        )


def apply_local_markov(m: DiscreteLCMeasure, op: LocalMarkovOperator) -> DiscreteLCMeasure:
    """Transport the measure by the local operator pair.

    The transported functional is again local-causal, with apparatus spaces
    enlarged to the one-side product spaces: the new side-1 kernel over
    S1 × (S1 × M1) is K1'[s, (s', λ')] = Σ_λ K1[s, λ] * T1[(s, λ), (s', λ')],
    and likewise on side 2. The operator index pairs (s, λ) are flattened
    row-major.
    """
    d1 = m.n1 * m.m1
    d2 = m.n2 * m.m2
    if op.T1.shape != (d1, d1) or op.T2.shape != (d2, d2):
        raise ValueError(
            f"operator dimensions {op.T1.shape}, {op.T2.shape} do not match "
            f"the one-side spaces ({d1}, {d1}), ({d2}, {d2})"
        )
    K1n = np.einsum(
        "sl,slkm->skm", m.K1, op.T1.reshape(m.n1, m.m1, m.n1, m.m1)
    ).reshape(m.n1, d1)
    K2n = np.einsum(
        "sl,slkm->skm", m.K2, op.T2.reshape(m.n2, m.m2, m.n2, m.m2)
    ).reshape(m.n2, d2)
    return DiscreteLCMeasure(PS=m.PS, K1=K1n, K2=K2n)


def check_pab_markovian(m: DiscreteLCMeasure, op: LocalMarkovOperator, tol: float = 1e-9) -> bool:
    """True iff transporting by op keeps the unit-mass condition on the
    support: (Σ_λ K1 T1·1)(s1) * (Σ_λ K2 T2·1)(s2) = 1 within tol."""
    d1 = m.n1 * m.m1
    d2 = m.n2 * m.m2
    if op.T1.shape != (d1, d1) or op.T2.shape != (d2, d2):
        raise ValueError("operator dimensions do not match the measure")
    u1 = np.einsum("sl,sl->s", m.K1, op.T1.sum(axis=1).reshape(m.n1, m.m1))
    u2 = np.einsum("sl,sl->s", m.K2, op.T2.sum(axis=1).reshape(m.n2, m.m2))
    supp = m.support()
    if not supp.any():
        return True
    return bool(np.all(np.abs(np.outer(u1, u2)[supp] - 1.0) <= tol))


def discrete_correlation(m: DiscreteLCMeasure, obs1, obs2) -> float:
    """<obs1 ⊗ obs2> under the induced pair measure PS * p1 * p2.

    Observables depend only on the system configurations and must take
    values in [-1, 1].
    """
    obs1 = np.asarray(obs1, dtype=float)
    obs2 = np.asarray(obs2, dtype=float)
    if obs1.shape != (m.n1,) or obs2.shape != (m.n2,):
        raise ValueError("observables must match the source sides")
    if np.any(np.abs(obs1) > 1.0 + 1e-12) or np.any(np.abs(obs2) > 1.0 + 1e-12):
        raise ValueError("observable entries must lie in [-1, 1]")
    p1, p2 = local_mass_functions(m)
    return float((obs1 * p1) @ m.PS @ (obs2 * p2))


def chsh_discrete(measures, obs1, obs2) -> float:
    """CHSH functional over a four-setting family sharing one source.

    measures = (m_ab, m_ab2, m_a2b, m_a2b2); obs1 = (o_a, o_a2) and
    obs2 = (o_b, o_b2) are the per-setting observables.
    """
    if len(measures) != 4:
        raise ValueError("a CHSH family has four members")
    m_ab, m_ab2, m_a2b, m_a2b2 = measures
    for other in measures[1:]:
        if not np.array_equal(measures[0].PS, other.PS):
            raise ValueError("family members must share the source matrix")
    o_a, o_a2 = obs1
    o_b, o_b2 = obs2
    c_ab = discrete_correlation(m_ab, o_a, o_b)
    c_ab2 = discrete_correlation(m_ab2, o_a, o_b2)
    c_a2b = discrete_correlation(m_a2b, o_a2, o_b)
    c_a2b2 = discrete_correlation(m_a2b2, o_a2, o_b2)
    return abs(c_ab - c_ab2) + abs(c_a2b + c_a2b2)


# ---------------------------------------------------------------------------
# Random instances


def stochastic_matrix(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    """Row-stochastic matrix with Dirichlet(1) rows."""
    g = rng.gamma(1.0, size=(rows, cols))
    return g / g.sum(axis=1, keepdims=True)


def random_source(rng: np.random.Generator, n1: int, n2: int) -> np.ndarray:
    g = rng.gamma(1.0, size=(n1, n2))
    return g / g.sum()


def random_trivial_measure(
    rng: np.random.Generator,
    n1: int = 64,
    n2: int = 64,
    m1: int = 8,
    m2: int = 8,
    c: float | None = None,
) -> DiscreteLCMeasure:
    """Trivial by construction: row masses are c on one side, 1/c on the other."""
    if c is None:
        c = float(np.exp(rng.uniform(-1.5, 1.5)))
    return DiscreteLCMeasure(
        PS=random_source(rng, n1, n2),
        K1=c * stochastic_matrix(rng, n1, m1),
        K2=stochastic_matrix(rng, n2, m2) / c,
    )


def random_trivial_family(
    rng: np.random.Generator,
    n1: int = 64,
    n2: int = 64,
    m1: int = 8,
    m2: int = 8,
) -> tuple[DiscreteLCMeasure, ...]:
    """Four trivial measures sharing one source, one per CHSH setting."""
    PS = random_source(rng, n1, n2)
    members = []
    for _ in range(4):
        c = float(np.exp(rng.uniform(-1.5, 1.5)))
        members.append(
            DiscreteLCMeasure(
                PS=PS,
                K1=c * stochastic_matrix(rng, n1, m1),
                K2=stochastic_matrix(rng, n2, m2) / c,
            )
        )
    return tuple(members)


def random_nontrivial_measure(
    rng: np.random.Generator,
    n1: int = 64,
    n2: int = 64,
    m1: int = 8,
    m2: int = 8,
    min_deviation: float = 1e-3,
) -> DiscreteLCMeasure:
    """Row masses vary across configurations, so p1 ⊗ p2 cannot sit at 1."""
    for _ in range(64):
        g1 = np.exp(rng.uniform(-1.0, 1.0, size=n1))
        g2 = np.exp(rng.uniform(-1.0, 1.0, size=n2))
        m = DiscreteLCMeasure(
            PS=random_source(rng, n1, n2),
            K1=g1[:, None] * stochastic_matrix(rng, n1, m1),
            K2=g2[:, None] * stochastic_matrix(rng, n2, m2),
        )
        if is_trivial(m).max_deviation >= min_deviation:
            return m
    raise RuntimeError("failed to draw a measure with the requested deviation")


def random_observables(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.uniform(-1.0, 1.0, size=n)


# ---------------------------------------------------------------------------
# Diagonal cosine discretization


def diagonal_grid(n_grid: int) -> np.ndarray:
    """Midpoint grid on the circle; arc boundaries of grid-aligned settings
    then fall between nodes."""
    if n_grid < 2:
        raise ValueError("grid needs at least two points")
    return (np.arange(n_grid) + 0.5) * (TWO_PI / n_grid)


def cosine_diagonal_measure(
    n_grid: int,
    a: float,
    b: float,
    m1: int = 8,
    m2: int = 8,
    weight_side: int = 1,
) -> DiscreteLCMeasure:
    """Diagonal discretization of the |cos|/4 pair density at settings (a, b):
    uniform diagonal source, (π/2)|cos| row masses on the weighted side."""
    if weight_side not in (1, 2):
        raise ValueError(f"weight side must be 1 or 2, got {weight_side!r}")
    grid = diagonal_grid(n_grid)
    PS = np.diag(np.full(n_grid, 1.0 / n_grid))
    w1 = (math.pi / 2.0) * np.abs(np.cos(grid - a)) if weight_side == 1 else np.ones(n_grid)
    w2 = (math.pi / 2.0) * np.abs(np.cos(grid - b)) if weight_side == 2 else np.ones(n_grid)
    K1 = np.repeat(w1[:, None] / m1, m1, axis=1)
    K2 = np.repeat(w2[:, None] / m2, m2, axis=1)
    return DiscreteLCMeasure(PS=PS, K1=K1, K2=K2)


def cosine_diagonal_family(
    n_grid: int,
    settings: tuple[float, float, float, float] = TSIRELSON_SETTINGS,
    m1: int = 8,
    m2: int = 8,
    weight_side: int = 1,
):
    """Four-setting cosine family sharing the diagonal source, plus the
    matching ±1 spin observables on the grid.

    Returns (measures, obs1, obs2) shaped for :func:`chsh_discrete`;
    settings order is (a, a2, b, b2).
    """
    a, a2, b, b2 = settings
    grid = diagonal_grid(n_grid)
    measures = tuple(
        cosine_diagonal_measure(n_grid, sa, sb, m1=m1, m2=m2, weight_side=weight_side)
        for sa, sb in ((a, b), (a, b2), (a2, b), (a2, b2))
    )
    obs1 = (
        spin_values(1, a, grid).astype(float),
        spin_values(1, a2, grid).astype(float),
    )
    obs2 = (
        spin_values(2, b, grid).astype(float),
        spin_values(2, b2, grid).astype(float),
    )
    return measures, obs1, obs2


# ---------------------------------------------------------------------------
# Serialization


def measure_to_dict(m: DiscreteLCMeasure, meta: dict | None = None) -> dict:
    doc = {
        "n1": m.n1,
        "n2": m.n2,
        "m1": m.m1,
        "m2": m.m2,
        "PS": m.PS.tolist(),
        "K1": m.K1.tolist(),
        "K2": m.K2.tolist(),
    }
    if meta is not None:
        doc["meta"] = meta
    return doc


def measure_from_dict(doc: dict) -> tuple[DiscreteLCMeasure, dict | None]:
    for key in ("n1", "n2", "m1", "m2", "PS", "K1", "K2"):
        if key not in doc:
            raise ValueError(f"measure document is missing the {key!r} field")
    m = DiscreteLCMeasure(
        PS=np.asarray(doc["PS"], dtype=float),
        K1=np.asarray(doc["K1"], dtype=float),
        K2=np.asarray(doc["K2"], dtype=float),
    )
    declared = (doc["n1"], doc["n2"], doc["m1"], doc["m2"])
    if declared != (m.n1, m.n2, m.m1, m.m2):
        raise ValueError(
            f"declared dimensions {declared} do not match matrices "
            f"({m.n1}, {m.n2}, {m.m1}, {m.m2})"
        )
    return m, doc.get("meta")


def save_measure(path, m: DiscreteLCMeasure, meta: dict | None = None) -> None:
    Path(path).write_text(json.dumps(measure_to_dict(m, meta), sort_keys=True) + "\n")


def load_measure(path) -> tuple[DiscreteLCMeasure, dict | None]:
    return measure_from_dict(json.loads(Path(path).read_text()))
