"""Rotation-invariant pair densities on the torus diagonal and their quadrant
statistics.

A :class:`CandidateModel` is a triple of nonnegative 2π-periodic profiles
(rho, p1, p2) together with a scalar normalization. The induced pair measure
is supported on the diagonal {s1 = s2} and has line density

    scale * rho(s) * p1(s - a) * p2(s - b)

against ds, where a and b are the analyzer settings. Settings enter only
through the shifted arguments, so rotation invariance is structural rather
than asserted. Only the product of the factors is observable; the split and
the scale are conventions, and the total mass is a computed diagnostic.

Quadrant masses (probabilities of the four joint-outcome cells) come either
from the singlet closed forms, ½cos²((b-a)/2) on matched cells and
½sin²((b-a)/2) on mixed ones, or from panel quadrature over the detection-arc
intersections for an arbitrary candidate. Correlations and the CHSH statistic
are signed sums of quadrant masses, so the analytic and quadrature backends
share one code path.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Callable

import numpy as np

from .circle import TWO_PI, Arc, arc_I, arc_J, arc_intersect, normalize, normalize_array

HALF_PI = 0.5 * math.pi

#: Tolerance on |total mass - 1| before correlations are considered defined.
MASS_TOL = 1e-6

#: Default number of quadrature panels.
DEFAULT_PANELS = 4096

#: CHSH setting quadruple (a, a2, b, b2) attaining the 2√2 maximum.
TSIRELSON_SETTINGS = (0.0, HALF_PI, 0.25 * math.pi, 0.75 * math.pi)

_INV_SQRT3 = 1.0 / math.sqrt(3.0)


class NormalizationError(ValueError):
    """An operation needed a unit-mass model; the message carries the mass."""


class Quadrant(Enum):
    """Joint-outcome cell: (arc family for side 1) × (arc family for side 2)."""

    II = "IxI"
    IJ = "IxJ"
    JI = "JxI"
    JJ = "JxJ"

    @property
    def spin_product(self) -> int:
        """Sign of f1*f2 on the cell: mixed cells give +1, matched give -1."""
        return 1 if self in (Quadrant.IJ, Quadrant.JI) else -1

    def arcs(self, a: float, b: float) -> tuple[Arc, Arc]:
        arc1 = arc_I(a) if self in (Quadrant.II, Quadrant.IJ) else arc_J(a)
        arc2 = arc_I(b) if self in (Quadrant.II, Quadrant.JI) else arc_J(b)
        return arc1, arc2


_BUILTINS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "abs-cos": lambda x: np.abs(np.cos(x)),
    "cos-squared": lambda x: np.cos(x) ** 2,
    "uniform": lambda x: np.ones_like(x),
}

# Angles in [0, 2π) where each builtin fails to be smooth.
_BUILTIN_KINKS: dict[str, tuple[float, ...]] = {
    "abs-cos": (HALF_PI, 3.0 * HALF_PI),
    "cos-squared": (),
    "uniform": (),
}

BUILTIN_PROFILES = tuple(sorted(_BUILTINS))


@dataclass(frozen=True)
class Profile:
    """Nonnegative 2π-periodic profile.

    Either one of the named builtins or N uniformly spaced samples (values at
    the angles 2πk/N) evaluated with periodic linear interpolation.
    """

    kind: str
    samples: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if self.kind == "samples":
            if self.samples is None or len(self.samples) < 2:
                raise ValueError("sampled profile needs at least two samples")
            values = np.asarray(self.samples, dtype=float)
            if not np.all(np.isfinite(values)) or np.any(values < 0.0):
                raise ValueError("profile samples must be finite and nonnegative")
            object.__setattr__(self, "samples", tuple(float(v) for v in values))
        elif self.kind in _BUILTINS:
            if self.samples is not None:
                raise ValueError("builtin profiles carry no samples")
        else:
            raise ValueError(f"unknown profile kind {self.kind!r}")

    @classmethod
    def builtin(cls, name: str) -> "Profile":
        return cls(kind=name)

    @classmethod
    def from_samples(cls, values) -> "Profile":
        return cls(kind="samples", samples=tuple(float(v) for v in values))

    @property
    def n_samples(self) -> int:
        return 0 if self.samples is None else len(self.samples)

    def __call__(self, x) -> np.ndarray:
        xs = np.asarray(x, dtype=float)
        if self.kind != "samples":
            return _BUILTINS[self.kind](xs)
        vals = np.asarray(self.samples, dtype=float)
        grid = np.linspace(0.0, TWO_PI, vals.size + 1)
        wrapped = np.append(vals, vals[0])
        return np.interp(normalize_array(xs), grid, wrapped)

    def kink_angles(self) -> tuple[float, ...]:
        """Angles (mod 2π) where the profile is not smooth; quadrature splits here."""
        if self.kind == "samples":
            n = len(self.samples)
            return tuple(TWO_PI * k / n for k in range(n))
        return _BUILTIN_KINKS[self.kind]

    def to_dict(self) -> dict:
        if self.kind == "samples":
            return {"samples": list(self.samples)}
        return {"builtin": self.kind}

    @classmethod
    def from_dict(cls, doc: dict) -> "Profile":
        if not isinstance(doc, dict):
            raise ValueError(f"profile document must be an object, got {doc!r}")
        if "builtin" in doc:
            return cls.builtin(doc["builtin"])
        if "samples" in doc:
            return cls.from_samples(doc["samples"])
        raise ValueError("profile document needs a 'builtin' or 'samples' field")


@dataclass(frozen=True)
class CandidateModel:
    """Diagonal pair-measure candidate: source profile, two apparatus profiles
    and a scalar normalization."""

    rho: Profile
    p1: Profile
    p2: Profile
    scale: float = 1.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.scale) and self.scale > 0.0):
            raise ValueError(f"scale must be positive and finite, got {self.scale!r}")

    def density(self, s, a: float, b: float) -> np.ndarray:
        """Line density at diagonal configuration(s) s for settings (a, b)."""
        arr = np.asarray(s, dtype=float)
        return self.scale * self.rho(arr) * self.p1(arr - a) * self.p2(arr - b)

    @classmethod
    def abs_cos(cls, weight_side: int = 1) -> "CandidateModel":
        """The unit-mass |cos|/4 model, with the weight on either side."""
        _check_side(weight_side)
        shaped = Profile.builtin("abs-cos")
        flat = Profile.builtin("uniform")
        if weight_side == 1:
            return cls(rho=flat, p1=shaped, p2=flat, scale=0.25)
        return cls(rho=flat, p1=flat, p2=shaped, scale=0.25)

    @classmethod
    def cos_squared(cls, weight_side: int = 1) -> "CandidateModel":
        """cos² apparatus profile on one side, everything else flat, unit mass."""
        _check_side(weight_side)
        shaped = Profile.builtin("cos-squared")
        flat = Profile.builtin("uniform")
        if weight_side == 1:
            return cls(rho=flat, p1=shaped, p2=flat, scale=1.0 / math.pi)
        return cls(rho=flat, p1=flat, p2=shaped, scale=1.0 / math.pi)

    @classmethod
    def uniform(cls) -> "CandidateModel":
        """Constant density 1/(2π) on the diagonal."""
        flat = Profile.builtin("uniform")
        return cls(rho=flat, p1=flat, p2=flat, scale=1.0 / TWO_PI)

    def normalized(self, panels: int = DEFAULT_PANELS) -> "CandidateModel":
        """Rescale so the total mass at equal settings is 1."""
        mass = total_mass(self, 0.0, 0.0, panels)
        if mass <= 0.0:
            raise ValueError("cannot normalize a model with zero mass")
        return replace(self, scale=self.scale / mass)

    def sampled_sizes(self) -> tuple[int, ...]:
        """Sample counts of the sampled profiles (empty if all builtin)."""
        return tuple(p.n_samples for p in (self.rho, self.p1, self.p2) if p.kind == "samples")

    def to_dict(self) -> dict:
        return {
            "rho": self.rho.to_dict(),
            "p1": self.p1.to_dict(),
            "p2": self.p2.to_dict(),
            "scale": self.scale,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "CandidateModel":
        for key in ("rho", "p1", "p2"):
            if key not in doc:
                raise ValueError(f"model document is missing the {key!r} field")
        return cls(
            rho=Profile.from_dict(doc["rho"]),
            p1=Profile.from_dict(doc["p1"]),
            p2=Profile.from_dict(doc["p2"]),
            scale=float(doc.get("scale", 1.0)),
        )


def _check_side(side: int) -> None:
    if side not in (1, 2):
        raise ValueError(f"weight side must be 1 or 2, got {side!r}")


def save_model(path, model: CandidateModel) -> None:
    Path(path).write_text(json.dumps(model.to_dict(), indent=2, sort_keys=True) + "\n")


def load_model(path, panels: int = DEFAULT_PANELS) -> CandidateModel:
    """Read a model file; a file without an explicit scale is normalized."""
    doc = json.loads(Path(path).read_text())
    model = CandidateModel.from_dict(doc)
    if "scale" not in doc:
        model = model.normalized(panels)
    return model


def _integrate(f, lo: float, hi: float, cuts, panels: int) -> float:
    """Composite two-node Gauss panels on [lo, hi], split at interior cuts.

    Panels are spread over the smooth sub-pieces in proportion to length
    (at least one each), so `panels` sets the total resolution.
    """
    pts = [lo]
    for c in sorted(set(cuts)):
        if lo + 1e-13 < c < hi - 1e-13 and c - pts[-1] > 1e-13:
            pts.append(c)
    pts.append(hi)
    width = hi - lo
    acc = 0.0
    for u, v in zip(pts[:-1], pts[1:]):
        if v - u <= 0.0:
            continue
        k = max(1, math.ceil(panels * (v - u) / width))
        h = (v - u) / k
        centers = u + (np.arange(k) + 0.5) * h
        off = 0.5 * h * _INV_SQRT3
        nodes = np.concatenate((centers - off, centers + off))
        acc += 0.5 * h * float(np.sum(f(nodes)))
    return acc


def _model_cuts(m: CandidateModel, a: float, b: float) -> list[float]:
    cuts: set[float] = set()
    for profile, shift in ((m.rho, 0.0), (m.p1, a), (m.p2, b)):
        for c in profile.kink_angles():
            cuts.add(normalize(c + shift))
    return sorted(cuts)


def quadrant_prob_analytic(a: float, b: float, quadrant: Quadrant) -> float:
    """Singlet closed form for one cell: ½cos²((b-a)/2) or ½sin²((b-a)/2)."""
    half = 0.5 * (b - a)
    if quadrant.spin_product < 0:
        return 0.5 * math.cos(half) ** 2
    return 0.5 * math.sin(half) ** 2


def quadrant_prob_quadrature(
    m: CandidateModel, a: float, b: float, quadrant: Quadrant, panels: int = DEFAULT_PANELS
) -> float:
    """Mass of one joint-outcome cell by panel quadrature over the arc
    intersection. An empty intersection gives exactly 0."""
    if panels < 8:
        raise ValueError(f"panel count must be at least 8, got {panels!r}")
    a = normalize(a)
    b = normalize(b)
    arc1, arc2 = quadrant.arcs(a, b)
    pieces = arc_intersect(arc1, arc2)
    if not pieces:
        return 0.0
    cuts = _model_cuts(m, a, b)
    total = sum(p.length for p in pieces)

    def f(s):
        return m.density(s, a, b)

    acc = 0.0
    for piece in pieces:
        share = max(1, math.ceil(panels * piece.length / total))
        acc += _integrate(f, piece.start, piece.start + piece.length, cuts, share)
    return acc


def quadrant_table_quadrature(
    m: CandidateModel, a: float, b: float, panels: int = DEFAULT_PANELS
) -> dict[Quadrant, float]:
    return {q: quadrant_prob_quadrature(m, a, b, q, panels) for q in Quadrant}


def total_mass(m: CandidateModel, a: float, b: float, panels: int = DEFAULT_PANELS) -> float:
    """Mass of the induced measure at settings (a, b); the four cells
    partition the diagonal, so this is their sum."""
    return float(sum(quadrant_table_quadrature(m, a, b, panels).values()))


def _signed_sum(table: dict[Quadrant, float]) -> float:
    return float(sum(q.spin_product * p for q, p in table.items()))


def correlation(m: CandidateModel, a: float, b: float, panels: int = DEFAULT_PANELS) -> float:
    """Pair correlation from the four quadrant masses; needs unit mass."""
    table = quadrant_table_quadrature(m, a, b, panels)
    mass = sum(table.values())
    if abs(mass - 1.0) > MASS_TOL:
        raise NormalizationError(
            f"model is not normalized: total mass {mass:.9g} at settings ({a!r}, {b!r})"
        )
    return _signed_sum(table)


def correlation_analytic(a: float, b: float) -> float:
    """Signed quadrant sum of the closed forms; equals -cos(b - a)."""
    return _signed_sum({q: quadrant_prob_analytic(a, b, q) for q in Quadrant})


def chsh(
    m: CandidateModel, a: float, a2: float, b: float, b2: float, panels: int = DEFAULT_PANELS
) -> float:
    """|C(a,b) - C(a,b2)| + |C(a2,b) + C(a2,b2)| for the candidate."""
    c_ab = correlation(m, a, b, panels)
    c_ab2 = correlation(m, a, b2, panels)
    c_a2b = correlation(m, a2, b, panels)
    c_a2b2 = correlation(m, a2, b2, panels)
    return abs(c_ab - c_ab2) + abs(c_a2b + c_a2b2)


def chsh_analytic(a: float, a2: float, b: float, b2: float) -> float:
    c_ab = correlation_analytic(a, b)
    c_ab2 = correlation_analytic(a, b2)
    c_a2b = correlation_analytic(a2, b)
    c_a2b2 = correlation_analytic(a2, b2)
    return abs(c_ab - c_ab2) + abs(c_a2b + c_a2b2)


def empirically_equivalent(
    m1: CandidateModel,
    settings1: tuple[float, float],
    m2: CandidateModel,
    settings2: tuple[float, float],
    tol: float,
    panels: int = DEFAULT_PANELS,
) -> bool:
    """True iff the two candidates produce the same four quadrant masses at
    their respective settings, within tol. Both models must be unit mass."""
    t1 = quadrant_table_quadrature(m1, settings1[0], settings1[1], panels)
    t2 = quadrant_table_quadrature(m2, settings2[0], settings2[1], panels)
    for table, settings in ((t1, settings1), (t2, settings2)):
        mass = sum(table.values())
        if abs(mass - 1.0) > MASS_TOL:
            raise NormalizationError(
                f"model is not normalized: total mass {mass:.9g} at settings {settings!r}"
            )
    return all(abs(t1[q] - t2[q]) <= tol for q in Quadrant)


def abs_cos_density(a: float, s):
    """The forced diagonal line density ¼|cos(s - a)|."""
    out = 0.25 * np.abs(np.cos(np.asarray(s, dtype=float) - a))
    return float(out) if out.ndim == 0 else out
