"""Registry of analytically tractable data-generating processes.

Each family ships a sampler, the exact conditional law of ``Y`` given
``X = x`` and the exact law of ``Y`` given ``X`` in a ball around ``x0``.
Two outcome types are covered:

* two-point outcomes, where everything reduces to the success probability
  ``pi(x)`` and its ball average ``pi_r``;
* unit-variance Gaussian location outcomes whose mean moves only in the first
  coordinate, so the ball law is a one-dimensional Gaussian mixture in that
  coordinate times an unchanged standard normal in the others.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np
from scipy import special

from ._random import stream

__all__ = [
    "DgpSpec",
    "ConditionalLaw",
    "Dataset",
    "make_gaussian_boundary",
    "make_gaussian_interior",
    "make_log_correction",
    "make_cubic_support",
    "make_holder_twopoint",
    "make_null_twopoint",
    "registry",
    "get_spec",
    "sample",
    "conditional_law",
    "ball_law",
    "ball_pi",
    "ball_delta",
    "base_pi",
    "success_prob",
    "delta_log",
    "spec_to_json",
    "spec_from_json",
    "write_csv",
    "read_csv",
]

DELTA_CUTOFF = math.exp(-2.0)
_MIX_NODES = 48


@dataclass(frozen=True, eq=False)
class DgpSpec:
    """A registered data-generating process.

    ``params`` holds the family parameters plus the bookkeeping flags
    ``sharp_h`` / ``sharp_tv`` (whether the marginal exponent is attained,
    so rate checks are two-sided) and ``r_tilde`` (radius below which the
    closed forms hold).
    """

    id: str
    family: str
    d: int
    m: int
    x0: tuple[float, ...]
    boundary: bool
    outcome_kind: str
    params: dict[str, Any]
    regime: dict[str, Any]
    theoretical_a_h: float
    theoretical_a_tv: float
    score: dict[str, Any] | None = None

    def __post_init__(self):
        if self.d < 1 or self.m < 1:
            raise ValueError("d and m must be >= 1")
        if len(self.x0) != self.d:
            raise ValueError("x0 must have length d")
        if not self.theoretical_a_h > 0:
            raise ValueError("theoretical_a_h must be positive")
        a_h, a_tv = self.theoretical_a_h, self.theoretical_a_tv
        if not (a_h - 1e-12 <= a_tv <= 2 * a_h + 1e-12):
            raise ValueError("theoretical_a_tv must lie in [a_h, 2 a_h]")

    @property
    def is_discrete(self) -> bool:
        return self.outcome_kind == "discrete"

    @property
    def r_tilde(self) -> float:
        return float(self.params["r_tilde"])

    def sharp(self, metric: str) -> bool:
        return bool(self.params.get("sharp_h" if metric == "h" else "sharp_tv", False))

    def exponent(self, metric: str) -> float:
        return self.theoretical_a_h if metric == "h" else self.theoretical_a_tv

    def __eq__(self, other):
        if not isinstance(other, DgpSpec):
            return NotImplemented
        return spec_to_json(self) == spec_to_json(other)

    def __repr__(self):
        return f"DgpSpec(id={self.id!r}, family={self.family!r}, d={self.d}, m={self.m})"


@dataclass(frozen=True, eq=False)
class ConditionalLaw:
    """A law of ``Y``.

    ``kind`` is ``"discrete"`` (``support`` rows with probabilities ``pmf``),
    ``"gaussian_location"`` (``N(mean, I_m)``) or ``"density_1d"`` (a density
    for the first coordinate on ``interval``; remaining coordinates are
    ``N(tail_mean, I)``).  A ``density_1d`` law built from a finite
    unit-variance Gaussian mixture keeps ``locs``/``weights`` so distances can
    be computed without cancellation.
    """

    kind: str
    pmf: np.ndarray | None = None
    support: np.ndarray | None = None
    mean: np.ndarray | None = None
    density: Callable[[np.ndarray], np.ndarray] | None = None
    interval: tuple[float, float] = (-math.inf, math.inf)
    tol: float = 1e-10
    locs: np.ndarray | None = None
    weights: np.ndarray | None = None
    tail_mean: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        if self.kind == "discrete":
            p = np.asarray(self.pmf, dtype=float)
            if np.any(p < 0) or np.any(p > 1) or abs(math.fsum(p) - 1.0) > 1e-12:
                raise ValueError("pmf must be a probability vector")
        elif self.kind == "gaussian_location":
            if self.mean is None:
                raise ValueError("gaussian_location needs a mean")
        elif self.kind == "density_1d":
            if self.density is None and self.locs is None:
                raise ValueError("density_1d needs a density or mixture components")
        else:
            raise ValueError(f"unknown law kind {self.kind!r}")

    @property
    def m(self) -> int:
        if self.kind == "discrete":
            return int(np.asarray(self.support).reshape(len(self.pmf), -1).shape[1])
        if self.kind == "gaussian_location":
            return int(np.asarray(self.mean).size)
        return 1 + int(np.asarray(self.tail_mean).size)

    def pdf(self, y) -> np.ndarray:
        """Density of the first coordinate (``density_1d``) or full density (Gaussian)."""
        y = np.asarray(y, dtype=float)
        if self.kind == "density_1d":
            if self.locs is not None:
                z = y[..., None] - self.locs
                return np.exp(-0.5 * z * z) @ self.weights / math.sqrt(2 * math.pi)
            return self.density(y)
        if self.kind == "gaussian_location":
            mu = np.asarray(self.mean, dtype=float)
            z = np.atleast_2d(y) - mu
            return np.exp(-0.5 * np.sum(z * z, axis=-1)) / (2 * math.pi) ** (mu.size / 2)
        raise TypeError("discrete laws have no density; use pmf")


@dataclass
class Dataset:
    """An i.i.d. sample: ``x`` is ``n x d``, ``y`` is ``n x m``."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        self.x = np.atleast_2d(np.asarray(self.x, dtype=float))
        self.y = np.asarray(self.y, dtype=float)
        if self.y.ndim == 1:
            self.y = self.y[:, None]
        if self.x.shape[0] == 1 and self.y.shape[0] > 1:
            self.x = self.x.T
        if self.x.shape[0] != self.y.shape[0]:
            raise ValueError("x and y must have the same number of rows")
        if not (np.all(np.isfinite(self.x)) and np.all(np.isfinite(self.y))):
            raise ValueError("dataset entries must be finite")

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def d(self) -> int:
        return self.x.shape[1]

    @property
    def m(self) -> int:
        return self.y.shape[1]


# ---------------------------------------------------------------------------
# family constructors


def _holder_regime(kappa: float) -> dict[str, Any]:
    kappa_s = max(int(math.ceil(kappa)) - 1, 0)
    return {"kind": "Holder", "kappa_s": kappa_s, "kappa_r": kappa - kappa_s}


def make_gaussian_boundary(d: int = 1, m: int = 1) -> DgpSpec:
    """X uniform on the unit cube, x0 at the corner, Y ~ N((x_1, 0, ..., 0), I_m)."""
    return DgpSpec(
        id="gaussian_boundary" if (d, m) == (1, 1) else f"gaussian_boundary_d{d}_m{m}",
        family="gaussian_boundary",
        d=d,
        m=m,
        x0=(0.0,) * d,
        boundary=True,
        outcome_kind="gaussian_location",
        params={"r_tilde": 1.0, "sharp_h": True, "sharp_tv": True},
        regime={"kind": "QMD"},
        theoretical_a_h=1.0,
        theoretical_a_tv=1.0,
        score={"kind": "gaussian_first"},
    )


def make_gaussian_interior(d: int = 1, m: int = 1) -> DgpSpec:
    """Same Gaussian model recentred at the midpoint of [0, 1], an interior point."""
    if d != 1:
        raise ValueError("the interior Gaussian family is implemented for d = 1")
    return DgpSpec(
        id="gaussian_interior" if (d, m) == (1, 1) else f"gaussian_interior_d{d}_m{m}",
        family="gaussian_interior",
        d=d,
        m=m,
        x0=(0.5,) * d,
        boundary=False,
        outcome_kind="gaussian_location",
        params={"r_tilde": 0.5, "sharp_h": False, "sharp_tv": False},
        regime={"kind": "QMD"},
        theoretical_a_h=1.0,
        theoretical_a_tv=1.0,
        score={"kind": "gaussian_first"},
    )


def make_log_correction(d: int = 1, r_tilde: float = math.exp(-3.0), m: int = 1) -> DgpSpec:
    """Two-point outcome with success probability 1/2 + u/(1 - ln u), u = |x|.

    X is uniform on the ball of radius ``r_tilde``; the marginal distances
    decay like ``r / log(1/r)``, faster than ``r`` but slower than any
    ``r**(1 + eps)``.
    """
    if d < 1 or not r_tilde > 0:
        raise ValueError("need d >= 1 and r_tilde > 0")
    return DgpSpec(
        id="log_correction" if (d, m) == (1, 1) else f"log_correction_d{d}",
        family="log_correction",
        d=d,
        m=m,
        x0=(0.0,) * d,
        boundary=False,
        outcome_kind="discrete",
        params={"r_tilde": float(r_tilde), "log_correction": True,
                "sharp_h": False, "sharp_tv": False},
        regime={"kind": "QMD"},
        theoretical_a_h=1.0,
        theoretical_a_tv=1.0,
        score={"kind": "zero"},
    )


def make_cubic_support(r_tilde: float = 0.5) -> DgpSpec:
    """p_x(1) = |x|^3 on X ~ U(-r_tilde, r_tilde): QMD although P(Y=1 | x0) = 0."""
    if not 0 < r_tilde < 1:
        raise ValueError("r_tilde must lie in (0, 1)")
    return DgpSpec(
        id="cubic_support",
        family="cubic_support",
        d=1,
        m=1,
        x0=(0.0,),
        boundary=False,
        outcome_kind="discrete",
        params={"r_tilde": float(r_tilde), "sharp_h": False, "sharp_tv": False},
        regime={"kind": "QMD"},
        theoretical_a_h=1.0,
        theoretical_a_tv=1.0,
        score={"kind": "zero"},
    )


def make_holder_twopoint(
    kappa: float = 1.0,
    c: float = 0.5,
    interior: bool = False,
    with_linear_term: bool = False,
    c2: float = 0.0,
    r_tilde: float = 0.5,
) -> DgpSpec:
    """Two-point outcome with a power-law success probability, d = 1.

    * ``interior=False``: X ~ U[0, r_tilde], pi(x) = 1/2 + c x**kappa, x0 = 0.
    * ``interior=True``: X ~ U(-r_tilde, r_tilde), x0 = 0 and either
      pi(x) = 1/2 + c |x|**kappa or, with ``with_linear_term``,
      pi(x) = 1/2 + c x + c2 x**2 (then kappa is taken as 2).
    """
    if not 0 < kappa <= 2:
        raise ValueError("kappa must lie in (0, 2]")
    if not r_tilde > 0:
        raise ValueError("r_tilde must be positive")
    if interior and with_linear_term:
        kappa = 2.0
        lo = 0.5 - abs(c) * r_tilde - max(-c2, 0.0) * r_tilde**2
        hi = 0.5 + abs(c) * r_tilde + max(c2, 0.0) * r_tilde**2
        shape = "linear_quadratic"
    else:
        reach = abs(c) * r_tilde**kappa
        lo, hi = 0.5 - reach, 0.5 + reach
        shape = "power"
    if not (0.0 < lo and hi < 1.0):
        raise ValueError("c produces success probabilities outside (0, 1)")

    if interior:
        a_tv = min(2.0, kappa)
        qmd = kappa > 1 or with_linear_term
        a_h = 1.0 if qmd else min(1.0, kappa / 2)
        if with_linear_term:
            sharp_tv = c2 != 0
            score = {"kind": "twopoint", "slope": float(c)}
        else:
            sharp_tv = c != 0
            score = {"kind": "zero"} if kappa > 1 else None
    else:
        a_tv = min(1.0, kappa)
        qmd = kappa >= 1
        a_h = 1.0 if qmd else min(0.5, kappa / 2)
        sharp_tv = c != 0 and kappa <= 1
        if kappa == 1:
            score = {"kind": "twopoint", "slope": float(c)}
        elif kappa > 1:
            score = {"kind": "zero"}
        else:
            score = None
    sharp_h = sharp_tv and abs(a_h - a_tv) < 1e-12

    side = "interior" if interior else "boundary"
    if interior and with_linear_term:
        ident = "holder_interior_linear" if c2 == 0 else "holder_interior_quadratic"
    else:
        ident = f"holder_{side}_k{kappa:g}"
    return DgpSpec(
        id=ident,
        family="holder_twopoint",
        d=1,
        m=1,
        x0=(0.0,),
        boundary=not interior,
        outcome_kind="discrete",
        params={
            "kappa": float(kappa), "c": float(c), "c2": float(c2),
            "interior": bool(interior), "with_linear_term": bool(with_linear_term),
            "shape": shape, "r_tilde": float(r_tilde),
            "sharp_h": bool(sharp_h), "sharp_tv": bool(sharp_tv), "qmd": bool(qmd),
        },
        regime=_holder_regime(kappa),
        theoretical_a_h=a_h,
        theoretical_a_tv=a_tv,
        score=score,
    )


def make_null_twopoint(p: float = 0.5) -> DgpSpec:
    """Y ~ Bernoulli(p) independent of X ~ U[0, 1]; every local law equals the target."""
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    return DgpSpec(
        id="null_twopoint" if p == 0.5 else f"null_twopoint_p{p:g}",
        family="null_twopoint",
        d=1,
        m=1,
        x0=(0.0,),
        boundary=True,
        outcome_kind="discrete",
        params={"p": float(p), "r_tilde": 1.0, "degenerate": True,
                "sharp_h": False, "sharp_tv": False},
        regime={"kind": "QMD"},
        theoretical_a_h=1.0,
        theoretical_a_tv=1.0,
        score={"kind": "zero"},
    )


_FACTORIES: dict[str, Callable[..., DgpSpec]] = {
    "gaussian_boundary": make_gaussian_boundary,
    "gaussian_interior": make_gaussian_interior,
    "log_correction": make_log_correction,
    "cubic_support": make_cubic_support,
    "holder_twopoint": make_holder_twopoint,
    "null_twopoint": make_null_twopoint,
}

_FACTORY_ARGS = {
    "gaussian_boundary": ("d", "m"),
    "gaussian_interior": ("d", "m"),
    "log_correction": ("d", "r_tilde", "m"),
    "cubic_support": ("r_tilde",),
    "holder_twopoint": ("kappa", "c", "interior", "with_linear_term", "c2", "r_tilde"),
    "null_twopoint": ("p",),
}


def registry() -> dict[str, DgpSpec]:
    """The named specs used by the experiments and the CLI."""
    specs = [
        make_gaussian_boundary(),
        make_gaussian_interior(),
        make_log_correction(),
        make_cubic_support(),
        make_holder_twopoint(kappa=1.0, c=0.5),
        make_holder_twopoint(kappa=0.5, c=0.5),
        make_holder_twopoint(kappa=1.5, c=0.5, interior=True),
        make_holder_twopoint(c=0.5, interior=True, with_linear_term=True),
        make_holder_twopoint(c=0.5, interior=True, with_linear_term=True, c2=0.5),
        make_null_twopoint(),
    ]
    return {s.id: s for s in specs}


def get_spec(ident: str) -> DgpSpec:
    specs = registry()
    if ident not in specs:
        raise KeyError(f"unknown spec id {ident!r}; known: {', '.join(sorted(specs))}")
    return specs[ident]


# ---------------------------------------------------------------------------
# serialization


def spec_to_json(spec: DgpSpec) -> dict[str, Any]:
    return {
        "id": spec.id,
        "d": spec.d,
        "m": spec.m,
        "x0": list(spec.x0),
        "family": spec.family,
        "params": dict(spec.params),
        "regime": dict(spec.regime),
        "exponents": {"a_h": spec.theoretical_a_h, "a_tv": spec.theoretical_a_tv},
    }


def spec_from_json(doc: dict[str, Any] | str) -> DgpSpec:
    """Rebuild a spec from its JSON document by re-running the family factory."""
    if isinstance(doc, str):
        doc = json.loads(doc)
    family = doc["family"]
    if family not in _FACTORIES:
        raise ValueError(f"unknown family {family!r}")
    merged = dict(doc.get("params", {}))
    merged["d"], merged["m"] = doc["d"], doc["m"]
    kwargs = {k: merged[k] for k in _FACTORY_ARGS[family] if k in merged}
    spec = _FACTORIES[family](**kwargs)
    if doc.get("id") and doc["id"] != spec.id:
        spec = DgpSpec(**{**spec.__dict__, "id": doc["id"]})
    expected = doc.get("exponents")
    if expected and (
        abs(expected["a_h"] - spec.theoretical_a_h) > 1e-12
        or abs(expected["a_tv"] - spec.theoretical_a_tv) > 1e-12
    ):
        raise ValueError("exponents in document disagree with the family definition")
    return spec


def write_csv(data: Dataset, path) -> None:
    header = [f"x_{j + 1}" for j in range(data.d)] + [f"y_{j + 1}" for j in range(data.m)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in np.hstack([data.x, data.y]):
            w.writerow([repr(float(v)) for v in row])


def read_csv(path) -> Dataset:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    xcols = [i for i, h in enumerate(header) if h.strip().startswith("x_")]
    ycols = [i for i, h in enumerate(header) if h.strip().startswith("y_")]
    if not xcols or not ycols:
        raise ValueError("CSV header must contain x_1..x_d and y_1..y_m columns")
    arr = np.array([[float(v) for v in r] for r in body if r], dtype=float)
    if arr.size == 0:
        raise ValueError("empty dataset")
    return Dataset(arr[:, xcols], arr[:, ycols])


# ---------------------------------------------------------------------------
# success probabilities for the two-point families


def delta_log(u) -> np.ndarray:
    """u / (1 - ln u) on (0, e^-2), zero at 0 and beyond the cutoff."""
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    mask = (u > 0) & (u < DELTA_CUTOFF)
    out[mask] = u[mask] / (1.0 - np.log(u[mask]))
    return out


def success_prob(spec: DgpSpec, x) -> np.ndarray:
    """pi(x) = P(Y = e_1 | X = x) for the two-point families; ``x`` is ``(n, d)``."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    p = spec.params
    if spec.family == "log_correction":
        return 0.5 + delta_log(np.linalg.norm(x, axis=1))
    if spec.family == "cubic_support":
        return np.abs(x[:, 0]) ** 3
    if spec.family == "null_twopoint":
        return np.full(x.shape[0], p["p"])
    if spec.family == "holder_twopoint":
        t = x[:, 0]
        if p["shape"] == "linear_quadratic":
            return 0.5 + p["c"] * t + p["c2"] * t * t
        return 0.5 + p["c"] * np.abs(t) ** p["kappa"]
    raise ValueError(f"{spec.family} has no two-point outcome")


def _log_ball_excess(r, d: int) -> np.ndarray:
    """(d / r^d) * int_0^min(r, e^-2) v^d / (1 - ln v) dv, in closed form via E1.

    With b = min(r, e^-2), a = d + 1 and L = 1 - ln b the integral equals
    b^a / a * a e^{aL} E1(aL).
    """
    r = np.asarray(r, dtype=float)
    b = np.minimum(r, DELTA_CUTOFF)
    a = d + 1.0
    z = a * (1.0 - np.log(b))
    # e^z E1(z) ~ 1/z (1 - 1/z + 2/z^2 ...) once exp would overflow
    big = z > 600
    scaled = np.where(big, 0.0, np.exp(np.minimum(z, 600)) * special.exp1(np.minimum(z, 600)))
    if np.any(big):
        zb = z[big]
        scaled[big] = (1 - 1 / zb + 2 / zb**2 - 6 / zb**3) / zb
    integral = b**a * scaled
    return d * integral / r**d


def base_pi(spec: DgpSpec) -> float:
    """pi(x0) for the two-point families."""
    return float(success_prob(spec, np.asarray(spec.x0)[None, :])[0])


def ball_delta(spec: DgpSpec, r) -> np.ndarray:
    """pi_r - pi(x0), computed directly so small differences keep full precision."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("radius must be positive")
    p = spec.params
    rho = np.minimum(r, spec.r_tilde)
    if spec.family == "log_correction":
        return _log_ball_excess(rho, spec.d)
    if spec.family == "cubic_support":
        return rho**3 / 4.0
    if spec.family == "null_twopoint":
        return np.zeros_like(rho)
    if spec.family == "holder_twopoint":
        if p["shape"] == "linear_quadratic":
            return p["c2"] * rho**2 / 3.0
        kappa = p["kappa"]
        return p["c"] * rho**kappa / (kappa + 1.0)
    raise ValueError(f"{spec.family} has no two-point outcome")


def ball_pi(spec: DgpSpec, r) -> np.ndarray:
    """pi_r = P(Y = e_1 | X in B_r) for the two-point families, vectorized in r."""
    return base_pi(spec) + ball_delta(spec, r)


def _twopoint_support(spec: DgpSpec) -> np.ndarray:
    sup = np.zeros((2, spec.m))
    sup[1, 0] = 1.0
    return sup


def _twopoint_law(spec: DgpSpec, pi: float) -> ConditionalLaw:
    pi = float(min(max(pi, 0.0), 1.0))
    return ConditionalLaw(kind="discrete", pmf=np.array([1.0 - pi, pi]),
                          support=_twopoint_support(spec))


# ---------------------------------------------------------------------------
# Gaussian families


def _offset_nodes(r: float, d: int, one_sided: bool) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature for the first coordinate of a uniform point in a (half) ball.

    That coordinate has density proportional to (r^2 - t^2)^((d-1)/2), on
    [0, r] for the orthant-ball and on [-r, r] for the full ball.
    """
    alpha = (d - 1) / 2.0
    if one_sided:
        u, w = special.roots_jacobi(_MIX_NODES, alpha, 0.0)
        s = (1.0 + u) / 2.0
        w = w * (1.0 + s) ** alpha
    else:
        s, w = special.roots_jacobi(_MIX_NODES, alpha, alpha)
    return r * s, w / w.sum()


def _gaussian_mixture_law(spec: DgpSpec, r: float) -> ConditionalLaw:
    one_sided = spec.family == "gaussian_boundary"
    limit = 1.0 if one_sided else 0.5
    if r > limit:
        if spec.d == 1:
            r = limit
        else:
            raise ValueError(f"ball law for {spec.id} is implemented for r <= {limit}")
    t, w = _offset_nodes(r, spec.d, one_sided)
    locs = spec.x0[0] + t
    return ConditionalLaw(kind="density_1d", locs=locs, weights=w,
                          tail_mean=np.zeros(spec.m - 1), tol=1e-10)


# ---------------------------------------------------------------------------
# public law oracles


def _in_support(spec: DgpSpec, x: np.ndarray) -> bool:
    rt = spec.r_tilde
    if spec.family in ("gaussian_boundary", "gaussian_interior"):
        return bool(np.all((x >= 0) & (x <= 1)))
    if spec.family == "null_twopoint":
        return bool(0 <= x[0] <= 1)
    if spec.family == "log_correction":
        return bool(np.linalg.norm(x) <= rt)
    if spec.family == "cubic_support":
        return bool(abs(x[0]) <= rt)
    if spec.family == "holder_twopoint":
        if spec.params["interior"]:
            return bool(abs(x[0]) <= rt)
        return bool(0 <= x[0] <= rt)
    raise ValueError(spec.family)


def conditional_law(spec: DgpSpec, x: Sequence[float] | float | None = None) -> ConditionalLaw:
    """Exact law of Y given X = x (default x = x0)."""
    x = np.asarray(spec.x0 if x is None else x, dtype=float).reshape(-1)
    if x.size != spec.d:
        raise ValueError("x must have length d")
    if not _in_support(spec, x):
        raise ValueError(f"x = {x.tolist()} lies outside the covariate support of {spec.id}")
    if spec.outcome_kind == "gaussian_location":
        mean = np.zeros(spec.m)
        mean[0] = x[0]
        return ConditionalLaw(kind="gaussian_location", mean=mean)
    return _twopoint_law(spec, float(success_prob(spec, x[None, :])[0]))


def ball_law(spec: DgpSpec, r: float) -> ConditionalLaw:
    """Exact law P_r of Y given X in the open ball of radius r around x0."""
    if not r > 0:
        raise ValueError("radius must be positive (F(r) = 0 otherwise)")
    if spec.outcome_kind == "gaussian_location":
        return _gaussian_mixture_law(spec, float(r))
    return _twopoint_law(spec, float(ball_pi(spec, r)))


# ---------------------------------------------------------------------------
# sampling


def _uniform_ball(rng: np.random.Generator, n: int, d: int, radius: float) -> np.ndarray:
    g = rng.standard_normal((n, d))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g * radius * rng.random(n)[:, None] ** (1.0 / d)


def sample(spec: DgpSpec, n: int, seed: int = 0, stream_index: int = 0) -> Dataset:
    """Draw ``n`` i.i.d. observations; identical arguments give identical data."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = stream(seed, stream_index)
    rt = spec.r_tilde
    fam = spec.family
    if fam in ("gaussian_boundary", "gaussian_interior"):
        x = rng.random((n, spec.d))
        y = rng.standard_normal((n, spec.m))
        y[:, 0] += x[:, 0]
        return Dataset(x, y)
    if fam == "log_correction":
        x = _uniform_ball(rng, n, spec.d, rt)
    elif fam == "cubic_support" or (fam == "holder_twopoint" and spec.params["interior"]):
        x = rng.uniform(-rt, rt, size=(n, 1))
    elif fam == "holder_twopoint":
        x = rng.uniform(0.0, rt, size=(n, 1))
    elif fam == "null_twopoint":
        x = rng.random((n, 1))
    else:
        raise ValueError(fam)
    pi = success_prob(spec, x)
    y = np.zeros((n, spec.m))
    y[:, 0] = (rng.random(n) < pi).astype(float)
    return Dataset(x, y)
