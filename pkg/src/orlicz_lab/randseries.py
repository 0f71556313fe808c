"""Rademacher sums, mean-zero random families and square functions.

Random draws come from numpy's Philox counter-based generator keyed by
``(seed, role, stream)``: stream ``n`` of a run is reproducible on its own,
independent of how many other streams were drawn or in which order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import integrate, special

from orlicz_lab.measure import (
    SimpleFunction,
    combine,
    fresh_domain,
    uniform_atoms,
)

MAX_ENUM_N = 24
MAX_DYADIC_N = 52

ROLE_SAMPLE = 0
ROLE_COPY = 1
ROLE_SWEEP = 2


def counter_rng(seed: int, role: int, stream: int) -> np.random.Generator:
    """Independent Philox stream for ``(seed, role, stream)``."""
    ss = np.random.SeedSequence([int(seed) & (2**64 - 1), int(role), int(stream)])
    return np.random.Generator(np.random.Philox(ss))


def rademacher_eval(n: int, t: float) -> int:
    """r_n(t) = sign(sin(2π·2^n·t)) from the exact dyadic fraction of 2^n·t."""
    if not 1 <= n <= MAX_DYADIC_N:
        raise ValueError(f"n must lie in [1, {MAX_DYADIC_N}], got {n}")
    if not 0 <= t < 1:
        raise ValueError("t must lie in [0, 1)")
    x = math.ldexp(t, n)
    frac = x - math.floor(x)
    if frac == 0.0 or frac == 0.5:
        return 0
    return 1 if frac < 0.5 else -1


def _coefficients(x) -> np.ndarray:
    arr = np.asarray(x)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("need a nonempty coefficient vector")
    if not np.all(np.isfinite(arr)):
        raise ValueError("coefficients must be finite")
    return arr if np.iscomplexobj(arr) else arr.astype(float)


def rademacher_sum_distribution(x) -> SimpleFunction:
    """Exact law of S_N = Σ x_n r_n over the 2^N equiprobable sign patterns.

    Built one coefficient at a time (S ± x_n), merging atoms with equal
    values after each step.
    """
    x = _coefficients(x)
    if x.size > MAX_ENUM_N:
        raise ValueError(
            f"exact enumeration is capped at N={MAX_ENUM_N}; use monte_carlo_matrix instead"
        )
    vals = np.zeros(1, dtype=x.dtype)
    mass = np.ones(1)
    for xn in x:
        vals = np.concatenate([vals + xn, vals - xn])
        mass = np.concatenate([mass, mass]) * 0.5
        vals, inv = np.unique(vals, return_inverse=True)
        mass = np.bincount(inv.ravel(), weights=mass, minlength=vals.size)
    return SimpleFunction(np.arange(vals.size), vals, mass, fresh_domain("R"))


class Kind(str, Enum):
    RADEMACHER = "rademacher"
    UNIFORM_CENTERED = "uniform_centered"
    TWO_POINT = "two_point"
    GAUSSIAN_TRUNCATED = "gaussian_truncated"
    PARETO_CENTERED = "pareto_centered"


_KIND_ALIASES = {
    "rademacher": Kind.RADEMACHER,
    "rademacher_sign": Kind.RADEMACHER,
    "sign": Kind.RADEMACHER,
    "uniform": Kind.UNIFORM_CENTERED,
    "uniform_centered": Kind.UNIFORM_CENTERED,
    "two_point": Kind.TWO_POINT,
    "two_point_mean_zero": Kind.TWO_POINT,
    "gaussian": Kind.GAUSSIAN_TRUNCATED,
    "gaussian_truncated": Kind.GAUSSIAN_TRUNCATED,
    "pareto": Kind.PARETO_CENTERED,
    "pareto_centered": Kind.PARETO_CENTERED,
}

_PARAM_NAMES = {
    Kind.RADEMACHER: (),
    Kind.UNIFORM_CENTERED: ("a",),
    Kind.TWO_POINT: ("v1", "v2", "m"),
    Kind.GAUSSIAN_TRUNCATED: ("R",),
    Kind.PARETO_CENTERED: ("alpha", "cutoff"),
}


@dataclass(frozen=True)
class RvFamily:
    """A mean-zero law with finite second moment.

    ``uniform_centered(a)`` is uniform on (−a, a); ``two_point(v1, v2, m)``
    takes v1 with probability m and v2 otherwise (m·v1 + (1−m)·v2 = 0);
    ``gaussian_truncated(R)`` is N(0,1) conditioned on |Z| <= R;
    ``pareto_centered(alpha, cutoff)`` is a Pareto(alpha) variable on
    [1, cutoff] minus its exact mean.
    """

    kind: Kind
    params: tuple = field(default=())

    def __post_init__(self):
        kind = Kind(self.kind)
        object.__setattr__(self, "kind", kind)
        params = tuple(float(v) for v in self.params)
        object.__setattr__(self, "params", params)
        if len(params) != len(_PARAM_NAMES[kind]):
            raise ValueError(f"{kind.value} takes parameters {_PARAM_NAMES[kind]}")
        if kind is Kind.UNIFORM_CENTERED and not params[0] > 0:
            raise ValueError("uniform half-width must be positive")
        if kind is Kind.TWO_POINT:
            v1, v2, m = params
            if not 0 < m < 1:
                raise ValueError("two_point mass must lie in (0, 1)")
            if abs(m * v1 + (1 - m) * v2) > 1e-12 * max(abs(v1), abs(v2), 1.0):
                raise ValueError("two_point law must have mean zero")
        if kind is Kind.GAUSSIAN_TRUNCATED and not params[0] > 0:
            raise ValueError("truncation radius must be positive")
        if kind is Kind.PARETO_CENTERED:
            alpha, cutoff = params
            if not (alpha > 2 and cutoff > 1):
                raise ValueError("pareto needs alpha > 2 and cutoff > 1")

    @classmethod
    def rademacher(cls):
        return cls(Kind.RADEMACHER)

    @classmethod
    def uniform_centered(cls, a: float = math.sqrt(3.0)):
        return cls(Kind.UNIFORM_CENTERED, (a,))

    @classmethod
    def two_point(cls, v1: float = 3.0, v2: float = -1.0, m: float = 0.25):
        return cls(Kind.TWO_POINT, (v1, v2, m))

    @classmethod
    def gaussian_truncated(cls, R: float = 4.0):
        return cls(Kind.GAUSSIAN_TRUNCATED, (R,))

    @classmethod
    def pareto_centered(cls, alpha: float = 3.0, cutoff: float = 100.0):
        return cls(Kind.PARETO_CENTERED, (alpha, cutoff))

    @classmethod
    def from_config(cls, spec) -> "RvFamily":
        """``{"kind": "uniform_centered", "a": 1.7320508}`` or ``"uniform:1.73"``."""
        if isinstance(spec, RvFamily):
            return spec
        if isinstance(spec, str):
            name, *rest = spec.strip().split(":")
            kind = _lookup_kind(name)
            if not rest:
                return _DEFAULTS[kind]()
            return cls(kind, tuple(float(v) for v in rest))
        spec = dict(spec)
        kind = _lookup_kind(spec.pop("kind"))
        names = _PARAM_NAMES[kind]
        if not any(n in spec for n in names):
            return _DEFAULTS[kind]()
        return cls(kind, tuple(spec[n] for n in names))

    def to_config(self) -> dict:
        return {"kind": self.kind.value, **dict(zip(_PARAM_NAMES[self.kind], self.params))}

    def describe(self) -> str:
        return ":".join([self.kind.value, *(f"{v:g}" for v in self.params)])

    # -- sampling -----------------------------------------------------------
    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        u = rng.random(size)
        kind = self.kind
        if kind is Kind.RADEMACHER:
            return np.where(u < 0.5, -1.0, 1.0)
        if kind is Kind.UNIFORM_CENTERED:
            return self.params[0] * (2.0 * u - 1.0)
        if kind is Kind.TWO_POINT:
            v1, v2, m = self.params
            return np.where(u < m, v1, v2)
        if kind is Kind.GAUSSIAN_TRUNCATED:
            (R,) = self.params
            lo = special.ndtr(-R)
            z = special.ndtri(lo + u * (1.0 - 2.0 * lo))
            return np.clip(z, -R, R)
        alpha, cutoff = self.params
        tail = cutoff ** (-alpha)
        x = np.power(1.0 - u * (1.0 - tail), -1.0 / alpha)
        return x - self.mean_offset()

    def mean_offset(self) -> float:
        """Mean of the truncated Pareto law before centering."""
        alpha, c = self.params
        return alpha / (alpha - 1) * (1 - c ** (1 - alpha)) / (1 - c ** (-alpha))

    # -- exact moments --------------------------------------------------------
    def abs_moment(self, r: float) -> float:
        """E|X|^r for the exact law."""
        kind = self.kind
        if kind is Kind.RADEMACHER:
            return 1.0
        if kind is Kind.UNIFORM_CENTERED:
            return self.params[0] ** r / (r + 1)
        if kind is Kind.TWO_POINT:
            v1, v2, m = self.params
            return m * abs(v1) ** r + (1 - m) * abs(v2) ** r
        if kind is Kind.GAUSSIAN_TRUNCATED:
            (R,) = self.params
            z = special.ndtr(R) - special.ndtr(-R)
            dens = lambda x: x**r * math.exp(-x * x / 2) / math.sqrt(2 * math.pi)  # noqa: E731
            return 2 * integrate.quad(dens, 0, R, epsabs=1e-14, epsrel=1e-13)[0] / z
        alpha, c = self.params
        mu = self.mean_offset()
        norm = 1 - c ** (-alpha)
        dens = lambda x: abs(x - mu) ** r * alpha * x ** (-alpha - 1) / norm  # noqa: E731
        pts = [mu] if 1 < mu < c else None
        return integrate.quad(dens, 1, c, points=pts, epsabs=1e-14, epsrel=1e-13, limit=200)[0]

    def l1(self) -> float:
        return self.abs_moment(1.0)

    def l2(self) -> float:
        return math.sqrt(self.abs_moment(2.0))


def _lookup_kind(name) -> Kind:
    try:
        return _KIND_ALIASES[str(name).lower()]
    except KeyError:
        raise ValueError(f"unknown random-variable family {name!r}") from None


_DEFAULTS = {
    Kind.RADEMACHER: RvFamily.rademacher,
    Kind.UNIFORM_CENTERED: RvFamily.uniform_centered,
    Kind.TWO_POINT: RvFamily.two_point,
    Kind.GAUSSIAN_TRUNCATED: RvFamily.gaussian_truncated,
    Kind.PARETO_CENTERED: RvFamily.pareto_centered,
}


def sample_matrix(family: RvFamily, N: int, M: int, seed: int, role: int = ROLE_SAMPLE) -> np.ndarray:
    """(N, M) array; row n drawn from the counter stream (seed, role, n)."""
    if M < 1 or N < 1:
        raise ValueError("need N >= 1 and M >= 1")
    return np.stack([family.sample(counter_rng(seed, role, n), M) for n in range(N)])


def monte_carlo_matrix(family: RvFamily, N: int, M: int, seed: int) -> list:
    """N independent copies of ``family`` sampled jointly M times.

    Each X_n is a :class:`SimpleFunction` with masses 1/M on one shared
    M-point domain, so sums and square functions combine pointwise.
    """
    rows = sample_matrix(family, N, M, seed)
    dom = fresh_domain("MC")
    return [uniform_atoms(row, dom) for row in rows]


def symmetrize(family: RvFamily, N: int, M: int, seed: int) -> list:
    """X̃_n = X_n − X́_n with X́_n drawn from an independent counter stream."""
    x = sample_matrix(family, N, M, seed, ROLE_SAMPLE)
    x_copy = sample_matrix(family, N, M, seed, ROLE_COPY)
    dom = fresh_domain("SYM")
    return [uniform_atoms(row, dom) for row in x - x_copy]


def sum_functions(xs) -> SimpleFunction:
    xs = list(xs)
    if not xs:
        raise ValueError("need at least one function")
    out = xs[0]
    for x in xs[1:]:
        out = combine(out, x, "add")
    return out


def square_function(xs) -> SimpleFunction:
    """Pointwise (Σ |X_n|²)^{1/2} on the shared domain."""
    xs = list(xs)
    if not xs:
        raise ValueError("need at least one function")
    acc = xs[0].with_values(np.abs(xs[0].values) ** 2)
    for x in xs[1:]:
        acc = combine(acc, x.with_values(np.abs(x.values) ** 2), "add")
    return acc.with_values(np.sqrt(acc.values))
