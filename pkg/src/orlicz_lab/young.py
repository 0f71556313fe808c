"""Young (Orlicz) functions, their convex conjugates and growth checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from orlicz_lab._roots import bisect_increasing

LOG_MAX = math.log(np.finfo(float).max)  # ~709.78


class SaturationError(OverflowError):
    """ψ (or ψ') left the representable range of a double."""

    def __init__(self, family: str, threshold: float, x: float):
        self.family = family
        self.threshold = threshold
        self.x = x
        super().__init__(
            f"{family}: argument {x:.6g} exceeds saturation threshold {threshold:.6g}"
        )


class UnboundedConjugateError(ValueError):
    """ψ' is bounded by ``slope_bound`` and the conjugate was asked beyond it."""

    def __init__(self, slope_bound: float, y: float):
        self.slope_bound = slope_bound
        self.y = y
        super().__init__(f"conjugate is +inf for y={y:.6g} > sup ψ' = {slope_bound:.6g}")


class Family(str, Enum):
    POWER = "power"
    SCALED_POWER = "scaled_power"
    POWER_LOG = "power_log"
    EXP_MINUS_ONE = "exp"
    EXP_SQUARE_MINUS_ONE = "exp_square"
    PIECEWISE = "piecewise"


_ALIASES = {
    "power": Family.POWER,
    "scaled_power": Family.SCALED_POWER,
    "scaledpower": Family.SCALED_POWER,
    "power_log": Family.POWER_LOG,
    "powerlog": Family.POWER_LOG,
    "exp": Family.EXP_MINUS_ONE,
    "exp_minus_one": Family.EXP_MINUS_ONE,
    "expminusone": Family.EXP_MINUS_ONE,
    "exp_square": Family.EXP_SQUARE_MINUS_ONE,
    "exp_square_minus_one": Family.EXP_SQUARE_MINUS_ONE,
    "expsquareminusone": Family.EXP_SQUARE_MINUS_ONE,
    "psi2": Family.EXP_SQUARE_MINUS_ONE,
    "piecewise": Family.PIECEWISE,
    "piecewise_linear": Family.PIECEWISE,
}


@dataclass(frozen=True)
class YoungFunction:
    """A parametric convex gauge ψ on [0, ∞) with ψ(0) = 0.

    ``params`` holds ``(p,)`` for power, ``(p, c)`` for scaled power
    (ψ = c·x^p), nothing for the log/exp families, and a tuple of
    ``(x_k, slope_k)`` pairs for piecewise-linear gauges (slope_k applies on
    ``[x_k, x_{k+1})``, first breakpoint at 0).
    """

    family: Family
    params: tuple = ()
    label: str = ""
    saturation: float | None = None

    def __post_init__(self):
        fam = Family(self.family)
        object.__setattr__(self, "family", fam)
        if fam is Family.POWER:
            (p,) = self.params
            if not p >= 1:
                raise ValueError(f"power exponent must be >= 1, got {p}")
        elif fam is Family.SCALED_POWER:
            p, c = self.params
            if not (p >= 1 and c > 0):
                raise ValueError(f"scaled power needs p >= 1 and c > 0, got {self.params}")
        elif fam is Family.PIECEWISE:
            pts = tuple((float(x), float(s)) for x, s in self.params)
            if not pts or pts[0][0] != 0.0:
                raise ValueError("piecewise gauge must start at x = 0")
            xs = [x for x, _ in pts]
            slopes = [s for _, s in pts]
            if any(b <= a for a, b in zip(xs, xs[1:])):
                raise ValueError("piecewise breakpoints must be strictly increasing")
            if slopes[0] < 0 or any(b < a for a, b in zip(slopes, slopes[1:])):
                raise ValueError("piecewise slopes must be >= 0 and nondecreasing")
            object.__setattr__(self, "params", pts)
        elif self.params:
            raise ValueError(f"{fam.value} takes no parameters")
        if not self.label:
            object.__setattr__(self, "label", self.describe())
        if self.saturation is None:
            object.__setattr__(self, "saturation", _default_saturation(self))

    # -- constructors -----------------------------------------------------
    @classmethod
    def power(cls, p: float) -> "YoungFunction":
        return cls(Family.POWER, (float(p),))

    @classmethod
    def scaled_power(cls, p: float, c: float) -> "YoungFunction":
        return cls(Family.SCALED_POWER, (float(p), float(c)))

    @classmethod
    def power_log(cls) -> "YoungFunction":
        return cls(Family.POWER_LOG)

    @classmethod
    def exp_minus_one(cls) -> "YoungFunction":
        return cls(Family.EXP_MINUS_ONE)

    @classmethod
    def exp_square_minus_one(cls) -> "YoungFunction":
        return cls(Family.EXP_SQUARE_MINUS_ONE)

    @classmethod
    def piecewise(cls, points) -> "YoungFunction":
        return cls(Family.PIECEWISE, tuple(tuple(pt) for pt in points))

    @classmethod
    def from_config(cls, spec) -> "YoungFunction":
        """Build from ``{"family": "power", "p": 1.5}`` or ``"power:1.5"``."""
        if isinstance(spec, YoungFunction):
            return spec
        if isinstance(spec, str):
            return parse_psi(spec)
        spec = dict(spec)
        name = str(spec.pop("family")).lower()
        try:
            fam = _ALIASES[name]
        except KeyError:
            raise ValueError(f"unknown Young family {name!r}") from None
        if fam is Family.POWER:
            return cls.power(spec["p"])
        if fam is Family.SCALED_POWER:
            return cls.scaled_power(spec["p"], spec["c"])
        if fam is Family.PIECEWISE:
            return cls.piecewise(spec["points"])
        return cls(fam)

    def to_config(self) -> dict:
        fam = self.family
        if fam is Family.POWER:
            return {"family": fam.value, "p": self.params[0]}
        if fam is Family.SCALED_POWER:
            return {"family": fam.value, "p": self.params[0], "c": self.params[1]}
        if fam is Family.PIECEWISE:
            return {"family": fam.value, "points": [list(pt) for pt in self.params]}
        return {"family": fam.value}

    def describe(self) -> str:
        fam = self.family
        if fam is Family.POWER:
            return f"x^{self.params[0]:g}"
        if fam is Family.SCALED_POWER:
            return f"{self.params[1]:g}*x^{self.params[0]:g}"
        if fam is Family.POWER_LOG:
            return "x*log(1+x)"
        if fam is Family.EXP_MINUS_ONE:
            return "exp(x)-1"
        if fam is Family.EXP_SQUARE_MINUS_ONE:
            return "exp(x^2)-1"
        return "piecewise" + "".join(f"[{x:g}:{s:g}]" for x, s in self.params)

    @property
    def slope_bound(self) -> float:
        """sup ψ' (finite only for linear growth)."""
        fam = self.family
        if fam is Family.POWER and self.params[0] == 1:
            return 1.0
        if fam is Family.SCALED_POWER and self.params[0] == 1:
            return self.params[1]
        if fam is Family.PIECEWISE:
            return self.params[-1][1]
        return math.inf

    # -- evaluation ---------------------------------------------------------
    def __call__(self, x):
        return eval_psi(self, x)


def _default_saturation(psi: YoungFunction) -> float:
    fam = psi.family
    if fam is Family.EXP_MINUS_ONE:
        return LOG_MAX
    if fam is Family.EXP_SQUARE_MINUS_ONE:
        return math.sqrt(LOG_MAX)
    if fam in (Family.POWER, Family.SCALED_POWER):
        p = psi.params[0]
        c = psi.params[1] if fam is Family.SCALED_POWER else 1.0
        return math.exp((LOG_MAX - math.log(max(c, 1.0))) / p) * 0.5
    if fam is Family.POWER_LOG:
        return np.finfo(float).max / 1e3
    return np.finfo(float).max / (1e3 * max(1.0, psi.params[-1][1]))


def parse_psi(text: str) -> YoungFunction:
    """Parse the CLI shorthand: ``power:1.5``, ``scaled_power:2:0.5``, ``exp``,
    ``exp_square``, ``power_log`` or ``piecewise:0,0.5;1,2``."""
    name, _, rest = text.strip().partition(":")
    try:
        fam = _ALIASES[name.lower()]
    except KeyError:
        raise ValueError(f"unknown Young family {name!r}") from None
    if fam is Family.POWER:
        return YoungFunction.power(float(rest))
    if fam is Family.SCALED_POWER:
        p, c = rest.split(":")
        return YoungFunction.scaled_power(float(p), float(c))
    if fam is Family.PIECEWISE:
        pts = [tuple(float(v) for v in chunk.split(",")) for chunk in rest.split(";") if chunk]
        return YoungFunction.piecewise(pts)
    if rest:
        raise ValueError(f"{fam.value} takes no parameters")
    return YoungFunction(fam)


def _as_array(x):
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0) or not np.all(np.isfinite(arr)):
        raise ValueError("Young functions are evaluated on finite x >= 0")
    return arr


def _check_saturation(psi: YoungFunction, arr: np.ndarray):
    if arr.size and arr.max() > psi.saturation:
        raise SaturationError(psi.family.value, psi.saturation, float(arr.max()))


def _piecewise_tables(psi: YoungFunction):
    xs = np.array([x for x, _ in psi.params])
    slopes = np.array([s for _, s in psi.params])
    # value of ψ at each breakpoint
    vals = np.concatenate([[0.0], np.cumsum(slopes[:-1] * np.diff(xs))])
    return xs, slopes, vals


def eval_psi(psi: YoungFunction, x):
    """ψ(x), elementwise.  Raises :class:`SaturationError` instead of
    returning infinity."""
    arr = _as_array(x)
    _check_saturation(psi, arr)
    fam = psi.family
    if fam is Family.POWER:
        out = np.power(arr, psi.params[0])
    elif fam is Family.SCALED_POWER:
        out = psi.params[1] * np.power(arr, psi.params[0])
    elif fam is Family.POWER_LOG:
        out = arr * np.log1p(arr)
    elif fam is Family.EXP_MINUS_ONE:
        out = np.expm1(arr)
    elif fam is Family.EXP_SQUARE_MINUS_ONE:
        out = np.expm1(arr * arr)
    else:
        xs, slopes, vals = _piecewise_tables(psi)
        k = np.searchsorted(xs, arr, side="right") - 1
        out = vals[k] + slopes[k] * (arr - xs[k])
    if not np.all(np.isfinite(out)):
        raise SaturationError(psi.family.value, psi.saturation, float(arr.max()))
    return out if out.ndim else float(out)


def derivative(psi: YoungFunction, x):
    """Right derivative ψ'(x), elementwise (x = 0 gives ψ'(0+))."""
    arr = _as_array(x)
    _check_saturation(psi, arr)
    fam = psi.family
    if fam is Family.POWER:
        p = psi.params[0]
        out = p * np.power(arr, p - 1) if p != 1 else np.ones_like(arr)
    elif fam is Family.SCALED_POWER:
        p, c = psi.params
        out = c * p * np.power(arr, p - 1) if p != 1 else np.full_like(arr, c)
    elif fam is Family.POWER_LOG:
        out = np.log1p(arr) + arr / (1.0 + arr)
    elif fam is Family.EXP_MINUS_ONE:
        out = np.exp(arr)
    elif fam is Family.EXP_SQUARE_MINUS_ONE:
        with np.errstate(divide="ignore"):
            logd = np.log(2 * arr) + arr * arr
        if np.any(logd > LOG_MAX):
            raise SaturationError(psi.family.value, psi.saturation, float(arr.max()))
        out = 2 * arr * np.exp(arr * arr)
    else:
        xs, slopes, _ = _piecewise_tables(psi)
        out = slopes[np.searchsorted(xs, arr, side="right") - 1]
    if not np.all(np.isfinite(out)):
        raise SaturationError(psi.family.value, psi.saturation, float(arr.max()))
    return out if out.ndim else float(out)


def inverse(psi: YoungFunction, y):
    """Smallest x >= 0 with ψ(x) = y (y > 0), elementwise."""
    arr = np.asarray(y, dtype=float)
    if np.any(arr < 0):
        raise ValueError("inverse needs y >= 0")
    fam = psi.family
    if fam is Family.POWER:
        out = np.power(arr, 1.0 / psi.params[0])
    elif fam is Family.SCALED_POWER:
        out = np.power(arr / psi.params[1], 1.0 / psi.params[0])
    elif fam is Family.EXP_MINUS_ONE:
        out = np.log1p(arr)
    elif fam is Family.EXP_SQUARE_MINUS_ONE:
        out = np.sqrt(np.log1p(arr))
    else:
        hi = np.ones_like(arr)
        while True:
            short = eval_psi(psi, hi) < arr
            if not np.any(short):
                break
            hi = np.where(short, hi * 4.0, hi)
        lo, hi = bisect_increasing(lambda t: eval_psi(psi, t), arr, 0.0, hi,
                                   rtol=1e-15, atol=1e-300)
        # ψ(lo) <= y <= ψ(hi); hi is the safe side for a norm bracket
        out = hi
    return out if np.ndim(out) else float(out)


def conjugate_eval(psi: YoungFunction, y):
    """Young complement ψ*(y) = sup_{x>=0} (x·y − ψ(x)).

    Smooth families invert ψ' by bisection and evaluate at the maximiser;
    piecewise-linear gauges are maximised exactly over their breakpoints.
    """
    y = float(y)
    if y < 0 or not math.isfinite(y):
        raise ValueError("conjugate_eval needs finite y >= 0")
    bound = psi.slope_bound
    if y > bound:
        raise UnboundedConjugateError(bound, y)
    if psi.family is Family.PIECEWISE:
        xs, _, vals = _piecewise_tables(psi)
        return float(max(0.0, np.max(xs * y - vals)))
    if y <= derivative(psi, 0.0) or math.isfinite(bound):
        # linear growth (p = 1) has ψ' constant, so y <= ψ'(0) here
        return 0.0
    hi = 1.0
    while derivative(psi, hi) < y:
        hi *= 4.0
        if hi > psi.saturation:
            raise SaturationError(psi.family.value, psi.saturation, hi)
    lo = hi
    while derivative(psi, lo) >= y:
        hi, lo = lo, lo * 0.25
        if lo < 1e-300:
            # maximiser below any representable scale: ψ*(y) underflows
            return 0.0
    lo, hi = bisect_increasing(lambda t: derivative(psi, t), y, lo, hi, rtol=1e-15)
    lo, hi = float(lo), float(hi)
    best = max(lo * y - eval_psi(psi, lo), hi * y - eval_psi(psi, hi))
    return max(0.0, best)


def log_eval(psi: YoungFunction, x):
    """log ψ(x) for x > 0, valid past the saturation threshold."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr <= 0):
        raise ValueError("log_eval needs x > 0")
    fam = psi.family
    with np.errstate(divide="ignore"):
        if fam is Family.POWER:
            out = psi.params[0] * np.log(arr)
        elif fam is Family.SCALED_POWER:
            out = math.log(psi.params[1]) + psi.params[0] * np.log(arr)
        elif fam is Family.POWER_LOG:
            out = np.log(arr) + np.log(np.log1p(arr))
        elif fam is Family.EXP_MINUS_ONE:
            out = arr + np.log1p(-np.exp(-arr))
        elif fam is Family.EXP_SQUARE_MINUS_ONE:
            sq = arr * arr
            out = sq + np.log1p(-np.exp(-sq))
        else:
            out = np.log(eval_psi(psi, arr))
    return out if out.ndim else float(out)


def sqrt_gauge(psi: YoungFunction, x):
    """x ↦ sqrt(ψ(x)); a gauge for modular reporting only (may be non-convex)."""
    return np.sqrt(eval_psi(psi, x))


# -- growth hypotheses ------------------------------------------------------


class Hypothesis(str, Enum):
    YOUNG = "young"
    LINEAR_BELOW_EXP_ABOVE = "linear_below_exp_above"
    LINEAR_BELOW_SQUARE_ABOVE = "linear_below_square_above"
    DELTA2 = "delta2"


_HYP_ALIASES = {
    "young": Hypothesis.YOUNG,
    "linear_below_exp_above": Hypothesis.LINEAR_BELOW_EXP_ABOVE,
    "exp": Hypothesis.LINEAR_BELOW_EXP_ABOVE,
    "khinchin": Hypothesis.LINEAR_BELOW_EXP_ABOVE,
    "linear_below_square_above": Hypothesis.LINEAR_BELOW_SQUARE_ABOVE,
    "square": Hypothesis.LINEAR_BELOW_SQUARE_ABOVE,
    "kp": Hypothesis.LINEAR_BELOW_SQUARE_ABOVE,
    "delta2": Hypothesis.DELTA2,
    "mz": Hypothesis.DELTA2,
}


def parse_hypothesis(name) -> Hypothesis:
    if isinstance(name, Hypothesis):
        return name
    try:
        return _HYP_ALIASES[str(name).lower().replace("-", "_")]
    except KeyError:
        raise ValueError(f"unknown hypothesis {name!r}") from None


@dataclass
class GrowthReport:
    hypothesis: Hypothesis
    grid: list
    worst_ratio_low: float
    worst_ratio_high: float
    satisfied: bool
    cap: float
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "hypothesis": self.hypothesis.value,
            "grid": {"min": self.grid[0], "max": self.grid[-1], "points": len(self.grid)},
            "worst_ratio_low": _finite_or_str(self.worst_ratio_low),
            "worst_ratio_high": _finite_or_str(self.worst_ratio_high),
            "satisfied": self.satisfied,
            "cap": self.cap,
            "notes": list(self.notes),
        }


def _finite_or_str(v: float):
    return v if math.isfinite(v) else ("inf" if v > 0 else "-inf")


def default_grid(lo: float = 1e-6, hi: float = 1e6, points: int = 512) -> np.ndarray:
    return np.logspace(math.log10(lo), math.log10(hi), points)


def _safe_eval(psi: YoungFunction, grid: np.ndarray) -> np.ndarray:
    """ψ on the grid with +inf where ψ saturates."""
    out = np.full(grid.shape, np.inf)
    ok = grid <= psi.saturation
    if np.any(ok):
        try:
            out[ok] = eval_psi(psi, grid[ok])
        except SaturationError:
            for i in np.flatnonzero(ok):
                try:
                    out[i] = eval_psi(psi, grid[i])
                except SaturationError:
                    pass
    return out


def verify_young_conditions(psi: YoungFunction, grid=None, growth_threshold: float = 10.0,
                            low_points: int = 8, rtol: float = 1e-12) -> GrowthReport:
    """Falsification test of the Young-function axioms on a finite grid.

    Checks ψ(0) = 0, monotonicity, midpoint convexity between consecutive
    grid points, that ψ(x)/x decreases towards the smallest grid points, and
    that ψ(x)/x exceeds ``growth_threshold`` at the largest one.
    """
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
    if grid.size == 0 or np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be nonempty, positive and strictly increasing")
    notes = ["finite grid: growth at 0 and infinity can be falsified, not certified"]
    vals = _safe_eval(psi, grid)
    finite = np.isfinite(vals)
    if not np.all(finite):
        notes.append(f"saturated for x >= {grid[~finite][0]:.6g} (treated as unbounded growth)")
    ok = eval_psi(psi, 0.0) == 0.0
    if not ok:
        notes.append("psi(0) != 0")
    fv = vals[finite]
    if np.any(np.diff(fv) < -rtol * np.abs(fv[1:])):
        ok = False
        notes.append("not monotone")
    # midpoint convexity on consecutive finite pairs
    g = grid[finite]
    if g.size >= 2:
        mids = _safe_eval(psi, 0.5 * (g[:-1] + g[1:]))
        chord = 0.5 * (fv[:-1] + fv[1:])
        bad = mids > chord * (1 + rtol) + 1e-300
        if np.any(bad):
            ok = False
            notes.append(f"midpoint convexity fails near x={g[:-1][bad][0]:.6g}")
    ratios = np.where(finite, vals / grid, np.inf)
    k = min(low_points, ratios.size)
    low = ratios[:k]
    if np.any(np.diff(low) < -rtol * np.abs(low[1:])):
        ok = False
        notes.append("psi(x)/x does not decrease towards the smallest grid points")
    high = float(ratios[-1])
    if not high >= growth_threshold:
        ok = False
        notes.append(f"psi(x)/x = {high:.6g} at the top of the grid, below {growth_threshold:g}")
    return GrowthReport(Hypothesis.YOUNG, grid.tolist(), float(ratios[0]), high, bool(ok),
                        growth_threshold, notes)


def check_hypothesis(psi: YoungFunction, hypothesis, grid=None, cap: float = 100.0) -> GrowthReport:
    """Ratio test for the two-sided growth hypotheses on ψ.

    ``worst_ratio_low`` is max x/ψ(x); ``worst_ratio_high`` is the max of
    ψ(x)/e^x, ψ(x)/x² or ψ(2x)/ψ(x) depending on ``hypothesis``.  Both must
    be finite and at most ``cap``.  The default grid is [1, 10^3]: on a
    probability space only large arguments matter for these comparisons.
    """
    hyp = parse_hypothesis(hypothesis)
    if hyp is Hypothesis.YOUNG:
        return verify_young_conditions(psi, grid)
    grid = default_grid(1.0, 1e3) if grid is None else np.asarray(grid, dtype=float)
    if grid.size == 0 or np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be nonempty, positive and strictly increasing")
    notes = ["finite grid: ratios are lower bounds for the true constants"]
    logv = log_eval(psi, grid)
    logx = np.log(grid)
    if hyp is Hypothesis.LINEAR_BELOW_EXP_ABOVE:
        log_high = logv - grid
    elif hyp is Hypothesis.LINEAR_BELOW_SQUARE_ABOVE:
        log_high = logv - 2 * logx
    else:
        log_high = log_eval(psi, 2 * grid) - logv
    with np.errstate(over="ignore"):
        low = float(np.exp(np.max(logx - logv)))
        high = float(np.exp(np.max(log_high)))
    if np.any(grid > psi.saturation):
        notes.append("psi exceeds double range on part of the grid; ratios taken in log space")
    satisfied = math.isfinite(low) and math.isfinite(high) and low <= cap and high <= cap
    return GrowthReport(hyp, grid.tolist(), low, high, bool(satisfied), cap, notes)
