"""Luxemburg, Orlicz (Amemiya), L^p and Lorentz norms of simple functions."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from orlicz_lab._roots import ConvergenceError, bisect_increasing, golden_min
from orlicz_lab.measure import SimpleFunction, rearrangement
from orlicz_lab.young import SaturationError, YoungFunction, derivative, eval_psi, inverse

DEFAULT_TOL = 1e-10
BRACKET_FACTOR = 4.0
MAX_ITER = 200


class Method(str, Enum):
    CLOSED = "closed"
    BISECTION = "bisection"
    AMEMIYA = "amemiya"
    DUAL_ORACLE = "dual_oracle"
    STEP_QUADRATURE = "step_quadrature"


@dataclass(frozen=True)
class NormValue:
    value: float
    method: Method
    err_bound: float = 0.0

    def __float__(self):
        return self.value

    def to_dict(self) -> dict:
        return {"value": self.value, "method": self.method.value, "err_bound": self.err_bound}

    def format(self) -> str:
        return f"{self.value:.12g}"


@dataclass(frozen=True)
class LorentzIndex:
    """Exponents (p, q) of L^{p,q}; ``q = math.inf`` for the weak space."""

    p: float
    q: float

    def __post_init__(self):
        p, q = float(self.p), float(self.q)
        if not (p > 1 and math.isfinite(p)):
            raise ValueError(f"Lorentz p must lie in (1, inf), got {p}")
        if not q >= 1:
            raise ValueError(f"Lorentz q must lie in [1, inf], got {q}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    def __str__(self):
        return f"({self.p:g},{'inf' if math.isinf(self.q) else f'{self.q:g}'})"


def _zero():
    return NormValue(0.0, Method.CLOSED, 0.0)


def _check_scale(amax: float):
    if not math.isfinite(1.0 / amax):
        raise ValueError(f"largest |value| {amax!r} is subnormal; rescale the input")


def _modular_scaled(psi: YoungFunction, a: np.ndarray, m: np.ndarray, scale: float) -> float:
    """ρ_ψ(scale·|f|) with +inf on saturation."""
    x = a * scale
    if x.max() > psi.saturation:
        return math.inf
    try:
        return float(np.dot(m, eval_psi(psi, x)))
    except SaturationError:
        return math.inf


def luxemburg_norm(psi: YoungFunction, f: SimpleFunction, tol: float = DEFAULT_TOL) -> NormValue:
    """inf{λ > 0 : ρ_ψ(f/λ) <= 1} by bisection on the decreasing map λ ↦ ρ_ψ(f/λ).

    The returned λ is the upper end of the final bracket, so ρ_ψ(f/λ) <= 1;
    iteration continues until the bracket is narrower than ``tol·λ`` and the
    modular at λ is at least ``1 − 10·tol``.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if f.is_zero():
        return _zero()
    a = f.abs_values
    m = f.masses
    amax = float(a.max())
    _check_scale(amax)
    m_top = float(m[a == amax].sum())
    rho = lambda lam: _modular_scaled(psi, a, m, 1.0 / lam)  # noqa: E731

    hi = amax / float(inverse(psi, 1.0))
    lo = amax / float(inverse(psi, 1.0 / m_top))
    for _ in range(MAX_ITER):
        if rho(hi) <= 1.0:
            break
        hi *= BRACKET_FACTOR
    else:
        raise ConvergenceError(f"could not bracket Luxemburg norm above (hi={hi:g})")
    lo = min(lo, hi)
    for _ in range(MAX_ITER):
        if rho(lo) >= 1.0:
            break
        lo /= BRACKET_FACTOR
    else:
        raise ConvergenceError(f"could not bracket Luxemburg norm below (lo={lo:g})")

    for _ in range(MAX_ITER):
        if hi - lo <= tol * hi and rho(hi) >= 1.0 - 10 * tol:
            return NormValue(hi, Method.BISECTION, hi - lo)
        mid = math.sqrt(lo) * math.sqrt(hi) if hi > 2 * lo else 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if rho(mid) <= 1.0:
            hi = mid
        else:
            lo = mid
    if hi - lo <= tol * hi:
        # modular jumps across the bracket (flat or kinked ψ): still the minimal λ
        return NormValue(hi, Method.BISECTION, hi - lo)
    raise ConvergenceError(
        f"Luxemburg bisection stalled: bracket [{lo!r}, {hi!r}], rho(hi)={rho(hi)!r}"
    )


def orlicz_norm(psi: YoungFunction, f: SimpleFunction, tol: float = DEFAULT_TOL) -> NormValue:
    """Orlicz norm as the Amemiya infimum inf_{k>0} (1 + ρ_ψ(k·f)) / k.

    A doubling scan in k locates the bracket around the minimiser of this
    quasi-convex function; golden-section search refines it.  ``err_bound``
    is the spread of the objective over the final bracket.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if f.is_zero():
        return _zero()
    a = f.abs_values
    m = f.masses
    _check_scale(float(a.max()))
    s = 1.0 / float(a.max())

    def h(k):
        r = _modular_scaled(psi, a, m, k)
        return (1.0 + r) / k

    ks, hs = [], []
    j = -4
    while True:
        k = s * 2.0**j
        ks.append(k)
        hs.append(h(k))
        if len(hs) >= 2 and hs[-1] > hs[-2]:
            break
        if j >= 64:
            # objective still decreasing: infimum attained only as k → ∞
            return NormValue(hs[-1], Method.AMEMIYA, 1.0 / ks[-1])
        j += 1
    i = int(np.argmin(hs))
    left = ks[i - 1] if i > 0 else ks[0] / 2.0
    right = ks[i + 1]
    k_best, h_best, _, _, h_edge = golden_min(h, left, right, xtol_rel=min(tol, 1e-12))
    h_best = min(h_best, hs[i])
    err = max(0.0, min(h_edge, max(hs[max(i - 1, 0)], hs[i + 1])) - h_best)
    return NormValue(float(h_best), Method.AMEMIYA, float(err))


def dual_norm_oracle(psi: YoungFunction, f: SimpleFunction, grid: int | None = None,
                     rounds: int = 8) -> NormValue:
    """Brute-force sup{∫|f|g : ρ_ψ*(g) <= 1} for functions with at most 4 atoms.

    Test-only reference for :func:`orlicz_norm`.  Every g worth considering is
    g = ψ'(s) for some s >= 0, with conjugate cost ψ*(ψ'(s)) = s·ψ'(s) − ψ(s).
    The budget of 1 is split between atoms on a grid (refined by zooming);
    the last atom takes whatever budget remains, which projects the grid
    point onto the constraint surface.
    """
    if len(f) > 4:
        raise ValueError("dual_norm_oracle is exhaustive and accepts at most 4 atoms")
    if f.is_zero():
        return NormValue(0.0, Method.DUAL_ORACLE, 0.0)
    if math.isfinite(psi.slope_bound):
        raise ValueError("dual oracle needs an unbounded derivative")
    keep = f.abs_values > 0
    w = f.masses[keep] * f.abs_values[keep]
    m = f.masses[keep]
    n = w.size

    def cost(s):
        return s * derivative(psi, s) - eval_psi(psi, s)

    def cost_inv(b):
        b = np.asarray(b, dtype=float)
        hi = np.ones_like(b)
        while True:
            short = cost(hi) < b
            if not np.any(short):
                break
            hi = np.where(short, hi * 2.0, hi)
        # zero budget means g = ψ'(0); otherwise shrink lo geometrically so the
        # relative bisection below needs few steps even for tiny budgets
        zero = b <= 0
        lo = hi.copy()
        while True:
            over = (cost(lo) >= b) & (lo > 1e-300) & ~zero
            if not np.any(over):
                break
            hi = np.where(over, lo, hi)
            lo = np.where(over, lo / 16.0, lo)
        lo = np.where(zero | (cost(lo) >= b), 0.0, lo)
        hi = np.where(zero, 0.0, hi)
        lo, hi = bisect_increasing(cost, b, lo, hi, rtol=1e-14, atol=1e-300)
        return 0.5 * (lo + hi)

    def value(u):
        # u: (K, n) budget fractions summing to 1 per row
        s = cost_inv(u / m)
        return (w * derivative(psi, s)).sum(axis=1)

    if n == 1:
        return NormValue(float(value(np.ones((1, 1)))[0]), Method.DUAL_ORACLE, 0.0)

    g = grid or {2: 401, 3: 121, 4: 41}[n]
    lo = np.zeros(n - 1)
    hi = np.ones(n - 1)
    best_val, best_u = -math.inf, None
    spread = math.inf
    for _ in range(rounds):
        axes = [np.linspace(lo[d], hi[d], g) for d in range(n - 1)]
        pts = np.stack([ax.ravel() for ax in np.meshgrid(*axes, indexing="ij")], axis=1)
        last = 1.0 - pts.sum(axis=1)
        ok = last >= 0
        u = np.concatenate([pts[ok], last[ok, None]], axis=1)
        vals = value(u)
        k = int(np.argmax(vals))
        if vals[k] >= best_val:
            spread = abs(vals[k] - best_val) if math.isfinite(best_val) else math.inf
            best_val, best_u = float(vals[k]), u[k]
        step = (hi - lo) / (g - 1)
        lo = np.clip(best_u[:-1] - 2 * step, 0.0, 1.0)
        hi = np.clip(best_u[:-1] + 2 * step, 0.0, 1.0)
    return NormValue(best_val, Method.DUAL_ORACLE, float(spread))


def lp_norm(p: float, f: SimpleFunction) -> NormValue:
    """(Σ mass·|value|^p)^{1/p}."""
    if not p >= 1:
        raise ValueError("lp_norm needs p >= 1")
    if f.is_zero():
        return _zero()
    a = f.abs_values
    amax = float(a.max())
    if math.isinf(p):
        return NormValue(amax, Method.CLOSED, 0.0)
    val = amax * float(np.dot(f.masses, np.power(a / amax, p))) ** (1.0 / p)
    return NormValue(val, Method.CLOSED, 0.0)


def lorentz_norm(idx: LorentzIndex, f: SimpleFunction) -> NormValue:
    """Exact L^{p,q} norm from the step rearrangement.

    For q < ∞ each step contributes v^q·(p/q)·(t_i^{q/p} − t_{i−1}^{q/p});
    for q = ∞ the supremum of t^{1/p}·f*(t) sits at a step's right end.
    """
    if not isinstance(idx, LorentzIndex):
        idx = LorentzIndex(*idx)
    if f.is_zero():
        return NormValue(0.0, Method.STEP_QUADRATURE, 0.0)
    r = rearrangement(f)
    v, t1 = r.values, r.t_end
    p, q = idx.p, idx.q
    if math.isinf(q):
        return NormValue(float(np.max(v * np.power(t1, 1.0 / p))), Method.STEP_QUADRATURE, 0.0)
    vmax = float(v[0])
    t0 = r.t_start
    e = q / p
    weights = (p / q) * (np.power(t1, e) - np.power(t0, e))
    total = float(np.dot(np.power(v / vmax, q), weights))
    return NormValue(vmax * total ** (1.0 / q), Method.STEP_QUADRATURE, 0.0)
