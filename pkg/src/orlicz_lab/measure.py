"""Simple functions on finite probability spaces.

A :class:`SimpleFunction` is a list of atoms ``(point_id, value, mass)`` over a
sample space identified by ``domain_id``.  Two functions can be combined
pointwise only when they live on the same domain with the same point ids;
independent copies are produced explicitly by :func:`product_space`.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass

import numpy as np

from orlicz_lab.young import YoungFunction, eval_psi

MASS_SUM_RTOL = 1e-9
DEFAULT_ATOM_BUDGET = 2**24

_domain_counter = itertools.count()


def fresh_domain(prefix: str = "D") -> str:
    return f"{prefix}{next(_domain_counter)}"


class IncompatibleDomainsError(ValueError):
    pass


class AtomBudgetError(MemoryError):
    pass


@dataclass(frozen=True, eq=False)
class SimpleFunction:
    point_ids: np.ndarray
    values: np.ndarray
    masses: np.ndarray
    domain_id: str

    def __post_init__(self):
        ids = np.asarray(self.point_ids, dtype=np.int64)
        vals = np.asarray(self.values)
        if not np.iscomplexobj(vals):
            vals = vals.astype(float)
        masses = np.asarray(self.masses, dtype=float)
        if not (ids.ndim == vals.ndim == masses.ndim == 1) or not (
            ids.size == vals.size == masses.size
        ):
            raise ValueError("point_ids, values and masses must be 1-d of equal length")
        if ids.size == 0:
            raise ValueError("a simple function needs at least one atom")
        if np.any(masses <= 0):
            raise ValueError("atom masses must be positive")
        if abs(masses.sum() - 1.0) > 1e-12 * max(1, ids.size) ** 0.5 + 1e-12:
            raise ValueError(f"masses sum to {masses.sum()!r}, not 1")
        if not np.all(np.isfinite(vals)):
            raise ValueError("values must be finite")
        object.__setattr__(self, "point_ids", ids)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "masses", masses)

    def __len__(self):
        return self.values.size

    @property
    def abs_values(self) -> np.ndarray:
        return np.abs(self.values)

    def is_zero(self) -> bool:
        return not np.any(self.values)

    def atoms(self):
        return list(zip(self.point_ids.tolist(), self.values.tolist(), self.masses.tolist()))

    def mean(self):
        return np.dot(self.masses, self.values)

    def with_values(self, values) -> "SimpleFunction":
        """Same atoms and masses, new values (pointwise transform)."""
        return SimpleFunction(self.point_ids, values, self.masses, self.domain_id)

    def scaled(self, alpha) -> "SimpleFunction":
        return self.with_values(self.values * alpha)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["point_id", "value", "mass"])
        for pid, v, m in self.atoms():
            w.writerow([pid, repr(float(v)), repr(float(m))])
        return buf.getvalue()

    def to_json(self) -> list:
        return [[pid, v, m] for pid, v, m in self.atoms()]


def make_simple(values, masses, domain_id: str | None = None) -> SimpleFunction:
    """Build a simple function with sequential point ids on a fresh domain.

    The mass vector is renormalised when its sum is within 1e-9 of 1.
    """
    vals = np.asarray(values)
    masses = np.asarray(masses, dtype=float)
    if vals.ndim != 1 or vals.size == 0:
        raise ValueError("need at least one value")
    if masses.shape != vals.shape:
        raise ValueError("values and masses differ in length")
    if np.any(~(masses > 0)):
        raise ValueError("masses must be positive")
    total = masses.sum()
    if abs(total - 1.0) > MASS_SUM_RTOL:
        kind = "deficit" if total < 1 else "excess"
        raise ValueError(f"mass {kind}: masses sum to {total:.12g}")
    return SimpleFunction(np.arange(vals.size), vals, masses / total,
                          domain_id or fresh_domain())


def constant(c, domain_id: str | None = None) -> SimpleFunction:
    return make_simple([c], [1.0], domain_id)


def uniform_atoms(values, domain_id: str | None = None) -> SimpleFunction:
    """Empirical measure: every value gets mass 1/M."""
    vals = np.asarray(values)
    m = vals.size
    return SimpleFunction(np.arange(m), vals, np.full(m, 1.0 / m), domain_id or fresh_domain())


def from_csv(text: str) -> SimpleFunction:
    """Parse ``point_id,value,mass`` rows; errors name the offending line."""
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise ValueError("line 1: empty input")
    header = [c.strip() for c in rows[0]]
    if header != ["point_id", "value", "mass"]:
        raise ValueError(f"line 1: expected header point_id,value,mass, got {','.join(header)}")
    ids, vals, masses = [], [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 3:
            raise ValueError(f"line {lineno}: expected 3 columns, got {len(row)}")
        try:
            ids.append(int(row[0]))
            vals.append(float(row[1]))
            masses.append(float(row[2]))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
        if not masses[-1] > 0:
            raise ValueError(f"line {lineno}: mass must be positive")
    if not ids:
        raise ValueError("no atoms in input")
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate point_id")
    f = make_simple(vals, masses)
    return SimpleFunction(np.array(ids), f.values, f.masses, f.domain_id)


def modular(psi: YoungFunction, f: SimpleFunction) -> float:
    """ρ_ψ(f) = Σ mass·ψ(|value|)."""
    return float(np.dot(f.masses, eval_psi(psi, f.abs_values)))


def distribution_function(f: SimpleFunction, lam):
    """d_f(λ) = μ(|f| > λ), strict inequality; λ may be an array."""
    lam_arr = np.asarray(lam, dtype=float)
    if np.any(lam_arr < 0):
        raise ValueError("lambda must be >= 0")
    if lam_arr.ndim == 0:
        return float(f.masses[f.abs_values > lam_arr].sum())
    return (f.abs_values[None, :] > lam_arr.ravel()[:, None]).astype(float) @ f.masses


@dataclass(frozen=True, eq=False)
class StepRearrangement:
    """f* as steps: ``values[i]`` on ``[t_end[i-1], t_end[i])``, t_end[-1] = 1.

    Right-continuous, as f*(t) = inf{λ : d_f(λ) <= t} requires.
    """

    values: np.ndarray
    t_end: np.ndarray

    def __call__(self, t: float) -> float:
        if not 0 <= t <= 1:
            raise ValueError("t must lie in [0, 1]")
        if t >= 1:
            return 0.0
        # right-continuous: f*(t) uses the first step with t < t_end
        return float(self.values[np.searchsorted(self.t_end, t, side="right")])

    @property
    def t_start(self) -> np.ndarray:
        return np.concatenate([[0.0], self.t_end[:-1]])

    def measure_above(self, lam):
        """sup{t : f*(t) > λ}, the layer-cake recovery of d_f(λ)."""
        k = np.searchsorted(-self.values, -np.asarray(lam, dtype=float), side="left")
        out = np.where(k > 0, self.t_end[np.maximum(k - 1, 0)], 0.0)
        return float(out) if out.ndim == 0 else out

    def integral_power(self, p: float) -> float:
        """∫_0^1 f*(t)^p dt."""
        return float(np.dot(np.power(self.values, p), np.diff(np.concatenate([[0.0], self.t_end]))))

    def steps(self):
        return list(zip(self.values.tolist(), self.t_end.tolist()))


def rearrangement(f: SimpleFunction) -> StepRearrangement:
    """Non-increasing rearrangement of |f| with equal values merged."""
    a = f.abs_values
    order = np.argsort(-a, kind="stable")
    a = a[order]
    m = f.masses[order]
    # boundaries between distinct values
    new = np.concatenate([[True], a[1:] != a[:-1]])
    starts = np.flatnonzero(new)
    vals = a[starts]
    mass = np.add.reduceat(m, starts)
    t_end = np.cumsum(mass)
    t_end[-1] = 1.0
    return StepRearrangement(vals, t_end)


_OPS = {
    "add": np.add,
    "+": np.add,
    "sub": np.subtract,
    "-": np.subtract,
    "mul": np.multiply,
    "*": np.multiply,
    "max": np.maximum,
    "min": np.minimum,
}


def _align(f: SimpleFunction, g: SimpleFunction) -> np.ndarray:
    """Index array mapping f's atoms onto g's (same point ids required)."""
    if f.domain_id != g.domain_id:
        raise IncompatibleDomainsError(
            f"domains {f.domain_id!r} and {g.domain_id!r} differ; build a joint space first"
        )
    if f.point_ids.size == g.point_ids.size and np.array_equal(f.point_ids, g.point_ids):
        return None
    if f.point_ids.size != g.point_ids.size:
        raise IncompatibleDomainsError("point id sets differ")
    gorder = np.argsort(g.point_ids)
    pos = np.searchsorted(g.point_ids[gorder], f.point_ids)
    pos = np.clip(pos, 0, g.point_ids.size - 1)
    idx = gorder[pos]
    if not np.array_equal(g.point_ids[idx], f.point_ids):
        raise IncompatibleDomainsError("point id sets differ")
    return idx


def combinable(f: SimpleFunction, g: SimpleFunction) -> bool:
    try:
        _align(f, g)
    except IncompatibleDomainsError:
        return False
    return True


def combine(f: SimpleFunction, g: SimpleFunction, op="add") -> SimpleFunction:
    """Atom-wise ``op(f, g)``; ``op`` is a ufunc/callable or one of
    ``add, sub, mul, max, min``."""
    fn = _OPS[op] if isinstance(op, str) else op
    idx = _align(f, g)
    gv = g.values if idx is None else g.values[idx]
    return f.with_values(fn(f.values, gv))


def product_space(fs, budget: int = DEFAULT_ATOM_BUDGET) -> list:
    """Re-index independent inputs on their common product space.

    Output ``k`` takes the value of ``fs[k]`` at the k-th coordinate of each
    product atom; masses multiply.
    """
    fs = list(fs)
    if not fs:
        raise ValueError("need at least one function")
    sizes = [len(f) for f in fs]
    total = math.prod(sizes)
    if total > budget:
        raise AtomBudgetError(
            f"product space has {total} atoms (budget {budget}); use Monte Carlo sampling"
        )
    grids = np.meshgrid(*[np.arange(n) for n in sizes], indexing="ij")
    idx = [g.ravel() for g in grids]
    mass = np.ones(total)
    for f, ix in zip(fs, idx):
        mass = mass * f.masses[ix]
    # renormalise away product round-off
    mass = mass / mass.sum()
    dom = fresh_domain("P")
    ids = np.arange(total)
    return [SimpleFunction(ids, f.values[ix], mass, dom) for f, ix in zip(fs, idx)]


def random_simple(rng: np.random.Generator, max_atoms: int = 64, domain_id: str | None = None,
                  n_atoms: int | None = None) -> SimpleFunction:
    """A random test function: Dirichlet(1) masses, heavy-ish signed values."""
    n = n_atoms or int(rng.integers(1, max_atoms + 1))
    masses = rng.dirichlet(np.ones(n))
    masses = np.maximum(masses, 1e-12)
    masses = masses / masses.sum()
    values = rng.standard_normal(n) * np.exp(rng.standard_normal(n))
    return SimpleFunction(np.arange(n), values, masses, domain_id or fresh_domain())
