"""Vectorised bracketing helpers shared by the norm and conjugate solvers."""

import numpy as np


class ConvergenceError(RuntimeError):
    pass


def bisect_increasing(fn, target, lo, hi, rtol=1e-15, atol=0.0, maxiter=200):
    """Solve ``fn(x) = target`` for a nondecreasing ``fn`` on ``[lo, hi]``.

    Works elementwise on arrays.  Returns ``(lo, hi)`` with
    ``fn(lo) <= target <= fn(hi)`` preserved whenever it held initially, and
    ``hi - lo <= rtol * hi + atol`` on exit.
    """
    target = np.asarray(target, dtype=float)
    lo = np.broadcast_to(np.asarray(lo, dtype=float), target.shape).copy()
    hi = np.broadcast_to(np.asarray(hi, dtype=float), target.shape).copy()
    for _ in range(maxiter):
        if np.all(hi - lo <= rtol * np.abs(hi) + atol):
            return lo, hi
        mid = 0.5 * (lo + hi)
        below = fn(mid) <= target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    if np.all(hi - lo <= rtol * np.abs(hi) + atol):
        return lo, hi
    raise ConvergenceError(f"bisection did not converge in {maxiter} steps")


def golden_min(fn, a, b, xtol_rel=1e-10, maxiter=500):
    """Golden-section search for the minimum of a unimodal ``fn`` on [a, b].

    Returns ``(x_best, f_best, a, b, fa_b_max)`` where ``[a, b]`` is the final
    bracket and ``fa_b_max`` the larger of the function values at its ends.
    """
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(maxiter):
        if b - a <= xtol_rel * abs(b):
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fn(d)
    if fc <= fd:
        x, fx = c, fc
    else:
        x, fx = d, fd
    return x, fx, a, b, max(fc, fd)
