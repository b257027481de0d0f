"""Pure-numpy kernels: moment evaluation and the normalized gradient flow.

Mirrors the compiled backend in nilsoliton._accel; kernels.py picks one at
import time.  Inputs are raw (p, q, q) float64 arrays, not StructureTensor.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"

STATUS_FOUND = 0
STATUS_DEGENERATED = 1
STATUS_MAX_ITER = 2

# Armijo sufficient-decrease constant; the step direction is -(w - r C)
# while the sphere gradient of the objective is 4 (w - r C).  Once the
# required decrease falls below the rounding resolution of the objective
# (_FLOOR_EPS*(1+f)) the decrease test is vacuous in double precision, so
# acceptance switches to "does not increase f beyond one rounding quantum";
# plain contraction steps then drive the gradient to machine scale.  The
# objective is therefore non-increasing up to 8*eps*(1+f) per step.
_ARMIJO = 1e-4
_FLOOR_EPS = 8.0 * np.finfo(np.float64).eps


def moment_parts(mats: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    m1 = -2.0 * np.einsum("kab,kbc->ac", mats, mats, optimize=True)
    m2 = np.einsum("kab,lab->kl", mats, mats, optimize=True)
    return m1, m2


def moment_action(mats: np.ndarray, m1: np.ndarray, m2: np.ndarray) -> np.ndarray:
    return m1 @ mats + mats @ m1 + np.einsum("kl,lab->kab", m2, mats)


def flow_run(mats: np.ndarray, tol: float, rank_tol: float, max_iter: int,
             eta0: float, shrink: float, max_backtracks: int,
             want_trace: bool = False):
    """Projected gradient descent on ||m(C)||^2 over the unit sphere.

    Returns (C, status, iterations, residual, r, min_rank_sigma, objective,
    trace).  C is the final unit-norm tuple; r its moment eigenvalue
    estimate; min_rank_sigma the smallest component singular value seen.
    """
    c = np.array(mats, dtype=np.float64)
    nrm = np.sqrt(np.sum(c * c))
    if nrm == 0.0 or not np.isfinite(nrm):
        raise ValueError("flow requires a nonzero finite tensor")
    c /= nrm
    m1, m2 = moment_parts(c)
    f = float(np.sum(m1 * m1) + np.sum(m2 * m2))
    trace = np.empty(max_iter + 1) if want_trace else None
    min_sigma = np.inf

    it = 0
    while True:
        w = moment_action(c, m1, m2)
        r = float(np.sum(w * c))
        g = w - r * c
        gn2 = float(np.sum(g * g))
        res = np.sqrt(gn2) / (1.0 + np.sqrt(f))
        if not np.isfinite(res) or not np.isfinite(f):
            raise FloatingPointError(f"flow produced a non-finite value at "
                                     f"iteration {it}")
        if trace is not None:
            trace[it] = res

        ev = np.linalg.eigvalsh(m2)
        lo, hi = max(float(ev[0]), 0.0), float(ev[-1])
        sigma = np.sqrt(lo)
        min_sigma = min(min_sigma, sigma)
        if hi <= 0.0 or sigma < rank_tol * np.sqrt(hi):
            status = STATUS_DEGENERATED
            break
        if res < tol:
            status = STATUS_FOUND
            break
        if it >= max_iter:
            status = STATUS_MAX_ITER
            break

        eta = eta0
        accepted = False
        for _ in range(max_backtracks + 1):
            cand = c - eta * g
            cand /= np.sqrt(np.sum(cand * cand))
            m1n, m2n = moment_parts(cand)
            fn = float(np.sum(m1n * m1n) + np.sum(m2n * m2n))
            need = _ARMIJO * eta * 4.0 * gn2
            floor = _FLOOR_EPS * (1.0 + f)
            if fn <= (f - need if need > floor else f + floor):
                accepted = True
                break
            eta *= shrink
        if not accepted:
            status = STATUS_MAX_ITER
            break
        c, m1, m2, f = cand, m1n, m2n, fn
        it += 1

    out_trace = trace[: it + 1].copy() if trace is not None else None
    return c, status, it, float(res), r, float(min_sigma), f, out_trace
