"""Projected gradient flow toward distinguished tuples, and random scans.

The flow minimizes the squared moment norm F(C) = |m1|^2 + |m2|^2 over the
unit sphere of tuples.  Critical points are exactly the distinguished ones
(w = m(C).C proportional to C), so the flow either reaches one (resolved by
the scale-invariant residual), degenerates to a tuple whose components no
longer span a rank-q image (smallest singular value collapse), or runs out
of iterations at a degenerate critical point at infinity.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import kernels
from .moment import DISTINGUISHED_TOL, DistinguishedReport, distinguished_report
from .tensor_core import StructureTensor, new_tensor, random_tensor

__all__ = [
    "FlowStatus",
    "FlowResult",
    "ScanOutcome",
    "ScanSummary",
    "RANK_COLLAPSE_TOL",
    "flow_to_distinguished",
    "scan_generic",
]

RANK_COLLAPSE_TOL = 1e-7

_STATUS_BY_CODE = {}


class FlowStatus(str, enum.Enum):
    DISTINGUISHED_FOUND = "DistinguishedFound"
    DEGENERATED = "Degenerated"
    MAX_ITERATIONS = "MaxIterations"


_STATUS_BY_CODE = {
    kernels.STATUS_FOUND: FlowStatus.DISTINGUISHED_FOUND,
    kernels.STATUS_DEGENERATED: FlowStatus.DEGENERATED,
    kernels.STATUS_MAX_ITER: FlowStatus.MAX_ITERATIONS,
}


@dataclass(frozen=True)
class FlowResult:
    """Terminal state of one flow run.

    tensor is unit norm; r the moment eigenvalue estimate at the end;
    residual the scale-invariant distance |w - r C| / (1 + |m|); min_sigma
    the smallest singular value of the stacked components relative to the
    largest; trace carries the residual per iteration when requested.
    """

    tensor: StructureTensor
    status: FlowStatus
    iterations: int
    residual: float
    r: float
    min_sigma: float
    objective: float
    report: DistinguishedReport
    trace: np.ndarray | None = None

    def to_json_dict(self) -> dict:
        return {
            "status": self.status.value,
            "iterations": self.iterations,
            "residual": self.residual,
            "r": self.r,
            "min_sigma": self.min_sigma,
            "objective": self.objective,
            "report": self.report.to_json_dict(),
            "tensor": self.tensor.to_json_dict(),
        }


def flow_to_distinguished(c: StructureTensor,
                          tol: float = DISTINGUISHED_TOL,
                          rank_tol: float = RANK_COLLAPSE_TOL,
                          max_iter: int = 200_000,
                          eta0: float = 0.01,
                          shrink: float = 0.5,
                          max_backtracks: int = 40,
                          want_trace: bool = False) -> FlowResult:
    """Run the sphere-projected gradient flow from c.

    The step size restarts at eta0 every iteration and halves under an
    Armijo test; a step that cannot decrease F within max_backtracks
    halvings ends the run as MaxIterations (the iterate is stuck to
    floating-point accuracy without meeting the residual tolerance).
    """
    if c.norm() == 0.0:
        raise ValueError("flow needs a nonzero tuple")
    if tol <= 0.0 or rank_tol <= 0.0 or eta0 <= 0.0 or not 0.0 < shrink < 1.0:
        raise ValueError("tolerances, eta0 must be positive and 0 < shrink < 1")
    mats, code, it, res, r, min_sigma, f, trace = kernels.flow_run(
        np.ascontiguousarray(c.mats, dtype=np.float64), float(tol),
        float(rank_tol), int(max_iter), float(eta0), float(shrink),
        int(max_backtracks), bool(want_trace))
    out = new_tensor(c.p, c.q, mats, labels=c.labels)
    return FlowResult(tensor=out, status=_STATUS_BY_CODE[int(code)],
                      iterations=int(it), residual=float(res), r=float(r),
                      min_sigma=float(min_sigma), objective=float(f),
                      report=distinguished_report(out, threshold=tol),
                      trace=trace)


@dataclass(frozen=True)
class ScanOutcome:
    status: FlowStatus
    iterations: int
    residual: float
    r: float
    min_sigma: float

    def to_json_dict(self) -> dict:
        return {"status": self.status.value, "iterations": self.iterations,
                "residual": self.residual, "r": self.r,
                "min_sigma": self.min_sigma}


@dataclass(frozen=True)
class ScanSummary:
    """Aggregate over flows started at random Gaussian tuples."""

    p: int
    q: int
    seed: int
    outcomes: tuple[ScanOutcome, ...]

    @property
    def fraction_distinguished(self) -> float:
        if not self.outcomes:
            return 0.0
        hits = sum(o.status is FlowStatus.DISTINGUISHED_FOUND
                   for o in self.outcomes)
        return hits / len(self.outcomes)

    def status_counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for o in self.outcomes:
            out[o.status.value] = out.get(o.status.value, 0) + 1
        return out

    def residual_histogram(self) -> tuple[tuple[str, str, int], ...]:
        """Decade bins over final residuals, rows of (lo, hi, count).

        Edges run 0, 1e-12, 1e-11, ..., 1e-1, 1, inf; the bounds are kept
        as strings so the open top bin serializes cleanly.
        """
        edges = np.array([0.0, *(10.0 ** -k for k in range(12, -1, -1)),
                          np.inf])
        res = np.array([o.residual for o in self.outcomes], dtype=np.float64)
        counts, _ = np.histogram(res, bins=edges)
        labels = ["0", *(f"1e-{k}" for k in range(12, 0, -1)), "1", "inf"]
        return tuple((labels[i], labels[i + 1], int(counts[i]))
                     for i in range(len(counts)))

    def residual_histogram_csv(self) -> str:
        rows = ["lo,hi,count"]
        rows += [f"{lo},{hi},{n}" for lo, hi, n in self.residual_histogram()]
        return "\n".join(rows) + "\n"

    def to_json_dict(self) -> dict:
        return {"p": self.p, "q": self.q, "seed": self.seed,
                "count": len(self.outcomes),
                "fraction_distinguished": self.fraction_distinguished,
                "status_counts": self.status_counts(),
                "residual_histogram": [
                    {"lo": lo, "hi": hi, "count": n}
                    for lo, hi, n in self.residual_histogram()],
                "outcomes": [o.to_json_dict() for o in self.outcomes]}


def scan_generic(p: int, q: int, count: int = 50, seed: int | None = None,
                 tol: float = DISTINGUISHED_TOL,
                 rank_tol: float = RANK_COLLAPSE_TOL,
                 max_iter: int = 200_000) -> ScanSummary:
    """Flow from ``count`` independent random tuples of type (p, q).

    Start points are standard Gaussian in the skew coordinates, one child
    seed per sample, so results do not depend on the worker count.
    """
    from .parallel import parallel_map

    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    if q < 2 or p < 1 or p > q * (q - 1) // 2:
        raise ValueError(f"need 1 <= p <= D_q = q(q-1)/2, got p={p}, "
                         f"q={q} (D_q = {max(q * (q - 1) // 2, 0)})")
    root = np.random.SeedSequence(seed)
    base_seed = int(root.entropy) if seed is None else int(seed)
    children = root.spawn(count)

    def one(child: np.random.SeedSequence) -> ScanOutcome:
        rng = np.random.default_rng(child)
        start = random_tensor(p, q, rng)
        res = flow_to_distinguished(start, tol=tol, rank_tol=rank_tol,
                                    max_iter=max_iter)
        return ScanOutcome(status=res.status, iterations=res.iterations,
                           residual=res.residual, r=res.r,
                           min_sigma=res.min_sigma)

    outcomes = tuple(parallel_map(one, children))
    return ScanSummary(p=p, q=q, seed=base_seed, outcomes=outcomes)
