"""Moment map of the GL(q) x GL(p) action and distinguished-point tests.

With the trace pairing on symmetric matrices the moment map of a tuple C
splits into two blocks,

    m1(C) = -2 sum_i (C^i)^2          (symmetric PSD, q x q),
    m2(C)_ij = -tr(C^i C^j) = <C_i, C_j>   (Gram matrix, p x p),

characterized by <m1, X> + <m2, Y> = <(X, Y) . C, C> for symmetric X, Y,
where (X, Y) . C is the infinitesimal action.  A tuple is *distinguished*
when m(C) . C = r C for a scalar r (critical point of ||m||^2 on the unit
sphere) and *minimal* for a subgroup when the corresponding moment block is
scalar (SL sides) or zero (full group).

moment_oracle reconstructs both blocks entrywise from the defining pairing
and shares no code with the closed forms; tests hold the two routes to
1e-10 relative agreement.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import kernels
from .tensor_core import StructureTensor, infinitesimal_act, inner, new_tensor

__all__ = [
    "MomentImage",
    "DistinguishedReport",
    "Subgroup",
    "moment",
    "moment_oracle",
    "distinguished_report",
    "minimality_defect",
]

#: Default residual threshold for calling a point distinguished.
DISTINGUISHED_TOL = 1e-9


class Subgroup(str, enum.Enum):
    """Acting subgroup selecting which minimality defect to measure."""

    SLP = "SLp"
    SLQ = "SLq"
    SLBOTH = "SLboth"
    FULL = "Full"


@dataclass(frozen=True)
class MomentImage:
    """Pair (m1, m2) of symmetric moment blocks."""

    m1: np.ndarray
    m2: np.ndarray

    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.m1 * self.m1) + np.sum(self.m2 * self.m2)))

    def to_json_dict(self) -> dict:
        return {"m1": self.m1.tolist(), "m2": self.m2.tolist()}


@dataclass(frozen=True)
class DistinguishedReport:
    """Summary of how close a tuple is to distinguished / minimal.

    Attributes:
        r: Rayleigh quotient <m(C).C, C> / <C, C> on the raw input; at a
            distinguished point, m(C).C = r C exactly.
        residual: ||m(C).C - r C|| / (1 + ||m(C)||) evaluated on the
            unit-norm representative, hence scale-invariant.
        sl_p_defect: relative size of the traceless part of m2.
        sl_q_defect: relative size of the traceless part of m1.
        full_min_defect: (||m1|| + ||m2||) / ||C||^2.
        distinguished: residual < threshold.
    """

    r: float
    residual: float
    sl_p_defect: float
    sl_q_defect: float
    full_min_defect: float
    distinguished: bool
    threshold: float

    def to_json_dict(self) -> dict:
        return {
            "r": self.r,
            "residual": self.residual,
            "sl_p_defect": self.sl_p_defect,
            "sl_q_defect": self.sl_q_defect,
            "full_min_defect": self.full_min_defect,
            "distinguished": self.distinguished,
            "threshold": self.threshold,
        }


def moment(c: StructureTensor) -> MomentImage:
    """Closed-form moment blocks of a tuple."""
    m1, m2 = kernels.moment_parts(c.mats)
    m1 = 0.5 * (m1 + m1.T)
    m2 = 0.5 * (m2 + m2.T)
    return MomentImage(m1, m2)


def moment_oracle(c: StructureTensor) -> MomentImage:
    """Moment blocks recovered from the defining pairing, entry by entry.

    For each element X of a symmetric basis, <m1, X> equals
    <(X, 0) . C, C>; diagonal basis elements give the diagonal entries
    directly and E_ab + E_ba gives twice the (a, b) entry.  Same for m2
    with (0, Y).  Independent of the closed forms by construction.
    """
    q, p = c.q, c.p
    m1 = np.empty((q, q))
    zero_y = np.zeros((p, p))
    for a in range(q):
        for b in range(a, q):
            x = np.zeros((q, q))
            x[a, b] += 1.0
            x[b, a] += 1.0
            val = inner(infinitesimal_act(x, zero_y, c), c)
            if a == b:
                m1[a, a] = val / 2.0
            else:
                m1[a, b] = m1[b, a] = val / 2.0
    m2 = np.empty((p, p))
    zero_x = np.zeros((q, q))
    for a in range(p):
        for b in range(a, p):
            y = np.zeros((p, p))
            y[a, b] += 1.0
            y[b, a] += 1.0
            val = inner(infinitesimal_act(zero_x, y, c), c)
            if a == b:
                m2[a, a] = val / 2.0
            else:
                m2[a, b] = m2[b, a] = val / 2.0
    return MomentImage(m1, m2)


def _moment_times(c: StructureTensor, img: MomentImage) -> StructureTensor:
    return infinitesimal_act(img.m1, img.m2, c)


def distinguished_report(c: StructureTensor,
                         threshold: float = DISTINGUISHED_TOL) -> DistinguishedReport:
    """Distinguished-point residual, eigenvalue r, and minimality defects.

    r is computed on the raw input (it scales as s^2 under C -> s C); the
    residual is computed on C/||C|| so that it is exactly scale-invariant.

    Raises:
        ValueError: on the zero tensor.
    """
    nc = c.norm()
    if nc == 0.0:
        raise ValueError("distinguished_report is undefined for the zero tensor")
    img = moment(c)
    w = _moment_times(c, img)
    r = inner(w, c) / inner(c, c)

    cu = c.unit()
    img_u = moment(cu)
    wu = _moment_times(cu, img_u)
    ru = inner(wu, cu)
    dev = wu.mats - ru * cu.mats
    residual = float(np.sqrt(np.sum(dev * dev)) / (1.0 + img_u.norm()))

    return DistinguishedReport(
        r=float(r),
        residual=residual,
        sl_p_defect=_sl_defect(img.m2),
        sl_q_defect=_sl_defect(img.m1),
        full_min_defect=_full_defect(img, nc),
        distinguished=bool(residual < threshold),
        threshold=threshold,
    )


def _sl_defect(block: np.ndarray) -> float:
    n = block.shape[0]
    total = float(np.sqrt(np.sum(block * block)))
    if total == 0.0:
        raise ValueError("minimality defect is undefined for a zero moment block")
    traceless = block - (np.trace(block) / n) * np.eye(n)
    return float(np.sqrt(np.sum(traceless * traceless)) / total)


def _full_defect(img: MomentImage, nc: float) -> float:
    n1 = float(np.sqrt(np.sum(img.m1 * img.m1)))
    n2 = float(np.sqrt(np.sum(img.m2 * img.m2)))
    return (n1 + n2) / nc**2


def minimality_defect(c: StructureTensor, subgroup: Subgroup | str) -> float:
    """Scale-invariant distance from minimality for the chosen subgroup.

    SLp measures the traceless part of m2 (zero iff the components are
    mutually orthogonal with equal norms), SLq the traceless part of m1,
    SLboth their sum, Full the overall moment size (||m1|| + ||m2||) / ||C||^2.

    Raises:
        ValueError: on the zero tensor or an unknown subgroup.
    """
    sub = Subgroup(subgroup)
    if c.norm() == 0.0:
        raise ValueError("minimality defect is undefined for the zero tensor")
    img = moment(c)
    if sub is Subgroup.SLP:
        return _sl_defect(img.m2)
    if sub is Subgroup.SLQ:
        return _sl_defect(img.m1)
    if sub is Subgroup.SLBOTH:
        return _sl_defect(img.m1) + _sl_defect(img.m2)
    return _full_defect(img, c.norm())
