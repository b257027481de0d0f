"""Moduli dimensions at generic points and the (p,q) region classification.

The generic moduli dimension follows a fixed precedence: explicit table
rows, then dual reduction p -> D - p (D = q(q-1)/2), then the closed
formula p*D - (q^2 + p^2 - 2) - 1, clamped at zero.  Region labels say for
each type (p,q) whether every algebra is an Einstein nilradical, an
indecomposable non-Einstein nilradical is known to exist, or neither is
settled here.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

__all__ = [
    "ModuliSource",
    "ModuliEntry",
    "RegionLabel",
    "RegionEntry",
    "RegionBound",
    "generic_moduli_dim",
    "moduli_entry",
    "concat_moduli_bound",
    "non_einstein_region",
    "classify_type",
    "region_table",
]


def _dq(q: int) -> int:
    return q * (q - 1) // 2


class ModuliSource(str, enum.Enum):
    TABLE_ROW = "TableRow"
    FORMULA = "Formula"
    DUAL = "Dual"


@dataclass(frozen=True)
class ModuliEntry:
    p: int
    q: int
    dim: int
    source: ModuliSource
    clamped: bool = False

    def to_json_dict(self) -> dict:
        return {"p": self.p, "q": self.q, "dim": self.dim,
                "source": self.source.value, "clamped": self.clamped}


def _table_row(p: int, q: int) -> int | None:
    if p == 1:
        return 0
    if p == 2:
        if q == 4:
            return 0
        if q % 2 == 0:
            return q // 2 - 3
        return 0
    if p == 3 and q in (4, 5):
        return 0
    if (p, q) == (3, 6):
        return 2
    if p == _dq(q):
        return 0
    return None


def moduli_entry(p: int, q: int) -> ModuliEntry:
    """Generic moduli dimension with its source and clamping flag."""
    if q < 2:
        raise ValueError(f"q must be >= 2, got {q}")
    d = _dq(q)
    if not 1 <= p <= d:
        raise ValueError(f"p must be in 1..{d} for q={q}, got {p}")
    row = _table_row(p, q)
    if row is not None:
        return ModuliEntry(p, q, row, ModuliSource.TABLE_ROW)
    dual = _table_row(d - p, q)
    if dual is not None:
        return ModuliEntry(p, q, dual, ModuliSource.DUAL)
    raw = p * (d - p) - q * q + 1
    if raw < 0:
        return ModuliEntry(p, q, 0, ModuliSource.FORMULA, clamped=True)
    return ModuliEntry(p, q, raw, ModuliSource.FORMULA)


def generic_moduli_dim(p: int, q: int) -> int:
    return moduli_entry(p, q).dim


def concat_moduli_bound(p: int, q1: int, q2: int) -> int:
    """Moduli dimension bound for concatenating types (p,q1) and (p,q2).

    Requires p < D - 2 on both sides; the combined moduli loses one
    dimension to the joint scaling, floored at zero.
    """
    for q in (q1, q2):
        if not p < _dq(q) - 2:
            raise ValueError(f"need p < D_q - 2 = {_dq(q) - 2} for q={q}, "
                             f"got p={p}")
    return max(generic_moduli_dim(p, q1) + generic_moduli_dim(p, q2) - 1, 0)


@dataclass(frozen=True)
class RegionBound:
    """Membership in the adjoin region q >= 8, 2 <= p <= 5q/4 - 8, with the
    moduli lower bound (q - (4/5)(p+8) - 7)/8 reported raw and floored."""

    p: int
    q: int
    in_region: bool
    bound: float
    bound_floored: float

    def to_json_dict(self) -> dict:
        return {"p": self.p, "q": self.q, "in_region": self.in_region,
                "bound": self.bound, "bound_floored": self.bound_floored}


def non_einstein_region(p: int, q: int) -> RegionBound:
    in_region = q >= 8 and 2 <= p and 4 * p <= 5 * q - 32
    bound = (5 * q - 4 * p - 67) / 40.0
    return RegionBound(p=p, q=q, in_region=in_region, bound=bound,
                       bound_floored=max(bound, 0.0))


class RegionLabel(str, enum.Enum):
    ALL_EINSTEIN = "AllEinstein"
    EXISTS_NON_EINSTEIN = "ExistsNonEinstein"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class RegionEntry:
    p: int
    q: int
    label: RegionLabel
    source: str

    def to_json_dict(self) -> dict:
        return {"p": self.p, "q": self.q, "label": self.label.value,
                "source": self.source}

    def to_csv_row(self) -> str:
        # source text may contain commas; quote it per RFC 4180
        src = self.source
        if any(ch in src for ch in ',"\n'):
            src = '"' + src.replace('"', '""') + '"'
        return f"{self.p},{self.q},{self.label.value},{src}"


def classify_type(p: int, q: int) -> RegionEntry:
    """Label one (p,q) cell; labels are mutually exclusive by rule order."""
    d = _dq(q)
    if not 1 <= p <= d:
        raise ValueError(f"p must be in 1..{d} for q={q}, got {p}")
    if p == 1:
        return RegionEntry(p, q, RegionLabel.ALL_EINSTEIN,
                           "type (1,q) is Heisenberg type plus abelian")
    if p == d:
        return RegionEntry(p, q, RegionLabel.ALL_EINSTEIN,
                           "the unique algebra of type (D,q)")
    if p == d - 1:
        return RegionEntry(p, q, RegionLabel.ALL_EINSTEIN,
                           "Nikolayevsky: all type (D-1,q) algebras are "
                           "Einstein nilradicals")
    if p + q <= 6:
        return RegionEntry(p, q, RegionLabel.ALL_EINSTEIN,
                           "all nilpotent Lie algebras of dimension <= 6 "
                           "are Einstein nilradicals")
    if 2 <= p <= 6 and ((q % 2 == 0 and q >= 8) or (q % 2 == 1 and q >= 15)):
        return RegionEntry(p, q, RegionLabel.EXISTS_NON_EINSTEIN,
                           "chained so(4) family of type (j, 2k+4n+d)")
    if 3 <= p <= 6 and q == 9:
        return RegionEntry(p, q, RegionLabel.EXISTS_NON_EINSTEIN,
                           "(j,9) fill-in family")
    if (p, q) == (3, 6):
        return RegionEntry(p, q, RegionLabel.EXISTS_NON_EINSTEIN,
                           "Will: non-Einstein nilradical of type (3,6)")
    if non_einstein_region(p, q).in_region:
        return RegionEntry(p, q, RegionLabel.EXISTS_NON_EINSTEIN,
                           "adjoin region 2 <= p <= 5q/4 - 8")
    return RegionEntry(p, q, RegionLabel.UNKNOWN, "not settled here")


def region_table(q_max: int) -> tuple[RegionEntry, ...]:
    """Classification of every type with 3 <= q <= q_max, 1 <= p <= D_q."""
    if q_max < 3:
        raise ValueError(f"q_max must be >= 3, got {q_max}")
    out = []
    for q in range(3, q_max + 1):
        for p in range(1, _dq(q) + 1):
            out.append(classify_type(p, q))
    return tuple(out)
