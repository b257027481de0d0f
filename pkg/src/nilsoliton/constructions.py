"""Building blocks and families of structure tensors.

Provides the named small matrices (the 2x2 rotation J, the 6 orthogonal
anticommuting-square elements B1..B6 of so(4), the type-(2,3) soliton), the
block operations concat / pad_concat / adjoin / rescale_match, and the
parametric families used by the certification and flow modules:

* non-Einstein candidates of type (j, 2k+4n+d): a k-fold J block chained
  with n copies of so(4) pairs, the last so(4) block carrying (B1..Bj),
  optionally with the (2,3) soliton appended (d=3);
* the (j, 9) fill-in family: J, the (2,3) soliton and an so(4) block;
* fully minimal tuples in so(q)^p for p = q(q-1)/2 or one less, built from
  an orthogonal equal-norm basis whose first element squares to -Id.

All families share one block-assembly routine so that certification W-points
and built tensors agree exactly.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .moment import moment
from .tensor_core import StructureTensor, inner, new_tensor

__all__ = [
    "FamilyKind",
    "FamilySpec",
    "RescaleResult",
    "standard_blocks",
    "heisenberg_j",
    "soliton_23",
    "b_blocks",
    "jk_pair",
    "concat",
    "pad_concat",
    "adjoin",
    "rescale_match",
    "build_family",
    "build_minimal_D",
    "d_tilde",
]

_J = np.array([[0.0, 1.0], [-1.0, 0.0]])
_K = np.array([[0.0, 1.0], [1.0, 0.0]])
_L = np.array([[1.0, 0.0], [0.0, -1.0]])
_I2 = np.eye(2)


def _two_by_two_blocks(tl, tr, bl, br) -> np.ndarray:
    return np.block([[tl, tr], [bl, br]])


_B = np.stack([
    _two_by_two_blocks(_J, 0 * _I2, 0 * _I2, _J),      # B1 = diag(J, J)
    _two_by_two_blocks(0 * _I2, _K, -_K, 0 * _I2),     # B2
    _two_by_two_blocks(0 * _I2, _I2, -_I2, 0 * _I2),   # B3
    _two_by_two_blocks(_J, 0 * _I2, 0 * _I2, -_J),     # B4
    _two_by_two_blocks(0 * _I2, _J, _J, 0 * _I2),      # B5
    _two_by_two_blocks(0 * _I2, _L, -_L, 0 * _I2),     # B6
])

_S1 = np.zeros((3, 3))
_S1[:2, :2] = _J
_S2 = np.zeros((3, 3))
_S2[1:, 1:] = _J


def standard_blocks() -> dict[str, np.ndarray]:
    """Named small matrices: J, K, B1..B6 in so(4), soliton slots S1, S2."""
    out = {"J": _J.copy(), "K": _K.copy(), "S1": _S1.copy(), "S2": _S2.copy()}
    for i in range(6):
        out[f"B{i + 1}"] = _B[i].copy()
    return out


def heisenberg_j(k: int) -> StructureTensor:
    """k-fold block sum of J as a (1, 2k) tuple."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    m = np.zeros((1, 2 * k, 2 * k))
    for i in range(k):
        m[0, 2 * i: 2 * i + 2, 2 * i: 2 * i + 2] = _J
    return new_tensor(1, 2 * k, m, labels=(f"family=heisenberg_j k={k}",))


def soliton_23() -> StructureTensor:
    """The (2, 3) soliton (J padded into the top and bottom of so(3))."""
    return new_tensor(2, 3, np.stack([_S1, _S2]), labels=("family=soliton_23",))


def b_blocks(j: int) -> StructureTensor:
    """(B1, ..., Bj) as a (j, 4) tuple, 1 <= j <= 6."""
    if not 1 <= j <= 6:
        raise ValueError(f"j must be in 1..6, got {j}")
    return new_tensor(j, 4, _B[:j].copy(), labels=(f"family=b_blocks j={j}",))


def jk_pair() -> StructureTensor:
    """(diag(J, J), antidiag(K, -K)): a (2, 4) tuple with nonsingular pencil."""
    return new_tensor(2, 4, _B[:2].copy(), labels=("family=jk_pair",))


# ---------------------------------------------------------------------------
# block operations


def concat(a: StructureTensor, b: StructureTensor) -> StructureTensor:
    """Slotwise block-diagonal sum; requires equal component counts."""
    if a.p != b.p:
        raise ValueError(f"concat needs equal p, got {a.p} and {b.p} "
                         "(use pad_concat for unequal)")
    q = a.q + b.q
    m = np.zeros((a.p, q, q))
    m[:, : a.q, : a.q] = a.mats
    m[:, a.q:, a.q:] = b.mats
    return new_tensor(a.p, q, m)


def pad_concat(a: StructureTensor, b: StructureTensor) -> StructureTensor:
    """concat after padding a with zero slots up to b's component count."""
    if a.p > b.p:
        raise ValueError(f"pad_concat pads the first argument; need "
                         f"a.p <= b.p, got {a.p} > {b.p}")
    q = a.q + b.q
    m = np.zeros((b.p, q, q))
    m[: a.p, : a.q, : a.q] = a.mats
    m[:, a.q:, a.q:] = b.mats
    return new_tensor(b.p, q, m)


def adjoin(a: StructureTensor, pieces) -> StructureTensor:
    """Concatenate with slot overlap: each piece's first matrix shares the
    last slot of ``a``; its remaining matrices get fresh slots.

    Resulting type is (a.p + sum(piece.p - 1), a.q + sum(piece.q)).
    """
    pieces = tuple(pieces)
    if not pieces:
        raise ValueError("adjoin requires at least one piece")
    p = a.p + sum(piece.p - 1 for piece in pieces)
    q = a.q + sum(piece.q for piece in pieces)
    m = np.zeros((p, q, q))
    m[: a.p, : a.q, : a.q] = a.mats
    col = a.q
    slot = a.p
    for piece in pieces:
        m[a.p - 1, col: col + piece.q, col: col + piece.q] = piece.mats[0]
        for i in range(1, piece.p):
            m[slot, col: col + piece.q, col: col + piece.q] = piece.mats[i]
            slot += 1
        col += piece.q
    return new_tensor(p, q, m)


@dataclass(frozen=True)
class RescaleResult:
    tensor: StructureTensor
    s: float
    lam_a: float
    lam_b: float


def _sl_q_eigenvalue(c: StructureTensor, tol: float) -> float:
    """Eigenvalue lam with m1(C).C = lam C; errors when C is not an
    eigenvector of its own m1-action to relative accuracy tol."""
    m1 = moment(c).m1
    w1 = m1 @ c.mats + c.mats @ m1
    lam = float(np.sum(w1 * c.mats) / np.sum(c.mats * c.mats))
    n = c.norm()
    dev = w1 - lam * c.mats
    m1n = float(np.sqrt(np.sum(m1 * m1)))
    rel = float(np.sqrt(np.sum(dev * dev)) / n) / (n**2 + m1n) * n
    # rel equals ||w1 - lam C|| / (||C|| (||C||^2 + ||m1||) / ||C||) which is
    # scale-invariant; at unit norm it reduces to ||w1 - lam C||/(1 + ||m1||).
    if rel > tol:
        raise ValueError(f"input is not an m1-eigen tuple: relative "
                         f"deviation {rel:.3e} > {tol:.3e}")
    return lam


def rescale_match(a: StructureTensor, b: StructureTensor,
                  tol: float = 1e-8) -> RescaleResult:
    """Scale b so both inputs share the same m1-action eigenvalue.

    Both inputs must satisfy m1(X).X = lam X with lam > 0; the returned
    tensor is s*b with s = sqrt(lam_a / lam_b), so concat(a, s*b) of two
    SL(p)-minimal inputs is again distinguished.
    """
    lam_a = _sl_q_eigenvalue(a, tol)
    lam_b = _sl_q_eigenvalue(b, tol)
    if lam_a <= 0.0 or lam_b <= 0.0:
        raise ValueError(f"rescale_match needs positive eigenvalues, got "
                         f"{lam_a:.3e} and {lam_b:.3e}")
    s = math.sqrt(lam_a / lam_b)
    return RescaleResult(b.scaled(s), s, lam_a, lam_b)


# ---------------------------------------------------------------------------
# parametric families


class FamilyKind(str, enum.Enum):
    HEISENBERG_J = "HeisenbergJ"
    SOLITON_23 = "Soliton23"
    B_BLOCKS = "BBlocks"
    NON_EINSTEIN = "NonEinstein"
    J9 = "J9"
    MINIMAL_D = "MinimalD"
    ADJOINED_NON_EINSTEIN = "AdjoinedNonEinstein"


@dataclass(frozen=True)
class FamilySpec:
    """Parameters selecting one member of the named families.

    Field use by kind:
        HeisenbergJ: k.
        Soliton23: no parameters.
        BBlocks: j (tuple (B1..Bj) in so(4)).
        NonEinstein: j, k, n, t (middle coefficients, length n-1), d in {0,3}.
        J9: j in 3..6.
        MinimalD: q (even), p in {q(q-1)/2, q(q-1)/2 - 1}.
        AdjoinedNonEinstein: NonEinstein fields plus adjoin_list of specs
            whose builds are adjoined (first matrix sharing the last slot).
    """

    kind: FamilyKind
    j: int | None = None
    k: int | None = None
    n: int | None = None
    t: tuple[float, ...] = ()
    d: int = 0
    adjoin_list: tuple["FamilySpec", ...] = ()
    q: int | None = None
    p: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", FamilyKind(self.kind))
        object.__setattr__(self, "t", tuple(float(x) for x in self.t))
        object.__setattr__(self, "adjoin_list", tuple(self.adjoin_list))
        self._validate()

    def _validate(self):
        kind = self.kind
        if kind is FamilyKind.HEISENBERG_J:
            if self.k is None or self.k < 1:
                raise ValueError(f"HeisenbergJ needs k >= 1, got {self.k}")
        elif kind is FamilyKind.B_BLOCKS:
            if self.j is None or not 1 <= self.j <= 6:
                raise ValueError(f"BBlocks needs j in 1..6, got {self.j}")
        elif kind in (FamilyKind.NON_EINSTEIN, FamilyKind.ADJOINED_NON_EINSTEIN):
            if self.j is None or not 2 <= self.j <= 6:
                raise ValueError(f"j must be in 2..6, got {self.j}")
            if self.k is None or self.k < 1:
                raise ValueError(f"k must be >= 1, got {self.k}")
            if self.n is None or self.n < 1:
                raise ValueError(f"n must be >= 1, got {self.n}")
            if len(self.t) != self.n - 1:
                raise ValueError(f"t must have length n-1 = {self.n - 1}, "
                                 f"got {len(self.t)}")
            if self.d not in (0, 3):
                raise ValueError(f"d must be 0 or 3, got {self.d}")
            if kind is FamilyKind.ADJOINED_NON_EINSTEIN and not self.adjoin_list:
                raise ValueError("AdjoinedNonEinstein needs a nonempty adjoin_list")
        elif kind is FamilyKind.J9:
            if self.j is None or not 3 <= self.j <= 6:
                raise ValueError(f"J9 needs j in 3..6, got {self.j}")
        elif kind is FamilyKind.MINIMAL_D:
            if self.q is None or self.p is None:
                raise ValueError("MinimalD needs q and p")
            dq = self.q * (self.q - 1) // 2
            if self.q % 2 != 0 or self.q < 4:
                raise ValueError(f"MinimalD needs even q >= 4, got {self.q}")
            if self.p not in (dq, dq - 1):
                raise ValueError(f"MinimalD needs p in {{{dq - 1}, {dq}}} for "
                                 f"q={self.q}, got {self.p}")

    @property
    def type_pq(self) -> tuple[int, int]:
        """Type (p, q) of the built tensor."""
        kind = self.kind
        if kind is FamilyKind.HEISENBERG_J:
            return 1, 2 * self.k
        if kind is FamilyKind.SOLITON_23:
            return 2, 3
        if kind is FamilyKind.B_BLOCKS:
            return self.j, 4
        if kind is FamilyKind.J9:
            return self.j, 9
        if kind is FamilyKind.MINIMAL_D:
            return self.p, self.q
        p, q = self.j, 2 * self.k + 4 * self.n + self.d
        for sub in self.adjoin_list:
            sp, sq = sub.type_pq
            p += sp - 1
            q += sq
        return p, q

    def to_json_dict(self) -> dict:
        out = {"kind": self.kind.value}
        for name in ("j", "k", "n", "q", "p"):
            val = getattr(self, name)
            if val is not None:
                out[name] = val
        if self.t:
            out["t"] = list(self.t)
        if self.kind in (FamilyKind.NON_EINSTEIN, FamilyKind.ADJOINED_NON_EINSTEIN):
            out["d"] = self.d
        if self.adjoin_list:
            out["adjoin_list"] = [s.to_json_dict() for s in self.adjoin_list]
        return out

    @classmethod
    def from_json_dict(cls, data: dict) -> "FamilySpec":
        try:
            kind = data["kind"]
        except (KeyError, TypeError) as exc:
            raise ValueError(f"family JSON missing 'kind': {exc}") from exc
        sub = tuple(cls.from_json_dict(s) for s in data.get("adjoin_list", ()))
        return cls(kind=kind, j=data.get("j"), k=data.get("k"), n=data.get("n"),
                   t=tuple(data.get("t", ())), d=int(data.get("d", 0)),
                   adjoin_list=sub, q=data.get("q"), p=data.get("p"))


def family_block_dims(spec: FamilySpec) -> list[tuple[str, int]]:
    """Named diagonal blocks of the built tensor, in layout order."""
    kind = spec.kind
    if kind is FamilyKind.J9:
        return [("A", 2), ("soliton", 3), ("final", 4)]
    if kind not in (FamilyKind.NON_EINSTEIN, FamilyKind.ADJOINED_NON_EINSTEIN):
        raise ValueError(f"no block layout for kind {kind.value}")
    blocks = [("A", 2 * spec.k)]
    blocks += [(f"middle{i + 1}", 4) for i in range(spec.n - 1)]
    blocks.append(("final", 4))
    if spec.d == 3:
        blocks.append(("soliton", 3))
    for i, sub in enumerate(spec.adjoin_list):
        blocks.append((f"adjoined{i + 1}", sub.type_pq[1]))
    return blocks


def family_tensor(spec: FamilySpec, a1: float, b, c, dvec, u: float = 1.0,
                  v: float = 1.0, adjoined=()) -> StructureTensor:
    """Assemble a family member with explicit block coefficients.

    b and c carry the middle-block coefficients (length n-1), dvec the final
    so(4) block coefficients (length j).  For d=3 the soliton slots are
    scaled by u and v.  ``adjoined`` holds (tensor, lam, mu) triples whose
    first matrix lands in the last base slot scaled by lam, the rest in
    fresh slots scaled by mu.
    """
    if spec.kind is FamilyKind.J9:
        return _assemble_j9(spec.j, a1, u, v, dvec)
    j, k, n, d = spec.j, spec.k, spec.n, spec.d
    b = tuple(float(x) for x in b)
    c = tuple(float(x) for x in c)
    dvec = tuple(float(x) for x in dvec)
    if len(b) != n - 1 or len(c) != n - 1:
        raise ValueError(f"b and c must have length n-1 = {n - 1}")
    if len(dvec) != j:
        raise ValueError(f"dvec must have length j = {j}")
    adjoined = tuple(adjoined)

    dims = [2 * k] + [4] * n + ([3] if d == 3 else [])
    dims += [piece.q for piece, _, _ in adjoined]
    offs = np.concatenate([[0], np.cumsum(dims)]).astype(int)
    q = int(offs[-1])
    p = j + sum(piece.p - 1 for piece, _, _ in adjoined)
    m = np.zeros((p, q, q))

    def put(slot, block, mat, coeff):
        o, dim = offs[block], dims[block]
        m[slot, o: o + dim, o: o + dim] += coeff * mat

    a_mat = heisenberg_j(k).mats[0]
    put(0, 0, a_mat, a1)
    for i in range(n - 1):
        put(0, 1 + i, _B[0], b[i])
        put(1, 1 + i, _B[1], c[i])
    final = n
    for s in range(j):
        put(s, final, _B[s], dvec[s])
    nxt = final + 1
    if d == 3:
        put(0, nxt, _S1, u)
        put(1, nxt, _S2, v)
        nxt += 1
    slot = j
    for idx, (piece, lam, mu) in enumerate(adjoined):
        block = nxt + idx
        put(j - 1, block, piece.mats[0], lam)
        for i in range(1, piece.p):
            put(slot, block, piece.mats[i], mu)
            slot += 1
    return new_tensor(p, q, m)


def _assemble_j9(j: int, a1: float, u: float, v: float, dvec) -> StructureTensor:
    dvec = tuple(float(x) for x in dvec)
    if len(dvec) != j:
        raise ValueError(f"dvec must have length j = {j}")
    m = np.zeros((j, 9, 9))
    m[0, :2, :2] = a1 * _J
    m[0, 2:5, 2:5] = u * _S1
    m[1, 2:5, 2:5] = v * _S2
    for s in range(j):
        m[s, 5:, 5:] = dvec[s] * _B[s]
    return new_tensor(j, 9, m)


def build_family(spec: FamilySpec) -> StructureTensor:
    """Concrete member of the family selected by ``spec``.

    Non-Einstein candidates use middle coefficients t and 1 elsewhere;
    adjoined pieces enter with unit scalings.
    """
    kind = spec.kind
    if kind is FamilyKind.HEISENBERG_J:
        return heisenberg_j(spec.k)
    if kind is FamilyKind.SOLITON_23:
        return soliton_23()
    if kind is FamilyKind.B_BLOCKS:
        return b_blocks(spec.j)
    if kind is FamilyKind.MINIMAL_D:
        return build_minimal_D(spec.q, spec.p)
    if kind is FamilyKind.J9:
        out = _assemble_j9(spec.j, 1.0, 1.0, 1.0, np.ones(spec.j))
        return out.with_labels(
            f"family=j9 j={spec.j}",
            "note=so(4) block; the 9 = 2+3+4 dimension count forces so(4) "
            "even where a 6-dimensional block is quoted")
    adjoined = tuple((build_family(sub), 1.0, 1.0) for sub in spec.adjoin_list)
    out = family_tensor(spec, 1.0, spec.t, np.ones(spec.n - 1),
                        np.ones(spec.j), adjoined=adjoined)
    label = (f"family=non_einstein j={spec.j} k={spec.k} n={spec.n} "
             f"d={spec.d} t={list(spec.t)}")
    if spec.adjoin_list:
        label += f" adjoined={len(spec.adjoin_list)}"
    return out.with_labels(label)


def build_minimal_D(q: int, p: int) -> StructureTensor:
    """Fully minimal tuple in so(q)^p whose first matrix squares to -Id.

    For p = q(q-1)/2 this is an orthogonal basis of so(q) rescaled to equal
    norms; the smaller p drops a second basis element that also squares to
    -Id, which keeps both moment blocks scalar.  Requires even q.
    """
    if q < 4 or q % 2 != 0:
        raise ValueError(f"build_minimal_D needs even q >= 4, got {q}")
    dq = q * (q - 1) // 2
    if p not in (dq, dq - 1):
        raise ValueError(f"p must be {dq} or {dq - 1} for q={q}, got {p}")
    if q == 4:
        mats = _B.copy() if p == 6 else _B[:5].copy()
    else:
        mats = _equal_norm_basis(q)
        if p == dq - 1:
            mats = np.delete(mats, 1, axis=0)
    return new_tensor(p, q, mats, labels=(f"family=minimal_d q={q} p={p}",))


def _equal_norm_basis(q: int) -> np.ndarray:
    """Orthogonal basis of so(q), all norms sqrt(q), first two elements
    block-J and the half-swap, both squaring to -Id."""
    d1 = heisenberg_j(q // 2).mats[0]
    half = np.zeros((q, q))
    half[: q // 2, q // 2:] = np.eye(q // 2)
    half -= half.T
    seeds = [d1, half]
    for a in range(q):
        for b in range(a + 1, q):
            e = np.zeros((q, q))
            e[a, b], e[b, a] = 1.0, -1.0
            seeds.append(e)
    dq = q * (q - 1) // 2
    basis: list[np.ndarray] = []
    for cand in seeds:
        v = cand.copy()
        for u in basis:
            v -= (np.sum(v * u) / np.sum(u * u)) * u
        nv = np.sqrt(np.sum(v * v))
        if nv > 1e-8:
            basis.append(v * (np.sqrt(q) / nv))
        if len(basis) == dq:
            break
    return np.stack(basis)


def d_tilde(d: StructureTensor, lam: float, mu: float) -> StructureTensor:
    """Scale the first component by lam and the remaining ones by mu."""
    if not (math.isfinite(lam) and math.isfinite(mu)):
        raise ValueError("lam and mu must be finite")
    m = d.mats.copy()
    m[0] *= lam
    m[1:] *= mu
    return new_tensor(d.p, d.q, m, labels=d.labels)


def sl_q_eigenvalue(c: StructureTensor, tol: float = 1e-8) -> float:
    """Public wrapper for the m1-eigenvalue check used by rescale_match."""
    return _sl_q_eigenvalue(c, tol)
