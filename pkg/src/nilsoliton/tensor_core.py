"""Structure tensors of two-step nilpotent metric Lie algebras.

A two-step nilpotent algebra of type (p, q) is encoded by a tuple
C = (C^1, ..., C^p) of skew-symmetric q x q matrices: C^k holds the k-th
center coordinate of the bracket on the q-dimensional complement,
<[x, y], z_k> = x^T C^k y.  The group GL(q) x GL(p) acts by change of basis,

    ((g, h) . C)^k = sum_j h_kj (g C^j g^T),

and all geometry downstream (moment maps, distinguished points, soliton
certificates) is phrased on this space of tuples with the Frobenius inner
product <A, B> = sum_k tr(A_k B_k^T).

Tensors are immutable; every constructor validates dimensions, finiteness
and skew-symmetry (inputs are projected onto their skew part, with the size
of the discarded symmetric part recorded on the instance).
"""

from __future__ import annotations

import numbers
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "StructureTensor",
    "GroupElement",
    "new_tensor",
    "is_type_pq",
    "group_act",
    "infinitesimal_act",
    "inner",
    "norm",
    "random_tensor",
]

#: Relative singular-value cutoff deciding component-span rank.
RANK_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class StructureTensor:
    """Immutable tuple of p skew-symmetric q x q matrices.

    Attributes:
        p: number of component matrices (center dimension).
        q: size of each component matrix.
        mats: float64 array of shape (p, q, q), write-protected.
        correction: largest entry of the symmetric part discarded when the
            input was projected to skew form (0.0 for exactly skew input).
        labels: optional provenance strings carried through serialization.
    """

    p: int
    q: int
    mats: np.ndarray
    correction: float = 0.0
    labels: tuple[str, ...] = field(default=())

    @property
    def dq(self) -> int:
        """Dimension q(q-1)/2 of so(q), the ambient space of each component."""
        return self.q * (self.q - 1) // 2

    def norm(self) -> float:
        """Frobenius norm of the whole tuple."""
        return float(np.sqrt(np.sum(self.mats * self.mats)))

    def unit(self) -> "StructureTensor":
        """Copy rescaled to norm 1; raises on the zero tensor."""
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize the zero tensor")
        return StructureTensor(self.p, self.q, _freeze(self.mats / n),
                               self.correction, self.labels)

    def scaled(self, s: float) -> "StructureTensor":
        return StructureTensor(self.p, self.q, _freeze(self.mats * float(s)),
                               self.correction, self.labels)

    def with_labels(self, *labels: str) -> "StructureTensor":
        return StructureTensor(self.p, self.q, self.mats, self.correction,
                               self.labels + tuple(labels))

    def to_json_dict(self) -> dict:
        """Row-major JSON form: {"p", "q", "matrices", ["labels"]}."""
        out = {
            "p": self.p,
            "q": self.q,
            "matrices": [m.reshape(-1).tolist() for m in self.mats],
        }
        if self.labels:
            out["labels"] = list(self.labels)
        return out

    @classmethod
    def from_json_dict(cls, data: dict) -> "StructureTensor":
        """Parse the JSON form; numeric entries may be numbers or strings."""
        try:
            p = int(data["p"])
            q = int(data["q"])
            rows = data["matrices"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"tensor JSON missing or malformed field: {exc}") from exc
        if not isinstance(rows, list) or len(rows) != p:
            raise ValueError(f"tensor JSON: expected {p} matrices, got "
                             f"{len(rows) if isinstance(rows, list) else type(rows).__name__}")
        mats = np.empty((p, q, q), dtype=np.float64)
        for k, flat in enumerate(rows):
            if not isinstance(flat, list) or len(flat) != q * q:
                raise ValueError(f"tensor JSON: matrix {k} must hold {q * q} "
                                 "row-major entries")
            try:
                vals = [float(x) for x in flat]
            except (TypeError, ValueError) as exc:
                raise ValueError(f"tensor JSON: matrix {k} has a non-numeric "
                                 f"entry: {exc}") from exc
            mats[k] = np.asarray(vals, dtype=np.float64).reshape(q, q)
        labels = tuple(str(s) for s in data.get("labels", ()))
        return new_tensor(p, q, mats, labels=labels)


@dataclass(frozen=True)
class GroupElement:
    """Element (g, h) of GL(q) x GL(p) acting on structure tensors."""

    g: np.ndarray
    h: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.g, dtype=np.float64)
        h = np.asarray(self.h, dtype=np.float64)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise ValueError(f"g must be square, got shape {g.shape}")
        if h.ndim != 2 or h.shape[0] != h.shape[1]:
            raise ValueError(f"h must be square, got shape {h.shape}")
        if not (np.isfinite(g).all() and np.isfinite(h).all()):
            raise ValueError("group element has non-finite entries")
        object.__setattr__(self, "g", _freeze(g))
        object.__setattr__(self, "h", _freeze(h))


def _freeze(a: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(a, dtype=np.float64)
    if out is a:
        out = out.copy()
    out.flags.writeable = False
    return out


def new_tensor(p: int, q: int, entries, labels: tuple[str, ...] = (),
               max_correction: float | None = None) -> StructureTensor:
    """Build a StructureTensor from p matrices of size q x q.

    The input is projected onto its skew-symmetric part; the largest entry
    of the discarded symmetric part is recorded as ``correction``.  If
    ``max_correction`` is given and the correction exceeds it, the input is
    rejected instead.

    Raises:
        ValueError: on dimension mismatch, non-finite entries, or a
            symmetric part larger than ``max_correction``.
    """
    if p < 1 or q < 1:
        raise ValueError(f"type parameters must be positive, got p={p}, q={q}")
    arr = np.asarray(entries, dtype=np.float64)
    if arr.shape != (p, q, q):
        raise ValueError(f"expected entries of shape ({p}, {q}, {q}), "
                         f"got {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError("tensor entries must be finite")
    sym = 0.5 * (arr + np.transpose(arr, (0, 2, 1)))
    correction = float(np.max(np.abs(sym))) if sym.size else 0.0
    if max_correction is not None and correction > max_correction:
        raise ValueError(f"input is not skew-symmetric: symmetric part has "
                         f"max entry {correction:.3e} > {max_correction:.3e}")
    skew = arr - sym
    return StructureTensor(p, q, _freeze(skew), correction, tuple(labels))


def inner(a: StructureTensor, b: StructureTensor) -> float:
    """Frobenius pairing sum_k tr(A_k B_k^T) of two same-type tuples."""
    if (a.p, a.q) != (b.p, b.q):
        raise ValueError(f"type mismatch: ({a.p},{a.q}) vs ({b.p},{b.q})")
    return float(np.sum(a.mats * b.mats))


def norm(a: StructureTensor) -> float:
    return a.norm()


def is_type_pq(c: StructureTensor, tol: float = RANK_TOL) -> bool:
    """True when the components are linearly independent (span rank p).

    Rank is decided from the singular values of the p x D_q matrix of
    independent entries: the tensor has full component rank when the
    smallest singular value exceeds ``tol`` times the largest.
    """
    iu = np.triu_indices(c.q, k=1)
    m = c.mats[:, iu[0], iu[1]]
    if c.p > m.shape[1]:
        return False
    sv = np.linalg.svd(m, compute_uv=False)
    if sv[0] == 0.0:
        return False
    return bool(sv[-1] > tol * sv[0])


def group_act(g, h, c: StructureTensor) -> StructureTensor:
    """Apply (g, h): k-th output component is sum_j h_kj (g C^j g^T)."""
    g = np.asarray(g, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    if g.shape != (c.q, c.q):
        raise ValueError(f"g must have shape ({c.q}, {c.q}), got {g.shape}")
    if h.shape != (c.p, c.p):
        raise ValueError(f"h must have shape ({c.p}, {c.p}), got {h.shape}")
    conj = np.einsum("ab,kbc,dc->kad", g, c.mats, g, optimize=True)
    mixed = np.einsum("kj,jad->kad", h, conj)
    return new_tensor(c.p, c.q, mixed, labels=c.labels)


def infinitesimal_act(x, y, c: StructureTensor) -> StructureTensor:
    """Derivative of the action at the identity along symmetric (X, Y).

    The k-th component is X C^k + C^k X^T + sum_j Y_kj C^j.  This is the
    tangent vector used by the moment-map pairing, so X and Y are required
    to be (numerically) symmetric.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != (c.q, c.q):
        raise ValueError(f"X must have shape ({c.q}, {c.q}), got {x.shape}")
    if y.shape != (c.p, c.p):
        raise ValueError(f"Y must have shape ({c.p}, {c.p}), got {y.shape}")
    for name, m in (("X", x), ("Y", y)):
        scale = float(np.max(np.abs(m))) if m.size else 0.0
        if scale and float(np.max(np.abs(m - m.T))) > 1e-8 * scale:
            raise ValueError(f"{name} must be symmetric")
    out = x @ c.mats + c.mats @ x.T + np.einsum("kj,jad->kad", y, c.mats)
    return new_tensor(c.p, c.q, out, labels=c.labels)


def random_tensor(p: int, q: int, rng: np.random.Generator) -> StructureTensor:
    """Tuple with i.i.d. standard normal entries above the diagonal."""
    if p < 1 or q < 2:
        raise ValueError(f"need p >= 1 and q >= 2, got p={p}, q={q}")
    mats = np.zeros((p, q, q))
    iu = np.triu_indices(q, k=1)
    for k in range(p):
        v = rng.standard_normal(len(iu[0]))
        mats[k][iu] = v
        mats[k] -= mats[k].T
    return new_tensor(p, q, mats)
