"""Indecomposability certificates and decomposition search.

A two-step algebra decomposes as a direct sum of ideals exactly when the
span of its structure matrices has a basis {Z_i} u {W_j} with
V2 = intersect Ker Z_i and V1 = intersect Ker W_j complementary in R^q
(assuming no common kernel, i.e. no Euclidean de Rham factor).

Indecomposability claims route exclusively through sufficient criteria:
a large component count forces kernel dimensions that cannot complement, a
one or two dimensional center pins the possible factors, and concatenation
and adjoin preserve indecomposability of their inputs.  The search for an
actual decomposition is heuristic with proof-on-success semantics: any
returned split is verified by exhibiting the change of basis that makes the
tuple block diagonal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .certification import Certificate, Condition, Verdict, non_einstein_certificate
from .constructions import FamilyKind, FamilySpec
from .tensor_core import StructureTensor

__all__ = [
    "Decomposition",
    "common_kernel",
    "pencil_nonsingular",
    "structural_criteria",
    "decomposition_search",
]

KERNEL_TOL = 1e-8


def common_kernel(c: StructureTensor, tol: float = KERNEL_TOL) -> np.ndarray:
    """Orthonormal basis (q x k) of the joint kernel of all components.

    Empty (k = 0) means no Euclidean de Rham factor.  Kernel dimensions use
    singular values with relative threshold tol.
    """
    stacked = c.mats.reshape(c.p * c.q, c.q)
    u, s, vt = np.linalg.svd(stacked, full_matrices=True)
    if s.size == 0 or s[0] == 0.0:
        return np.eye(c.q)
    rank = int(np.sum(s > tol * s[0]))
    return vt[rank:].T.copy()


def _nullspace(mat: np.ndarray, tol: float) -> np.ndarray:
    u, s, vt = np.linalg.svd(mat, full_matrices=True)
    if s.size == 0 or s[0] == 0.0:
        return np.eye(mat.shape[1])
    rank = int(np.sum(s > tol * s[0]))
    return vt[rank:].T.copy()


def pencil_nonsingular(c: StructureTensor, samples: int = 64,
                       tol: float = KERNEL_TOL,
                       seed: int | None = 0) -> bool:
    """True when no nonzero real combination of the components is singular.

    True implies the algebra is indecomposable (every candidate kernel in
    the span is trivial).  q odd is always False; p = 1 reduces to the
    determinant; p = 2 is decided exactly through the eigenvalues of
    C1^{-1} C2 (real eigenvalue <=> singular pencil direction); p = 3 adds
    a deterministic spherical grid sized for the determinant degree.
    Supports p <= 3.
    """
    if c.q % 2 == 1:
        return False
    if c.p > 3:
        raise ValueError(f"pencil check supports p <= 3, got p = {c.p}")

    def nonsingular(mat: np.ndarray) -> bool:
        s = np.linalg.svd(mat, compute_uv=False)
        return bool(s[0] > 0.0 and s[-1] > tol * s[0])

    if not nonsingular(c.mats[0]):
        return False
    if c.p == 1:
        return True
    if c.p == 2:
        pencil = np.linalg.solve(c.mats[0], c.mats[1])
        eigs = np.linalg.eigvals(pencil)
        # a real eigenvalue t gives det(C2 - t*(-C1)) = 0 i.e. a singular
        # real direction; complex pairs keep the pencil definite
        if np.any(np.abs(eigs.imag) <= tol * np.maximum(np.abs(eigs), 1.0)):
            return False
        return True
    # p = 3: deterministic grid plus random unit directions
    rng = np.random.default_rng(seed)
    num = 16 * max(c.q, 4)
    ok = True
    for a in np.linspace(0.0, np.pi, num, endpoint=False):
        for b in np.linspace(0.0, 2.0 * np.pi, 2 * num, endpoint=False):
            vec = np.array([np.sin(a) * np.cos(b), np.sin(a) * np.sin(b),
                            np.cos(a)])
            if not nonsingular(np.tensordot(vec, c.mats, axes=1)):
                return False
    for _ in range(samples):
        vec = rng.normal(size=3)
        vec /= np.linalg.norm(vec)
        if not nonsingular(np.tensordot(vec, c.mats, axes=1)):
            return False
    return ok


def _dq(q: int) -> int:
    return q * (q - 1) // 2


def _large_p(p: int, q: int) -> bool:
    return q % 2 == 0 and (q - 2) * (q - 3) // 2 + 2 <= p <= _dq(q)


def _small_center(c: StructureTensor, tol: float) -> str | None:
    """Leaf lemmas for p <= 2: returns the reason string or None.

    p = 1 with no common kernel is the algebra with one dimensional center
    (Heisenberg type), which cannot split because its center cannot; type
    (2,3) cannot split because complementary kernels of 3x3 skews are odd
    dimensional and cannot sum to 3.
    """
    if c.p == 1 and common_kernel(c, tol).shape[1] == 0:
        return "one dimensional center with no common kernel"
    if c.p == 2 and c.q == 3:
        return "kernels of so(3) elements are odd dimensional; no pair sums to 3"
    return None


def _certify_spec(spec: FamilySpec, tol: float, depth: int = 0
                  ) -> tuple[bool, list[Condition]]:
    """Recursive certification over the build tree of a family spec."""
    from .constructions import build_family

    if depth > 8:
        return False, [Condition("recursion_depth", depth, False)]
    kind = spec.kind
    p, q = spec.type_pq
    tag = f"{kind.value}({p},{q})"
    if kind in (FamilyKind.MINIMAL_D,):
        ok = _large_p(p, q)
        return ok, [Condition(f"(a) large p for {tag}", f"p={p}, q={q}", ok)]
    if kind is FamilyKind.SOLITON_23:
        return True, [Condition(f"(b) so(3) parity for {tag}", "type (2,3)",
                                True)]
    if kind is FamilyKind.HEISENBERG_J:
        return True, [Condition(f"(b) one dimensional center for {tag}",
                                "nonsingular single component", True)]
    if kind is FamilyKind.B_BLOCKS:
        if spec.j >= 3:
            return True, [Condition(f"(a) large p for {tag}",
                                    f"3 <= p={spec.j} <= 6 at q=4", True)]
        if spec.j == 2:
            ok = pencil_nonsingular(build_family(spec), tol=tol)
            return ok, [Condition(f"pencil nonsingular for {tag}", ok, ok)]
        return True, [Condition(f"(b) one dimensional center for {tag}",
                                "nonsingular single component", True)]
    if kind is FamilyKind.J9:
        # J +_c soliton is a concatenation with 1 < 2, then the result
        # (p = 2) concatenates with (B1..Bj) with 2 < j
        conds = [Condition(f"(d) concat fold for {tag}",
                           f"p sequence (1, 2) -> 2 < j={spec.j}", True)]
        for sub in (FamilySpec(FamilyKind.HEISENBERG_J, k=1),
                    FamilySpec(FamilyKind.SOLITON_23),
                    FamilySpec(FamilyKind.B_BLOCKS, j=spec.j)):
            ok, sub_conds = _certify_spec(sub, tol, depth + 1)
            conds.extend(sub_conds)
            if not ok:
                return False, conds
        return True, conds
    if kind is FamilyKind.ADJOINED_NON_EINSTEIN:
        base = FamilySpec(FamilyKind.NON_EINSTEIN, j=spec.j, k=spec.k,
                          n=spec.n, t=spec.t, d=spec.d)
        conds = [Condition(f"(d) adjoin of indecomposable pieces for {tag}",
                           f"{1 + len(spec.adjoin_list)} pieces", True)]
        for sub in (base, *spec.adjoin_list):
            ok, sub_conds = _certify_spec(sub, tol, depth + 1)
            conds.extend(sub_conds)
            if not ok:
                return False, conds
        return True, conds
    # NonEinstein chained family
    if spec.j == 2:
        cert = non_einstein_certificate(spec, with_spread=False)
        fired = cert.verdict is Verdict.NON_DISTINGUISHED
        built = build_family(spec)
        kernel_free = common_kernel(built, tol).shape[1] == 0
        return fired and kernel_free, [
            Condition(f"(c) type (2,q) non-Einstein for {tag}",
                      cert.verdict.value, fired),
            Condition(f"(c) no common kernel for {tag}", kernel_free,
                      kernel_free)]
    # j >= 3: concatenation of a smaller-p front with (B1..Bj); the front is
    # the j=2 subfamily when middles exist, else the chained J block, plus
    # the soliton piece when d=3; every binary fold has strictly smaller p
    conds = [Condition(f"(d) concat fold for {tag}",
                       f"front p <= 2 < j={spec.j}", True)]
    if spec.n >= 2:
        front = FamilySpec(FamilyKind.NON_EINSTEIN, j=2, k=spec.k,
                           n=spec.n - 1, t=spec.t[: max(spec.n - 2, 0)])
    else:
        front = FamilySpec(FamilyKind.HEISENBERG_J, k=spec.k)
    pieces = [front, FamilySpec(FamilyKind.B_BLOCKS, j=spec.j)]
    if spec.d == 3:
        pieces.append(FamilySpec(FamilyKind.SOLITON_23))
    for sub in pieces:
        ok, sub_conds = _certify_spec(sub, tol, depth + 1)
        conds.extend(sub_conds)
        if not ok:
            return False, conds
    return True, conds


def structural_criteria(c: StructureTensor, meta: FamilySpec | None = None,
                        tol: float = KERNEL_TOL) -> Certificate:
    """Certificate of indecomposability from the sufficient criteria.

    (a) q even with (q-2)(q-3)/2 + 2 <= p <= q(q-1)/2: complementary
        kernels are even dimensional and leave too little room for a basis.
    (b) small center: type (2,3) by kernel parity, or p = 1 with no common
        kernel (the one algebra with one dimensional center).
    (c) p = 2, no common kernel, and the family certificate says
        non-Einstein: both factors of a split would be the algebra with one
        dimensional center, making the sum Einstein.
    (d) meta describes a concatenation with strictly growing component
        counts, or an adjoin, of pieces each certified indecomposable.

    Anything else is Inconclusive (no claim).
    """
    conds: list[Condition] = []
    fired_a = _large_p(c.p, c.q)
    conds.append(Condition("(a) large p bound",
                           f"q even and {(c.q - 2) * (c.q - 3) // 2 + 2} <= "
                           f"p={c.p} <= {_dq(c.q)}" if c.q % 2 == 0
                           else "q odd", fired_a))
    if fired_a:
        return Certificate(Verdict.INDECOMPOSABLE, tuple(conds), family=meta)

    reason = _small_center(c, tol)
    conds.append(Condition("(b) small center", reason or "not applicable",
                           reason is not None))
    if reason is not None:
        return Certificate(Verdict.INDECOMPOSABLE, tuple(conds), family=meta)

    if c.p == 2 and meta is not None and \
            meta.kind in (FamilyKind.NON_EINSTEIN,
                          FamilyKind.ADJOINED_NON_EINSTEIN) and \
            meta.type_pq == (c.p, c.q):
        kernel_free = common_kernel(c, tol).shape[1] == 0
        cert = non_einstein_certificate(meta, with_spread=False)
        fired_c = kernel_free and cert.verdict is Verdict.NON_DISTINGUISHED
        conds.append(Condition(
            "(c) type (2,q) non-Einstein",
            f"no common kernel: {kernel_free}, verdict: {cert.verdict.value}",
            fired_c))
        if fired_c:
            return Certificate(Verdict.INDECOMPOSABLE, tuple(conds),
                               family=meta)
    if meta is not None and meta.type_pq == (c.p, c.q):
        fired_d, sub_conds = _certify_spec(meta, tol)
        conds.extend(sub_conds)
        if fired_d:
            return Certificate(Verdict.INDECOMPOSABLE, tuple(conds),
                               family=meta)
    return Certificate(Verdict.INCONCLUSIVE, tuple(conds), family=meta)


# ---------------------------------------------------------------------------
# decomposition search


@dataclass(frozen=True)
class Decomposition:
    """A verified direct-sum split.

    v1 and v2 are bases (columns) of complementary subspaces of R^q with
    v2 = joint kernel of the z side and v1 = joint kernel of the w side;
    z_coeffs and w_coeffs partition a basis of the component span (rows are
    coefficient vectors).  g and h exhibit the split: acting with them makes
    every component block diagonal, z rows supported on the v1 block and w
    rows on the v2 block, with relative off-block deviation off_block_dev.
    """

    v1: np.ndarray
    v2: np.ndarray
    z_coeffs: np.ndarray
    w_coeffs: np.ndarray
    g: np.ndarray
    h: np.ndarray
    off_block_dev: float

    def to_json_dict(self) -> dict:
        return {"v1": self.v1.tolist(), "v2": self.v2.tolist(),
                "z_coeffs": self.z_coeffs.tolist(),
                "w_coeffs": self.w_coeffs.tolist(),
                "off_block_dev": self.off_block_dev}


def _stable_pair(c: StructureTensor, v_cand: np.ndarray, tol: float
                 ) -> tuple[np.ndarray, np.ndarray] | None:
    """Grow a candidate subspace to a (coefficients, joint kernel) fixpoint.

    Returns (coeff, v) with coeff the full coefficient space of span
    elements killing v and v the exact joint kernel of those elements, or
    None when the pair degenerates (no killers, or kernel everything).
    """
    v = v_cand
    for _ in range(c.p + 2):
        if v.shape[1] == 0 or v.shape[1] == c.q:
            return None
        k = np.stack([(c.mats[i] @ v).ravel() for i in range(c.p)], axis=1)
        coeff = _nullspace(k, tol)
        if coeff.shape[1] == 0 or coeff.shape[1] == c.p:
            return None
        mats = np.tensordot(coeff.T, c.mats, axes=1)
        v_new = _nullspace(mats.reshape(-1, c.q), tol)
        if v_new.shape[1] == v.shape[1]:
            return coeff, v_new
        v = v_new
    return None


def _annihilator(c: StructureTensor, v: np.ndarray, tol: float) -> np.ndarray:
    """{x : x^T C_k y = 0 for all k and all y in v}.

    In a direct sum every component pairs the two factors to zero, so the
    annihilator of a true factor contains the complementary factor even
    when the split is far from orthogonal.
    """
    stacked = np.concatenate([(c.mats[i] @ v).T for i in range(c.p)], axis=0)
    return _nullspace(stacked, tol)


def _try_split(c: StructureTensor, v2_cand: np.ndarray, tol: float,
               v1_cand: np.ndarray | None = None) -> Decomposition | None:
    """Attempt a split from candidate factors; verify or reject.

    The second candidate defaults to the bilinear annihilator of the
    stabilized first one (not its orthogonal complement: splits need not be
    orthogonal); the final reconstruction check is what makes a returned
    decomposition a proof.
    """
    pair2 = _stable_pair(c, v2_cand, tol)
    if pair2 is None:
        return None
    z, v2 = pair2
    if v1_cand is None:
        v1_cand = _annihilator(c, v2, tol)
        if v1_cand.shape[1] + v2.shape[1] != c.q:
            return None
    pair1 = _stable_pair(c, v1_cand, tol)
    if pair1 is None:
        return None
    w, v1 = pair1
    nz, nw = z.shape[1], w.shape[1]
    if nz + nw != c.p or v1.shape[1] + v2.shape[1] != c.q:
        return None
    span = np.concatenate([z, w], axis=1)
    s = np.linalg.svd(span, compute_uv=False)
    if s[-1] <= tol * s[0]:
        return None
    stacked = np.concatenate([v1, v2], axis=1)
    s = np.linalg.svd(stacked, compute_uv=False)
    if s[-1] <= tol * s[0]:
        return None
    # verify: the change of basis must make every component block diagonal,
    # z rows living on the v1 block and w rows on the v2 block
    h = np.concatenate([z.T, w.T], axis=0)
    transformed = np.einsum("kl,lab->kab", h,
                            np.einsum("ab,kbc,dc->kad", stacked.T, c.mats,
                                      stacked.T))
    n1 = v1.shape[1]
    dev = 0.0
    scale = float(np.max(np.abs(transformed)))
    for i in range(c.p):
        t = transformed[i]
        if i < nz:
            off = max(np.max(np.abs(t[n1:, :])), np.max(np.abs(t[:, n1:])))
        else:
            off = max(np.max(np.abs(t[:n1, :])), np.max(np.abs(t[:, :n1])))
        dev = max(dev, float(off))
    dev_rel = dev / max(scale, 1e-300)
    if dev_rel > tol:
        return None
    return Decomposition(v1=v1, v2=v2, z_coeffs=z.T, w_coeffs=w.T,
                         g=stacked.T, h=h, off_block_dev=dev_rel)


def _pencil_kernels(c: StructureTensor, a_coeff: np.ndarray,
                    b_coeff: np.ndarray, tol: float) -> list[np.ndarray]:
    """Kernels of singular span elements B - lam*A, lam running over the
    real eigenvalues of A^{-1}B.

    Every split forces singular elements in the span (each Z_i kills the
    whole second factor), and their kernels contain the factors, so this
    generator reaches non-orthogonal splits that eigenvector cuts miss.
    """
    a = np.tensordot(a_coeff, c.mats, axes=1)
    b = np.tensordot(b_coeff, c.mats, axes=1)
    sv = np.linalg.svd(a, compute_uv=False)
    if sv[0] == 0.0 or sv[-1] <= tol * sv[0]:
        ker = _nullspace(a, tol)
        return [ker] if 0 < ker.shape[1] < c.q else []
    lams = np.linalg.eigvals(np.linalg.solve(a, b))
    out = []
    seen: list[float] = []
    for lam in lams:
        if abs(lam.imag) > tol * max(1.0, abs(lam)):
            continue
        lr = float(lam.real)
        if any(abs(lr - s) <= tol * max(1.0, abs(lr)) for s in seen):
            continue
        seen.append(lr)
        ker = _nullspace(b - lr * a, tol)
        if 0 < ker.shape[1] < c.q:
            out.append(ker)
    return out


def decomposition_search(c: StructureTensor, budget: int = 40,
                         seed: int | None = 0, tol: float = KERNEL_TOL,
                         cap: int = 4) -> Decomposition | None:
    """Search for a direct-sum split; a returned value is a proof.

    Candidates come from eigenspace splits of random symmetric elements of
    the algebra spanned by {C_i C_j^T}, from kernels of singular pencil
    directions (real eigenvalues of A^{-1}B for random span elements A, B),
    and from kernels of random span elements.  Absence of a result is
    evidence only, unless structural_criteria fired.  Requires p <= cap and
    no common kernel.
    """
    if c.p > cap:
        raise ValueError(f"decomposition search capped at p <= {cap}, "
                         f"got p = {c.p}")
    if common_kernel(c, tol).shape[1] != 0:
        raise ValueError("tuple has a common kernel (Euclidean factor); "
                         "split it off before searching")
    rng = np.random.default_rng(seed)
    grams = np.einsum("iab,jcb->ijac", c.mats, c.mats)

    for trial in range(budget):
        w = rng.normal(size=(c.p, c.p))
        s = np.einsum("ij,ijac->ac", w, grams)
        s = s + s.T
        eigvals, eigvecs = np.linalg.eigh(s)
        spreadv = float(eigvals[-1] - eigvals[0]) or 1.0
        # try every sufficiently separated eigenvalue split
        for cut in range(1, c.q):
            if eigvals[cut] - eigvals[cut - 1] <= 1e-10 * spreadv:
                continue
            left, right = eigvecs[:, :cut], eigvecs[:, cut:]
            found = _try_split(c, right, tol, left) \
                or _try_split(c, left, tol, right)
            if found is not None:
                return found
        # kernels of singular pencil directions (handles skewed splits)
        kers = _pencil_kernels(c, rng.normal(size=c.p), rng.normal(size=c.p),
                               tol)
        for i, ker in enumerate(kers):
            found = _try_split(c, ker, tol)
            if found is not None:
                return found
            for other in kers[i + 1:]:
                joint = np.concatenate([ker, other], axis=1)
                if joint.shape[1] >= c.q:
                    continue
                found = _try_split(c, joint, tol)
                if found is not None:
                    return found
        # kernels of random span elements as direct candidates
        alpha = rng.normal(size=c.p)
        ker = _nullspace(np.tensordot(alpha, c.mats, axes=1), tol)
        if 0 < ker.shape[1] < c.q:
            found = _try_split(c, ker, tol)
            if found is not None:
                return found
    return None
