"""Certificates that a family carries no distinguished point.

On the coefficient stratum of a family (all block coefficients nonzero) the
moment-map image stays block scalar in the first factor and diagonal in the
second, so the action vector w = m(C).C lies in the span of the same block
basis and C is distinguished exactly when the per-coordinate multipliers all
agree.  Those multipliers are linear forms in the squared coefficients; the
certificate therefore reduces to a linear feasibility question which is
decided exactly by linear programming, cross-checked by replaying the forms
against the actual moment action at random points.

Also provides the block-scalar detection report, exact spread minimization
over the margin-constrained stratum, and the orbit-separation invariant for
the middle coefficients.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
import scipy.optimize

from .constructions import FamilyKind, FamilySpec, family_block_dims, family_tensor
from .kernels import moment_action
from .moment import moment
from .tensor_core import StructureTensor

__all__ = [
    "Verdict",
    "Condition",
    "WPoint",
    "HDetectionReport",
    "SpreadResult",
    "Certificate",
    "OrbitRelation",
    "coefficient_names",
    "value_matrix",
    "coefficient_values",
    "w_point_from_theta",
    "random_w_point",
    "h_detection_check",
    "minimize_spread",
    "non_einstein_certificate",
    "orbit_separation_invariant",
    "compare_orbit_invariants",
    "middle_sign_flip",
]

_CERT_KINDS = (FamilyKind.NON_EINSTEIN, FamilyKind.ADJOINED_NON_EINSTEIN,
               FamilyKind.J9)


def _require_cert_kind(spec: FamilySpec) -> None:
    if spec.kind not in _CERT_KINDS:
        raise ValueError(f"no coefficient stratum for kind {spec.kind.value}")


@dataclass(frozen=True)
class WPoint:
    """A point of the coefficient stratum of a non-Einstein candidate family.

    Coordinates follow the block layout: a1 on the chained J block, b/c on
    the middle so(4) blocks (length n-1 each), d on the final so(4) block
    (length j), u/v on the soliton slots when present, and one (lam, mu)
    pair per adjoined piece.  Unused soliton coordinates are stored as 0.
    """

    spec: FamilySpec
    a1: float = 1.0
    b: tuple[float, ...] = ()
    c: tuple[float, ...] = ()
    d: tuple[float, ...] = ()
    u: float = 1.0
    v: float = 1.0
    lam: tuple[float, ...] = ()
    mu: tuple[float, ...] = ()

    def __post_init__(self):
        _require_cert_kind(self.spec)
        for name in ("b", "c", "d", "lam", "mu"):
            object.__setattr__(self, name,
                               tuple(float(x) for x in getattr(self, name)))
        spec = self.spec
        if spec.kind is FamilyKind.J9:
            if self.b or self.c or self.lam or self.mu:
                raise ValueError("J9 points only carry a1, u, v and d")
            if len(self.d) != spec.j:
                raise ValueError(f"d must have length j = {spec.j}")
            return
        if len(self.b) != spec.n - 1 or len(self.c) != spec.n - 1:
            raise ValueError(f"b and c must have length n-1 = {spec.n - 1}")
        if len(self.d) != spec.j:
            raise ValueError(f"d must have length j = {spec.j}")
        if len(self.lam) != len(spec.adjoin_list) or \
                len(self.mu) != len(spec.adjoin_list):
            raise ValueError("lam and mu must have one entry per adjoined piece")
        if spec.d != 3:
            object.__setattr__(self, "u", 0.0)
            object.__setattr__(self, "v", 0.0)

    def theta(self) -> np.ndarray:
        """Coordinate vector in the canonical order of coefficient_names."""
        if self.spec.kind is FamilyKind.J9:
            return np.array([self.a1, self.u, self.v, *self.d])
        out = [self.a1, *self.b, *self.c, *self.d]
        if self.spec.d == 3:
            out += [self.u, self.v]
        for lm, m in zip(self.lam, self.mu):
            out += [lm, m]
        return np.array(out)

    def tensor(self) -> StructureTensor:
        if self.spec.kind is FamilyKind.J9:
            return family_tensor(self.spec, self.a1, (), (), self.d,
                                 u=self.u, v=self.v)
        adjoined = tuple(
            (_adjoined_pieces(self.spec)[i], self.lam[i], self.mu[i])
            for i in range(len(self.lam)))
        return family_tensor(self.spec, self.a1, self.b, self.c, self.d,
                             u=self.u, v=self.v, adjoined=adjoined)

    def to_json_dict(self) -> dict:
        out = {"spec": self.spec.to_json_dict(), "a1": self.a1,
               "b": list(self.b), "c": list(self.c), "d": list(self.d)}
        if self.spec.kind is FamilyKind.J9 or self.spec.d == 3:
            out["u"], out["v"] = self.u, self.v
        if self.lam:
            out["lam"], out["mu"] = list(self.lam), list(self.mu)
        return out


_PIECE_CACHE: dict[tuple, tuple] = {}


def _adjoined_pieces(spec: FamilySpec) -> tuple[StructureTensor, ...]:
    """Built adjoined tensors, cached per spec shape."""
    from .constructions import build_family
    key = tuple(repr(s.to_json_dict()) for s in spec.adjoin_list)
    if key not in _PIECE_CACHE:
        _PIECE_CACHE[key] = tuple(build_family(s) for s in spec.adjoin_list)
    return _PIECE_CACHE[key]


def coefficient_names(spec: FamilySpec) -> tuple[str, ...]:
    """Coordinate names of the stratum, in theta order."""
    _require_cert_kind(spec)
    if spec.kind is FamilyKind.J9:
        return ("a1", "u", "v") + tuple(f"d{i + 1}" for i in range(spec.j))
    names = ["a1"]
    names += [f"b{i + 1}" for i in range(spec.n - 1)]
    names += [f"c{i + 1}" for i in range(spec.n - 1)]
    names += [f"d{i + 1}" for i in range(spec.j)]
    if spec.d == 3:
        names += ["u", "v"]
    for i in range(len(spec.adjoin_list)):
        names += [f"lam{i + 1}", f"mu{i + 1}"]
    return tuple(names)


def w_point_from_theta(spec: FamilySpec, theta) -> WPoint:
    theta = [float(x) for x in theta]
    names = coefficient_names(spec)
    if len(theta) != len(names):
        raise ValueError(f"theta must have length {len(names)}, got {len(theta)}")
    vals = dict(zip(names, theta))
    if spec.kind is FamilyKind.J9:
        return WPoint(spec, a1=vals["a1"], u=vals["u"], v=vals["v"],
                      d=theta[3:])
    nm = spec.n - 1
    b = theta[1: 1 + nm]
    c = theta[1 + nm: 1 + 2 * nm]
    d = theta[1 + 2 * nm: 1 + 2 * nm + spec.j]
    rest = theta[1 + 2 * nm + spec.j:]
    u = v = 1.0
    if spec.d == 3:
        u, v = rest[0], rest[1]
        rest = rest[2:]
    return WPoint(spec, a1=theta[0], b=b, c=c, d=d, u=u, v=v,
                  lam=rest[0::2], mu=rest[1::2])


def random_w_point(spec: FamilySpec, rng: np.random.Generator,
                   low: float = 0.3, high: float = 1.7) -> WPoint:
    """Uniformly random positive coordinates in [low, high]."""
    n = len(coefficient_names(spec))
    return w_point_from_theta(spec, rng.uniform(low, high, size=n))


def value_matrix(spec: FamilySpec) -> np.ndarray:
    """Matrix V with (coordinate multipliers of w) = V @ theta**2.

    Row i gives the multiplier of coordinate i as a linear form in the
    squared coordinates; C is distinguished on the stratum exactly when all
    rows evaluate equally.
    """
    _require_cert_kind(spec)
    names = coefficient_names(spec)
    idx = {nm: i for i, nm in enumerate(names)}
    m = len(names)
    V = np.zeros((m, m))

    if spec.kind is FamilyKind.J9:
        m1_row = np.zeros(m)
        m1_row[idx["a1"]], m1_row[idx["u"]], m1_row[idx["d1"]] = 2.0, 2.0, 4.0
        m2_row = np.zeros(m)
        m2_row[idx["v"]], m2_row[idx["d2"]] = 2.0, 4.0
        s_row = np.zeros(m)
        for i in range(spec.j):
            s_row[idx[f"d{i + 1}"]] = 4.0
        V[idx["a1"]] = m1_row
        V[idx["a1"], idx["a1"]] += 4.0
        V[idx["u"]] = m1_row
        V[idx["u"], idx["u"]] += 4.0
        V[idx["u"], idx["v"]] += 2.0
        V[idx["v"]] = m2_row
        V[idx["v"], idx["u"]] += 2.0
        V[idx["v"], idx["v"]] += 4.0
        V[idx["d1"]] = s_row + m1_row
        V[idx["d2"]] = s_row + m2_row
        for i in range(2, spec.j):
            V[idx[f"d{i + 1}"]] = s_row
            V[idx[f"d{i + 1}"], idx[f"d{i + 1}"]] += 4.0
        return V

    j, k, n = spec.j, spec.k, spec.n
    pieces = _adjoined_pieces(spec)
    # squared norm of slot 0 and slot 1 (the diagonal moment entries that
    # feed every multiplier placed in those slots)
    m1_row = np.zeros(m)
    m1_row[idx["a1"]] = 2.0 * k
    for i in range(n - 1):
        m1_row[idx[f"b{i + 1}"]] = 4.0
    m1_row[idx["d1"]] = 4.0
    m2_row = np.zeros(m)
    for i in range(n - 1):
        m2_row[idx[f"c{i + 1}"]] = 4.0
    m2_row[idx["d2"]] = 4.0
    if spec.d == 3:
        m1_row[idx["u"]] = 2.0
        m2_row[idx["v"]] = 2.0
    # adjoined first matrices share slot j-1
    last_row = np.zeros(m)
    last_row[idx[f"d{j}"]] = 4.0
    for i, piece in enumerate(pieces):
        last_row[idx[f"lam{i + 1}"]] = float(piece.q)
    if j == 2:
        m2_row = m2_row + last_row - _one_hot(m, idx["d2"], 4.0)
        last_row = m2_row
    s_row = np.zeros(m)
    for i in range(j):
        s_row[idx[f"d{i + 1}"]] = 4.0

    V[idx["a1"]] = m1_row
    V[idx["a1"], idx["a1"]] += 4.0
    for i in range(n - 1):
        for nm, diag in ((f"b{i + 1}", m1_row), (f"c{i + 1}", m2_row)):
            V[idx[nm]] = diag.copy()
            V[idx[nm], idx[f"b{i + 1}"]] += 4.0
            V[idx[nm], idx[f"c{i + 1}"]] += 4.0
    V[idx["d1"]] = s_row + m1_row
    V[idx["d2"]] = s_row + m2_row
    for i in range(2, j):
        slot_diag = _one_hot(m, idx[f"d{i + 1}"], 4.0)
        if i == j - 1:
            slot_diag = last_row
        V[idx[f"d{i + 1}"]] = s_row + slot_diag
    if j == 2:
        V[idx["d2"]] = s_row + last_row
    if spec.d == 3:
        V[idx["u"]] = m1_row.copy()
        V[idx["u"], idx["u"]] += 4.0
        V[idx["u"], idx["v"]] += 2.0
        V[idx["v"]] = m2_row.copy()
        V[idx["v"], idx["u"]] += 2.0
        V[idx["v"], idx["v"]] += 4.0
    for i, piece in enumerate(pieces):
        rho = 2.0 * piece.p
        block = np.zeros(m)
        block[idx[f"lam{i + 1}"]] = 4.0
        block[idx[f"mu{i + 1}"]] = 2.0 * (rho - 2.0)
        V[idx[f"lam{i + 1}"]] = block + last_row
        V[idx[f"mu{i + 1}"]] = block + _one_hot(m, idx[f"mu{i + 1}"],
                                                float(piece.q))
    return V


def _one_hot(m: int, i: int, val: float) -> np.ndarray:
    out = np.zeros(m)
    out[i] = val
    return out


def coefficient_values(point: WPoint) -> tuple[tuple[str, float], ...]:
    """Per-coordinate multipliers of w = m(C).C at a stratum point."""
    V = value_matrix(point.spec)
    vals = V @ (point.theta() ** 2)
    return tuple(zip(coefficient_names(point.spec), map(float, vals)))


def _basis_tensors(spec: FamilySpec) -> tuple[StructureTensor, ...]:
    """One-hot stratum tensors; mutually orthogonal by block layout."""
    n = len(coefficient_names(spec))
    eye = np.eye(n)
    return tuple(w_point_from_theta(spec, eye[i]).tensor() for i in range(n))


def replay_values(point: WPoint) -> tuple[np.ndarray, float]:
    """Multipliers extracted from the actual moment action, plus the
    relative norm of the off-stratum component of w (zero in exact math)."""
    c = point.tensor()
    img = moment(c)
    w = moment_action(c.mats, img.m1, img.m2)
    theta = point.theta()
    basis = _basis_tensors(point.spec)
    vals = np.zeros(len(theta))
    w_rem = w.copy()
    for i, bt in enumerate(basis):
        proj = float(np.sum(w * bt.mats) / np.sum(bt.mats * bt.mats))
        w_rem -= proj * bt.mats
        if theta[i] == 0.0:
            raise ValueError(f"coordinate {i} vanishes; not a stratum point")
        vals[i] = proj / theta[i]
    off = float(np.sqrt(np.sum(w_rem**2)) / max(np.sqrt(np.sum(w**2)), 1e-300))
    return vals, off


# ---------------------------------------------------------------------------
# block-scalar detection


@dataclass(frozen=True)
class HDetectionReport:
    """Deviation of the moment image from the expected block pattern.

    m1 must be the direct sum of scalar blocks (a fixed diagonal triple on
    the soliton block), m2 diagonal with the squared slot norms.  For shapes
    built from the integer so(4) and soliton matrices the off-pattern
    entries vanish exactly in floating point and exact_zeros is set.
    """

    ok: bool
    exact_zeros: bool
    block_names: tuple[str, ...]
    m1_expected: tuple[tuple[float, ...], ...]
    m2_expected: tuple[float, ...]
    m1_block_dev: float
    m1_off_block_max: float
    m2_diag_dev: float
    m2_off_diag_max: float

    def to_json_dict(self) -> dict:
        return {
            "ok": self.ok,
            "exact_zeros": self.exact_zeros,
            "block_names": list(self.block_names),
            "m1_expected": [list(x) for x in self.m1_expected],
            "m2_expected": list(self.m2_expected),
            "m1_block_dev": self.m1_block_dev,
            "m1_off_block_max": self.m1_off_block_max,
            "m2_diag_dev": self.m2_diag_dev,
            "m2_off_diag_max": self.m2_off_diag_max,
        }


def _expected_pattern(point: WPoint):
    """Per-block m1 diagonals and the m2 diagonal, from the coefficients."""
    spec = point.spec
    th = {nm: val for nm, val in
          zip(coefficient_names(spec), point.theta())}
    sq = {nm: v * v for nm, v in th.items()}
    if spec.kind is FamilyKind.J9:
        blocks = family_block_dims(spec)
        s = sum(sq[f"d{i + 1}"] for i in range(spec.j))
        m1 = [
            (2.0 * sq["a1"],) * 2,
            (2.0 * sq["u"], 2.0 * sq["u"] + 2.0 * sq["v"], 2.0 * sq["v"]),
            (2.0 * s,) * 4,
        ]
        m2 = [2.0 * sq["a1"] + 2.0 * sq["u"] + 4.0 * sq["d1"],
              2.0 * sq["v"] + 4.0 * sq["d2"]]
        m2 += [4.0 * sq[f"d{i + 1}"] for i in range(2, spec.j)]
        return blocks, m1, m2
    j, k, n = spec.j, spec.k, spec.n
    pieces = _adjoined_pieces(spec)
    blocks = family_block_dims(spec)
    # u, v exist only when the odd tail is present (d = 3)
    usq = sq.get("u", 0.0)
    vsq = sq.get("v", 0.0)
    s = sum(sq[f"d{i + 1}"] for i in range(j))
    m1 = [(2.0 * sq["a1"],) * (2 * k)]
    for i in range(n - 1):
        m1.append((2.0 * (sq[f"b{i + 1}"] + sq[f"c{i + 1}"]),) * 4)
    m1.append((2.0 * s,) * 4)
    if spec.d == 3:
        m1.append((2.0 * usq, 2.0 * usq + 2.0 * vsq, 2.0 * vsq))
    for i, piece in enumerate(pieces):
        rho = 2.0 * piece.p
        scal = 2.0 * sq[f"lam{i + 1}"] + sq[f"mu{i + 1}"] * (rho - 2.0)
        m1.append((scal,) * piece.q)
    m2 = [2.0 * k * sq["a1"] + 4.0 * sum(sq[f"b{i + 1}"] for i in range(n - 1))
          + 4.0 * sq["d1"] + 2.0 * usq,
          4.0 * sum(sq[f"c{i + 1}"] for i in range(n - 1))
          + 4.0 * sq["d2"] + 2.0 * vsq]
    for i in range(2, j):
        m2.append(4.0 * sq[f"d{i + 1}"])
    m2[j - 1] += sum(sq[f"lam{i + 1}"] * piece.q
                     for i, piece in enumerate(pieces))
    for i, piece in enumerate(pieces):
        m2 += [sq[f"mu{i + 1}"] * piece.q] * (piece.p - 1)
    return blocks, m1, m2


def h_detection_check(point: WPoint, tol: float = 1e-12) -> HDetectionReport:
    """Check the moment image against the block pattern of the stratum.

    Off-pattern entries are required to be exactly 0.0 whenever every block
    comes from the integer so(4)/soliton matrices (no adjoined piece wider
    than so(4)); otherwise they only need to stay below tol * scale.
    """
    spec = point.spec
    blocks, m1_exp, m2_exp = _expected_pattern(point)
    c = point.tensor()
    img = moment(c)
    exact = all(piece.q == 4 for piece in _adjoined_pieces(spec)) \
        if spec.kind is not FamilyKind.J9 else True

    scale = max(float(np.max(np.abs(img.m1))), float(np.max(np.abs(img.m2))),
                1e-300)
    dims = [d for _, d in blocks]
    offs = np.concatenate([[0], np.cumsum(dims)]).astype(int)
    m1_dev = 0.0
    off_mask = np.ones_like(img.m1, dtype=bool)
    for bi, dim in enumerate(dims):
        o = offs[bi]
        blk = img.m1[o: o + dim, o: o + dim]
        m1_dev = max(m1_dev, float(np.max(np.abs(blk - np.diag(m1_exp[bi])))))
        off_mask[o: o + dim, o: o + dim] = False
    m1_off = float(np.max(np.abs(img.m1[off_mask]))) if off_mask.any() else 0.0
    m2_exp_arr = np.array(m2_exp)
    m2_dev = float(np.max(np.abs(np.diag(img.m2) - m2_exp_arr)))
    m2_off = float(np.max(np.abs(img.m2 - np.diag(np.diag(img.m2)))))

    # the diagonal comparisons are never exact-zero claims; they compare two
    # rounded dot products, so they always carry the tol * scale allowance
    ok = m1_dev <= tol * scale and m2_dev <= tol * scale
    if exact:
        ok = ok and m1_off == 0.0 and m2_off == 0.0
    else:
        ok = ok and m1_off <= tol * scale and m2_off <= tol * scale
    return HDetectionReport(
        ok=ok, exact_zeros=exact,
        block_names=tuple(name for name, _ in blocks),
        m1_expected=tuple(tuple(x) for x in m1_exp),
        m2_expected=tuple(float(x) for x in m2_exp),
        m1_block_dev=m1_dev, m1_off_block_max=m1_off,
        m2_diag_dev=m2_dev, m2_off_diag_max=m2_off)


# ---------------------------------------------------------------------------
# spread minimization and the certificate


@dataclass(frozen=True)
class SpreadResult:
    """Smallest multiplier spread over the margin-constrained stratum.

    value comes from multi-start SLSQP over unit-sphere coordinates with
    theta_i >= margin; lp_value is the exact optimum of the equivalent
    linear program in the squared coordinates (the two agree to solver
    accuracy, and lp_value is authoritative).
    """

    value: float
    lp_value: float
    theta: tuple[float, ...]
    values: tuple[float, ...]
    n_starts: int
    margin: float

    def to_json_dict(self) -> dict:
        return {"value": self.value, "lp_value": self.lp_value,
                "theta": list(self.theta), "values": list(self.values),
                "n_starts": self.n_starts, "margin": self.margin}


def _spread_lp(V: np.ndarray, margin: float) -> tuple[float, np.ndarray]:
    """Exact min of max(Vx) - min(Vx) over {sum x = 1, x >= margin^2}."""
    m = V.shape[0]
    # variables: x (m), t, s; minimize t - s
    c = np.concatenate([np.zeros(m), [1.0, -1.0]])
    a_ub = np.block([[V, -np.ones((m, 1)), np.zeros((m, 1))],
                     [-V, np.zeros((m, 1)), np.ones((m, 1))]])
    b_ub = np.zeros(2 * m)
    a_eq = np.concatenate([np.ones(m), [0.0, 0.0]])[None, :]
    bounds = [(margin * margin, None)] * m + [(None, None)] * 2
    res = scipy.optimize.linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq,
                                 b_eq=[1.0], bounds=bounds, method="highs")
    if not res.success:
        raise RuntimeError(f"spread LP failed: {res.message}")
    return float(res.fun), res.x[:m]


def minimize_spread(spec: FamilySpec, n_starts: int = 32,
                    margin: float = 0.05, seed: int | None = None,
                    ) -> SpreadResult:
    """Minimize max - min of the multipliers over the unit sphere with all
    coordinates >= margin.

    Without the margin the infimum is 0 approached on the boundary of the
    stratum, which certifies nothing; margin must be positive.
    """
    if margin < 1e-4:
        raise ValueError(f"margin must be >= 1e-4, got {margin}")
    if n_starts < 1:
        raise ValueError(f"n_starts must be >= 1, got {n_starts}")
    V = value_matrix(spec)
    m = V.shape[0]
    if m * margin * margin > 1.0:
        raise ValueError(f"margin {margin} infeasible for {m} coordinates")
    lp_val, lp_x = _spread_lp(V, margin)
    rng = np.random.default_rng(seed)

    def split(z):
        return z[:m], z[m], z[m + 1]

    def objective(z):
        return z[m] - z[m + 1]

    grad_obj = np.zeros(2 + m)
    grad_obj[m], grad_obj[m + 1] = 1.0, -1.0

    def sphere(z):
        th = z[:m]
        return np.array([th @ th - 1.0])

    def sphere_jac(z):
        out = np.zeros((1, m + 2))
        out[0, :m] = 2.0 * z[:m]
        return out

    def slack(z):
        th, t, s = split(z)
        vals = V @ (th * th)
        return np.concatenate([t - vals, vals - s, th - margin])

    def slack_jac(z):
        th = z[:m]
        dv = V * (2.0 * th)[None, :]
        top = np.concatenate([-dv, np.ones((m, 1)), np.zeros((m, 1))], axis=1)
        bot = np.concatenate([dv, np.zeros((m, 1)), -np.ones((m, 1))], axis=1)
        box = np.concatenate([np.eye(m), np.zeros((m, 2))], axis=1)
        return np.concatenate([top, bot, box], axis=0)

    cons = [{"type": "eq", "fun": sphere, "jac": sphere_jac},
            {"type": "ineq", "fun": slack, "jac": slack_jac}]

    best = None
    starts = [np.sqrt(np.maximum(lp_x, margin * margin))]
    while len(starts) < n_starts:
        th = rng.uniform(margin, 1.0, size=m)
        starts.append(th / np.linalg.norm(th))
    for th0 in starts[:n_starts]:
        th0 = th0 / np.linalg.norm(th0)
        vals0 = V @ (th0 * th0)
        z0 = np.concatenate([th0, [vals0.max(), vals0.min()]])
        res = scipy.optimize.minimize(
            objective, z0, jac=lambda z: grad_obj, method="SLSQP",
            constraints=cons, options={"maxiter": 200, "ftol": 1e-12})
        th = res.x[:m]
        nrm = np.linalg.norm(th)
        if not np.isfinite(nrm) or nrm == 0.0 or np.any(th < margin - 1e-9):
            continue
        th = th / nrm
        vals = V @ (th * th)
        spread = float(vals.max() - vals.min())
        if best is None or spread < best[0]:
            best = (spread, th, vals)
    if best is None:
        # every start failed the box constraint; fall back to the LP point
        th = np.sqrt(np.maximum(lp_x, margin * margin))
        th = th / np.linalg.norm(th)
        vals = V @ (th * th)
        best = (float(vals.max() - vals.min()), th, vals)
    return SpreadResult(value=best[0], lp_value=lp_val,
                        theta=tuple(map(float, best[1])),
                        values=tuple(map(float, best[2])),
                        n_starts=n_starts, margin=margin)


class Verdict(str, enum.Enum):
    NON_DISTINGUISHED = "NonDistinguished"
    DISTINGUISHED = "Distinguished"
    INDECOMPOSABLE = "Indecomposable"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class Condition:
    """One checked condition inside a certificate."""

    name: str
    value: object
    satisfied: bool

    def to_json_dict(self) -> dict:
        val = self.value
        if isinstance(val, (np.floating, np.integer)):
            val = val.item()
        return {"name": self.name, "value": val, "satisfied": self.satisfied}


@dataclass(frozen=True)
class Certificate:
    """Structured verdict with the conditions that produced it.

    Certificates are issued both for the no-distinguished-point question on
    family strata (NonDistinguished / Inconclusive) and, in the
    indecomposability module, for direct-sum questions (Indecomposable /
    Inconclusive).  An Inconclusive verdict makes no claim.
    """

    verdict: Verdict
    conditions: tuple[Condition, ...]
    family: FamilySpec | None = None
    spread: SpreadResult | None = None
    messages: tuple[str, ...] = ()

    def condition(self, name: str) -> Condition:
        for cond in self.conditions:
            if cond.name == name:
                return cond
        raise KeyError(f"no condition named {name!r}")

    def to_json_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "conditions": [c.to_json_dict() for c in self.conditions],
            "family": None if self.family is None else self.family.to_json_dict(),
            "spread": None if self.spread is None else self.spread.to_json_dict(),
            "messages": list(self.messages),
        }


def _lp_interior(V: np.ndarray) -> float:
    """Largest t with some x >= t, sum x = 1 and all multipliers equal."""
    m = V.shape[0]
    a_eq = np.concatenate([V[1:] - V[0], np.zeros((m - 1, 1))], axis=1)
    a_eq = np.concatenate(
        [a_eq, np.concatenate([np.ones(m), [0.0]])[None, :]], axis=0)
    b_eq = np.concatenate([np.zeros(m - 1), [1.0]])
    a_ub = np.concatenate([-np.eye(m), np.ones((m, 1))], axis=1)
    c = np.zeros(m + 1)
    c[m] = -1.0
    res = scipy.optimize.linprog(c, A_ub=a_ub, b_ub=np.zeros(m), A_eq=a_eq,
                                 b_eq=b_eq,
                                 bounds=[(0.0, None)] * m + [(None, None)],
                                 method="highs")
    if res.status == 2:  # equalities infeasible over the simplex
        return 0.0
    if not res.success:
        raise RuntimeError(f"interior LP failed: {res.message}")
    return float(-res.fun)


def non_einstein_certificate(spec: FamilySpec, n_samples: int = 8,
                             n_starts: int = 32, margin: float = 0.05,
                             seed: int | None = None, tol: float = 1e-9,
                             with_spread: bool = True) -> Certificate:
    """Decide whether the family shape carries a distinguished stratum point.

    The multiplier model is replayed against the moment action at n_samples
    random stratum points (any disagreement raises, since it would mean the
    certificate reasons about the wrong object), then the linear program
    decides positivity.  The spread minimum is attached as a quantitative
    margin when with_spread is set.
    """
    _require_cert_kind(spec)
    V = value_matrix(spec)
    rng = np.random.default_rng(seed)
    replay_dev = 0.0
    off_dev = 0.0
    for _ in range(n_samples):
        wp = random_w_point(spec, rng)
        vals, off = replay_values(wp)
        model = V @ (wp.theta() ** 2)
        scale = float(np.max(np.abs(model)))
        replay_dev = max(replay_dev, float(np.max(np.abs(vals - model))) / scale)
        off_dev = max(off_dev, off)
    if replay_dev > tol or off_dev > tol:
        raise RuntimeError(
            f"multiplier model disagrees with the moment action "
            f"(dev {replay_dev:.3e}, off-stratum {off_dev:.3e}); "
            "certificate aborted")

    conds = [Condition("model_replay_dev", replay_dev, replay_dev <= tol),
             Condition("off_stratum_dev", off_dev, off_dev <= tol)]
    if spec.kind is FamilyKind.J9:
        conds.append(Condition("gate_j_in_3_to_6", spec.j, 3 <= spec.j <= 6))
    else:
        slackv = 2 * spec.k - 4 * spec.n - spec.d
        conds.append(Condition("gate_2k_minus_4n_minus_d", slackv, slackv >= 0))

    interior = _lp_interior(V)
    certified = interior <= tol
    conds.append(Condition("lp_interior_max", interior, certified))
    msgs = []
    if certified:
        verdict = Verdict.NON_DISTINGUISHED
        msgs.append("no strictly positive squared-coordinate vector "
                    "equalizes the multipliers; the stratum carries no "
                    "distinguished point")
        if spec.kind is FamilyKind.J9:
            msgs.append(f"equalities force j*d1^2 = (13 - 5j)/4 * u^2, "
                        f"negative for j = {spec.j}")
        else:
            msgs.append(f"equalities force (2k+4n)*sum(b^2) <= "
                        f"(4n-2k)*sum(c^2) with 2k+4n = "
                        f"{2 * spec.k + 4 * spec.n} and 4n-2k = "
                        f"{4 * spec.n - 2 * spec.k}")
    else:
        verdict = Verdict.INCONCLUSIVE
        msgs.append("a strictly positive solution exists; the shape is not "
                    "covered by this certificate")
    spread = None
    if with_spread and verdict is Verdict.NON_DISTINGUISHED:
        spread = minimize_spread(spec, n_starts=n_starts, margin=margin,
                                 seed=seed)
        conds.append(Condition("spread_floor", spread.lp_value,
                               spread.lp_value > 0.0))
        msgs.append(f"multiplier spread >= {spread.lp_value:.6e} at "
                    f"margin {margin}")
    return Certificate(verdict=verdict, conditions=tuple(conds), family=spec,
                       spread=spread, messages=tuple(msgs))


# ---------------------------------------------------------------------------
# orbit separation


class OrbitRelation(str, enum.Enum):
    EQUAL = "equal"
    SIGN_RELATED = "sign_related"
    DISTINCT = "distinct"


@dataclass(frozen=True)
class OrbitInvariant:
    """Middle-coefficient invariant separating family members.

    t is the middle coefficient vector with the final-block coefficient
    pinned to 1; sign flips of single entries are realized by orthogonal
    block maps (so tensors with the same abs_t sit in one orbit of the full
    group) but not by elements of the connected component, which abs_t does
    not separate; t itself does.
    """

    t: tuple[float, ...]
    abs_t: tuple[float, ...]

    def to_json_dict(self) -> dict:
        return {"t": list(self.t), "abs_t": list(self.abs_t)}


def orbit_separation_invariant(t) -> OrbitInvariant:
    t = tuple(float(x) for x in t)
    if not t:
        raise ValueError("need at least one middle coefficient (n >= 2)")
    if any(x == 0.0 for x in t):
        raise ValueError("middle coefficients must be nonzero")
    return OrbitInvariant(t=t, abs_t=tuple(abs(x) for x in t))


def compare_orbit_invariants(a: OrbitInvariant, b: OrbitInvariant,
                             tol: float = 1e-12) -> OrbitRelation:
    if len(a.t) != len(b.t):
        return OrbitRelation.DISTINCT
    if max(abs(x - y) for x, y in zip(a.t, b.t)) <= tol:
        return OrbitRelation.EQUAL
    if max(abs(x - y) for x, y in zip(a.abs_t, b.abs_t)) <= tol:
        return OrbitRelation.SIGN_RELATED
    return OrbitRelation.DISTINCT


def middle_sign_flip(spec: FamilySpec, signs) -> np.ndarray:
    """Orthogonal q x q map flipping the chosen middle coefficients.

    signs has one +-1 entry per middle block; the returned g satisfies
    g C[t] g^T = C[t'] entrywise exactly, with t'_i = signs_i * t_i, and
    fixes the other block coefficients.
    """
    if spec.kind not in (FamilyKind.NON_EINSTEIN,
                         FamilyKind.ADJOINED_NON_EINSTEIN):
        raise ValueError("middle blocks exist only for the chained families")
    signs = tuple(int(s) for s in signs)
    if len(signs) != spec.n - 1 or any(s not in (-1, 1) for s in signs):
        raise ValueError(f"signs must be {spec.n - 1} entries of +-1")
    q = spec.type_pq[1]
    g = np.eye(q)
    flip = np.diag([1.0, -1.0, -1.0, 1.0])
    for i, s in enumerate(signs):
        if s == -1:
            o = 2 * spec.k + 4 * i
            g[o: o + 4, o: o + 4] = flip
    return g
