"""Tensor container, group action, and serialization checks."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from nilsoliton.tensor_core import (
    GroupElement,
    StructureTensor,
    group_act,
    infinitesimal_act,
    inner,
    is_type_pq,
    new_tensor,
    norm,
    random_tensor,
)


def _skew_tuple(p, q, rng):
    mats = rng.standard_normal((p, q, q))
    return (mats - mats.transpose(0, 2, 1)) / 2.0


# ---------------------------------------------------------------------------
# construction and validation


def test_new_tensor_accepts_exact_skew(rng):
    mats = _skew_tuple(2, 4, rng)
    c = new_tensor(2, 4, mats)
    assert c.p == 2 and c.q == 4 and c.dq == 6
    assert c.correction == 0.0
    np.testing.assert_array_equal(c.mats, mats)


def test_new_tensor_projects_and_reports_correction(rng):
    raw = rng.standard_normal((1, 3, 3))
    c = new_tensor(1, 3, raw)
    sym = (raw + raw.transpose(0, 2, 1)) / 2.0
    # correction reports the worst entry dropped, matching the gate
    assert c.correction == np.max(np.abs(sym))
    np.testing.assert_allclose(c.mats, -c.mats.transpose(0, 2, 1), atol=0)


def test_new_tensor_max_correction_gate(rng):
    raw = rng.standard_normal((1, 3, 3))
    with pytest.raises(ValueError, match="not skew-symmetric"):
        new_tensor(1, 3, raw, max_correction=1e-12)


@pytest.mark.parametrize("p,q", [(0, 4), (2, 0), (-1, 3)])
def test_new_tensor_rejects_bad_type(p, q):
    with pytest.raises(ValueError, match="positive"):
        new_tensor(p, q, np.zeros((max(p, 1), max(q, 1), max(q, 1))))


def test_new_tensor_rejects_wrong_shape():
    with pytest.raises(ValueError, match="shape"):
        new_tensor(2, 3, np.zeros((2, 4, 4)))


def test_new_tensor_rejects_non_finite():
    mats = np.zeros((1, 3, 3))
    mats[0, 0, 1] = np.inf
    mats[0, 1, 0] = -np.inf
    with pytest.raises(ValueError, match="finite"):
        new_tensor(1, 3, mats)


def test_mats_are_read_only(rng):
    c = new_tensor(2, 4, _skew_tuple(2, 4, rng))
    with pytest.raises((ValueError, RuntimeError)):
        c.mats[0, 0, 1] = 5.0


# ---------------------------------------------------------------------------
# inner product, norm, normalization


def test_inner_matches_flat_dot(rng):
    a = new_tensor(3, 4, _skew_tuple(3, 4, rng))
    b = new_tensor(3, 4, _skew_tuple(3, 4, rng))
    assert inner(a, b) == pytest.approx(np.sum(a.mats * b.mats), rel=1e-15)
    assert norm(a) == pytest.approx(np.sqrt(inner(a, a)), rel=1e-15)
    assert a.norm() == norm(a)


def test_inner_type_mismatch(rng):
    a = new_tensor(2, 4, _skew_tuple(2, 4, rng))
    b = new_tensor(2, 5, _skew_tuple(2, 5, rng))
    with pytest.raises(ValueError, match="type mismatch"):
        inner(a, b)


def test_unit_has_norm_one(rng):
    c = new_tensor(2, 5, 10.0 * _skew_tuple(2, 5, rng))
    assert c.unit().norm() == pytest.approx(1.0, abs=1e-14)


def test_unit_zero_tensor_raises():
    c = new_tensor(1, 3, np.zeros((1, 3, 3)))
    with pytest.raises(ValueError, match="zero tensor"):
        c.unit()


def test_scaled(rng):
    c = new_tensor(1, 4, _skew_tuple(1, 4, rng))
    np.testing.assert_array_equal(c.scaled(2.0).mats, 2.0 * c.mats)


# ---------------------------------------------------------------------------
# group action


def test_group_act_identity(rng):
    c = new_tensor(2, 4, _skew_tuple(2, 4, rng))
    out = group_act(np.eye(4), np.eye(2), c)
    np.testing.assert_allclose(out.mats, c.mats, atol=0)


def test_group_act_composition(rng):
    c = new_tensor(2, 4, _skew_tuple(2, 4, rng))
    g1, g2 = rng.standard_normal((2, 4, 4))
    h1, h2 = rng.standard_normal((2, 2, 2))
    once = group_act(g1 @ g2, h1 @ h2, c)
    twice = group_act(g1, h1, group_act(g2, h2, c))
    np.testing.assert_allclose(once.mats, twice.mats, rtol=1e-12, atol=1e-12)


def test_group_act_orthogonal_preserves_norm(rng):
    c = new_tensor(3, 5, _skew_tuple(3, 5, rng))
    g, _ = np.linalg.qr(rng.standard_normal((5, 5)))
    h, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    assert group_act(g, h, c).norm() == pytest.approx(c.norm(), rel=1e-12)


def test_group_act_shape_checks(rng):
    c = new_tensor(2, 4, _skew_tuple(2, 4, rng))
    with pytest.raises(ValueError, match="g must have shape"):
        group_act(np.eye(3), np.eye(2), c)
    with pytest.raises(ValueError, match="h must have shape"):
        group_act(np.eye(4), np.eye(3), c)


def test_group_element_validation():
    GroupElement(np.eye(3), np.eye(2))
    with pytest.raises(ValueError, match="square"):
        GroupElement(np.zeros((2, 3)), np.eye(2))
    with pytest.raises(ValueError, match="finite"):
        GroupElement(np.eye(2) * np.nan, np.eye(2))


def test_infinitesimal_act_is_action_derivative(rng):
    # central difference of t -> (e^{tX}, e^{tY}) . C at t = 0
    c = new_tensor(2, 4, _skew_tuple(2, 4, rng))
    x = rng.standard_normal((4, 4))
    x = (x + x.T) / 2.0
    y = rng.standard_normal((2, 2))
    y = (y + y.T) / 2.0
    eps = 1e-6
    plus = group_act(expm(eps * x), expm(eps * y), c).mats
    minus = group_act(expm(-eps * x), expm(-eps * y), c).mats
    fd = (plus - minus) / (2.0 * eps)
    lin = infinitesimal_act(x, y, c).mats
    np.testing.assert_allclose(fd, lin, atol=1e-9)


def test_infinitesimal_act_requires_symmetric(rng):
    c = new_tensor(2, 4, _skew_tuple(2, 4, rng))
    skew = np.array([[0.0, 1.0], [-1.0, 0.0]])
    with pytest.raises(ValueError, match="Y must be symmetric"):
        infinitesimal_act(np.eye(4), skew, c)


# ---------------------------------------------------------------------------
# type predicate


def test_is_type_pq_on_independent_components(rng):
    assert is_type_pq(new_tensor(2, 4, _skew_tuple(2, 4, rng)))


def test_is_type_pq_fails_on_dependent_components(rng):
    a = _skew_tuple(1, 4, rng)[0]
    mats = np.stack([a, 2.0 * a])
    assert not is_type_pq(new_tensor(2, 4, mats))


def test_is_type_pq_fails_on_zero_component(rng):
    mats = np.stack([_skew_tuple(1, 4, rng)[0], np.zeros((4, 4))])
    assert not is_type_pq(new_tensor(2, 4, mats))


# ---------------------------------------------------------------------------
# serialization


def test_json_roundtrip_exact(rng):
    c = new_tensor(2, 5, _skew_tuple(2, 5, rng), labels=("a", "b"))
    d = StructureTensor.from_json_dict(c.to_json_dict())
    assert d.p == c.p and d.q == c.q
    assert d.labels == c.labels
    np.testing.assert_array_equal(d.mats, c.mats)


def test_json_missing_field():
    with pytest.raises(ValueError, match="missing or malformed"):
        StructureTensor.from_json_dict({"p": 1, "q": 3})


def test_json_wrong_matrix_count(rng):
    d = new_tensor(2, 3, _skew_tuple(2, 3, rng)).to_json_dict()
    d["matrices"] = d["matrices"][:1]
    with pytest.raises(ValueError, match="expected 2 matrices"):
        StructureTensor.from_json_dict(d)


def test_json_non_numeric_entry(rng):
    d = new_tensor(1, 3, _skew_tuple(1, 3, rng)).to_json_dict()
    d["matrices"][0][2] = "oops"
    with pytest.raises(ValueError, match="non-numeric"):
        StructureTensor.from_json_dict(d)


def test_with_labels(rng):
    c = new_tensor(1, 3, _skew_tuple(1, 3, rng))
    tagged = c.with_labels("hello").with_labels("world")
    assert tagged.labels == ("hello", "world")  # appends, never replaces
    np.testing.assert_array_equal(tagged.mats, c.mats)


# ---------------------------------------------------------------------------
# random model


def test_random_tensor_is_skew_and_reproducible():
    a = random_tensor(3, 6, np.random.default_rng(42))
    b = random_tensor(3, 6, np.random.default_rng(42))
    np.testing.assert_array_equal(a.mats, b.mats)
    np.testing.assert_allclose(a.mats, -a.mats.transpose(0, 2, 1), atol=0)
    assert a.correction == 0.0


def test_random_tensor_rejects_bad_type(rng):
    with pytest.raises(ValueError):
        random_tensor(0, 4, rng)
    with pytest.raises(ValueError):
        random_tensor(2, 1, rng)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_action_keeps_skew_property(seed):
    rng = np.random.default_rng(seed)
    c = random_tensor(2, 4, rng)
    g = rng.standard_normal((4, 4))
    h = rng.standard_normal((2, 2))
    out = group_act(g, h, c)
    np.testing.assert_allclose(out.mats, -out.mats.transpose(0, 2, 1),
                               atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_inner_is_bilinear_symmetric(seed):
    rng = np.random.default_rng(seed)
    a = random_tensor(2, 5, rng)
    b = random_tensor(2, 5, rng)
    s = float(rng.uniform(-3, 3))
    assert inner(a, b) == pytest.approx(inner(b, a), rel=1e-12, abs=1e-12)
    assert inner(a.scaled(s), b) == pytest.approx(s * inner(a, b),
                                                  rel=1e-12, abs=1e-12)
