"""Projected gradient flow behavior and the random scan."""

import numpy as np
import pytest

from nilsoliton.constructions import FamilyKind, FamilySpec, build_family, heisenberg_j, soliton_23
from nilsoliton.flow import (
    FlowStatus,
    RANK_COLLAPSE_TOL,
    flow_to_distinguished,
    scan_generic,
)
from nilsoliton.tensor_core import group_act, new_tensor, random_tensor


def test_heisenberg_converges_immediately():
    res = flow_to_distinguished(heisenberg_j(2))
    assert res.status is FlowStatus.DISTINGUISHED_FOUND
    assert res.iterations == 0
    assert res.residual <= 1e-15


def test_soliton_converges_immediately():
    res = flow_to_distinguished(soliton_23())
    assert res.status is FlowStatus.DISTINGUISHED_FOUND
    assert res.iterations == 0


def test_generic_tensor_flows_to_distinguished(rng):
    res = flow_to_distinguished(random_tensor(2, 5, rng))
    assert res.status is FlowStatus.DISTINGUISHED_FOUND
    assert res.residual < 1e-8
    assert res.tensor.norm() == pytest.approx(1.0, abs=1e-12)
    assert res.report.distinguished
    assert res.min_sigma > RANK_COLLAPSE_TOL


def test_family_never_converges_under_default_budget():
    spec = FamilySpec(FamilyKind.NON_EINSTEIN, j=2, k=2, n=1)
    res = flow_to_distinguished(build_family(spec))
    assert res.status is not FlowStatus.DISTINGUISHED_FOUND
    assert res.status is FlowStatus.MAX_ITERATIONS
    assert res.residual > 1e-9  # stalls above the tolerance


def test_rank_collapse_reports_degenerated(rng):
    mats = random_tensor(2, 4, rng).mats.copy()
    mats[1] *= 1e-9  # second component below the relative rank floor
    res = flow_to_distinguished(new_tensor(2, 4, mats))
    assert res.status is FlowStatus.DEGENERATED
    assert res.min_sigma < RANK_COLLAPSE_TOL


def test_flow_rejects_zero_tensor():
    with pytest.raises(ValueError, match="nonzero"):
        flow_to_distinguished(new_tensor(1, 3, np.zeros((1, 3, 3))))


def test_flow_rejects_bad_options(rng):
    c = random_tensor(1, 3, rng)
    with pytest.raises(ValueError):
        flow_to_distinguished(c, tol=0.0)
    with pytest.raises(ValueError):
        flow_to_distinguished(c, shrink=1.0)


def test_trace_records_residuals(rng):
    res = flow_to_distinguished(random_tensor(2, 4, rng), want_trace=True)
    assert res.trace is not None
    assert len(res.trace) == res.iterations + 1
    assert res.trace[-1] == pytest.approx(res.residual, rel=1e-12)
    assert np.all(np.isfinite(res.trace))


def test_flow_is_orthogonal_equivariant(rng):
    # same residual trajectory for k.C, far inside the 1e-6 contract
    c = random_tensor(2, 5, rng)
    k, _ = np.linalg.qr(rng.standard_normal((5, 5)))
    a = flow_to_distinguished(c, want_trace=True)
    b = flow_to_distinguished(group_act(k, np.eye(2), c), want_trace=True)
    assert a.status is b.status
    assert a.iterations == b.iterations
    n = min(len(a.trace), len(b.trace))
    assert float(np.max(np.abs(a.trace[:n] - b.trace[:n]))) < 1e-6


def test_flow_result_serializes(rng):
    d = flow_to_distinguished(random_tensor(1, 4, rng)).to_json_dict()
    for key in ("status", "iterations", "residual", "r", "min_sigma",
                "objective"):
        assert key in d


# ---------------------------------------------------------------------------
# scans


def test_scan_type_1q_always_converges():
    summary = scan_generic(1, 4, count=20, seed=9)
    assert summary.fraction_distinguished == 1.0


def test_scan_statuses_and_seed_are_recorded():
    summary = scan_generic(2, 4, count=8, seed=123)
    assert summary.seed == 123
    assert len(summary.outcomes) == 8
    assert sum(summary.status_counts().values()) == 8
    d = summary.to_json_dict()
    assert d["count"] == 8
    assert len(d["outcomes"]) == 8


def test_scan_is_reproducible():
    a = scan_generic(2, 4, count=6, seed=77)
    b = scan_generic(2, 4, count=6, seed=77)
    assert [o.residual for o in a.outcomes] == [o.residual for o in b.outcomes]


def test_scan_histogram_counts_every_outcome():
    summary = scan_generic(2, 4, count=10, seed=5)
    hist = summary.residual_histogram()
    assert sum(n for _, _, n in hist) == 10
    csv = summary.residual_histogram_csv()
    assert csv.splitlines()[0] == "lo,hi,count"
    assert len(csv.splitlines()) == len(hist) + 1


def test_scan_validates_type():
    with pytest.raises(ValueError, match="D_q"):
        scan_generic(100, 4, count=2, seed=0)
    with pytest.raises(ValueError, match="count"):
        scan_generic(1, 4, count=0, seed=0)
