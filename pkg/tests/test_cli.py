"""Command line surface: payload stability, sidecars, exit codes."""

import json

import numpy as np
import pytest

from nilsoliton.cli import DEFAULT_SEED, dumps_canonical, main
from nilsoliton.tensor_core import StructureTensor


def _read(path):
    return path.read_text(encoding="utf-8")


def _build(tmp_path, name="t.json", extra=()):
    out = tmp_path / name
    rc = main(["build", "--family", "soliton23", "-o", str(out), *extra])
    assert rc == 0
    return out


# ---------------------------------------------------------------------------
# build


def test_build_writes_loadable_tensor(tmp_path, capsys):
    out = _build(tmp_path)
    blob = json.loads(_read(out))
    c = StructureTensor.from_json_dict(blob)
    assert (c.p, c.q) == (2, 3)
    assert "built" in capsys.readouterr().out
    assert "timestamp" not in blob  # payload carries no volatile fields


def test_build_sidecar_records_run(tmp_path):
    out = _build(tmp_path)
    side = json.loads(_read(tmp_path / "t.json.run.json"))
    assert side["command"] == "build"
    assert side["backend"] in ("python", "compiled")
    assert "--family" in side["argv"]
    assert "timestamp" in side


def test_build_output_is_byte_stable(tmp_path):
    a = _build(tmp_path, "a.json")
    b = _build(tmp_path, "b.json")
    assert _read(a) == _read(b)


def test_build_family_flags(tmp_path):
    out = tmp_path / "f.json"
    rc = main(["build", "--j", "2", "--k", "2", "--n", "1",
               "--family", "non-einstein", "-o", str(out)])
    assert rc == 0
    c = StructureTensor.from_json_dict(json.loads(_read(out)))
    assert (c.p, c.q) == (2, 8)


def test_build_spec_file_roundtrip(tmp_path):
    spec = {"kind": "HeisenbergJ", "k": 3}
    sf = tmp_path / "spec.json"
    sf.write_text(json.dumps(spec), encoding="utf-8")
    out = tmp_path / "h.json"
    assert main(["build", "--spec", str(sf), "-o", str(out)]) == 0
    c = StructureTensor.from_json_dict(json.loads(_read(out)))
    assert (c.p, c.q) == (1, 6)


# ---------------------------------------------------------------------------
# moment / flow / show on a tensor file


def test_moment_stdout_is_json(tmp_path, capsys):
    t = _build(tmp_path)
    capsys.readouterr()  # drop the build line
    assert main(["moment", str(t)]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["report"]["distinguished"] is True
    assert payload["report"]["r"] == pytest.approx(8.0)


def test_flow_reports_status(tmp_path, capsys):
    t = _build(tmp_path)
    capsys.readouterr()  # drop the build line
    assert main(["flow", str(t)]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["status"] == "DistinguishedFound"
    assert payload["iterations"] == 0


def test_show_summarizes(tmp_path, capsys):
    t = _build(tmp_path)
    capsys.readouterr()  # drop the build line
    assert main(["show", str(t)]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["p"] == 2 and payload["q"] == 3 and payload["dq"] == 3
    assert payload["exact_type"] is True


# ---------------------------------------------------------------------------
# certify / indecomp


def test_certify_default_family(tmp_path, capsys):
    out = tmp_path / "cert.json"
    rc = main(["certify", "--j", "2", "--k", "2", "--n", "1",
               "-o", str(out)])
    assert rc == 0
    assert "verdict NonDistinguished" in capsys.readouterr().out
    payload = json.loads(_read(out))
    assert payload["verdict"] == "NonDistinguished"


def test_certify_is_byte_stable(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    args = ["certify", "--j", "2", "--k", "2", "--n", "1"]
    assert main([*args, "-o", str(a)]) == 0
    assert main([*args, "-o", str(b)]) == 0
    assert _read(a) == _read(b)


def test_certify_type_mismatch_is_error(tmp_path, capsys):
    t = _build(tmp_path)  # soliton (2,3) does not match the (2,8) family
    rc = main(["certify", str(t), "--j", "2", "--k", "2", "--n", "1"])
    assert rc == 1
    assert "does not match" in capsys.readouterr().err


def test_indecomp_on_family_tensor(tmp_path, capsys):
    t = _build(tmp_path)
    capsys.readouterr()  # drop the build line
    assert main(["indecomp", str(t)]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["certificate"]["verdict"] == "Indecomposable"


def test_indecomp_search_finds_split(tmp_path, capsys):
    j2 = [[0.0, 1.0], [-1.0, 0.0]]
    mats = np.zeros((2, 4, 4))
    mats[0][:2, :2] = j2
    mats[1][2:, 2:] = j2
    blob = {"p": 2, "q": 4,
            "matrices": [m.ravel().tolist() for m in mats]}
    t = tmp_path / "sum.json"
    t.write_text(json.dumps(blob), encoding="utf-8")
    out = tmp_path / "dec.json"
    rc = main(["indecomp", str(t), "--search", "-o", str(out)])
    assert rc == 0
    assert "decomposition found" in capsys.readouterr().out
    payload = json.loads(_read(out))
    assert payload["decomposition"] is not None


# ---------------------------------------------------------------------------
# moduli


def test_moduli_prints_bare_dimension(capsys):
    assert main(["moduli", "--p", "3", "--q", "6"]) == 0
    assert capsys.readouterr().out.strip() == "2"


def test_moduli_table_csv(tmp_path):
    out = tmp_path / "table.csv"
    assert main(["moduli", "--table", "--qmax", "5", "-o", str(out)]) == 0
    lines = _read(out).splitlines()
    assert lines[0] == "p,q,label,source"
    assert len(lines) == 1 + 3 + 6 + 10  # D_3 + D_4 + D_5 rows


def test_moduli_out_of_range_is_exit_1(capsys):
    assert main(["moduli", "--p", "7", "--q", "4"]) == 1
    assert "error" in capsys.readouterr().err


def test_moduli_needs_arguments(capsys):
    assert main(["moduli"]) == 1


# ---------------------------------------------------------------------------
# scan


def test_scan_writes_histogram_next_to_output(tmp_path, capsys):
    out = tmp_path / "scan.json"
    rc = main(["scan", "--p", "1", "--q", "4", "--count", "4",
               "-o", str(out)])
    assert rc == 0
    payload = json.loads(_read(out))
    assert payload["fraction_distinguished"] == 1.0
    assert payload["seed"] == DEFAULT_SEED
    hist = _read(tmp_path / "scan.json.hist.csv").splitlines()
    assert hist[0] == "lo,hi,count"
    assert sum(int(line.rsplit(",", 1)[1]) for line in hist[1:]) == 4


def test_scan_histogram_to_stderr_without_output(capsys):
    assert main(["scan", "--p", "1", "--q", "4", "--count", "3"]) == 0
    captured = capsys.readouterr()
    json.loads(captured.out)  # stdout stays pure JSON
    assert captured.err.startswith("lo,hi,count")


def test_scan_invalid_type_is_exit_1(capsys):
    assert main(["scan", "--p", "100", "--q", "4", "--count", "2"]) == 1


# ---------------------------------------------------------------------------
# error paths and formats


def test_missing_input_file_is_exit_2(tmp_path, capsys):
    rc = main(["moment", str(tmp_path / "nope.json")])
    assert rc == 2
    assert "error" in capsys.readouterr().err


def test_malformed_json_reports_location(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"p": 1,\n  "q": }', encoding="utf-8")
    rc = main(["moment", str(bad)])
    assert rc == 2
    assert "line 2" in capsys.readouterr().err


def test_invalid_tensor_payload_is_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"p": 2, "q": 3, "matrices": [[0.0] * 9]}),
                   encoding="utf-8")
    rc = main(["moment", str(bad)])
    assert rc == 2
    assert "expected 2 matrices" in capsys.readouterr().err


def test_unknown_command_exits_via_argparse():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_float_format_is_shortest_roundtrip():
    body = dumps_canonical({"x": 0.1, "y": 1.0, "z": 1e-9})
    data = json.loads(body)
    assert data["x"] == 0.1 and data["y"] == 1.0 and data["z"] == 1e-9
    assert "0.10000000000000001" in body  # 17 significant digits
    assert '"y": 1.0' in body


def test_dumps_canonical_rejects_non_finite():
    with pytest.raises(ValueError):
        dumps_canonical({"x": float("nan")})


def test_default_seed_is_frozen():
    assert DEFAULT_SEED == 1729
