"""Runner tests: config validation, artifact schemas, reproducibility, exit codes."""

import json

import pytest

from specshift import (
    AssumptionViolated,
    InvalidDelta,
    ParseError,
    RangeError,
    decay_fit,
)
from specshift.runner import CSV_HEADERS, FORMAT_VERSION, main, run_experiment, validate_config

WEGNER_DOC = {
    "kind": "wegner",
    "model": {"d": 1, "L": 12, "h": 1.0, "lambda": 1.0},
    "experiment": {"intervals": [[0.4, 0.5], [0.5, 0.6]], "L_values": [12], "n": 6},
}


def launch(tmp_path, doc, kind=None, threads=1, seed=None, sub="out"):
    cfg = validate_config(
        json.dumps(doc), kind=kind, out_dir=tmp_path / sub, threads=threads, seed=seed
    )
    status, record = run_experiment(cfg)
    return status, record, cfg


def read_rows(out_dir):
    lines = (out_dir / "results.csv").read_text().splitlines()
    assert lines[0].startswith(f"# format_version={FORMAT_VERSION} config_sha256=")
    return lines[1].split(","), [line.split(",") for line in lines[2:]]


def test_validation_rejects_malformed_documents():
    with pytest.raises(ParseError):
        validate_config("{not json", kind="idos")
    with pytest.raises(ParseError):
        validate_config("[1, 2]")
    with pytest.raises(ParseError):
        validate_config({"kind": "idos", "bogus": 1})
    with pytest.raises(ParseError):
        validate_config({})
    with pytest.raises(ParseError):
        validate_config({"kind": "dos"}, kind="idos")
    with pytest.raises(ParseError):
        validate_config({"kind": "frobnicate"})
    with pytest.raises(ParseError):
        validate_config({"kind": "idos", "model": {"size": 3}})
    with pytest.raises(ParseError):
        validate_config({"kind": "idos", "experiment": {"energies": [1.0], "foo": 1}})
    with pytest.raises(RangeError):
        validate_config({"kind": "idos", "model": {"d": 3}, "experiment": {"energies": [1.0]}})
    with pytest.raises(ParseError):
        validate_config(
            {
                "kind": "idos",
                "model": {"d": 2, "puncture": {"l": 2, "x0": [0.0]}},
                "experiment": {"energies": [1.0]},
            }
        )
    with pytest.raises(RangeError):
        validate_config(WEGNER_DOC, threads=0)


def test_validation_enforces_scientific_hypotheses():
    gapped = dict(
        WEGNER_DOC,
        kind="reverse-wegner",
        disorder={"density": {"kind": "piecewise", "breakpoints": [0, 0.5, 1], "values": [2, 0]}},
    )
    with pytest.raises(AssumptionViolated, match="V1'"):
        validate_config(gapped)

    weak_plane = dict(WEGNER_DOC, kind="reverse-wegner", model={"d": 2, "L": 10, "lambda": 1.0})
    with pytest.raises(AssumptionViolated):
        validate_config(weak_plane)

    with pytest.raises(InvalidDelta):
        validate_config(
            {"kind": "birman-solomyak", "experiment": {"energy": 1.0, "delta": 0.3}}
        )
    with pytest.raises(RangeError):
        validate_config(
            {"kind": "kirsch", "experiment": {"l": 4, "energy": 1.5, "L_values": [12]}}
        )
    with pytest.raises(RangeError):
        validate_config(
            {"kind": "ssf-scaling", "experiment": {"l_values": [2, 2, 4], "energy": 2.0}}
        )
    with pytest.raises(RangeError):
        validate_config({"kind": "localization", "experiment": {"s": 1.5}})
    with pytest.raises(ParseError):
        validate_config(
            {"kind": "combes-thomas", "experiment": {"energy": -1.0, "energy_offset": 1.0}}
        )


def test_tight_puncture_gap_warns_but_runs(tmp_path):
    doc = {
        "kind": "averaged-ssf",
        "model": {"d": 1, "L": 10, "h": 1.0},
        "experiment": {"l": 6, "energy": 2.0, "n": 4},
    }
    status, record, cfg = launch(tmp_path, doc)
    assert status == 0
    assert any("below 3" in note for note in cfg.warnings)
    payload = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert any("below 3" in note for note in payload["warnings"])
    assert payload["summary"]["rank_bound_respected"] is True


def test_artifacts_carry_schema_and_hash(tmp_path):
    docs = {
        "assemble-check": {"kind": "assemble-check", "model": {"d": 1, "L": 12}},
        "idos": {
            "kind": "idos",
            "model": {"d": 1, "L": 12},
            "experiment": {"energies": [0.5, 1.5], "n": 4},
        },
        "wegner": WEGNER_DOC,
        "birman-solomyak": {
            "kind": "birman-solomyak",
            "model": {"d": 1, "L": 21},
            "experiment": {"energy": 1.0, "quad_orders": [4, 8], "u_amplitude": 0.0},
        },
    }
    for kind, doc in docs.items():
        status, record, cfg = launch(tmp_path, doc, sub=kind)
        assert status == 0
        header, rows = read_rows(tmp_path / kind)
        assert tuple(header) == CSV_HEADERS[kind]
        assert len(rows) == len(record.rows) > 0
        first = (tmp_path / kind / "results.csv").read_text().splitlines()[0]
        assert first.split("config_sha256=")[1] == cfg.config_hash
        resolved = json.loads((tmp_path / kind / "config.resolved.json").read_text())
        assert resolved["config_sha256"] == cfg.config_hash
        assert resolved["kind"] == kind


def test_reruns_are_byte_identical_across_threads(tmp_path):
    for sub, threads in (("a", 1), ("b", 1), ("c", 4)):
        launch(tmp_path, WEGNER_DOC, threads=threads, sub=sub)
    for name in ("results.csv", "summary.json", "config.resolved.json"):
        first = (tmp_path / "a" / name).read_bytes()
        assert (tmp_path / "b" / name).read_bytes() == first
        assert (tmp_path / "c" / name).read_bytes() == first


def test_seed_override_changes_science_hash(tmp_path):
    base = validate_config(json.dumps(WEGNER_DOC), out_dir=tmp_path)
    seeded = validate_config(json.dumps(WEGNER_DOC), out_dir=tmp_path, seed=1)
    assert base.config_hash != seeded.config_hash
    assert seeded.resolved["disorder"]["seed"] == 1
    # execution parameters stay out of the hash
    threaded = validate_config(json.dumps(WEGNER_DOC), out_dir=tmp_path / "x", threads=8)
    assert threaded.config_hash == base.config_hash


def test_summaries_recompute_from_the_rows(tmp_path):
    status, record, cfg = launch(tmp_path, WEGNER_DOC, sub="wegner")
    _, rows = read_rows(tmp_path / "wegner")
    ratios = [float(r[3]) for r in rows]
    payload = json.loads((tmp_path / "wegner" / "summary.json").read_text())
    assert payload["summary"]["ratio_max"] == max(ratios)
    assert payload["summary"]["ratio_min"] == min(ratios)

    loc_doc = {
        "kind": "localization",
        "model": {"d": 1, "L": 32, "lambda": 5.0},
        "experiment": {"energy": 2.0, "eta": 0.05, "distances": [2, 4, 8, 12], "n": 8},
    }
    launch(tmp_path, loc_doc, sub="loc")
    _, rows = read_rows(tmp_path / "loc")
    fit = decay_fit([(float(r[0]), float(r[1])) for r in rows])
    payload = json.loads((tmp_path / "loc" / "summary.json").read_text())
    assert payload["summary"]["mu"] == fit.rate
    assert payload["summary"]["r_squared"] == fit.r_squared

    bs_doc = {
        "kind": "birman-solomyak",
        "model": {"d": 1, "L": 21},
        "experiment": {"energy": 1.0, "quad_orders": [4, 8]},
    }
    launch(tmp_path, bs_doc, sub="bs")
    _, rows = read_rows(tmp_path / "bs")
    for order, lhs, rhs, residual in ((int(r[0]), *map(float, r[1:])) for r in rows):
        assert residual == abs(lhs - rhs)


def test_failed_declared_check_exits_two(tmp_path, capsys):
    doc = {
        "kind": "birman-solomyak",
        "model": {"d": 1, "L": 21},
        "experiment": {"energy": 1.0, "quad_orders": [2, 4], "tolerance": 1e-30},
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(doc))
    ret = main(["birman-solomyak", "--config", str(path), "--out", str(tmp_path / "out")])
    assert ret == 2
    out = capsys.readouterr().out
    assert "check switch-identity: FAIL" in out


def test_cli_reports_and_round_trips(tmp_path, capsys):
    path = tmp_path / "wegner.json"
    path.write_text(json.dumps(WEGNER_DOC))
    out_dir = tmp_path / "out"
    ret = main(["wegner", "--config", str(path), "--out", str(out_dir), "--threads", "2"])
    out = capsys.readouterr().out
    assert ret == 0
    assert "wegner: 2 rows" in out
    assert "check wegner-upper-stable: PASS" in out
    expected = validate_config(json.dumps(WEGNER_DOC), out_dir=out_dir)
    assert f"config {expected.config_hash[:12]}" in out

    assert main(["wegner", "--config", str(tmp_path / "missing.json")]) == 1
    assert "cannot read config" in capsys.readouterr().err

    bad = tmp_path / "bad.json"
    bad.write_text("{oops")
    assert main(["wegner", "--config", str(bad)]) == 1
    assert "ParseError" in capsys.readouterr().err


def test_divergence_series_rows_and_trend(tmp_path):
    doc = {
        "kind": "kirsch",
        "model": {"d": 2, "h": 0.5, "L": 12},
        "experiment": {"l": 4, "energy": 1.5, "L_values": [12, 16, 20, 24]},
    }
    status, record, cfg = launch(tmp_path, doc)
    assert status == 0
    header, rows = read_rows(tmp_path / "out")
    assert tuple(header) == ("L", "xi")
    assert [(float(r[0]), int(r[1])) for r in rows] == [(12, 3), (16, 3), (20, 3), (24, 2)]
    payload = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert payload["summary"]["trend"] == "mixed"
    assert payload["summary"]["xi_max"] == 3
    assert payload["check"] is None
