"""Config-driven experiment runner with deterministic file outputs.

One JSON document describes a run: the operator family (model block), the
disorder law (disorder block), and the experiment parameters (experiment
block). The runner validates the document, enforces the hypotheses the
scientific checks rely on, dispatches to the estimator layer, and persists
three artifacts into the output directory:

    results.csv          row-level payload, schema fixed per experiment kind
    summary.json         aggregate statistics and the declared-check verdict
    config.resolved.json the fully defaulted config that produced the rows

Every artifact names the format version and a hash of the resolved science
config (kind + model + disorder + experiment). Thread count and output
location are execution parameters, not science, so they are excluded from
the hash and from the artifacts; reruns of one config are byte-identical
across thread counts.

Exit codes separate plumbing from science: 0 means the run completed and
any declared check passed, 2 means the run completed but a declared
scientific check failed, 1 means the computation itself errored.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import warnings as _warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import estimators, localization
from .disorder import DEFAULT_SEED, SingleSiteDensity
from .errors import (
    AssumptionViolated,
    InvalidDelta,
    ParseError,
    RangeError,
    SpecshiftError,
)
from .grid import (
    DIRICHLET,
    BoundarySpec,
    SingleSiteProfile,
    cube_profile,
    inner_boundary_site_count,
    make_domain,
    tent_profile,
    unit_cube_profile,
)
from .model import ModelConfig, OperatorFactory
from .spectra import count_at_or_below

FORMAT_VERSION = "1"

KINDS = (
    "assemble-check",
    "idos",
    "dos",
    "wegner",
    "reverse-wegner",
    "averaged-ssf",
    "ssf-scaling",
    "kirsch",
    "localization",
    "combes-thomas",
    "birman-solomyak",
)

CSV_HEADERS = {
    "assemble-check": ("key", "value"),
    "idos": ("E", "mean", "stderr", "n_samples"),
    "dos": ("E", "mean", "stderr", "n_samples"),
    "wegner": ("E1", "E2", "L", "ratio", "stderr", "n_samples"),
    "reverse-wegner": ("E1", "E2", "L", "ratio", "stderr", "n_samples"),
    "averaged-ssf": ("L", "l", "E", "mean_xi", "stderr", "rank_bound", "n_samples"),
    "ssf-scaling": ("L", "l", "E", "mean_xi", "stderr", "rank_bound", "n_samples"),
    "kirsch": ("L", "xi"),
    "localization": ("distance", "mean", "stderr"),
    "combes-thomas": ("distance", "mean", "stderr"),
    "birman-solomyak": ("quad_order", "lhs", "rhs", "residual"),
}


# -- config ingestion ----------------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    """A fully defaulted, validated run description."""

    kind: str
    model: ModelConfig
    experiment: dict
    out_dir: Path
    threads: int
    warnings: tuple[str, ...]
    resolved: dict
    config_hash: str


@dataclass(frozen=True)
class ExperimentRecord:
    """Row-level payload plus the aggregates derived from it."""

    kind: str
    rows: tuple[tuple, ...]
    summary: dict
    check: dict | None


def _require(block: dict, key: str, kind: str):
    if key not in block:
        raise ParseError(f"{kind}: experiment block is missing required field '{key}'")
    return block[key]


def _as_float(value, label: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"{label} must be a number, got {value!r}")
    return float(value)


def _as_int(value, label: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParseError(f"{label} must be an integer, got {value!r}")
    return int(value)


def _as_floats(value, label: str) -> list[float]:
    if not isinstance(value, (list, tuple)) or not value:
        raise ParseError(f"{label} must be a non-empty list of numbers")
    return [_as_float(v, label) for v in value]


def _parse_profile(spec) -> tuple[SingleSiteProfile, dict]:
    spec = dict(spec) if isinstance(spec, dict) else spec
    if spec is None:
        spec = {"kind": "unit_cube"}
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ParseError(f"u spec must be an object with a 'kind', got {spec!r}")
    kind = spec["kind"]
    if kind == "unit_cube":
        return unit_cube_profile(), {"kind": "unit_cube"}
    if kind == "cube":
        side = _as_float(spec.get("side", 1.0), "u.side")
        return cube_profile(side), {"kind": "cube", "side": side}
    if kind == "tent":
        radius = _as_float(spec.get("radius", 1.0), "u.radius")
        height = _as_float(spec.get("height", 1.0), "u.height")
        return tent_profile(radius, height), {"kind": "tent", "radius": radius, "height": height}
    raise ParseError(f"unknown single-site profile kind {kind!r}")


def _parse_density(spec) -> tuple[SingleSiteDensity, dict]:
    if spec is None:
        spec = {"kind": "uniform"}
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ParseError(f"density spec must be an object with a 'kind', got {spec!r}")
    kind = spec["kind"]
    if kind == "uniform":
        return SingleSiteDensity.uniform(), {"kind": "uniform"}
    if kind == "piecewise":
        breaks = _as_floats(spec.get("breakpoints"), "density.breakpoints")
        values = _as_floats(spec.get("values"), "density.values")
        density = SingleSiteDensity.piecewise_constant(breaks, values)
        return density, {"kind": "piecewise", "breakpoints": breaks, "values": values}
    raise ParseError(f"unknown density kind {kind!r}")


def _parse_model(block: dict, d_override=None) -> tuple[dict, dict]:
    if not isinstance(block, dict):
        raise ParseError("model block must be an object")
    known = {"d", "L", "h", "lambda", "v0", "u", "puncture"}
    extra = set(block) - known
    if extra:
        raise ParseError(f"unknown model fields: {sorted(extra)}")
    d = _as_int(block.get("d", 1), "model.d")
    if d not in (1, 2):
        raise RangeError(f"model.d must be 1 or 2, got {d}")
    L = _as_float(block.get("L", 32.0), "model.L")
    h = _as_float(block.get("h", 1.0), "model.h")
    lam = _as_float(block.get("lambda", 1.0), "model.lambda")
    v0 = block.get("v0")
    if v0 is not None:
        v0 = _as_float(v0, "model.v0")
    profile, u_resolved = _parse_profile(block.get("u"))
    puncture = block.get("puncture")
    punc_resolved = None
    punc_tuple = None
    if puncture is not None:
        if not isinstance(puncture, dict) or "l" not in puncture:
            raise ParseError("puncture must be an object with at least 'l'")
        side = _as_float(puncture["l"], "puncture.l")
        x0 = puncture.get("x0", [0.0] * d)
        x0 = [_as_float(v, "puncture.x0") for v in x0]
        if len(x0) != d:
            raise ParseError(f"puncture.x0 must have {d} components, got {len(x0)}")
        punc_resolved = {"l": side, "x0": x0}
        punc_tuple = (side, tuple(x0))
    fields = {
        "d": d,
        "L": L,
        "h": h,
        "coupling_strength": lam,
        "v0": v0,
        "profile": profile,
        "puncture": punc_tuple,
    }
    resolved = {
        "d": d,
        "L": L,
        "h": h,
        "lambda": lam,
        "v0": v0,
        "u": u_resolved,
        "puncture": punc_resolved,
    }
    return fields, resolved


def _puncture_gap(L: float, l: float, x0) -> float:
    return min(L / 2.0 - abs(float(c)) - l / 2.0 for c in x0)


_EXPERIMENT_KEYS = {
    "assemble-check": {"energies", "sample_index"},
    "idos": {"energies", "L", "n"},
    "dos": {"energies", "epsilon", "L", "n"},
    "wegner": {"intervals", "L_values", "n"},
    "reverse-wegner": {"intervals", "L_values", "n", "localized_window", "min_L"},
    "averaged-ssf": {"l", "energy", "L_values", "x0", "n"},
    "ssf-scaling": {"l_values", "energy", "L_values", "x0", "n"},
    "kirsch": {"l", "energy", "L_values"},
    "localization": {"energy", "eta", "s", "distances", "x0", "n", "axis", "r2_min"},
    "combes-thomas": {"energy", "energy_offset", "distances", "x0", "axis", "r2_min"},
    "birman-solomyak": {
        "energy",
        "epsilon",
        "delta",
        "quad_orders",
        "tolerance",
        "sample_index",
        "u_amplitude",
    },
}


def _parse_experiment(kind: str, block: dict, cfg: ModelConfig, density) -> dict:
    """Default and validate the experiment block for one kind.

    Hypothesis violations that would invalidate the declared check of this
    kind are hard errors; geometry that merely weakens a bound is a warning
    handled by the caller.
    """
    if not isinstance(block, dict):
        raise ParseError("experiment block must be an object")
    extra = set(block) - _EXPERIMENT_KEYS[kind]
    if extra:
        raise ParseError(f"{kind}: unknown experiment fields {sorted(extra)}")
    exp: dict = {}

    if kind == "assemble-check":
        exp["energies"] = _as_floats(block["energies"], "energies") if block.get("energies") else []
        exp["sample_index"] = _as_int(block.get("sample_index", 0), "sample_index")

    elif kind in ("idos", "dos"):
        exp["energies"] = _as_floats(_require(block, "energies", kind), "energies")
        exp["L"] = _as_float(block.get("L", cfg.L), "L")
        exp["n"] = _as_int(block.get("n", 100), "n")
        if kind == "dos":
            exp["epsilon"] = _as_float(block.get("epsilon", 0.1), "epsilon")
            if exp["epsilon"] <= 0:
                raise RangeError("epsilon must be positive")

    elif kind in ("wegner", "reverse-wegner"):
        raw = _require(block, "intervals", kind)
        if not isinstance(raw, (list, tuple)) or not raw:
            raise ParseError("intervals must be a non-empty list of [E1, E2] pairs")
        intervals = []
        for pair in raw:
            if not isinstance(pair, (list, tuple)) or len(pair) != 2:
                raise ParseError(f"bad interval {pair!r}")
            e1, e2 = (_as_float(v, "interval endpoint") for v in pair)
            if not e1 < e2:
                raise RangeError(f"interval [{e1}, {e2}] is empty")
            intervals.append([e1, e2])
        exp["intervals"] = intervals
        exp["L_values"] = _as_floats(block.get("L_values", [cfg.L]), "L_values")
        exp["n"] = _as_int(block.get("n", 200), "n")
        if kind == "reverse-wegner":
            if not density.satisfies_v1prime:
                raise AssumptionViolated(
                    "V1': the coupling density must be bounded below on [0, 1]"
                )
            if cfg.d == 2 and cfg.coupling_strength < estimators.STRONG_COUPLING_MIN_2D:
                raise AssumptionViolated(
                    "two-dimensional lower-bound runs require strong coupling "
                    f"(lambda >= {estimators.STRONG_COUPLING_MIN_2D:g})"
                )
            window = block.get("localized_window")
            exp["localized_window"] = (
                None if window is None else _as_floats(window, "localized_window")
            )
            exp["min_L"] = _as_float(block.get("min_L", estimators.REVERSE_WEGNER_MIN_L), "min_L")

    elif kind == "averaged-ssf":
        exp["l"] = _as_float(_require(block, "l", kind), "l")
        exp["energy"] = _as_float(_require(block, "energy", kind), "energy")
        exp["L_values"] = _as_floats(block.get("L_values", [cfg.L]), "L_values")
        exp["x0"] = [_as_float(v, "x0") for v in block.get("x0", [0.0] * cfg.d)]
        exp["n"] = _as_int(block.get("n", 100), "n")

    elif kind == "ssf-scaling":
        exp["l_values"] = _as_floats(_require(block, "l_values", kind), "l_values")
        if len(set(exp["l_values"])) < 3:
            raise RangeError("ssf-scaling needs at least 3 distinct puncture sizes")
        exp["energy"] = _as_float(_require(block, "energy", kind), "energy")
        if "L_values" in block:
            exp["L_values"] = _as_floats(block["L_values"], "L_values")
            if len(exp["L_values"]) != len(exp["l_values"]):
                raise ParseError("L_values must pair one box per puncture size")
        else:
            exp["L_values"] = [estimators.default_L_rule(l) for l in exp["l_values"]]
        exp["x0"] = [_as_float(v, "x0") for v in block.get("x0", [0.0] * cfg.d)]
        exp["n"] = _as_int(block.get("n", 100), "n")

    elif kind == "kirsch":
        if cfg.d != 2:
            raise RangeError("the divergence-series experiment requires model.d = 2")
        exp["l"] = _as_float(_require(block, "l", kind), "l")
        exp["energy"] = _as_float(_require(block, "energy", kind), "energy")
        exp["L_values"] = _as_floats(_require(block, "L_values", kind), "L_values")

    elif kind == "localization":
        exp["energy"] = _as_float(block.get("energy", 0.5), "energy")
        exp["eta"] = _as_float(block.get("eta", 0.01), "eta")
        if exp["eta"] == 0.0:
            raise RangeError("eta must be nonzero")
        exp["s"] = _as_float(block.get("s", 0.5), "s")
        if not 0.0 < exp["s"] < 1.0:
            raise RangeError(f"fractional order s = {exp['s']} must lie in (0, 1)")
        exp["distances"] = _as_floats(block.get("distances", [2.0, 4.0, 8.0, 16.0]), "distances")
        exp["x0"] = [_as_float(v, "x0") for v in block.get("x0", [0.0] * cfg.d)]
        exp["n"] = _as_int(block.get("n", 200), "n")
        exp["axis"] = _as_int(block.get("axis", 0), "axis")
        exp["r2_min"] = _as_float(block.get("r2_min", 0.9), "r2_min")

    elif kind == "combes-thomas":
        if "energy" in block and "energy_offset" in block:
            raise ParseError("give either energy or energy_offset, not both")
        exp["energy"] = block.get("energy")
        if exp["energy"] is not None:
            exp["energy"] = _as_float(exp["energy"], "energy")
        exp["energy_offset"] = _as_float(block.get("energy_offset", 1.0), "energy_offset")
        if exp["energy"] is None and exp["energy_offset"] <= 0:
            raise RangeError("energy_offset must be positive")
        exp["distances"] = _as_floats(block.get("distances", [2.0, 4.0, 8.0, 16.0]), "distances")
        exp["x0"] = [_as_float(v, "x0") for v in block.get("x0", [0.0] * cfg.d)]
        exp["axis"] = _as_int(block.get("axis", 0), "axis")
        exp["r2_min"] = _as_float(block.get("r2_min", 0.95), "r2_min")

    elif kind == "birman-solomyak":
        exp["energy"] = _as_float(_require(block, "energy", kind), "energy")
        exp["epsilon"] = _as_float(block.get("epsilon", 0.5), "epsilon")
        if exp["epsilon"] <= 0:
            raise RangeError("epsilon must be positive")
        delta = _as_float(block.get("delta", 0.1), "delta")
        if not 0.0 < delta < 0.25:
            raise InvalidDelta(f"delta = {delta} must lie strictly inside (0, 1/4)")
        exp["delta"] = delta
        orders = block.get("quad_orders", [16, 32, 64, 128])
        if not isinstance(orders, (list, tuple)) or not orders:
            raise ParseError("quad_orders must be a non-empty list of integers")
        exp["quad_orders"] = sorted(_as_int(o, "quad_order") for o in orders)
        if exp["quad_orders"][0] < 1:
            raise RangeError("quadrature order must be at least 1")
        exp["tolerance"] = _as_float(block.get("tolerance", 1e-6), "tolerance")
        exp["sample_index"] = _as_int(block.get("sample_index", 0), "sample_index")
        exp["u_amplitude"] = _as_float(block.get("u_amplitude", 0.02), "u_amplitude")
        if exp["u_amplitude"] < 0:
            raise RangeError("u_amplitude must be nonnegative")

    return exp


def validate_config(
    raw,
    kind: str | None = None,
    out_dir=None,
    threads: int | None = None,
    seed: int | None = None,
) -> ExperimentConfig:
    """Parse and fully default one run description.

    `raw` is a JSON document (text or already-decoded object). The optional
    arguments are command-line overrides and win over the document.
    """
    if isinstance(raw, (str, bytes)):
        try:
            raw = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ParseError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ParseError("config must be a JSON object")
    known = {"kind", "model", "disorder", "experiment", "output", "threads"}
    extra = set(raw) - known
    if extra:
        raise ParseError(f"unknown top-level config fields: {sorted(extra)}")

    doc_kind = raw.get("kind")
    if kind is None and doc_kind is None:
        raise ParseError("no experiment kind given")
    if kind is not None and doc_kind is not None and kind != doc_kind:
        raise ParseError(f"kind mismatch: command line says {kind!r}, config says {doc_kind!r}")
    kind = kind or doc_kind
    if kind not in KINDS:
        raise ParseError(f"unknown experiment kind {kind!r}; expected one of {', '.join(KINDS)}")

    model_fields, model_resolved = _parse_model(raw.get("model", {}))

    disorder = raw.get("disorder", {})
    if not isinstance(disorder, dict):
        raise ParseError("disorder block must be an object")
    extra = set(disorder) - {"density", "seed"}
    if extra:
        raise ParseError(f"unknown disorder fields: {sorted(extra)}")
    density, density_resolved = _parse_density(disorder.get("density"))
    run_seed = disorder.get("seed", DEFAULT_SEED)
    run_seed = _as_int(run_seed, "disorder.seed")
    if seed is not None:
        run_seed = int(seed)

    cfg = ModelConfig(density=density, seed=run_seed, **model_fields)

    notes: list[str] = []
    experiment = _parse_experiment(kind, raw.get("experiment", {}), cfg, density)

    # geometry that weakens but does not void the surface experiments
    if kind == "averaged-ssf":
        for L in experiment["L_values"]:
            gap = _puncture_gap(L, experiment["l"], experiment["x0"])
            if gap <= 0:
                raise RangeError(f"puncture of side {experiment['l']} does not fit in L = {L}")
            if gap < 3.0:
                notes.append(
                    f"puncture-to-boundary gap {gap:g} at L = {L:g} is below 3; "
                    "the surface bound is not guaranteed at this separation"
                )
    if kind == "ssf-scaling":
        for l, L in zip(experiment["l_values"], experiment["L_values"]):
            gap = _puncture_gap(L, l, experiment["x0"])
            if gap <= 0:
                raise RangeError(f"puncture of side {l} does not fit in L = {L}")
            if gap < 3.0:
                notes.append(
                    f"puncture-to-boundary gap {gap:g} at l = {l:g} is below 3; "
                    "the surface bound is not guaranteed at this separation"
                )
    if kind in ("localization", "reverse-wegner") and cfg.d == 2 and cfg.strong_disorder:
        notes.append(
            "two-dimensional localization is an empirical working assumption, not certified"
        )

    out = Path(out_dir) if out_dir is not None else Path(raw.get("output", "specshift-out"))
    run_threads = _as_int(raw.get("threads", 1), "threads")
    if threads is not None:
        run_threads = int(threads)
    if run_threads < 1:
        raise RangeError("threads must be at least 1")

    resolved = {
        "format_version": FORMAT_VERSION,
        "kind": kind,
        "model": model_resolved,
        "disorder": {"density": density_resolved, "seed": run_seed},
        "experiment": experiment,
    }
    digest = hashlib.sha256(
        json.dumps(resolved, sort_keys=True, separators=(",", ":")).encode()
    ).hexdigest()

    return ExperimentConfig(
        kind=kind,
        model=cfg,
        experiment=experiment,
        out_dir=out,
        threads=run_threads,
        warnings=tuple(notes),
        resolved=resolved,
        config_hash=digest,
    )


# -- experiment dispatch -------------------------------------------------------


def _run_assemble_check(cfg: ExperimentConfig):
    factory = OperatorFactory(cfg.model)
    ham = factory.hamiltonian(cfg.experiment["sample_index"])
    rows = [
        ("site_count", float(ham.domain.site_count)),
        ("nnz", float(ham.matrix.nnz)),
        ("e_floor", ham.e_floor),
        ("diag_min", float(ham.matrix.diagonal().min())),
        ("diag_max", float(ham.matrix.diagonal().max())),
        ("potential_min", float(ham.potential.min())),
        ("potential_max", float(ham.potential.max())),
    ]
    for e in cfg.experiment["energies"]:
        rows.append((f"count_at_{e:g}", float(count_at_or_below(ham, e).count)))
    summary = {key: value for key, value in rows}
    return rows, summary, None


def _run_idos(cfg: ExperimentConfig):
    exp = cfg.experiment
    ests = estimators.idos_curve(
        cfg.model, exp["energies"], L=exp["L"], n=exp["n"], threads=cfg.threads
    )
    rows = [(e, est.mean, est.stderr, est.n_samples) for e, est in zip(exp["energies"], ests)]
    means = [r[1] for r in rows]
    summary = {
        "mean_min": min(means),
        "mean_max": max(means),
        "monotone_nondecreasing": bool(all(b >= a for a, b in zip(means, means[1:]))),
    }
    return rows, summary, None


def _run_dos(cfg: ExperimentConfig):
    exp = cfg.experiment
    rows = []
    for e in exp["energies"]:
        est = estimators.dos_estimate(
            cfg.model, e, exp["epsilon"], L=exp["L"], n=exp["n"], threads=cfg.threads
        )
        rows.append((e, est.mean, est.stderr, est.n_samples))
    means = [r[1] for r in rows]
    summary = {"mean_min": min(means), "mean_max": max(means)}
    return rows, summary, None


def _wegner_rows(reports):
    return [(r.e1, r.e2, r.L, r.ratio, r.ratio_stderr, r.estimate.n_samples) for r in reports]


def _run_wegner(cfg: ExperimentConfig):
    exp = cfg.experiment
    reports = estimators.wegner_ratio(
        cfg.model, exp["intervals"], exp["L_values"], n=exp["n"], threads=cfg.threads
    )
    rows = _wegner_rows(reports)
    ratios = [r[3] for r in rows]
    max_by_L = {}
    for r in rows:
        max_by_L[r[2]] = max(max_by_L.get(r[2], -math.inf), r[3])
    peaks = sorted(max_by_L.values())
    variation = (peaks[-1] - peaks[0]) / peaks[0] if len(peaks) > 1 and peaks[0] > 0 else 0.0
    summary = {"ratio_max": max(ratios), "ratio_min": min(ratios), "peak_variation": variation}
    passed = max(ratios) <= 1.0 and variation <= 0.25
    check = {
        "name": "wegner-upper-stable",
        "passed": bool(passed),
        "ratio_max": max(ratios),
        "peak_variation": variation,
    }
    return rows, summary, check


def _run_reverse_wegner(cfg: ExperimentConfig):
    exp = cfg.experiment
    window = exp["localized_window"]
    reports = estimators.reverse_wegner_ratio(
        cfg.model,
        exp["intervals"],
        exp["L_values"],
        n=exp["n"],
        threads=cfg.threads,
        localized_window=None if window is None else tuple(window),
        min_L=exp["min_L"],
    )
    rows = _wegner_rows(reports)
    separations = [r[3] / r[4] if r[4] > 0 else math.inf for r in rows]
    summary = {
        "ratio_min": min(r[3] for r in rows),
        "worst_separation_stderr": min(separations),
    }
    passed = all(r[3] - 3.0 * r[4] > 0.0 for r in rows)
    check = {
        "name": "reverse-wegner-positive",
        "passed": bool(passed),
        "worst_separation_stderr": min(separations),
    }
    return rows, summary, check


def _rank_bound(cfg: ModelConfig, L: float, l: float, x0) -> int:
    domain = make_domain(cfg.d, L, cfg.h, (l, tuple(x0)))
    return inner_boundary_site_count(domain)


def _run_averaged_ssf(cfg: ExperimentConfig):
    exp = cfg.experiment
    rows = []
    respected = True
    for L in exp["L_values"]:
        est = estimators.averaged_ssf(
            cfg.model, L, exp["l"], exp["x0"], exp["energy"], n=exp["n"], threads=cfg.threads
        )
        bound = _rank_bound(cfg.model, L, exp["l"], exp["x0"])
        respected = respected and all(0.0 <= v <= bound for v in est.per_sample)
        rows.append((L, exp["l"], exp["energy"], est.mean, est.stderr, bound, est.n_samples))
    summary = {
        "mean_xi_min": min(r[3] for r in rows),
        "mean_xi_max": max(r[3] for r in rows),
        "rank_bound_respected": bool(respected),
    }
    return rows, summary, None


def _run_ssf_scaling(cfg: ExperimentConfig):
    exp = cfg.experiment
    pairing = dict(zip(exp["l_values"], exp["L_values"]))
    report = estimators.ssf_scaling_exponent(
        cfg.model,
        exp["l_values"],
        exp["energy"],
        n=exp["n"],
        L_rule=lambda l: pairing[l],
        x0=exp["x0"],
        threads=cfg.threads,
    )
    rows = [
        (L, l, exp["energy"], est.mean, est.stderr, bound, est.n_samples)
        for l, L, est, bound in zip(
            report.l_values, report.L_values, report.estimates, report.rank_bounds
        )
    ]
    summary = {
        "alpha": report.alpha,
        "alpha_stderr": report.alpha_stderr,
        "target": report.target,
    }
    passed = abs(report.alpha - report.target) <= 0.4
    check = {
        "name": "surface-exponent",
        "passed": bool(passed),
        "alpha": report.alpha,
        "target": report.target,
    }
    return rows, summary, check


def _run_kirsch(cfg: ExperimentConfig):
    exp = cfg.experiment
    series = estimators.kirsch_series(
        exp["l"], exp["energy"], exp["L_values"], cfg.model.h, d=cfg.model.d
    )
    rows = [(L, xi) for L, xi in series]
    values = [xi for _, xi in series]
    if all(b >= a for a, b in zip(values, values[1:])):
        trend = "flat" if values[-1] == values[0] else "increasing"
    else:
        trend = "mixed"
    top = max(values)
    summary = {
        "xi_max": top,
        "argmax_L": series[int(np.argmax(values))][0],
        "xi_first": values[0],
        "growth_ratio": (top / values[0]) if values[0] > 0 else None,
        "trend": trend,
    }
    return rows, summary, None


def _run_localization(cfg: ExperimentConfig):
    exp = cfg.experiment
    probe = localization.fractional_moment_probe(
        cfg.model,
        energy=exp["energy"],
        eta=exp["eta"],
        s=exp["s"],
        x0=exp["x0"],
        distances=exp["distances"],
        n=exp["n"],
        threads=cfg.threads,
        axis=exp["axis"],
    )
    rows = [(d, est.mean, est.stderr) for d, est in zip(probe.distances, probe.estimates)]
    fit = localization.decay_fit([(r[0], r[1]) for r in rows])
    summary = {"mu": fit.rate, "r_squared": fit.r_squared, "log_prefactor": fit.log_prefactor}
    passed = fit.rate > 0.0 and fit.r_squared >= exp["r2_min"]
    check = {
        "name": "fractional-moment-decay",
        "passed": bool(passed),
        "mu": fit.rate,
        "r_squared": fit.r_squared,
    }
    return rows, summary, check


def _run_combes_thomas(cfg: ExperimentConfig):
    exp = cfg.experiment
    factory = OperatorFactory(cfg.model)
    ham = factory.free_operator(BoundarySpec(outer=DIRICHLET, inner=DIRICHLET))
    energy = exp["energy"]
    if energy is None:
        energy = ham.e_floor - exp["energy_offset"]
    fit = localization.combes_thomas_profile(
        ham, energy, exp["x0"], exp["distances"], axis=exp["axis"]
    )
    rows = [(d, v, 0.0) for d, v in fit.points]
    summary = {
        "energy": energy,
        "mu": fit.rate,
        "r_squared": fit.r_squared,
        "log_prefactor": fit.log_prefactor,
    }
    passed = fit.rate > 0.0 and fit.r_squared >= exp["r2_min"]
    check = {
        "name": "resolvent-decay",
        "passed": bool(passed),
        "mu": fit.rate,
        "r_squared": fit.r_squared,
    }
    return rows, summary, check


def _run_birman_solomyak(cfg: ExperimentConfig):
    exp = cfg.experiment
    factory = OperatorFactory(cfg.model)
    ham = factory.hamiltonian(exp["sample_index"])
    u_vec = exp["u_amplitude"] * np.ones(ham.dim)
    rows = []
    for order in exp["quad_orders"]:
        lhs, rhs = estimators.birman_solomyak_sides(
            ham, u_vec, exp["energy"], exp["epsilon"], exp["delta"], order
        )
        rows.append((order, lhs, rhs, abs(lhs - rhs)))
    top_order, _, _, top_residual = rows[-1]
    summary = {
        "residual_at_top_order": top_residual,
        "top_order": top_order,
        "tolerance": exp["tolerance"],
    }
    passed = top_residual <= exp["tolerance"]
    check = {
        "name": "switch-identity",
        "passed": bool(passed),
        "residual": top_residual,
        "tolerance": exp["tolerance"],
    }
    return rows, summary, check


_DISPATCH = {
    "assemble-check": _run_assemble_check,
    "idos": _run_idos,
    "dos": _run_dos,
    "wegner": _run_wegner,
    "reverse-wegner": _run_reverse_wegner,
    "averaged-ssf": _run_averaged_ssf,
    "ssf-scaling": _run_ssf_scaling,
    "kirsch": _run_kirsch,
    "localization": _run_localization,
    "combes-thomas": _run_combes_thomas,
    "birman-solomyak": _run_birman_solomyak,
}


# -- persistence ---------------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.17g}"


def _csv_text(kind: str, rows, config_hash: str) -> str:
    lines = [f"# format_version={FORMAT_VERSION} config_sha256={config_hash}"]
    lines.append(",".join(CSV_HEADERS[kind]))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def _json_text(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def run_experiment(config: ExperimentConfig) -> tuple[int, ExperimentRecord]:
    """Execute one validated run and persist its artifacts.

    Returns the exit status (0 ok, 2 declared check failed) and the record;
    computation errors propagate to the caller.
    """
    with _warnings.catch_warnings(record=True) as caught:
        _warnings.simplefilter("always")
        rows, summary, check = _DISPATCH[config.kind](config)
    notes = list(config.warnings)
    for w in caught:
        text = str(w.message)
        if text not in notes:
            notes.append(text)

    record = ExperimentRecord(
        kind=config.kind, rows=tuple(tuple(r) for r in rows), summary=summary, check=check
    )
    config.out_dir.mkdir(parents=True, exist_ok=True)
    (config.out_dir / "results.csv").write_text(
        _csv_text(config.kind, rows, config.config_hash)
    )
    (config.out_dir / "summary.json").write_text(
        _json_text(
            {
                "format_version": FORMAT_VERSION,
                "config_sha256": config.config_hash,
                "kind": config.kind,
                "summary": summary,
                "check": check,
                "warnings": notes,
            }
        )
    )
    (config.out_dir / "config.resolved.json").write_text(
        _json_text({**config.resolved, "config_sha256": config.config_hash})
    )
    status = 0 if check is None or check["passed"] else 2
    return status, record


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="specshift",
        description="Run one disordered-operator experiment from a JSON config.",
    )
    parser.add_argument("kind", choices=KINDS, help="experiment kind")
    parser.add_argument("--config", required=True, help="path to the JSON config document")
    parser.add_argument("--out", default=None, help="output directory (overrides the config)")
    parser.add_argument("--threads", type=int, default=None, help="worker threads")
    parser.add_argument("--seed", type=int, default=None, help="override the disorder seed")
    args = parser.parse_args(argv)

    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 1
    try:
        config = validate_config(
            text, kind=args.kind, out_dir=args.out, threads=args.threads, seed=args.seed
        )
        for note in config.warnings:
            print(f"warning: {note}")
        status, record = run_experiment(config)
    except SpecshiftError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    print(f"{config.kind}: {len(record.rows)} rows -> {config.out_dir / 'results.csv'}")
    print(f"config {config.config_hash[:12]}")
    for key in sorted(record.summary):
        print(f"  {key} = {_fmt(record.summary[key]) if record.summary[key] is not None else 'n/a'}")
    if record.check is not None:
        verdict = "PASS" if record.check["passed"] else "FAIL"
        print(f"check {record.check['name']}: {verdict}")
    return status


if __name__ == "__main__":
    sys.exit(main())
