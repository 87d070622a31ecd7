"""Configuration-driven experiment runner.

Experiments are described by a single INI-style config file with
sections; the command line only selects the config and optional
overrides.  Every run writes a CSV and a JSON report per experiment plus
a manifest echoing the config, the package version, the seed, and the
wall time.  Reports are byte-reproducible for a fixed (config, seed);
only the manifest carries timestamps.

Exit codes: 0 on success with a "bounded" verdict, 1 when the experiment
ran but was unconverged or found a violation, 2 for usage and config
errors.
"""

from __future__ import annotations

import argparse
import configparser
import json
import os
import pathlib
import sys
import time

import numpy as np

from . import __version__
from .annulus import Annulus
from .geometry import ReciprocalSlack, PAIR_1D, WEAK_PLANAR
from .geomineq import (
    classification_diagnostic,
    scaling_sweep,
    sup_reciprocal_integral_2d,
)
from .lemmas import run_lemma_suite
from .norms import nonradiative_report
from .radiation import ProfileSpec, make_profile
from .report import ExperimentReport, fit_loglog, ratio_envelope
from .verify import (
    ENVELOPE_LIMIT,
    assemble_verdict,
    decay2d,
    decay3d,
    optimality3d,
    radon_support_2d,
    wave_decay,
)

USAGE_ERROR = 2
RESULT_ERROR = 1


class ConfigError(Exception):
    pass


def _floats(text: str) -> list[float]:
    return [float(tok) for tok in text.replace(",", " ").split()]


def _section(cfg: configparser.ConfigParser, name: str) -> dict:
    if not cfg.has_section(name):
        return {}
    return dict(cfg.items(name))


def _require(sections: dict, experiment: str, names: tuple[str, ...]):
    missing = [n for n in names if not sections.get(n)]
    if missing:
        raise ConfigError(
            f"experiment {experiment!r} requires config sections: {', '.join(missing)}")


def _float(table: dict, key: str, default=None) -> float:
    if key not in table:
        if default is None:
            raise ConfigError(f"missing key {key!r}")
        return default
    try:
        return float(table[key])
    except ValueError as exc:
        raise ConfigError(f"bad number for {key!r}: {table[key]!r}") from exc


def _int(table: dict, key: str, default=None) -> int:
    if key not in table:
        if default is None:
            raise ConfigError(f"missing key {key!r}")
        return default
    try:
        return int(table[key])
    except ValueError as exc:
        raise ConfigError(f"bad integer for {key!r}: {table[key]!r}") from exc


def _list(table: dict, key: str, default=None) -> list[float]:
    if key not in table:
        if default is None:
            raise ConfigError(f"missing list {key!r}")
        return default
    try:
        return _floats(table[key])
    except ValueError as exc:
        raise ConfigError(f"bad list for {key!r}: {table[key]!r}") from exc


def _slack(table: dict, default: ReciprocalSlack) -> ReciprocalSlack:
    raw = table.get("slack")
    if raw is None:
        return default
    named = {"strict": 1.0, "weak-planar": 1.0 / 65.0, "pair-1d": 1.0 / 17.0}
    if raw in named:
        return ReciprocalSlack(named[raw])
    try:
        return ReciprocalSlack(float(raw))
    except ValueError as exc:
        raise ConfigError(f"bad slack {raw!r}") from exc


def _profile_from(sections: dict) -> ProfileSpec:
    prof = sections.get("profile", {})
    kind = prof.get("kind", "smooth-bump")
    band = _list(prof, "band", [1.0, 1.5])
    if len(band) != 2:
        raise ConfigError("profile band must be two numbers")
    R = prof.get("r_scale")
    return ProfileSpec(
        kind=kind,
        band=(band[0], band[1]),
        amplitude=_float(prof, "amplitude", 1.0),
        h_coeffs=tuple(_list(prof, "h_coeffs", [1.0])),
        R=float(R) if R is not None else None,
        dim=_int(prof, "dim", 3),
    )


def _resolution(sections: dict) -> dict:
    res = sections.get("resolution", {})
    return {
        "s_cells": _int(res, "s_cells", 128),
        "shells": _int(res, "shells", 40),
        "grid_n": _int(res, "grid_n", 2000),
        "n_samples": _int(res, "n_samples", 200_000),
        "n_configs": _int(res, "n_configs", 4),
        "n_pairs": _int(res, "n_pairs", 8),
    }


# --------------------------------------------------------------------------
# experiment runners: each takes (sections, seed) and returns reports


def _run_decay3d(sections, seed):
    spec = _profile_from(sections)
    res = _resolution(sections)
    sweep = sections.get("sweep", {})
    field = make_profile(spec, res["s_cells"])
    a, b = spec.band
    return [decay3d(field, a, b, _list(sweep, "R_list", [2, 4, 8, 16, 32, 64]),
                    shells=res["shells"])]


def _run_optimality(sections, seed):
    res = _resolution(sections)
    sweep = sections.get("sweep", {})
    return [optimality3d(_list(sweep, "R_list", [8, 16, 32, 64, 128]),
                         shells=res["shells"])]


def _run_wave_decay(sections, seed):
    spec = _profile_from(sections)
    res = _resolution(sections)
    sweep = sections.get("sweep", {})
    field = make_profile(spec, res["s_cells"])
    r_support = max(abs(spec.band[0]), abs(spec.band[1]))
    return [wave_decay(field, r_support,
                       _list(sweep, "R_list", [4, 8, 16, 32, 64]),
                       _list(sweep, "t_list", [0.0, 2.0, -2.0, 8.0, -8.0]),
                       shells=res["shells"])]


def _run_decay2d(sections, seed):
    spec = _profile_from(sections)
    if spec.dim != 2:
        spec = ProfileSpec(kind=spec.kind, band=spec.band, amplitude=spec.amplitude,
                           h_coeffs=spec.h_coeffs, R=None, dim=2)
    res = _resolution(sections)
    sweep = sections.get("sweep", {})
    field = make_profile(spec, res["s_cells"])
    a, b = spec.band
    return [decay2d(field, a, b, _list(sweep, "R_list", [2, 4, 8, 16, 32, 64]),
                    shells=res["shells"])]


def _run_radon_support(sections, seed):
    sweep = sections.get("sweep", {})
    geom = sections.get("geometry", {})
    return [radon_support_2d(_float(geom, "r", 4.0),
                             _list(sweep, "b_list", [0.25, 0.5, 1.0, 2.0]))]


def _run_geom_sweep(sections, seed):
    geom = sections.get("geometry", {})
    res = _resolution(sections)
    sweep = sections.get("sweep", {})
    r = _float(geom, "r", 1.0)
    w_list = _list(sweep, "w_list", [r * 2.0**-k for k in range(2, 7)])
    slack = _slack(geom, WEAK_PLANAR)
    return [scaling_sweep(r, w_list, slack, res["n_samples"], seed,
                          n_configs=res["n_configs"])]


def _run_geom_2d(sections, seed):
    geom = sections.get("geometry", {})
    res = _resolution(sections)
    sweep = sections.get("sweep", {})
    r = _float(geom, "r", 1.0)
    w_list = _list(sweep, "w_list", [r * 2.0**-k for k in range(2, 7)])
    slack = _slack(geom, PAIR_1D)
    rows = []
    for w in w_list:
        pair, value = sup_reciprocal_integral_2d(r, float(w), res["grid_n"],
                                                 res["n_pairs"], seed, slack)
        rows.append({
            "r": r, "w": float(w), "slack": slack.c, "grid_n": res["grid_n"],
            "seed": seed, "x1": pair[0], "x2": pair[1],
            "value": value, "value_over_w": value / float(w),
        })
    exponent = fit_loglog([row["w"] for row in rows], [row["value"] for row in rows])
    verdict = assemble_verdict(rows, "value_over_w", exponent, (0.85, 1.15))
    return [ExperimentReport(
        name="geom-2d",
        parameters={"r": r, "w_list": [float(w) for w in w_list], "slack": slack.c,
                    "grid_n": res["grid_n"], "n_pairs": res["n_pairs"], "seed": seed},
        rows=rows, fitted_exponent=exponent, verdict=verdict)]


def _run_lemma_tests(sections, seed):
    res = _resolution(sections)
    return [run_lemma_suite(n=res["n_samples"], seed=seed)]


def _run_nonradiative(sections, seed):
    spec = _profile_from(sections)
    res = _resolution(sections)
    sweep = sections.get("sweep", {})
    field = make_profile(spec, res["s_cells"])
    b = max(abs(spec.band[0]), abs(spec.band[1]))
    t_list = _list(sweep, "t_list", [0.0, b, 4 * b, 16 * b])
    return [nonradiative_report(field, b, t_list, shells=res["shells"])]


def _run_classification(sections, seed):
    geom = sections.get("geometry", {})
    res = _resolution(sections)
    ann = Annulus(r=_float(geom, "r", 1.0), w=_float(geom, "w", 1.0 / 16.0))
    slack = _slack(geom, WEAK_PLANAR)
    return [classification_diagnostic(ann, slack, res["n_samples"], seed)]


EXPERIMENTS = {
    "decay-3d": ("exterior sixth-power decay of the backprojection of a band profile",
                 ("profile", "sweep"), _run_decay3d),
    "optimality-3d": ("decay rate of the thin-band family attaining the exterior estimate",
                      ("sweep",), _run_optimality),
    "wave-decay": ("free-wave exterior and fixed-time L6 decay families",
                   ("profile", "sweep"), _run_wave_decay),
    "decay-2d": ("exterior fourth-power decay of the circle backprojection",
                 ("profile", "sweep"), _run_decay2d),
    "radon-support-2d": ("line-transform mass of an annular source vs (b/R)^(1/4)",
                         ("sweep",), _run_radon_support),
    "geom-sweep": ("width scaling of the reciprocal-triple integral (Monte Carlo)",
                   ("geometry",), _run_geom_sweep),
    "geom-2d": ("width scaling of the interval-pair integral (deterministic grid)",
                ("geometry",), _run_geom_2d),
    "lemma-tests": ("bulk verification of the annulus lemmas",
                    (), _run_lemma_tests),
    "nonradiative": ("exterior energy drain of a compact-profile wave",
                     ("profile",), _run_nonradiative),
    "classification-diagnostic": ("shape statistics of size-separated reciprocal pairs",
                                  ("geometry",), _run_classification),
}


def list_experiments() -> str:
    lines = []
    for name in sorted(EXPERIMENTS):
        desc, required, _ = EXPERIMENTS[name]
        need = ", ".join(required) if required else "none"
        lines.append(f"{name:28s} {desc}  [required sections: {need}]")
    return "\n".join(lines)


def load_config(path) -> tuple[str, dict, int, str]:
    """Parse a config file: (experiment, sections, seed, out)."""
    cfg = configparser.ConfigParser()
    try:
        read = cfg.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"unparseable config: {exc}") from exc
    if not read:
        raise ConfigError(f"config file not found: {path}")
    run = _section(cfg, "run")
    experiment = run.get("experiment")
    if not experiment:
        raise ConfigError("config needs [run] experiment = <name>")
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {experiment!r}; see `radonwave list`")
    sections = {name: _section(cfg, name) for name in cfg.sections()}
    _require(sections, experiment, EXPERIMENTS[experiment][1])
    seed = _int(run, "seed", 20240817)
    out = run.get("out", "results")
    return experiment, sections, seed, out


def run(config_path, out_override=None, seed_override=None) -> int:
    """Execute the experiment described by the config; returns the exit code."""
    experiment, sections, seed, out = load_config(config_path)
    if seed_override is not None:
        seed = int(seed_override)
    if out_override is not None:
        out = out_override
    out_dir = pathlib.Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    t0 = time.time()
    reports = EXPERIMENTS[experiment][2](sections, seed)
    wall = time.time() - t0
    outputs = []
    worst = "bounded"
    order = {"bounded": 0, "violation": 1, "unconverged": 1}
    for rep in reports:
        csv_path, json_path = rep.write(out_dir)
        outputs.extend([str(csv_path), str(json_path)])
        if order.get(rep.verdict, 1) > order[worst]:
            worst = rep.verdict
        print(f"{rep.name}: verdict={rep.verdict}"
              + (f" exponent={rep.fitted_exponent:.4f}" if rep.fitted_exponent is not None else ""))
    manifest = {
        "experiment": experiment,
        "config": {name: dict(table) for name, table in sorted(sections.items())},
        "seed": seed,
        "version": __version__,
        "wall_time_s": wall,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S"),
        "outputs": sorted(outputs),
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return 0 if worst == "bounded" else RESULT_ERROR


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="radonwave",
        description="Backprojection decay and annulus-geometry experiment runner")
    sub = parser.add_subparsers(dest="command")
    p_run = sub.add_parser("run", help="run the experiment in a config file")
    p_run.add_argument("config")
    p_run.add_argument("--out", default=None, help="output directory override")
    p_run.add_argument("--seed", default=None, type=int, help="seed override")
    p_run.add_argument("--threads", default=None, type=int,
                       help="cap worker/BLAS threads (results are unaffected)")
    sub.add_parser("list", help="list available experiments")
    p_val = sub.add_parser("validate-config", help="check a config file and exit")
    p_val.add_argument("config")

    args = parser.parse_args(argv)
    if args.command == "list":
        print(list_experiments())
        return 0
    if args.command == "validate-config":
        try:
            experiment, _, seed, out = load_config(args.config)
        except ConfigError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return USAGE_ERROR
        print(f"ok: experiment={experiment} seed={seed} out={out}")
        return 0
    if args.command == "run":
        if args.threads is not None:
            os.environ["OMP_NUM_THREADS"] = str(args.threads)
            os.environ["OPENBLAS_NUM_THREADS"] = str(args.threads)
        try:
            return run(args.config, out_override=args.out, seed_override=args.seed)
        except ConfigError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return USAGE_ERROR
    parser.print_help()
    return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
