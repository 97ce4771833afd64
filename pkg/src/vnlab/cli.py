"""Batch experiment driver.

Usage:
    vnlab run <config.json> [--out DIR]
    vnlab list

One JSON config per experiment; outputs are a result.json (summary,
verdicts, tool version, resolved tolerances) plus experiment-specific CSVs,
written only after the whole computation succeeds. Exit codes: 0 success,
2 config validation error, 3 numerical failure. The env var TOOL_THREADS
caps internal sweep parallelism.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .algebra import BlockAlgebra, check_affiliated, make_block_algebra
from .config import DEFAULT_TOL
from .drift import convergence_sweep
from .errors import BadConfig, VnlabError
from .evolve import (
    born_solution,
    commutator_product,
    sample_reachable,
    trotter_product,
)
from .koopman import build_torus_model, dyadic_filtration, generator, koopman_algebra
from .lie import larc_verdict, make_control_system
from .linalg import expm_skew, matrix_from_json, op_norm
from .systems import (
    build_jaynes_cummings,
    build_oscillator,
    verify_oscillator_brackets,
    verify_symmetry,
)

EXPERIMENTS: dict[str, tuple[str, list[str]]] = {
    "born": ("first-order inhomogeneous solution with quadrature error estimate", ["dim", "seed", "horizon", "nodes"]),
    "drift-approx": ("spectral drift approximation sweep on a torus model", ["torus", "z_grid", "levels"]),
    "jaynes-cummings": ("atom-cavity symmetry commutation and closure affiliation", ["n_max"]),
    "koopman": ("generated algebra of sampled torus composition unitaries", ["torus"]),
    "lie-rank": ("dynamical Lie algebra dimension and controllability verdict", ["generators", "algebra"]),
    "oscillator": ("harmonic-oscillator ladder brackets, closure, commutant", ["n_max"]),
    "product-formula": ("product-formula error ladder for a seeded operator pair", ["formula", "dim", "t", "n_ladder", "seed"]),
    "reachable": ("random admissible controls and their endpoint states", ["dim", "seed", "horizon", "bound", "samples"]),
}


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def list_experiments() -> str:
    lines = []
    for kind in sorted(EXPERIMENTS):
        desc, fields = EXPERIMENTS[kind]
        lines.append(f"{kind}: {desc}")
        lines.append(f"    required: {', '.join(fields)}")
    return "\n".join(lines)


def _require(cfg: dict, kind: str) -> None:
    missing = [f for f in EXPERIMENTS[kind][1] if f not in cfg]
    if missing:
        raise BadConfig(f"{kind} config missing fields: {', '.join(missing)}")


def _torus_from_cfg(obj):
    if not isinstance(obj, dict) or not all(k in obj for k in ("d", "alpha", "K")):
        raise BadConfig("torus must be an object with d, alpha, K")
    return build_torus_model(int(obj["d"]), obj["alpha"], int(obj["K"]))


def _seeded_skew(rng: np.random.Generator, dim: int) -> np.ndarray:
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    s = (g - g.conj().T) / 2.0
    return s / op_norm(s)


def _full_algebra(dim: int) -> BlockAlgebra:
    return make_block_algebra([(dim, 1)])


def validate_config(cfg: dict) -> str:
    if not isinstance(cfg, dict):
        raise BadConfig("config must be a JSON object")
    kind = cfg.get("kind")
    if kind not in EXPERIMENTS:
        raise BadConfig(f"unknown experiment kind {kind!r}")
    _require(cfg, kind)
    if kind == "drift-approx":
        _torus_from_cfg(cfg["torus"])
        if not cfg["z_grid"] or any(float(z) <= 0 for z in cfg["z_grid"]):
            raise BadConfig("z_grid must be a nonempty list of positive reals")
        if int(cfg["levels"]) < 1:
            raise BadConfig("levels must be at least 1")
    elif kind == "koopman":
        _torus_from_cfg(cfg["torus"])
    elif kind == "lie-rank":
        if not isinstance(cfg["generators"], list) or not cfg["generators"]:
            raise BadConfig("generators must be a nonempty list of matrix objects")
        if not isinstance(cfg["algebra"], dict):
            raise BadConfig("algebra must be a block-algebra object")
        for g in cfg["generators"]:
            matrix_from_json(g)
        BlockAlgebra.from_json(cfg["algebra"])
    elif kind == "product-formula":
        if cfg["formula"] not in ("trotter", "commutator"):
            raise BadConfig("formula must be 'trotter' or 'commutator'")
        if int(cfg["dim"]) < 2 or float(cfg["t"]) <= 0:
            raise BadConfig("dim must be >= 2 and t > 0")
        if not cfg["n_ladder"] or any(int(n) < 1 for n in cfg["n_ladder"]):
            raise BadConfig("n_ladder must be a nonempty list of positive ints")
    elif kind == "born":
        if int(cfg["nodes"]) < 3 or int(cfg["nodes"]) % 2 == 0:
            raise BadConfig("nodes must be odd and at least 3")
        if int(cfg["dim"]) < 2 or float(cfg["horizon"]) <= 0:
            raise BadConfig("dim must be >= 2 and horizon > 0")
    elif kind == "reachable":
        if int(cfg["dim"]) < 2 or int(cfg["samples"]) < 1:
            raise BadConfig("dim must be >= 2 and samples >= 1")
        if float(cfg["horizon"]) <= 0 or float(cfg["bound"]) < 0:
            raise BadConfig("horizon must be positive and bound nonnegative")
    elif kind in ("jaynes-cummings", "oscillator"):
        floor = 3 if kind == "jaynes-cummings" else 8
        if int(cfg["n_max"]) < floor:
            raise BadConfig(f"n_max must be at least {floor}")
    return kind


def _run_drift_approx(cfg: dict, threads: int) -> tuple[dict, dict[str, str]]:
    model = _torus_from_cfg(cfg["torus"])
    chain = dyadic_filtration(model, int(cfg["levels"]))
    z_grid = [float(z) for z in cfg["z_grid"]]
    sweep = convergence_sweep(generator(model), z_grid, chain, max_workers=threads)
    rows_monotone = bool(
        np.all(np.diff(sweep.distances, axis=1) <= 1e-15 + np.zeros_like(sweep.distances[:, 1:]))
    )
    final = float(sweep.distances[-1, -1])
    summary = {
        "torus": model.to_json(),
        "levels": int(cfg["levels"]),
        "z_grid": z_grid,
        "final_srt_distance": final,
        "verdicts": {"rows_non_increasing": rows_monotone, "final_below_1e-6": final <= 1e-6},
    }
    return summary, {"sweep.csv": sweep.to_csv_text()}


def _run_lie_rank(cfg: dict) -> tuple[dict, dict[str, str]]:
    gens = [matrix_from_json(g) for g in cfg["generators"]]
    alg = BlockAlgebra.from_json(cfg["algebra"])
    sys_ = make_control_system(gens[0], gens[1:], alg)
    report = larc_verdict(sys_)
    return {"report": report.to_json(), "verdicts": {"strong_controllable": report.strong_controllable}}, {}


def _run_product_formula(cfg: dict) -> tuple[dict, dict[str, str]]:
    rng = np.random.default_rng(int(cfg["seed"]))
    dim = int(cfg["dim"])
    t = float(cfg["t"])
    a = _seeded_skew(rng, dim)
    b = _seeded_skew(rng, dim)
    ladder = [int(n) for n in cfg["n_ladder"]]
    if cfg["formula"] == "trotter":
        target = expm_skew(t * (a + b))
        errors = [float(op_norm(trotter_product(a, b, t, n) - target)) for n in ladder]
    else:
        target = expm_skew(t * (a @ b - b @ a))
        errors = [float(op_norm(commutator_product(a, b, t, n) - target)) for n in ladder]
    csv = "n,error\n" + "".join(f"{n},{_fmt(e)}\n" for n, e in zip(ladder, errors))
    decreasing = all(e2 < e1 for e1, e2 in zip(errors, errors[1:]))
    summary = {
        "formula": cfg["formula"],
        "n_ladder": ladder,
        "errors": errors,
        "verdicts": {"errors_decreasing": decreasing},
    }
    return summary, {"product_formula.csv": csv}


def _run_born(cfg: dict) -> tuple[dict, dict[str, str]]:
    rng = np.random.default_rng(int(cfg["seed"]))
    dim = int(cfg["dim"])
    drift = _seeded_skew(rng, dim)
    h1 = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    h1 = (h1 + h1.conj().T) / 2.0
    h2 = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    h2 = (h2 + h2.conj().T) / 2.0
    path = lambda s: np.cos(s) * h1 + np.sin(s) * h2  # noqa: E731
    sys_ = make_control_system(drift, [], _full_algebra(dim))
    xi0 = np.zeros(dim, dtype=np.complex128)
    xi0[0] = 1.0
    nodes = int(cfg["nodes"])
    coarse = born_solution(sys_, path, xi0, float(cfg["horizon"]), nodes)
    fine = born_solution(sys_, path, xi0, float(cfg["horizon"]), 2 * nodes - 1)
    ratio = fine.estimated_error / coarse.estimated_error if coarse.estimated_error > 0 else 0.0
    summary = {
        "nodes": nodes,
        "estimated_error": coarse.estimated_error,
        "doubled_estimated_error": fine.estimated_error,
        "final_re": [float(x) for x in coarse.final_state.real],
        "final_im": [float(x) for x in coarse.final_state.imag],
        "verdicts": {"doubling_ratio_below_0.2": bool(ratio <= 0.2)},
    }
    return summary, {}


def _run_reachable(cfg: dict) -> tuple[dict, dict[str, str]]:
    rng = np.random.default_rng(int(cfg["seed"]))
    dim = int(cfg["dim"])
    drift = _seeded_skew(rng, dim)
    controls = [_seeded_skew(rng, dim), _seeded_skew(rng, dim)]
    sys_ = make_control_system(drift, controls, _full_algebra(dim))
    xi0 = np.zeros(dim, dtype=np.complex128)
    xi0[0] = 1.0
    result = sample_reachable(
        sys_, xi0, float(cfg["horizon"]), float(cfg["bound"]), int(cfg["samples"]), int(cfg["seed"])
    )
    lines = ["seed,segment_count,T," + ",".join(
        [f"final_re{k}" for k in range(dim)] + [f"final_im{k}" for k in range(dim)]
    )]
    for state, ctrl in zip(result.states, result.controls):
        vals = [_fmt(x) for x in state.real] + [_fmt(x) for x in state.imag]
        lines.append(f"{int(cfg['seed'])},{ctrl.segments},{_fmt(cfg['horizon'])}," + ",".join(vals))
    summary = {
        "samples": int(cfg["samples"]),
        "max_affiliation_residual": result.max_affiliation_residual,
        "verdicts": {
            "all_unit_norm": result.all_unit_norm,
            "all_affiliated": result.all_affiliated,
        },
    }
    return summary, {"trajectories.csv": "\n".join(lines) + "\n"}


def _run_koopman(cfg: dict) -> tuple[dict, dict[str, str]]:
    model = _torus_from_cfg(cfg["torus"])
    alg = koopman_algebra(model, cfg.get("t_samples"))
    cert = check_affiliated(generator(model), alg)
    summary = {
        "torus": model.to_json(),
        "algebra": alg.to_json(),
        "block_multiplicities": sorted(m for _, m in alg.blocks),
        "generator_affiliation": cert.as_dict(),
        "verdicts": {"generator_affiliated": cert.verdict},
    }
    return summary, {}


def _run_jaynes_cummings(cfg: dict) -> tuple[dict, dict[str, str]]:
    omega = cfg.get("omega", [1.0, 1.0, 1.0])
    model = build_jaynes_cummings(int(cfg["n_max"]), *[float(w) for w in omega])
    report = verify_symmetry(model)
    summary = {
        "n_max": int(cfg["n_max"]),
        "report": report.to_json(),
        "verdicts": {
            "interior_commutation": report.verdict,
            "closure_affiliated": report.closure_max_affiliation_residual <= DEFAULT_TOL.lie_admission,
        },
    }
    return summary, {}


def _run_oscillator(cfg: dict) -> tuple[dict, dict[str, str]]:
    model = build_oscillator(int(cfg["n_max"]))
    report = verify_oscillator_brackets(model)
    summary = {
        "n_max": int(cfg["n_max"]),
        "report": report.to_json(),
        "verdicts": {
            "brackets_within_1e-6": max(report.interior_bracket_residuals) <= 1e-6,
            "closure_dim_is_4": report.closure_dim == 4,
            "commutant_trivial": report.commutant_dim == 1,
        },
    }
    return summary, {}


def run_experiment(cfg: dict, out_dir: Path) -> int:
    """Run a validated config and write result.json plus CSV artifacts."""
    kind = cfg["kind"]
    threads = int(os.environ.get("TOOL_THREADS", os.cpu_count() or 1))
    if kind == "drift-approx":
        summary, files = _run_drift_approx(cfg, threads)
    elif kind == "lie-rank":
        summary, files = _run_lie_rank(cfg)
    elif kind == "product-formula":
        summary, files = _run_product_formula(cfg)
    elif kind == "born":
        summary, files = _run_born(cfg)
    elif kind == "reachable":
        summary, files = _run_reachable(cfg)
    elif kind == "koopman":
        summary, files = _run_koopman(cfg)
    elif kind == "jaynes-cummings":
        summary, files = _run_jaynes_cummings(cfg)
    else:
        summary, files = _run_oscillator(cfg)

    result = {
        "kind": kind,
        "version": __version__,
        "tolerances": DEFAULT_TOL.as_dict(),
        **summary,
    }
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "result.json").write_text(json.dumps(result, indent=2, sort_keys=True) + "\n")
    for name, text in files.items():
        (out_dir / name).write_text(text)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="vnlab", description="batch experiment driver")
    sub = parser.add_subparsers(dest="command", required=True)
    runp = sub.add_parser("run", help="run one experiment config")
    runp.add_argument("config", type=Path)
    runp.add_argument("--out", type=Path, default=None, help="output directory (default: alongside config)")
    sub.add_parser("list", help="list experiment kinds and required fields")
    args = parser.parse_args(argv)

    if args.command == "list":
        print(list_experiments())
        return 0

    try:
        cfg = json.loads(args.config.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 2
    try:
        validate_config(cfg)
    except (VnlabError, ValueError, KeyError, TypeError) as exc:
        print(f"error: invalid config: {exc}", file=sys.stderr)
        return 2
    out_dir = args.out if args.out is not None else args.config.parent / "out"
    try:
        return run_experiment(cfg, out_dir)
    except VnlabError as exc:
        print(f"error: numerical failure in {cfg.get('kind')}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
