"""Command-line front end for the folding pipeline.

Example:
    hpfold --seq PPHPPHPPHP --solver anneal --draws 50 --seed 7 --out-dir run1

Exit codes: 0 on success (including a best-effort infeasible result, which is
reported in the output), 2 on configuration errors, 3 on I/O errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from typing import Optional

from .pipeline import PipelineIOError, RunConfig, run_pipeline

_UNSET = object()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hpfold",
        description="Fold an HP bead sequence on a 26-neighbor cubic lattice "
        "by quadratic binary optimization.",
    )
    src = parser.add_mutually_exclusive_group()
    src.add_argument("--seq", help="H/P sequence text, e.g. HPPHPPHPHH")
    src.add_argument("--seq-file", help="file containing the H/P sequence")
    parser.add_argument(
        "--solver", choices=["anneal", "exhaustive", "vqe"], default=_UNSET,
        help="optimization backend (default anneal)",
    )
    parser.add_argument("--draws", type=int, default=_UNSET,
                        help="number of independent axis-draw encodings (default 50)")
    parser.add_argument("--restarts", type=int, default=_UNSET,
                        help="annealer restarts per draw (default 20)")
    parser.add_argument("--sweeps", type=int, default=_UNSET,
                        help="annealer sweeps per restart (default 2000)")
    parser.add_argument("--alpha", type=float, default=_UNSET,
                        help="CVaR tail fraction for the vqe solver (default 0.05)")
    parser.add_argument("--shots", type=int, default=_UNSET,
                        help="vqe measurement shots per evaluation; 0 = exact (default 4000)")
    parser.add_argument("--reps", type=int, default=_UNSET,
                        help="ansatz entangling repetitions, 1 or 2 (default 1)")
    parser.add_argument("--top-k", type=int, default=_UNSET,
                        help="post-selection candidate count (default 4000)")
    parser.add_argument("--max-evals", type=int, default=_UNSET,
                        help="vqe objective evaluation budget (default 500)")
    parser.add_argument("--fix-first-turn", action=argparse.BooleanOptionalAction,
                        default=argparse.SUPPRESS,
                        help="fix the first turn to (1,0,0) (default on)")
    parser.add_argument("--allow-steric", action=argparse.BooleanOptionalAction,
                        default=argparse.SUPPRESS,
                        help="treat body-diagonal turns as geometrically valid (default on)")
    for i in range(5):
        parser.add_argument(f"--lambda{i}", type=float, default=_UNSET,
                            help=f"override penalty weight {i}")
    parser.add_argument("--lambda3-hint", type=float, default=_UNSET,
                        help="crossing reward weight used by calibration (default 0.5)")
    parser.add_argument("--weights-file",
                        help="CSV of j,k,weight rows overriding H-pair interaction strengths")
    parser.add_argument("--seed", type=int, default=_UNSET,
                        help="master seed; every random choice derives from it (default 0)")
    parser.add_argument("--out-dir", default=_UNSET,
                        help="artifact directory (default hpfold_out)")
    parser.add_argument("--format", default=_UNSET,
                        help="comma list from json,xyz,csv (default all)")
    parser.add_argument("--export-qubo", action="store_true", default=_UNSET,
                        help="also write the winning encoding as qubo.json")
    parser.add_argument("--resume-params",
                        help="JSON file with a flat parameter array to warm-start vqe")
    parser.add_argument("--config",
                        help="JSON config file (keys = flag names); explicit flags win")
    parser.add_argument("--workers", type=int, default=_UNSET,
                        help="parallel draw workers (default 1)")
    return parser


def _load_weights(path: str) -> dict[tuple[int, int], float]:
    weights: dict[tuple[int, int], float] = {}
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].lstrip().startswith("#"):
                continue
            if len(row) != 3:
                raise ValueError(f"weights row must be j,k,weight: {row!r}")
            j, k, w = int(row[0]), int(row[1]), float(row[2])
            weights[(min(j, k), max(j, k))] = w
    return weights


def _merge_config(args: argparse.Namespace) -> dict:
    """Start from defaults, lay the config file over them, then explicit flags."""
    merged = {
        "seq": None,
        "seq_file": None,
        "solver": "anneal",
        "draws": 50,
        "restarts": 20,
        "sweeps": 2000,
        "alpha": 0.05,
        "shots": 4000,
        "reps": 1,
        "top_k": 4000,
        "max_evals": 500,
        "fix_first_turn": True,
        "allow_steric": True,
        "lambda0": None,
        "lambda1": None,
        "lambda2": None,
        "lambda3": None,
        "lambda4": None,
        "lambda3_hint": 0.5,
        "weights_file": None,
        "seed": 0,
        "out_dir": "hpfold_out",
        "format": "json,xyz,csv",
        "export_qubo": False,
        "resume_params": None,
        "workers": 1,
    }
    if args.config:
        with open(args.config) as fh:
            file_conf = json.load(fh)
        for key, value in file_conf.items():
            norm = key.replace("-", "_")
            if norm not in merged:
                raise ValueError(f"unknown config key {key!r}")
            merged[norm] = value
    for key in merged:
        value = getattr(args, key, _UNSET)
        if value is not _UNSET and value is not None:
            merged[key] = value
    return merged


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        conf = _merge_config(args)
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    try:
        if conf["seq"] and conf["seq_file"]:
            raise ValueError("give either a sequence or a sequence file, not both")
        if conf["seq"]:
            sequence = conf["seq"]
        elif conf["seq_file"]:
            try:
                with open(conf["seq_file"]) as fh:
                    sequence = fh.read()
            except OSError as exc:
                print(f"i/o error: {exc}", file=sys.stderr)
                return 3
        else:
            raise ValueError("a sequence is required (--seq or --seq-file)")

        weights = None
        if conf["weights_file"]:
            try:
                weights = _load_weights(conf["weights_file"])
            except OSError as exc:
                print(f"i/o error: {exc}", file=sys.stderr)
                return 3

        resume = None
        if conf["resume_params"]:
            try:
                with open(conf["resume_params"]) as fh:
                    resume = tuple(float(v) for v in json.load(fh))
            except OSError as exc:
                print(f"i/o error: {exc}", file=sys.stderr)
                return 3

        overrides = {
            f"lambda{i}": conf[f"lambda{i}"]
            for i in range(5)
            if conf[f"lambda{i}"] is not None
        }
        cfg = RunConfig(
            sequence=sequence,
            solver=conf["solver"],
            draws=conf["draws"],
            restarts=conf["restarts"],
            sweeps=conf["sweeps"],
            alpha=conf["alpha"],
            shots=conf["shots"],
            reps=conf["reps"],
            top_k=conf["top_k"],
            max_evals=conf["max_evals"],
            fix_first_turn=conf["fix_first_turn"],
            allow_steric=conf["allow_steric"],
            lambda_overrides=overrides or None,
            lambda3_hint=conf["lambda3_hint"],
            weights=weights,
            seed=conf["seed"],
            out_dir=conf["out_dir"],
            formats=tuple(s.strip() for s in conf["format"].split(",") if s.strip()),
            export_qubo=bool(conf["export_qubo"]),
            resume_params=resume,
            workers=conf["workers"],
        )
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    try:
        status, result, written = run_pipeline(cfg)
    except PipelineIOError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    sel = result.best.selected
    feasible = "feasible" if sel.feasible else "NOT feasible (best effort)"
    print(
        f"{result.sequence}: contacts {sel.contacts} of max {result.max_contacts} "
        f"({feasible}), energy {sel.best_value:.6g}, draw {result.best.draw}"
    )
    for name, path in sorted(written.items()):
        print(f"  wrote {path}")
    return status


if __name__ == "__main__":
    sys.exit(main())
