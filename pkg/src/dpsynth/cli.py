"""Command-line entry point: ``dpsynth <command> ...``.

Every command first writes a run manifest next to its output (status
``started``), then rewrites it with status ``complete``. ``dpsynth rerun
<manifest>`` replays a run from its manifest.

Exit codes: 0 success, 2 parse/validation error, 3 verification FAIL,
4 runtime error.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import warnings
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .bayesnet import BayesNetStructure, validate_structure
from .domain import Dataset, ProbTable, empirical_distribution, l2_distance, tv_distance
from .errors import DPSynthError, EmptyDatasetError, ParseError
from .evaluation import (
    AssumptionWarning,
    bound_full_domain,
    bound_l2_privbayes,
    bound_normalized_cells,
    bound_projected_cells,
    bound_lower,
    bound_tv_privbayes,
    named_generator,
    packing_adversary,
    verify_config,
)
from .mechanism import DEFAULT_SEED, NoiseSource, PrivacyParams
from .synthesizer import PostProcessKind, SourceDistribution, privbayes_fit, synthesize_dataset
from .utility import ErmProblem, minimal_c1, rademacher_estimate, utility_bound_rhs, utility_report

log = logging.getLogger("dpsynth")

EXIT_OK, EXIT_INVALID, EXIT_FAIL, EXIT_RUNTIME = 0, 2, 3, 4

# ``verify --theorem`` values and the bound configuration each one runs
VERIFY_TARGETS = {
    "1": "network_tv",
    "2": "network_l2",
    "3": "full_domain_tv",
    "lemma1": "normalized_linf",
    "lemma4": "projected_l2",
}


def load_dataset(path: str | Path) -> Dataset:
    """Read a CSV with a header row; every cell must be the literal 0 or 1.

    Row numbers in errors count data rows from 1; columns count from 1.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r]
    if len(rows) < 2:
        raise EmptyDatasetError(f"{path}: no data rows")
    width = len(rows[0])
    out = np.empty((len(rows) - 1, width), dtype=np.uint8)
    for r, row in enumerate(rows[1:], start=1):
        if len(row) != width:
            raise ParseError(f"{path}: row {r} has {len(row)} cells, header has {width}", row=r)
        for c, cell in enumerate(row, start=1):
            cell = cell.strip()
            if cell not in ("0", "1"):
                raise ParseError(f"{path}: non-binary value {cell!r} at row {r}, column {c}", row=r, column=c)
            out[r - 1, c - 1] = cell == "1"
    return Dataset(out)


def save_dataset(data: Dataset, path: str | Path, header: Sequence[str] | None = None) -> None:
    header = list(header) if header is not None else [f"x{i}" for i in range(data.d)]
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(data.records.tolist())


def load_structure(path: str | Path) -> BayesNetStructure:
    return validate_structure(BayesNetStructure.from_json(Path(path).read_text()))


def _load_distribution(path: str | Path) -> ProbTable:
    """A table file, or a dataset CSV turned into its empirical joint."""
    with Path(path).open() as fh:
        first = fh.readline().strip()
    if first == "index,probability":
        return ProbTable.load(path)
    data = load_dataset(path)
    return empirical_distribution(data, tuple(range(data.d)))


def _manifest_path(out: Path) -> Path:
    return out.with_name(out.stem + ".manifest.json")


def _write_manifest(out: Path | None, args: dict[str, Any], status: str, extra: dict[str, Any] | None = None) -> None:
    if out is None:
        return
    manifest = {"tool": "dpsynth", "version": __version__, "status": status, "args": args}
    manifest.update(extra or {})
    _manifest_path(out).write_text(json.dumps(manifest, indent=2, sort_keys=True))


def _emit(report: dict[str, Any], out: Path | None) -> None:
    text = json.dumps(report, indent=2, sort_keys=True)
    if out is None:
        print(text)
    else:
        out.write_text(text + "\n")


def cmd_synth(a: argparse.Namespace) -> tuple[int, dict]:
    if a.out is None:
        raise DPSynthError("synth needs --out <csv>")
    structure = load_structure(a.structure)
    if a.data:
        data = load_dataset(a.data)
        source = SourceDistribution.from_dataset(data)
    else:
        if a.n is None:
            raise DPSynthError("--dist requires --n (nominal sample size)")
        source = SourceDistribution.from_table(ProbTable.load(a.dist), a.n)
    params = PrivacyParams(a.epsilon, a.delta, source.n, source.d, a.replacement_sensitivity)
    master = NoiseSource(a.seed)
    net = privbayes_fit(source, structure, params, PostProcessKind(a.post), master.derive(0))
    synthetic = synthesize_dataset(net, a.samples, master.derive(1))
    save_dataset(synthetic, a.out)
    info = {
        "per_node_noise_scale": [params.per_marginal_scale] * structure.d,
        "n": source.n,
        "d": source.d,
        "samples": synthetic.n,
    }
    if a.model:
        model_dir = Path(a.model)
        model_dir.mkdir(parents=True, exist_ok=True)
        (model_dir / "structure.json").write_text(structure.to_json())
        for i, m in enumerate(net.marginals):
            m.save(model_dir / f"node{i}.csv")
    return EXIT_OK, info


def cmd_eval(a: argparse.Namespace) -> tuple[int, dict]:
    p, q = _load_distribution(a.p), _load_distribution(a.q)
    report = {"tv": tv_distance(p, q), "l2": l2_distance(p, q), "tv_convention": "sum |p - q| (no 1/2)"}
    _emit(report, a.out)
    return EXIT_OK, {}


def cmd_bounds(a: argparse.Namespace) -> tuple[int, dict]:
    report: dict[str, Any] = {"parameters": {k: getattr(a, k) for k in ("n", "d", "k", "epsilon", "delta", "m", "domain_size")}}
    report["tv_privbayes"] = bound_tv_privbayes(a.n, a.d, a.k, a.epsilon, a.delta)
    report["l2_privbayes"] = bound_l2_privbayes(a.n, a.d, a.k, a.epsilon, a.delta)
    report["full_domain"] = bound_full_domain(a.n, a.d, a.epsilon, a.delta)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", AssumptionWarning)
        report["lower"] = bound_lower(a.n, a.epsilon, a.delta, a.domain_size or 2**a.d)
    report["warnings"] = [str(w.message) for w in caught]
    for msg in report["warnings"]:
        log.warning(msg)
    report["normalized_cells"] = bound_normalized_cells(a.m, a.n, a.d, a.epsilon, a.delta)
    report["projected_cells"] = bound_projected_cells(a.m, a.n, a.d, a.epsilon, a.delta)
    _emit(report, a.out)
    return EXIT_OK, {}


def cmd_verify(a: argparse.Namespace) -> tuple[int, dict]:
    report = verify_config(
        VERIFY_TARGETS[a.theorem],
        n=a.n,
        d=a.d,
        k=a.k,
        m=a.m,
        epsilon=a.epsilon,
        delta=a.delta,
        trials=a.trials,
        master_seed=a.seed,
        bound_scale=a.bound_scale,
        threads=a.threads,
    )
    _emit(report.to_dict(), a.out)
    log.info("%s: pass_fraction=%.4f -> %s", report.bound_name, report.pass_fraction, "PASS" if report.passed else "FAIL")
    return (EXIT_OK if report.passed else EXIT_FAIL), {"passed": report.passed}


def cmd_lowerbound(a: argparse.Namespace) -> tuple[int, dict]:
    gen = named_generator(a.generator, a.epsilon, a.delta, a.k)
    report = packing_adversary(
        gen, a.n, a.epsilon, a.delta, a.d, a.probes, a.seed, repeats=a.repeats, name=f"lower_{a.generator}", threads=a.threads
    )
    _emit(report.to_dict(), a.out)
    return (EXIT_OK if report.passed else EXIT_FAIL), {"passed": report.passed}


def cmd_utility(a: argparse.Namespace) -> tuple[int, dict]:
    real, syn = load_dataset(a.real), load_dataset(a.syn)
    problem = ErmProblem(real.d, a.radius, a.lam, a.intercept)
    rep = utility_report(real, syn, problem, a.iters, a.seed)
    report: dict[str, Any] = {
        "utility": rep.utility,
        "risk_real_fit": rep.risk_real,
        "risk_syn_fit": rep.risk_syn,
        "theta_real": rep.real_fit.theta.tolist(),
        "theta_syn": rep.syn_fit.theta.tolist(),
        "objective_real": rep.real_fit.objective,
        "objective_syn": rep.syn_fit.objective,
        "iterations": a.iters,
        "loss_scale": problem.loss_scale,
    }
    if a.syn_dist:
        q = ProbTable.load(a.syn_dist)
        p = empirical_distribution(real, tuple(range(real.d)))
        rad, rad_se = rademacher_estimate(syn, problem, a.rademacher_draws, a.seed)
        tv = tv_distance(q, p)
        report["utility_bound"] = {
            "tv_q_p": tv,
            "rademacher": rad,
            "rademacher_stderr": rad_se,
            "c1": 2.0,
            "delta": a.delta,
            "rhs": float(utility_bound_rhs(tv, rad, syn.n, a.delta)),
            "holds": bool(rep.utility <= utility_bound_rhs(tv, rad, syn.n, a.delta)),
            "minimal_c1": minimal_c1(rep.utility, tv, rad, syn.n, a.delta),
        }
    _emit(report, a.out)
    return EXIT_OK, {}


COMMANDS = {
    "synth": cmd_synth,
    "eval": cmd_eval,
    "bounds": cmd_bounds,
    "verify": cmd_verify,
    "lowerbound": cmd_lowerbound,
    "utility": cmd_utility,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help="master seed (unsigned 64-bit)")
    common.add_argument("--out", type=Path, default=None, help="output file; manifest goes next to it")
    common.add_argument("--threads", type=int, default=1)

    parser = argparse.ArgumentParser(prog="dpsynth", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", parents=[common], help="fit a noisy network and sample synthetic records")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--data", help="Boolean CSV dataset")
    src.add_argument("--dist", help="table file with the exact source joint")
    p.add_argument("--n", type=int, help="nominal sample size for --dist")
    p.add_argument("--structure", required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--post", choices=[k.value for k in PostProcessKind], default="norm")
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--model", help="directory to save the fitted marginals")
    p.add_argument("--replacement-sensitivity", action="store_true", help="use 2/n instead of 1/n")

    p = sub.add_parser("eval", parents=[common], help="distances between two tables or datasets")
    p.add_argument("--p", required=True)
    p.add_argument("--q", required=True)

    p = sub.add_parser("bounds", parents=[common], help="closed-form bound values")
    p.add_argument("--n", type=float, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--m", type=int, default=8)
    p.add_argument("--domain-size", type=float, default=None)

    p = sub.add_parser("verify", parents=[common], help="Monte Carlo check of an accuracy bound")
    p.add_argument("--theorem", choices=list(VERIFY_TARGETS), required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--m", type=int, default=8)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--bound-scale", type=float, default=1.0, help="multiply the bound (negative controls)")

    p = sub.add_parser("lowerbound", parents=[common], help="packing adversary against a generator")
    p.add_argument("--generator", choices=["privbayes", "laplace", "identity"], required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--delta", type=float, default=0.25)
    p.add_argument("--probes", type=int, default=50)
    p.add_argument("--repeats", type=int, default=1)

    p = sub.add_parser("utility", parents=[common], help="train-on-synthetic utility of a synthetic dataset")
    p.add_argument("--real", required=True)
    p.add_argument("--syn", required=True)
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--lambda", dest="lam", type=float, default=0.0)
    p.add_argument("--iters", type=int, default=5000)
    p.add_argument("--intercept", action="store_true")
    p.add_argument("--syn-dist", help="generator output table; adds the TV + Rademacher utility bound")
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--rademacher-draws", type=int, default=200)

    p = sub.add_parser("rerun", help="replay a run from its manifest")
    p.add_argument("manifest", type=Path)
    p.add_argument("--out", type=Path, default=None, help="write outputs here instead of the recorded path")
    return parser


def _args_to_json(a: argparse.Namespace) -> dict[str, Any]:
    return {k: (str(v) if isinstance(v, Path) else v) for k, v in vars(a).items() if k != "verbose"}


def _namespace_from_manifest(path: Path, out: Path | None) -> argparse.Namespace:
    manifest = json.loads(path.read_text())
    args = dict(manifest["args"])
    if out is not None:
        args["out"] = str(out)
    for key in ("out",):
        if args.get(key) is not None:
            args[key] = Path(args[key])
    return argparse.Namespace(**args)


def run(a: argparse.Namespace) -> int:
    recorded = _args_to_json(a)
    out = a.out
    _write_manifest(out, recorded, "started")
    code, info = COMMANDS[a.command](a)
    _write_manifest(out, recorded, "complete", {"exit_code": code, "result": info})
    return code


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    a = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if a.command == "rerun":
            a = _namespace_from_manifest(a.manifest, a.out)
        return run(a)
    except (DPSynthError, ValueError, KeyError, json.JSONDecodeError, FileNotFoundError) as exc:
        print(f"dpsynth: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001
        print(f"dpsynth: runtime error: {exc!r}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
