"""``netid`` command line: analyze, dissimilar, epsclose, experiment, simulate.

Every command prints its main result to stdout. With ``--output-dir`` all
artifacts (JSON, CSV, DOT, SVG) are also written there. Failures print a
single ``error: <code>: <message>`` line to stderr and exit nonzero.
"""

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .dissimilar import dissimilar_network
from .epsclose import augment, check_eps_bound, error_norm, error_norm_bounds, gramian, \
    simulate_pair
from .errors import InvalidInputError, NetidError
from .experiment import ExperimentConfig, default_workers, rows_to_csv, run_experiment
from .model import PRESENCE_THRESHOLD, load_json, load_system, matrix_to_csv, \
    read_matrix_csv
from .observability import ENUMERATION_GUARD, analyze, classify_edges, enumerate_all_variants
from .plots import network_dot, svg_line_plot

log = logging.getLogger("netid")


def _dump(obj):
    return json.dumps(obj, indent=2, allow_nan=True) + "\n"


def _emit(args, text, filename):
    sys.stdout.write(text)
    if args.output_dir:
        out = Path(args.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / filename).write_text(text)


def _write(args, filename, text):
    if args.output_dir:
        out = Path(args.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / filename).write_text(text)


def _parse_vector(text, n, name):
    try:
        vals = [float(x) for x in text.replace(";", ",").split(",") if x.strip()]
    except ValueError:
        raise InvalidInputError(f"{name}: expected comma-separated numbers, got {text!r}") from None
    if len(vals) != n:
        raise InvalidInputError(f"{name}: expected {n} entries, got {len(vals)}")
    return np.array(vals)


def _delta_from_args(args, system):
    if args.delta and args.perturbed:
        raise InvalidInputError("give at most one of --delta and --perturbed")
    if args.delta:
        D = read_matrix_csv(args.delta)
    elif args.perturbed:
        D = read_matrix_csv(args.perturbed) - system.A
    else:
        return None
    if D.shape != system.A.shape:
        raise InvalidInputError(f"perturbation is {D.shape}, expected {system.A.shape}")
    return D


def _require_input(args):
    if not args.input:
        raise InvalidInputError("--input is required for this command")
    return load_system(args.input)


# ---------------------------------------------------------------------------
# commands

def cmd_analyze(args):
    system = _require_input(args)
    an = analyze(system, args.tol)
    cls = classify_edges(an)
    report = {"n": system.n, "rank": an.rank, "nullity": an.nullity,
              "Phi": an.Phi.tolist(), "row_classes": cls.labels}
    if an.nullity == 0:
        report["summary"] = "fully observable, ambiguity set = {A}"
        report["variant_counts"] = [1] * system.n
        report["network_count"] = 1
    elif system.n <= ENUMERATION_GUARD:
        counts = [v.count for v in enumerate_all_variants(an, system.A, args.threshold)]
        report["variant_counts"] = counts
        report["network_count"] = int(np.prod(counts, dtype=object))
        report["summary"] = f"rank {an.rank}, {report['network_count']} structural networks"
    else:
        report["variant_counts"] = None
        report["network_count"] = None
        report["summary"] = (f"rank {an.rank}; enumeration skipped: n={system.n} exceeds "
                             f"guard {ENUMERATION_GUARD}")
    if args.format == "csv":
        _emit(args, matrix_to_csv(an.Phi, [f"phi{k}" for k in range(an.nullity)]), "phi.csv")
    else:
        _emit(args, _dump(report), "analysis.json")
    return 0


def cmd_dissimilar(args):
    system = _require_input(args)
    res = dissimilar_network(system, presence_threshold=args.threshold, rank_tol=args.tol)
    measured = system.measured or []
    dot = network_dot({"original": system.A, "maximally dissimilar": res.network},
                      measured, args.threshold)
    if args.format == "dot":
        _emit(args, dot, "networks.dot")
        _write(args, "dissimilar.json", _dump(res.to_dict()))
    else:
        _emit(args, _dump(res.to_dict()), "dissimilar.json")
        _write(args, "networks.dot", dot)
    return 0


def _trajectory_svg(traj, title):
    series = {}
    for k in range(traj.y.shape[1]):
        series[f"y{k}"] = (traj.t, traj.y[:, k])
        series[f"ytilde{k}"] = (traj.t, traj.ytilde[:, k])
        series[f"e{k}"] = (traj.t, traj.e[:, k])
    return svg_line_plot(series, title, "t", "output")


def cmd_epsclose(args):
    system = _require_input(args)
    Delta = _delta_from_args(args, system)
    if Delta is None:
        Delta = dissimilar_network(system, presence_threshold=args.threshold,
                                   rank_tol=args.tol).Delta
    gd = gramian(augment(system, Delta))
    lo, hi, xmin, xmax = error_norm_bounds(gd)
    x0 = _parse_vector(args.x0, system.n, "--x0") if args.x0 else xmax
    err = error_norm(gd, x0)
    root = float(np.sqrt(gd.lambda_max))
    bound = root * np.sqrt(2.0) * np.linalg.norm(x0)
    report = {
        "sqrt_lambda_max": root,
        "lambda_max": gd.lambda_max,
        "gramian_nullity": gd.l,
        "x0": np.asarray(x0).tolist(),
        "error_norm": err,
        "error_norm_unit_bracket": [lo, hi],
        "inequality": f"{err:.4f} < {root:.4f}*sqrt(2)*||x0|| = {bound:.4f}",
        "inequality_holds": bool(err < bound),
    }
    if args.eps is not None:
        eb = check_eps_bound(gd, x0, args.eps)
        report.update(eps=args.eps, certified=eb.certified, margin=eb.margin)
    horizon = args.horizon
    traj = simulate_pair(system, Delta, x0, horizon, args.dt)
    report["trajectory_error_l2"] = traj.error_l2
    report["max_abs_error"] = float(np.abs(traj.e).max())
    svg = _trajectory_svg(traj, "measured outputs")
    if args.format == "csv":
        _emit(args, traj.to_csv(), "trajectory.csv")
    elif args.format == "svg":
        _emit(args, svg, "trajectory.svg")
    else:
        _emit(args, _dump(report), "epsclose.json")
    _write(args, "epsclose.json", _dump(report))
    _write(args, "trajectory.csv", traj.to_csv())
    _write(args, "trajectory.svg", svg)
    return 0


def _experiment_config(args):
    if args.input:
        d = load_json(args.input)
        if not isinstance(d, dict):
            raise InvalidInputError("experiment config must be a JSON object")
    else:
        d = {"ensembles": [{"model": "er"}, {"model": "ws"}]}
    if args.seed is not None:
        d = dict(d, seed=args.seed)
    if args.trials is not None:
        d = dict(d, trials=args.trials)
    cfg = ExperimentConfig.from_dict(d)
    cfg.presence_threshold = args.threshold if args.threshold_set else cfg.presence_threshold
    cfg.rank_tol = args.tol or cfg.rank_tol
    return cfg


def cmd_experiment(args):
    cfg = _experiment_config(args)
    rows = run_experiment(cfg, args.workers)
    text = rows_to_csv(rows)
    series = {}
    for r in rows:
        x, y = series.setdefault(r.ensemble, ([], []))
        x.append(r.measured)
        y.append(r.mean)
    svg = svg_line_plot(series, "edges flipped", "measured nodes", "flipped edges (% of n^2)")
    failed = sum(r.failed for r in rows if r.measured == cfg.measured_counts[0])
    if failed:
        log.warning("%d trials failed and were excluded", failed)
    if args.format == "svg":
        _emit(args, svg, "flips.svg")
    elif args.format == "json":
        _emit(args, _dump([r.__dict__ for r in rows]), "flips.json")
    else:
        _emit(args, text, "flips.csv")
    _write(args, "flips.csv", text)
    _write(args, "flips.svg", svg)
    return 0


def cmd_simulate(args):
    system = _require_input(args)
    Delta = _delta_from_args(args, system)
    Delta = np.zeros_like(system.A) if Delta is None else Delta
    x0 = _parse_vector(args.x0, system.n, "--x0") if args.x0 else np.ones(system.n) / np.sqrt(system.n)
    traj = simulate_pair(system, Delta, x0, args.horizon, args.dt)
    if args.format == "svg":
        _emit(args, _trajectory_svg(traj, "measured outputs"), "trajectory.svg")
    elif args.format == "json":
        _emit(args, _dump({"t": traj.t.tolist(), "y": traj.y.tolist(),
                           "ytilde": traj.ytilde.tolist(), "e": traj.e.tolist()}),
              "trajectory.json")
    else:
        _emit(args, traj.to_csv(), "trajectory.csv")
    return 0


COMMANDS = {"analyze": cmd_analyze, "dissimilar": cmd_dissimilar, "epsclose": cmd_epsclose,
            "experiment": cmd_experiment, "simulate": cmd_simulate}


class _Threshold(argparse.Action):
    def __call__(self, parser, namespace, values, option_string=None):
        setattr(namespace, self.dest, values)
        namespace.threshold_set = True


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help="system JSON (experiment: config JSON)")
    common.add_argument("--output-dir", help="also write all artifacts here")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--threshold", type=float, default=PRESENCE_THRESHOLD, action=_Threshold,
                        help="edge presence threshold (default %(default)g)")
    common.add_argument("--tol", type=float, default=0.0,
                        help="relative rank tolerance; 0 picks max(shape)*eps")
    common.add_argument("--workers", type=int, default=None,
                        help="experiment worker processes (default $NETID_WORKERS or 1)")
    common.add_argument("--format", choices=["json", "csv", "dot", "svg"], default=None)
    common.add_argument("--delta", help="CSV matrix Delta")
    common.add_argument("--perturbed", help="CSV matrix A + Delta")
    common.add_argument("--x0", help="comma-separated initial state")
    common.add_argument("--horizon", type=float, default=10.0)
    common.add_argument("--dt", type=float, default=0.01)
    common.add_argument("--eps", type=float, default=None)
    common.add_argument("--trials", type=int, default=None)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="netid", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"netid {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


_DEFAULT_FORMAT = {"analyze": "json", "dissimilar": "json", "epsclose": "json",
                   "experiment": "csv", "simulate": "csv"}
_ALLOWED = {"analyze": {"json", "csv"}, "dissimilar": {"json", "dot"},
            "epsclose": {"json", "csv", "svg"}, "experiment": {"csv", "json", "svg"},
            "simulate": {"csv", "json", "svg"}}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if not hasattr(args, "threshold_set"):
        args.threshold_set = False
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    args.format = args.format or _DEFAULT_FORMAT[args.command]
    if args.workers is None:
        args.workers = default_workers()
    try:
        if args.format not in _ALLOWED[args.command]:
            raise InvalidInputError(f"{args.command} does not support --format {args.format}")
        return COMMANDS[args.command](args)
    except NetidError as exc:
        print(f"error: {exc.code}: {_one_line(exc)}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: io-error: {_one_line(exc)}", file=sys.stderr)
        return 1


def _one_line(exc):
    return " ".join(str(exc).split())


if __name__ == "__main__":
    sys.exit(main())
