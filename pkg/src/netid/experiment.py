"""Random-network sweep: how many edges can flip as more nodes are measured."""

import csv
import io
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .dissimilar import solve_l1
from .errors import InvalidInputError, NetidError
from .model import PRESENCE_THRESHOLD, GraphEnsembleConfig, NetworkSystem, format_float, \
    generate, random_sensors, sparsity_mask
from .observability import analyze

log = logging.getLogger(__name__)

CSV_HEADER = ["ensemble", "n", "measured", "mean_flip_pct_of_n2", "std_flip_pct_of_n2",
              "trials", "failed"]


@dataclass
class ExperimentConfig:
    ensembles: list
    measured_counts: list = None  # default 1..20, clipped to the smallest n
    trials: int = 100
    seed: int = 0
    presence_threshold: float = PRESENCE_THRESHOLD
    rank_tol: float = 0.0

    def __post_init__(self):
        if self.measured_counts is None:
            top = min([20] + [ens.n for ens in self.ensembles])
            self.measured_counts = list(range(1, top + 1))
        if self.trials < 1:
            raise InvalidInputError("trials must be at least 1")
        for ens in self.ensembles:
            bad = [c for c in self.measured_counts if not 1 <= c <= ens.n]
            if bad:
                raise InvalidInputError(f"sensor counts {bad} outside [1, {ens.n}] for {ens.name}")

    @classmethod
    def from_dict(cls, d):
        try:
            ensembles = [GraphEnsembleConfig(**e) for e in d["ensembles"]]
        except (KeyError, TypeError) as exc:
            raise InvalidInputError(f"bad experiment config: {exc}") from None
        kw = {k: d[k] for k in ("measured_counts", "trials", "seed", "presence_threshold",
                                "rank_tol") if k in d}
        return cls(ensembles, **kw)


@dataclass
class ExperimentRow:
    ensemble: str
    n: int
    measured: int
    mean: float
    std: float
    trials: int
    failed: int = 0

    def csv_fields(self):
        return [self.ensemble, str(self.n), str(self.measured), format_float(self.mean),
                format_float(self.std), str(self.trials), str(self.failed)]


def trial_network(ens, ens_index, trial, seed):
    rng = np.random.default_rng(np.random.SeedSequence([seed, ens_index, trial]))
    return generate(replace(ens, seed=seed), rng)


def trial_sensors(n, count, ens_index, trial, seed):
    rng = np.random.default_rng(np.random.SeedSequence([seed, ens_index, trial, count]))
    return random_sensors(n, count, rng)


def flip_percentage(A, sensors, presence_threshold=PRESENCE_THRESHOLD, rank_tol=0.0):
    """Share of the n^2 possible edges flipped by the maximally dissimilar network."""
    sys = NetworkSystem.from_sensors(A, sensors)
    an = analyze(sys, rank_tol)
    res = solve_l1(sys, an, sparsity_mask(A, presence_threshold), presence_threshold)
    return res.flip_percentage


def run_trial(args):
    ens, ens_index, trial, counts, seed, threshold, rank_tol = args
    try:
        A = trial_network(ens, ens_index, trial, seed)
        return [flip_percentage(A, trial_sensors(ens.n, c, ens_index, trial, seed),
                                threshold, rank_tol) for c in counts]
    except (NetidError, np.linalg.LinAlgError) as exc:
        return exc


def default_workers():
    try:
        return max(1, int(os.environ.get("NETID_WORKERS", "1")))
    except ValueError:
        return 1


def run_experiment(cfg, workers=None):
    """Run every (ensemble, trial) pair and aggregate by sensor count.

    Trials are seeded from ``(seed, ensemble index, trial index)`` so the
    output does not depend on ``workers``.
    """
    workers = default_workers() if workers is None else workers
    tasks = [(ens, e, t, list(cfg.measured_counts), cfg.seed, cfg.presence_threshold,
              cfg.rank_tol)
             for e, ens in enumerate(cfg.ensembles) for t in range(cfg.trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_trial, tasks, chunksize=1))
    else:
        results = [run_trial(t) for t in tasks]

    rows = []
    for e, ens in enumerate(cfg.ensembles):
        mine = results[e * cfg.trials:(e + 1) * cfg.trials]
        good = [r for r in mine if not isinstance(r, Exception)]
        for t, r in enumerate(mine):
            if isinstance(r, Exception):
                log.warning("%s trial %d failed: %s", ens.name, t, r)
        data = np.array(good).reshape(len(good), len(cfg.measured_counts))
        for k, count in enumerate(cfg.measured_counts):
            col = data[:, k]
            mean = float(col.mean()) if col.size else float("nan")
            std = float(col.std(ddof=1)) if col.size > 1 else 0.0
            rows.append(ExperimentRow(ens.name, ens.n, count, mean, std, len(good),
                                      len(mine) - len(good)))
    return rows


def rows_to_csv(rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    writer.writerows(r.csv_fields() for r in rows)
    return buf.getvalue()
