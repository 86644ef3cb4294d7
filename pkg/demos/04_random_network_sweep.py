"""How much topology survives as more nodes are measured.

Erdos-Renyi and Watts-Strogatz networks are generated, a random subset of
nodes is measured, and the maximally dissimilar consistent network is
computed. The mean share of flipped edges is tabulated per sensor count.
This is a reduced run (n = 40, 20 trials); pass ``--full`` for n = 100 with
100 trials, which takes several minutes. Set NETID_WORKERS to use more
processes.

Run:  python demos/04_random_network_sweep.py [--full]
"""

import sys
from pathlib import Path

from netid import GraphEnsembleConfig
from netid.experiment import ExperimentConfig, rows_to_csv, run_experiment
from netid.plots import svg_line_plot

full = "--full" in sys.argv
n, trials = (100, 100) if full else (40, 20)
cfg = ExperimentConfig([GraphEnsembleConfig(model="er", n=n, p_edge=1 / 6),
                        GraphEnsembleConfig(model="ws", n=n, K=3, beta=1 / 30)],
                       measured_counts=list(range(1, 16)), trials=trials, seed=0)
rows = run_experiment(cfg)
text = rows_to_csv(rows)
print(text)

series = {}
for r in rows:
    xs, ys = series.setdefault(r.ensemble, ([], []))
    xs.append(r.measured)
    ys.append(r.mean)
out = Path(__file__).parent / "out"
out.mkdir(exist_ok=True)
(out / "sweep.csv").write_text(text)
(out / "sweep.svg").write_text(svg_line_plot(series, "edges flipped", "measured nodes",
                                             "flipped edges (% of n^2)"))
print(f"wrote {out}/sweep.csv and sweep.svg")
