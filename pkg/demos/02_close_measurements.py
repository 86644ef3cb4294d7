"""Networks whose outputs are close rather than identical.

A stable three-node network is compared with a sparser candidate. The
observability Gramian of the block system ``blkdiag(A, A + Delta)`` viewed
through ``[C, -C]`` bounds the integrated output error, and holding that
Gramian fixed turns the search for a sparse candidate into a linear program.
Trajectories and a plot are written to ``demos/out``.

Run:  python demos/02_close_measurements.py
"""

from pathlib import Path

import numpy as np

from netid import NetworkSystem, augment, error_norm, error_norm_bounds, gramian, \
    simulate_pair, solve_fixed_gramian_l1
from netid.plots import network_dot, svg_line_plot

A = np.array([[-3.0, 1, 0], [0, -3, 0], [1, 0, -3]])
B = np.array([[-2.0, 0, 0.1], [0, 0, 0], [0.833, 0, -2]])
sys = NetworkSystem.from_sensors(A, [0])

gd = gramian(augment(sys, B - A))
root = np.sqrt(gd.lambda_max)
lo, hi, xmin, xmax = error_norm_bounds(gd)
print(f"sqrt(lambda_max(W)) = {root:.4f}; any unit x0 gives error <= {root * np.sqrt(2):.4f}")
print(f"over unit x0 the error norm ranges over [{lo:.5f}, {hi:.5f}]")

x0 = xmax
traj = simulate_pair(sys, B - A, x0, horizon=6.0, dt=0.01)
print(f"simulated ||e||_2 = {traj.error_l2:.4f}, Gramian value = {error_norm(gd, x0):.4f}")

# Sparsest network (masked l1) that keeps exactly this Gramian.
res = solve_fixed_gramian_l1(sys, gd.Wbar)
print("fixed-Gramian l1 optimum:")
print(np.round(res.network, 4) + 0.0)
print(f"objective {res.objective:.4f}, Lyapunov residual {res.extra['lyapunov_residual']:.1e}, "
      f"free directions {res.extra['affine_dimension']}")

out = Path(__file__).parent / "out"
out.mkdir(exist_ok=True)
(out / "close_trajectory.csv").write_text(traj.to_csv())
(out / "close_trajectory.svg").write_text(svg_line_plot(
    {"y": (traj.t, traj.y[:, 0]), "y~": (traj.t, traj.ytilde[:, 0]), "e": (traj.t, traj.e[:, 0])},
    "outputs of the two networks", "t", "output"))
(out / "close_networks.dot").write_text(network_dot({"original": A, "close": B}, [0]))
print(f"wrote {out}/close_trajectory.csv, .svg and close_networks.dot")
