"""Many networks, one set of measurements.

A four-node network is observed through node 1 only. Every network
``A + Delta`` with ``O Delta = 0`` produces exactly the same output, and this
script counts how many distinct topologies that allows, sorts the rows of
``A`` by how much freedom they have, and finds the consistent network that
differs most from the original.

Run:  python demos/01_indistinguishable_networks.py
"""

import numpy as np

from netid import NetworkSystem, analyze, classify_edges, count_structural_networks, \
    dissimilar_network, verify_indistinguishable
from netid.observability import enumerate_all_variants

A = np.array([[1.0, 1, 1, 0],
              [0, 1, 1, 0],
              [1, 0, 0, 0],
              [0, 1, 1, 1]])
sys = NetworkSystem.from_sensors(A, [0])

an = analyze(sys)
print(f"observability rank {an.rank}, nullity {an.nullity}")
print("nullspace basis (columns):")
print(np.round(an.Phi, 4))

# Rows whose incoming edges are pinned, free, or linked to other rows.
for i, label in enumerate(classify_edges(an).labels):
    print(f"  row {i + 1}: {label}")

# Each column of A can take a handful of presence patterns independently.
for vs in enumerate_all_variants(an, A):
    print(f"  column {vs.column + 1}: {vs.count} patterns {vs.patterns}")
print("distinct topologies:", count_structural_networks(an, A))

# The member of the set that removes the most original edge weight.
res = dissimilar_network(sys, an)
print("maximally dissimilar network:")
print(np.round(res.network, 6))
print(f"masked l1 = {res.objective:.3f}, least-squares certificate holds: "
      f"{res.certificate.holds}")
print(f"{len(res.flipped_edges)} edges flipped ({res.flip_percentage:.2f}% of n^2)")

# Numerically confirm the outputs really coincide.
rep = verify_indistinguishable(sys, res.Delta)
print(f"max |C A^k - C (A+Delta)^k| = {rep.algebraic_residual:.1e}, "
      f"max trajectory gap = {rep.dynamic_residual:.1e}")
