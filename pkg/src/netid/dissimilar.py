"""Maximally dissimilar network consistent with the measurements.

The network ``A + Delta`` with ``O Delta = 0`` that removes the most edge
weight from ``A`` minimises ``sum |Z * (A + Delta)|``. With ``Delta = Phi V``
the program separates into one small l1 fit per column of ``A``.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import SolverError
from .model import PRESENCE_THRESHOLD, sparsity_mask
from .numerics import minimize_l1_residual
from .observability import analyze

CERTIFICATE_TOL = 1e-8
L2_EIG_CUTOFF = 1e-12


@dataclass
class EquivalenceCertificate:
    holds: bool
    residual: float


@dataclass
class FlipReport:
    flipped: list  # (i, j, "+" | "-"), zero-based
    percentage: float


@dataclass
class DissimilarResult:
    Delta: np.ndarray
    network: np.ndarray
    objective: float
    V: np.ndarray
    flips: FlipReport = None
    certificate: EquivalenceCertificate = None
    l2_objective: float = None
    extra: dict = field(default_factory=dict)

    @property
    def flipped_edges(self):
        return self.flips.flipped

    @property
    def flip_percentage(self):
        return self.flips.percentage

    def to_dict(self):
        d = {
            "Delta": self.Delta.tolist(),
            "network": self.network.tolist(),
            "objective": self.objective,
            "flipped_edges": [[i, j, s] for i, j, s in self.flips.flipped] if self.flips else None,
            "flip_percentage": self.flips.percentage if self.flips else None,
        }
        if self.certificate is not None:
            d["certificate"] = {"l2_equals_l1": self.certificate.holds,
                                "certificate_residual": self.certificate.residual,
                                "l2_objective": self.l2_objective}
        d.update(self.extra)
        return d


def masked_l1(A, Delta, Z):
    return float(np.abs(Z * (A + Delta)).sum())


def solve_l1(sys, an, Z=None, presence_threshold=PRESENCE_THRESHOLD, tie_break=True):
    """Column-by-column l1 minimisation over the observability nullspace.

    Column ``j`` solves ``min || z_j * (a_j + Phi v_j) ||_1``; among optimal
    ``v_j`` the one with smallest Euclidean norm is kept.
    """
    A = sys.A
    Z = sparsity_mask(A, presence_threshold) if Z is None else np.asarray(Z, dtype=float)
    Phi = an.Phi
    n, k = Phi.shape
    V = np.zeros((k, n))
    if k:
        for j in range(n):
            rows = Z[:, j] > 0
            try:
                fit = minimize_l1_residual(Phi[rows], A[rows, j], tie_break=tie_break)
            except SolverError as exc:
                raise SolverError(f"column {j}: {exc}", column=j) from exc
            V[:, j] = fit.v
    Delta = Phi @ V
    network = A + Delta
    return DissimilarResult(Delta, network, masked_l1(A, Delta, Z), V,
                            flips=flip_metric(A, network, presence_threshold))


def solve_l2(sys, an, Z=None, presence_threshold=PRESENCE_THRESHOLD):
    """Least-squares relaxation: solve ``Phi^T (A + Z * (Phi V)) = 0`` for ``V``.

    Each column gives ``Phi^T diag(z_j) Phi v_j = -Phi^T a_j``; singular
    systems take the minimum-norm solution. Returns ``(V, Delta)``.

    ``Phi`` is orthonormal, so the eigenvalues of ``Phi^T diag(z_j) Phi`` lie
    in ``[0, 1]``; those below an absolute cutoff are treated as zero. A
    relative cutoff would invert round-off when a mask only touches rows where
    ``Phi`` is numerically zero.
    """
    A = sys.A
    Z = sparsity_mask(A, presence_threshold) if Z is None else np.asarray(Z, dtype=float)
    Phi = an.Phi
    n, k = Phi.shape
    V = np.zeros((k, n))
    for j in range(n if k else 0):
        M = Phi.T @ (Z[:, j:j + 1] * Phi)
        evals, evecs = np.linalg.eigh(0.5 * (M + M.T))
        keep = evals > L2_EIG_CUTOFF
        rhs = evecs[:, keep].T @ (-Phi.T @ A[:, j])
        V[:, j] = evecs[:, keep] @ (rhs / evals[keep])
    return V, Phi @ V


def l2_stationarity_residual(sys, an, Z, V):
    return float(np.linalg.norm(an.Phi.T @ (sys.A + Z * (an.Phi @ V))))


def _sign(X, threshold):
    return np.where(np.abs(X) <= threshold, 0.0, np.sign(X))


def check_equivalence(sys, an, Z, V, presence_threshold=PRESENCE_THRESHOLD, tol=CERTIFICATE_TOL):
    """Certificate that the least-squares solution also minimises the l1 program.

    The residual is ``|| Phi^T (Z * sgn(A + Z * (Phi V))) ||_F`` with entries
    of magnitude at or below ``presence_threshold`` given sign zero.
    """
    if an.nullity == 0:
        return EquivalenceCertificate(True, 0.0)
    R = sys.A + Z * (an.Phi @ V)
    residual = float(np.linalg.norm(an.Phi.T @ (Z * _sign(R, presence_threshold))))
    return EquivalenceCertificate(residual <= tol, residual)


def flip_metric(A, Anew, presence_threshold=PRESENCE_THRESHOLD):
    """Edges whose presence differs between two networks, and their share of n^2."""
    before = np.abs(np.asarray(A)) > presence_threshold
    after = np.abs(np.asarray(Anew)) > presence_threshold
    idx = np.argwhere(before != after)
    flipped = [(int(i), int(j), "+" if after[i, j] else "-") for i, j in idx]
    return FlipReport(flipped, 100.0 * len(flipped) / before.size)


def dissimilar_network(sys, an=None, presence_threshold=PRESENCE_THRESHOLD, rank_tol=0.0):
    """l1 optimum together with the least-squares solution and its certificate."""
    an = analyze(sys, rank_tol) if an is None else an
    Z = sparsity_mask(sys.A, presence_threshold)
    res = solve_l1(sys, an, Z, presence_threshold)
    V2, D2 = solve_l2(sys, an, Z, presence_threshold)
    res.certificate = check_equivalence(sys, an, Z, V2, presence_threshold)
    res.l2_objective = masked_l1(sys.A, D2, Z)
    res.extra["rank"] = an.rank
    res.extra["nullity"] = an.nullity
    return res
