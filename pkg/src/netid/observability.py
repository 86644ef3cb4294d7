"""Observability matrix, its nullspace, and what that nullspace permits.

Two networks ``A`` and ``A + Delta`` produce identical outputs from every
initial state exactly when ``O @ Delta = 0``. Everything here is built on an
orthonormal basis ``Phi`` of that nullspace.
"""

from dataclasses import dataclass, field
from math import prod

import numpy as np

from .errors import EnumerationTooLargeError, InvalidInputError
from .model import PRESENCE_THRESHOLD
from .numerics import default_rank_tol, expm, svd_nullspace

ESSENTIAL = "essential"
DECOUPLED = "decoupled"
COUPLED = "coupled"

ENUMERATION_GUARD = 16


def observability_matrix(A, C, normalize_blocks=True):
    """Stack ``C, CA, ..., CA^(n-1)``.

    With ``normalize_blocks`` each block is divided by its Frobenius norm.
    Positive row scaling leaves the nullspace unchanged but keeps high powers
    of ``A`` from swamping the rank decision.
    """
    A = np.asarray(A, dtype=float)
    C = np.asarray(C, dtype=float)
    n = A.shape[0]
    blocks = [C]
    for _ in range(n - 1):
        nxt = blocks[-1] @ A
        if normalize_blocks:
            nrm = np.linalg.norm(nxt)
            if nrm > 0:
                nxt = nxt / nrm
        blocks.append(nxt)
    if normalize_blocks:
        blocks[0] = C / np.linalg.norm(C)
    return np.vstack(blocks)


@dataclass
class ObservabilityAnalysis:
    O: np.ndarray
    rank: int
    Phi: np.ndarray
    rank_tol: float
    singular_values: np.ndarray = field(repr=False, default=None)

    @property
    def n(self):
        return self.O.shape[1]

    @property
    def nullity(self):
        return self.Phi.shape[1]


def analyze(sys, rank_tol=0.0, normalize_blocks=True):
    """Observability matrix, numerical rank and orthonormal nullspace basis."""
    O = observability_matrix(sys.A, sys.C, normalize_blocks)
    tol = rank_tol if rank_tol > 0 else default_rank_tol(O.shape)
    rank, Phi = svd_nullspace(O, tol)
    sv = np.linalg.svd(O, compute_uv=False)
    return ObservabilityAnalysis(O, rank, Phi, tol, sv)


def analysis_from_basis(O, Phi, rank_tol=0.0):
    """Wrap an externally supplied nullspace basis (e.g. a rotated one)."""
    Phi = np.asarray(Phi, dtype=float)
    return ObservabilityAnalysis(np.asarray(O), O.shape[1] - Phi.shape[1], Phi,
                                 rank_tol or default_rank_tol(O.shape))


@dataclass
class EdgeClassification:
    labels: list
    essential_residual: np.ndarray
    decoupled_residual: np.ndarray

    def rows(self, label):
        return [i for i, lab in enumerate(self.labels) if lab == label]


def classify_edges(an, tol=1e-9):
    """Label each row of ``A`` essential, decoupled or coupled.

    Row ``i`` is essential when ``Phi^T e_i = 0`` (no consistent network can
    touch any incoming edge of node ``i``), decoupled when ``e_i`` lies in the
    range of ``Phi``, and coupled otherwise.
    """
    n = an.n
    Phi = an.Phi
    ess = np.linalg.norm(Phi, axis=1) if Phi.size else np.zeros(n)
    proj = Phi @ Phi.T if Phi.size else np.zeros((n, n))
    dec = np.linalg.norm(proj - np.eye(n), axis=0)
    labels = []
    for i in range(n):
        if ess[i] <= tol:
            labels.append(ESSENTIAL)
        elif dec[i] <= tol:
            labels.append(DECOUPLED)
        else:
            labels.append(COUPLED)
    return EdgeClassification(labels, ess, dec)


@dataclass
class IndistinguishabilityReport:
    algebraic_residuals: np.ndarray  # ||C A^k - C (A+Delta)^k||_F, k = 0..n
    algebraic_scale: float
    dynamic_residual: float
    dynamic_scale: float
    tol: float

    @property
    def algebraic_residual(self):
        return float(self.algebraic_residuals.max())

    @property
    def algebraic_pass(self):
        return self.algebraic_residual <= self.tol * self.algebraic_scale

    @property
    def dynamic_pass(self):
        return self.dynamic_residual <= self.tol * self.dynamic_scale

    @property
    def passed(self):
        return self.algebraic_pass and self.dynamic_pass


def verify_indistinguishable(sys, Delta, trials=8, horizon=5.0, tol=1e-7, samples=21, rng=None):
    """Check ``C A^k = C (A+Delta)^k`` for k <= n and compare simulated outputs.

    Residuals are judged relative to the size of the quantities compared
    (``max(1, max_k ||C A^k||)`` and ``max(1, max_t ||y(t)||)``).
    """
    A, C = sys.A, sys.C
    Delta = np.asarray(Delta, dtype=float)
    if Delta.shape != A.shape:
        raise InvalidInputError(f"Delta shape {Delta.shape} does not match A {A.shape}")
    rng = np.random.default_rng(0) if rng is None else rng
    B = A + Delta
    res, norms = [], []
    P, Q = C.copy(), C.copy()
    for _ in range(sys.n + 1):
        res.append(np.linalg.norm(P - Q))
        norms.append(np.linalg.norm(P))
        P, Q = P @ A, Q @ B

    X0 = rng.standard_normal((sys.n, trials))
    X0 /= np.linalg.norm(X0, axis=0)
    times = np.linspace(0.0, horizon, samples)
    dyn, ymax = 0.0, 0.0
    for t in times:
        Y = C @ expm(A * t) @ X0
        Yt = C @ expm(B * t) @ X0
        dyn = max(dyn, float(np.linalg.norm(Y - Yt, axis=0).max()))
        ymax = max(ymax, float(np.linalg.norm(Y, axis=0).max()))
    return IndistinguishabilityReport(np.array(res), max(1.0, max(norms)),
                                      dyn, max(1.0, ymax), tol)


# ---------------------------------------------------------------------------
# enumeration of structurally distinct columns

@dataclass
class ColumnVariantSet:
    column: int
    patterns: list  # tuples of 0/1, one per row
    witnesses: list  # matching achievable columns a_j + Phi v

    @property
    def count(self):
        return len(self.patterns)


def enumerate_column_variants(an, A, j, presence_threshold=PRESENCE_THRESHOLD,
                              max_dim=ENUMERATION_GUARD, rng=None, draws=32):
    """All presence patterns reachable by column ``j`` of ``A + Phi V``.

    Candidate zero sets ``T`` are grown depth first. For each consistent ``T``
    a random point of the affine set ``{v : (a_j + Phi v)_T = 0}`` is drawn
    and its support recorded. Inconsistent sets prune all their supersets.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if n > max_dim:
        raise EnumerationTooLargeError(
            f"n={n} exceeds the enumeration guard {max_dim}; raise max_dim explicitly")
    rng = np.random.default_rng(0) if rng is None else rng
    a = A[:, j]
    Phi = an.Phi
    k = Phi.shape[1]
    scale = 1.0 + np.linalg.norm(a)
    ztol = 1e-9 * scale

    if k == 0:
        pattern = tuple(int(abs(x) > presence_threshold) for x in a)
        return ColumnVariantSet(j, [pattern], [a.copy()])

    found = {}
    seen_forced = set()

    def affine(T):
        if not T:
            return np.zeros(k), np.eye(k)
        PT = Phi[list(T)]
        vp = np.linalg.lstsq(PT, -a[list(T)], rcond=None)[0]
        if np.linalg.norm(PT @ vp + a[list(T)]) > ztol:
            return None
        _, N = svd_nullspace(PT)
        return vp, N

    def visit(T):
        sol = affine(T)
        if sol is None:
            return None
        vp, N = sol
        base = a + Phi @ vp
        slope = Phi @ N
        forced = frozenset(np.flatnonzero((np.abs(base) <= ztol) &
                                          (np.linalg.norm(slope, axis=1) <= 1e-9)).tolist())
        if forced not in seen_forced:
            seen_forced.add(forced)
            for _ in range(draws):
                col = base + slope @ rng.standard_normal(N.shape[1])
                free_ok = all(abs(col[i]) > presence_threshold for i in range(n) if i not in forced)
                if free_ok:
                    break
            col[list(forced)] = 0.0
            pattern = tuple(int(abs(x) > presence_threshold) for x in col)
            found.setdefault(pattern, col)
        return forced

    def dfs(T, start):
        forced = visit(T)
        if forced is None:
            return
        for i in range(start, n):
            if i not in forced:
                dfs(T + (i,), i + 1)

    dfs((), 0)
    patterns = sorted(found)
    return ColumnVariantSet(j, patterns, [found[p] for p in patterns])


def enumerate_all_variants(an, A, presence_threshold=PRESENCE_THRESHOLD,
                           max_dim=ENUMERATION_GUARD, rng=None):
    rng = np.random.default_rng(0) if rng is None else rng
    return [enumerate_column_variants(an, A, j, presence_threshold, max_dim, rng)
            for j in range(np.asarray(A).shape[1])]


def count_structural_networks(an, A, presence_threshold=PRESENCE_THRESHOLD,
                              max_dim=ENUMERATION_GUARD):
    """Number of distinct topologies among ``{A + Delta : O Delta = 0}``.

    Constraints act column by column, so the count is the product of the
    per-column variant counts.
    """
    if an.nullity == 0:
        return 1
    return prod(v.count for v in enumerate_all_variants(an, A, presence_threshold, max_dim))
