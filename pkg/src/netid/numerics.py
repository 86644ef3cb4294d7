"""Dense real-matrix kernel.

Nullspaces by SVD, the Lyapunov equation by its Kronecker-sum vectorisation,
the matrix exponential by scaling and squaring, and a small deterministic
simplex solver used for every l1 program in the package.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import lu_factor, lu_solve
from scipy.optimize import nnls

from .errors import GramianUndefinedError, InvalidInputError, SolverError

EPS = np.finfo(float).eps


def as_matrix(M, name="matrix"):
    """Return ``M`` as a finite 2-D float array with positive dimensions."""
    M = np.array(M, dtype=float)
    if M.ndim == 1:
        M = M[None, :]
    if M.ndim != 2 or M.shape[0] == 0 or M.shape[1] == 0:
        raise InvalidInputError(f"{name} must be a non-empty 2-D array, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InvalidInputError(f"{name} contains NaN or Inf")
    return M


def default_rank_tol(shape):
    return max(shape) * EPS


def svd_nullspace(M, rank_tol=0.0):
    """Numerical rank and orthonormal nullspace basis of ``M``.

    Singular values at or below ``rank_tol * sigma_max`` count as zero.
    ``rank_tol=0`` selects ``max(rows, cols) * eps``.

    Returns ``(rank, basis)`` where ``basis`` has ``M.shape[1] - rank``
    orthonormal columns (possibly zero columns).
    """
    M = as_matrix(M)
    if rank_tol < 0:
        raise InvalidInputError("rank_tol must be non-negative")
    if rank_tol == 0:
        rank_tol = default_rank_tol(M.shape)
    _, s, vt = np.linalg.svd(M)
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > rank_tol * smax)) if smax > 0 else 0
    return rank, vt[rank:].T.copy()


# ---------------------------------------------------------------------------
# matrix exponential

# Higham (2005) backward-error thresholds for the 1-norm
_THETA = {3: 1.495585217958292e-2, 5: 2.539398330063230e-1,
          7: 9.504178996162932e-1, 9: 2.097847961257068e0,
          13: 5.371920351148152e0}

_PADE = {
    3: (120., 60., 12., 1.),
    5: (30240., 15120., 3360., 420., 30., 1.),
    7: (17297280., 8648640., 1995840., 277200., 25200., 1512., 56., 1.),
    9: (17643225600., 8821612800., 2075673600., 302702400., 30270240.,
        2162160., 110880., 3960., 90., 1.),
    13: (64764752532480000., 32382376266240000., 7771770303897600.,
         1187353796428800., 129060195264000., 10559470521600.,
         670442572800., 33522128640., 1323241920., 40840800., 960960.,
         16380., 182., 1.),
}


def _pade_uv(A, m):
    b = _PADE[m]
    ident = np.eye(A.shape[0])
    A2 = A @ A
    if m == 13:
        A4 = A2 @ A2
        A6 = A4 @ A2
        U = A @ (A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2)
                 + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * ident)
        V = (A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2)
             + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * ident)
        return U, V
    powers = [ident, A2]
    for _ in range((m - 1) // 2 - 1):
        powers.append(powers[-1] @ A2)
    U = A @ sum(b[2 * k + 1] * powers[k] for k in range(len(powers)))
    V = sum(b[2 * k] * powers[k] for k in range(len(powers)))
    return U, V


def expm(M):
    """Matrix exponential by scaling and squaring with a diagonal Pade approximant."""
    M = as_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise InvalidInputError("expm needs a square matrix")
    norm1 = np.linalg.norm(M, 1)
    for m in (3, 5, 7, 9):
        if norm1 <= _THETA[m]:
            U, V = _pade_uv(M, m)
            return np.linalg.solve(V - U, V + U)
    s = max(0, int(np.ceil(np.log2(norm1 / _THETA[13])))) if norm1 > 0 else 0
    U, V = _pade_uv(M / 2.0 ** s, 13)
    R = np.linalg.solve(V - U, V + U)
    for _ in range(s):
        R = R @ R
    return R


def matrix_exponential_apply(M, x, t):
    """Return ``expm(M t) @ x``."""
    M = as_matrix(M)
    x = np.asarray(x, dtype=float)
    if t < 0:
        raise InvalidInputError("t must be non-negative")
    if M.shape[0] != M.shape[1] or x.shape[0] != M.shape[0]:
        raise InvalidInputError(f"dimension mismatch: M {M.shape}, x {x.shape}")
    return expm(M * t) @ x


# ---------------------------------------------------------------------------
# Lyapunov equation

def solve_lyapunov(Abar, Cbar):
    """Observability Gramian ``W`` with ``W Abar + Abar^T W = -Cbar^T Cbar``.

    Solved through the Kronecker-sum form. When some pair of eigenvalues sums
    to zero the system is singular; a consistent system then returns the
    minimum Frobenius-norm solution, an inconsistent one raises
    :class:`GramianUndefinedError`.
    """
    Abar = as_matrix(Abar, "Abar")
    Cbar = as_matrix(Cbar, "Cbar")
    m = Abar.shape[0]
    if Abar.shape[1] != m or Cbar.shape[1] != m:
        raise InvalidInputError(f"shape mismatch: Abar {Abar.shape}, Cbar {Cbar.shape}")
    Q = Cbar.T @ Cbar
    ident = np.eye(m)
    # vec(W A) = (A^T kron I) vec(W),  vec(A^T W) = (I kron A^T) vec(W)
    K = np.kron(Abar.T, ident) + np.kron(ident, Abar.T)
    rhs = -Q.reshape(-1, order="F")

    lam = np.linalg.eigvals(Abar)
    sums = lam[:, None] + lam[None, :]
    scale = 1.0 + np.max(np.abs(lam))
    near = np.abs(sums) <= 1e-8 * scale
    if not near.any():
        w = np.linalg.solve(K, rhs)
    else:
        w = np.linalg.lstsq(K, rhs, rcond=None)[0]
        resid = np.linalg.norm(K @ w - rhs)
        if resid > 1e-8 * (1.0 + np.linalg.norm(rhs)):
            idx = np.argwhere(near)
            pairs = [(complex(lam[i]), complex(lam[j])) for i, j in idx if i <= j]
            raise GramianUndefinedError(
                "Lyapunov equation is singular and inconsistent; eigenvalue "
                f"pairs summing to zero: {pairs}", pairs)
    W = w.reshape(m, m, order="F")
    return 0.5 * (W + W.T)


def lyapunov_residual(W, Abar, Cbar):
    return np.linalg.norm(W @ Abar + Abar.T @ W + Cbar.T @ Cbar)


# ---------------------------------------------------------------------------
# linear programming

@dataclass(frozen=True)
class LpProblem:
    """``min cost @ x`` subject to ``lower <= matrix @ x <= upper``, ``x`` free.

    Infinite bounds are allowed; ``lower == upper`` encodes an equality.
    """

    cost: np.ndarray
    matrix: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        cost = np.asarray(self.cost, dtype=float).ravel()
        matrix = np.asarray(self.matrix, dtype=float)
        if matrix.ndim != 2:
            matrix = matrix.reshape(-1, cost.size)
        lower = np.asarray(self.lower, dtype=float).ravel()
        upper = np.asarray(self.upper, dtype=float).ravel()
        if matrix.shape[1] != cost.size:
            raise InvalidInputError("cost length must equal the variable count")
        if lower.size != matrix.shape[0] or upper.size != matrix.shape[0]:
            raise InvalidInputError("bound vectors must have one entry per constraint row")
        if np.any(lower > upper):
            raise InvalidInputError("lower bounds exceed upper bounds")
        if not (np.all(np.isfinite(cost)) and np.all(np.isfinite(matrix))):
            raise InvalidInputError("cost and matrix must be finite")
        object.__setattr__(self, "cost", cost)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def n_vars(self):
        return self.cost.size


@dataclass
class LpSolution:
    status: str  # "optimal" | "unbounded" | "infeasible"
    objective: float
    primal: Optional[np.ndarray] = None
    dual: Optional[np.ndarray] = None
    iterations: int = 0


@dataclass
class _SimplexResult:
    status: str
    x: Optional[np.ndarray]
    y: Optional[np.ndarray]
    basis: list = field(default_factory=list)
    rows: Optional[np.ndarray] = None
    iterations: int = 0


def _revised_simplex(A, b, c, basis, tol=1e-9, max_iter=None):
    """Phase-two revised simplex with Bland's rule on ``A x = b, x >= 0``.

    ``basis`` must be primal feasible.
    """
    m, N = A.shape
    basis = list(basis)
    if max_iter is None:
        max_iter = 50 * (m + N) + 100
    ctol = tol * (1.0 + np.max(np.abs(c), initial=0.0))
    for it in range(max_iter):
        if m == 0:
            if np.any(c < -ctol):
                return _SimplexResult("unbounded", None, None, basis, iterations=it)
            return _SimplexResult("optimal", np.zeros(N), np.zeros(0), basis, iterations=it)
        lu = lu_factor(A[:, basis])
        xB = lu_solve(lu, b)
        y = lu_solve(lu, c[basis], trans=1)
        d = c - A.T @ y
        d[basis] = 0.0
        entering = np.flatnonzero(d < -ctol)
        if entering.size == 0:
            x = np.zeros(N)
            x[basis] = np.maximum(xB, 0.0)
            return _SimplexResult("optimal", x, y, basis, iterations=it)
        j = int(entering[0])
        u = lu_solve(lu, A[:, j])
        pos = np.flatnonzero(u > tol)
        if pos.size == 0:
            return _SimplexResult("unbounded", None, None, basis, iterations=it)
        ratios = np.maximum(xB[pos], 0.0) / u[pos]
        rmin = ratios.min()
        tied = pos[ratios <= rmin + tol * (1.0 + rmin)]
        leave = min(tied, key=lambda r: basis[r])
        basis[leave] = j
    raise SolverError(f"simplex did not converge in {max_iter} iterations")


def _two_phase(A, b, c, tol=1e-9):
    """Solve ``min c x, A x = b, x >= 0``; returns duals for the original rows."""
    A = np.array(A, dtype=float)
    b = np.array(b, dtype=float)
    m, N = A.shape
    sign = np.where(b < 0, -1.0, 1.0)
    A = A * sign[:, None]
    b = b * sign
    # phase one: artificials in every row
    A1 = np.hstack([A, np.eye(m)])
    c1 = np.concatenate([np.zeros(N), np.ones(m)])
    res = _revised_simplex(A1, b, c1, list(range(N, N + m)), tol)
    it = res.iterations
    if res.status != "optimal":
        raise SolverError("phase one failed")
    if c1 @ res.x > tol * (1.0 + np.abs(b).sum()):
        return _SimplexResult("infeasible", None, None, iterations=it)
    basis = res.basis
    keep = np.ones(m, dtype=bool)
    lu = lu_factor(A1[:, basis])
    for r in range(m):
        if basis[r] < N:
            continue
        e = np.zeros(m)
        e[r] = 1.0
        row = lu_solve(lu, e, trans=1) @ A  # row r of B^-1 A
        cand = [j for j in np.flatnonzero(np.abs(row) > 1e-9) if j not in basis]
        if cand:
            basis[r] = int(cand[0])
            lu = lu_factor(A1[:, basis])
        else:
            keep[r] = False
    rows = np.flatnonzero(keep)
    basis2 = [basis[r] for r in rows]
    res2 = _revised_simplex(A[rows], b[rows], c, basis2, tol)
    res2.iterations += it
    if res2.status == "optimal":
        y = np.zeros(m)
        y[rows] = res2.y
        res2.y = y * sign
    return res2


def solve_lp(problem: LpProblem, tol=1e-9) -> LpSolution:
    """Solve an :class:`LpProblem` with a dense two-phase simplex (Bland's rule).

    The result is deterministic for a fixed input. ``dual`` holds one
    multiplier per constraint row, positive on active lower bounds and
    negative on active upper bounds, so that ``cost = matrix.T @ dual``.
    """
    M, c = problem.matrix, problem.cost
    m, n = M.shape
    rows, rhs, slack_sign, owner = [], [], [], []
    for i in range(m):
        lo, up = problem.lower[i], problem.upper[i]
        if np.isfinite(lo) and lo == up:
            rows.append(M[i]); rhs.append(lo); slack_sign.append(0.0); owner.append(i)
            continue
        if np.isfinite(up):
            rows.append(M[i]); rhs.append(up); slack_sign.append(1.0); owner.append(i)
        if np.isfinite(lo):
            rows.append(M[i]); rhs.append(lo); slack_sign.append(-1.0); owner.append(i)
    k = len(rows)
    R = np.array(rows).reshape(k, n)
    slack_cols = [r for r in range(k) if slack_sign[r] != 0.0]
    S = np.zeros((k, len(slack_cols)))
    for col, r in enumerate(slack_cols):
        S[r, col] = slack_sign[r]
    A_std = np.hstack([R, -R, S])
    c_std = np.concatenate([c, -c, np.zeros(len(slack_cols))])
    res = _two_phase(A_std, np.array(rhs, dtype=float), c_std, tol)
    if res.status == "infeasible":
        return LpSolution("infeasible", float("inf"), iterations=res.iterations)
    if res.status == "unbounded":
        return LpSolution("unbounded", float("-inf"), iterations=res.iterations)
    x = res.x[:n] - res.x[n:2 * n]
    dual = np.zeros(m)
    np.add.at(dual, owner, res.y)
    return LpSolution("optimal", float(c @ x), x, dual, res.iterations)


@dataclass
class L1Fit:
    v: np.ndarray
    objective: float
    dual: np.ndarray
    tie_broken: bool


def _least_distance(H, h):
    """Minimum-norm ``w`` with ``H w >= h`` (Lawson-Hanson LDP via NNLS)."""
    k = H.shape[1]
    if H.shape[0] == 0:
        return np.zeros(k)
    E = np.vstack([H.T, h[None, :]])
    f = np.zeros(k + 1)
    f[-1] = 1.0
    u, _ = nnls(E, f, maxiter=50 * E.shape[1] + 100)
    r = E @ u - f
    if abs(r[-1]) < 1e-14:
        return None
    return -r[:k] / r[-1]


def minimize_l1_residual(G, b, tie_break=True, tol=1e-9) -> L1Fit:
    """Minimise ``||b + G v||_1`` over ``v``.

    The epigraph LP is written as ``G v - p + q = -b`` with ``p, q >= 0`` so
    that a feasible starting basis is available without a phase one. Among
    several minimisers the one of least Euclidean norm is returned when
    ``tie_break`` is set: the dual certificate pins down the optimal face and
    the smallest point on it comes from a least-distance program.
    """
    G = np.asarray(G, dtype=float)
    b = np.asarray(b, dtype=float).ravel()
    m = b.size
    k = G.shape[1] if G.ndim == 2 else 0
    G = G.reshape(m, k)
    if m == 0:
        return L1Fit(np.zeros(k), 0.0, np.zeros(0), True)
    if k == 0:
        return L1Fit(np.zeros(0), float(np.abs(b).sum()), -np.sign(b), True)
    ident = np.eye(m)
    A = np.hstack([G, -G, -ident, ident])
    c = np.concatenate([np.zeros(2 * k), np.ones(2 * m)])
    rhs = -b
    sign = np.where(rhs < 0, -1.0, 1.0)
    # after flipping negative rows, p_i or q_i carries a +1 in row i
    basis = [2 * k + i if sign[i] < 0 else 2 * k + m + i for i in range(m)]
    res = _revised_simplex(A * sign[:, None], rhs * sign, c, basis, tol)
    if res.status != "optimal":
        raise SolverError(f"l1 subproblem reported {res.status}")
    y = res.y * sign
    v_lp = res.x[:k] - res.x[k:2 * k]
    obj = float(np.abs(b + G @ v_lp).sum())
    if not tie_break:
        return L1Fit(v_lp, obj, y, False)

    # optimal face: r_i = 0 where |y_i| < 1, sign(r_i) = -sign(y_i) otherwise
    eq = np.abs(y) < 1.0 - 1e-7
    ineq = ~eq
    if eq.any():
        GE = G[eq]
        v0 = np.linalg.lstsq(GE, -b[eq], rcond=None)[0]
        _, N = svd_nullspace(GE)
    else:
        v0 = np.zeros(k)
        N = np.eye(k)
    s = -np.sign(y[ineq])
    H = s[:, None] * (G[ineq] @ N)
    h = -s * (b[ineq] + G[ineq] @ v0)
    w = _least_distance(H, h) if N.shape[1] else np.zeros(0)
    if w is not None:
        v = v0 + N @ w
        obj_tb = float(np.abs(b + G @ v).sum())
        if obj_tb <= obj + 1e-9 * (1.0 + obj) and np.linalg.norm(v) <= np.linalg.norm(v_lp) + 1e-12:
            return L1Fit(v, obj_tb, y, True)
    return L1Fit(v_lp, obj, y, False)
