"""Networks whose measurements stay close rather than identical.

The output error ``e = C x - C x~`` of the pair ``(A, A + Delta)`` is the
output of the block system ``blkdiag(A, A + Delta)`` observed through
``[C, -C]`` from ``[x0; x0]``. Its observability Gramian ``W`` gives the
integrated squared error as a quadratic form, and every system matrix sharing
a Gramian ``W`` is parameterised by a skew-symmetric matrix and two free
blocks in the eigenbasis of ``W``.
"""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from .dissimilar import DissimilarResult, flip_metric, masked_l1
from .errors import InfeasibleError, InvalidInputError
from .model import PRESENCE_THRESHOLD, format_float, sparsity_mask
from .numerics import lyapunov_residual, matrix_exponential_apply, minimize_l1_residual, \
    solve_lyapunov, svd_nullspace

NULLITY_TOL = 1e-9


@dataclass
class AugmentedSystem:
    Abar: np.ndarray
    Cbar: np.ndarray
    n: int

    def x0bar(self, x0):
        x0 = np.asarray(x0, dtype=float).ravel()
        if x0.size != self.n:
            raise InvalidInputError(f"x0 must have {self.n} entries")
        return np.concatenate([x0, x0])


def augment(sys, Delta):
    Delta = np.asarray(Delta, dtype=float)
    if Delta.shape != sys.A.shape:
        raise InvalidInputError(f"Delta shape {Delta.shape} does not match A {sys.A.shape}")
    n = sys.n
    Abar = np.zeros((2 * n, 2 * n))
    Abar[:n, :n] = sys.A
    Abar[n:, n:] = sys.A + Delta
    return AugmentedSystem(Abar, np.hstack([sys.C, -sys.C]), n)


@dataclass
class GramianDecomposition:
    Wbar: np.ndarray
    V: np.ndarray  # [Vo, Vobar], orthogonal
    Lambda: np.ndarray  # positive eigenvalues, descending
    l: int  # nullity of Wbar
    Abar: np.ndarray
    Cbar: np.ndarray
    n: int

    @property
    def Vo(self):
        return self.V[:, :self.V.shape[1] - self.l]

    @property
    def Vobar(self):
        return self.V[:, self.V.shape[1] - self.l:]

    @property
    def lambda_max(self):
        return float(self.Lambda[0]) if self.Lambda.size else 0.0

    def _block(self, rows, cols):
        return rows.T @ self.Abar @ cols

    @property
    def Ao(self):
        return self._block(self.Vo, self.Vo)

    @property
    def A12(self):
        """Upper-right block ``Vo^T Abar Vobar``; zero for an exact decomposition."""
        return self._block(self.Vo, self.Vobar)

    @property
    def A21(self):
        return self._block(self.Vobar, self.Vo)

    @property
    def Aobar(self):
        return self._block(self.Vobar, self.Vobar)

    @property
    def Co(self):
        return self.Cbar @ self.Vo

    @property
    def error_form(self):
        """``M`` with ``||e||^2 = x0^T M x0``: the sum of the four n x n blocks of W."""
        n = self.n
        W = self.Wbar
        return W[:n, :n] + W[:n, n:] + W[n:, :n] + W[n:, n:]


def gramian(aug, nullity_tol=NULLITY_TOL):
    """Gramian of the augmented system and its observable/unobservable split.

    Eigenvalues at or below ``nullity_tol * lambda_max`` are treated as zero.
    """
    W = solve_lyapunov(aug.Abar, aug.Cbar)
    evals, evecs = np.linalg.eigh(W)
    order = np.argsort(evals)[::-1]
    evals, evecs = evals[order], evecs[:, order]
    lmax = max(evals[0], 0.0)
    observable = evals > nullity_tol * lmax if lmax > 0 else np.zeros(evals.size, dtype=bool)
    return GramianDecomposition(W, evecs, evals[observable], int((~observable).sum()),
                                aug.Abar, aug.Cbar, aug.n)


@dataclass
class EpsBound:
    certified: bool
    margin: float
    lambda_max: float
    bound: float


def check_eps_bound(gd, x0, eps):
    """Sufficient test ``lambda_max(W) < eps^2 / (2 ||x0||^2)`` for ``||e|| < eps``."""
    x0 = np.asarray(x0, dtype=float)
    nx = float(x0 @ x0)
    if eps <= 0 or nx == 0:
        raise InvalidInputError("eps must be positive and x0 nonzero")
    bound = eps ** 2 / (2.0 * nx)
    return EpsBound(gd.lambda_max < bound, bound - gd.lambda_max, gd.lambda_max, bound)


def error_norm(gd, x0):
    """Integrated output error ``sqrt(xbar0^T W xbar0)`` for ``xbar0 = [x0; x0]``."""
    x0 = np.asarray(x0, dtype=float).ravel()
    xb = np.concatenate([x0, x0])
    return float(np.sqrt(max(xb @ gd.Wbar @ xb, 0.0)))


def error_norm_bounds(gd):
    """Smallest and largest error norm over unit ``x0``, with the minimisers."""
    evals, evecs = np.linalg.eigh(gd.error_form)
    lo, hi = np.sqrt(np.clip(evals[[0, -1]], 0.0, None))
    return float(lo), float(hi), evecs[:, 0], evecs[:, -1]


# ---------------------------------------------------------------------------
# fixed-Gramian l1 program

def fixed_gramian_constraint(sys, Wbar):
    """Linear system ``L vec(B) = r`` for ``B = A + Delta`` given a fixed Gramian.

    ``vec`` is row-major. Holding ``W`` fixed turns the augmented Lyapunov
    equation into an affine condition on ``B``.
    """
    n = sys.n
    W = np.asarray(Wbar, dtype=float)
    if W.shape != (2 * n, 2 * n):
        raise InvalidInputError(f"Wbar must be {2 * n}x{2 * n}")
    Cbar = np.hstack([sys.C, -sys.C])
    A0 = np.zeros((2 * n, 2 * n))
    A0[:n, :n] = sys.A
    r = (-Cbar.T @ Cbar - W @ A0 - A0.T @ W).ravel()
    L = np.zeros((4 * n * n, n * n))
    for idx in range(n * n):
        E = np.zeros((2 * n, 2 * n))
        i, j = divmod(idx, n)
        E[n + i, n + j] = 1.0
        L[:, idx] = (W @ E + E.T @ W).ravel()
    return L, r


def fixed_gramian_residual(sys, Wbar, B):
    L, r = fixed_gramian_constraint(sys, Wbar)
    return float(np.linalg.norm(L @ np.asarray(B, dtype=float).ravel() - r))


def solve_fixed_gramian_l1(sys, Wbar, Z=None, presence_threshold=PRESENCE_THRESHOLD,
                           feas_tol=1e-7):
    """Sparsest ``A + Delta`` (masked l1) whose augmented Gramian is ``Wbar``.

    The affine solution set is parameterised as ``B0 + N w`` and the masked
    entries are fitted with the same l1 routine as the identical-measurement
    case. Raises :class:`InfeasibleError` when no ``Delta`` is compatible with
    ``Wbar``.
    """
    n = sys.n
    Z = sparsity_mask(sys.A, presence_threshold) if Z is None else np.asarray(Z, dtype=float)
    L, r = fixed_gramian_constraint(sys, Wbar)
    b0 = np.linalg.lstsq(L, r, rcond=None)[0]
    resid = np.linalg.norm(L @ b0 - r)
    if resid > feas_tol * (1.0 + np.linalg.norm(r)):
        raise InfeasibleError(f"Wbar is not a feasible Gramian (affine residual {resid:.3e})")
    _, N = svd_nullspace(L)
    rows = Z.ravel() > 0
    fit = minimize_l1_residual(N[rows], b0[rows])
    B = (b0 + N @ fit.v).reshape(n, n)
    Delta = B - sys.A
    res = DissimilarResult(Delta, B, masked_l1(sys.A, Delta, Z), fit.v,
                           flips=flip_metric(sys.A, B, presence_threshold))
    res.extra["lyapunov_residual"] = fixed_gramian_residual(sys, Wbar, B)
    res.extra["affine_dimension"] = N.shape[1]
    return res


# ---------------------------------------------------------------------------
# family of system matrices sharing one Gramian

@dataclass
class FamilyParameters:
    S: np.ndarray  # skew-symmetric, (2n-l) x (2n-l)
    A21: np.ndarray  # l x (2n-l)
    Aobar: np.ndarray  # l x l

    def __post_init__(self):
        S = np.atleast_2d(np.asarray(self.S, dtype=float))
        if S.shape[0] != S.shape[1]:
            raise InvalidInputError("S must be square")
        if np.linalg.norm(S + S.T) > 1e-12 * (1.0 + np.linalg.norm(S)):
            raise InvalidInputError("S must be skew-symmetric")
        self.S = S


def family_parameters_for(gd, Abar):
    """Parameters ``(S, A21, Aobar)`` that reproduce ``Abar`` in the basis of ``gd``.

    ``S`` is projected onto the skew-symmetric matrices; the discarded
    symmetric part measures how far ``Abar`` is from sharing the Gramian.
    """
    Vo, Vob = gd.Vo, gd.Vobar
    lam = gd.Lambda
    Ao = Vo.T @ Abar @ Vo
    Co = gd.Co
    S = (np.sqrt(lam)[:, None] * Ao / np.sqrt(lam)[None, :]
         + 0.5 * (Co.T @ Co) / np.sqrt(np.outer(lam, lam)))
    S = 0.5 * (S - S.T)
    return FamilyParameters(S, Vob.T @ Abar @ Vo, Vob.T @ Abar @ Vob)


def extract_family_parameters(gd):
    return family_parameters_for(gd, gd.Abar)


def random_family_parameters(gd, rng, scale=1.0, free_blocks=True):
    m = gd.Lambda.size
    X = rng.standard_normal((m, m)) * scale
    l = gd.l
    A21 = rng.standard_normal((l, m)) * scale if free_blocks else np.zeros((l, m))
    Aob = rng.standard_normal((l, l)) * scale if free_blocks else np.zeros((l, l))
    return FamilyParameters(0.5 * (X - X.T), A21, Aob)


def family_terms(gd, fp, lambda_scale=1.0):
    """The three summands of the family formula: fixed, skew and free parts.

    ``lambda_scale`` multiplies every retained eigenvalue of ``W``.
    """
    lam = gd.Lambda * lambda_scale
    Vo, Vob = gd.Vo, gd.Vobar
    Co = gd.Co
    if fp.S.shape[0] != lam.size or fp.Aobar.shape != (gd.l, gd.l) \
            or fp.A21.shape != (gd.l, lam.size):
        raise InvalidInputError("family parameter shapes do not match the decomposition")
    fixed = -0.5 * Vo @ ((Co.T @ Co) / lam[:, None]) @ Vo.T
    sq = np.sqrt(lam)
    skew = Vo @ (fp.S * sq[None, :] / sq[:, None]) @ Vo.T
    free = Vob @ fp.A21 @ Vo.T + Vob @ fp.Aobar @ Vob.T
    return fixed, skew, free


def family_reconstruct(gd, fp, lambda_scale=1.0):
    """System matrix sharing the Gramian of ``gd`` for the given parameters."""
    fixed, skew, free = family_terms(gd, fp, lambda_scale)
    return fixed + skew + free


def fixed_term_ratio(gd, fp, lambda_scale=1.0):
    fixed, skew, free = family_terms(gd, fp, lambda_scale)
    return float(np.linalg.norm(fixed) / np.linalg.norm(fixed + skew + free))


@dataclass
class FamilyProjection:
    Abar: np.ndarray
    block_residual: float
    A: np.ndarray
    Aperturbed: np.ndarray

    def to_dict(self, fp=None):
        d = {"block_residual": self.block_residual, "A": self.A.tolist(),
             "Aperturbed": self.Aperturbed.tolist()}
        if fp is not None:
            d = {"S": fp.S.tolist(), "A21": fp.A21.tolist(), "Aobar": fp.Aobar.tolist(), **d}
        return d


def family_project_blockdiag(gd, fp):
    """Reconstruct and split into diagonal blocks; off-diagonal mass is reported."""
    Abar = family_reconstruct(gd, fp)
    n = gd.n
    off = np.sqrt(np.linalg.norm(Abar[:n, n:]) ** 2 + np.linalg.norm(Abar[n:, :n]) ** 2)
    return FamilyProjection(Abar, float(off), Abar[:n, :n].copy(), Abar[n:, n:].copy())


def family_lyapunov_residual(gd, Abar):
    return lyapunov_residual(gd.Wbar, Abar, gd.Cbar)


# ---------------------------------------------------------------------------
# simulation

@dataclass
class Trajectory:
    t: np.ndarray
    y: np.ndarray  # samples x p
    ytilde: np.ndarray
    e: np.ndarray

    @property
    def error_l2(self):
        """Trapezoidal estimate of ``sqrt(int ||e(t)||^2 dt)``."""
        return float(np.sqrt(trapezoid(np.sum(self.e ** 2, axis=1), self.t)))

    def to_csv(self):
        p = self.y.shape[1]
        header = ["t"] + [f"y{k}" for k in range(p)] + [f"ytilde{k}" for k in range(p)] \
            + [f"e{k}" for k in range(p)]
        lines = [",".join(header)]
        for i, t in enumerate(self.t):
            vals = [t, *self.y[i], *self.ytilde[i], *self.e[i]]
            lines.append(",".join(format_float(v) for v in vals))
        return "\n".join(lines) + "\n"


def simulate_pair(sys, Delta, x0, horizon, dt):
    """Outputs of ``A`` and ``A + Delta`` from the same ``x0`` on a uniform grid."""
    if horizon <= 0 or dt <= 0:
        raise InvalidInputError("horizon and dt must be positive")
    x0 = np.asarray(x0, dtype=float).ravel()
    if x0.size != sys.n:
        raise InvalidInputError(f"x0 must have {sys.n} entries")
    B = sys.A + np.asarray(Delta, dtype=float)
    steps = int(round(horizon / dt))
    t = np.linspace(0.0, steps * dt, steps + 1)
    y = np.array([sys.C @ matrix_exponential_apply(sys.A, x0, ti) for ti in t])
    yt = np.array([sys.C @ matrix_exponential_apply(B, x0, ti) for ti in t])
    return Trajectory(t, y, yt, y - yt)
