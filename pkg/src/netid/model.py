"""Network systems, sparsity masks, random ensembles and file formats."""

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidInputError
from .numerics import as_matrix

PRESENCE_THRESHOLD = 1e-5


@dataclass(frozen=True)
class NetworkSystem:
    """Linear network ``x' = A x``, ``y = C x``.

    ``A[i, j]`` is the weight of the edge from node ``j`` into node ``i``.
    """

    A: np.ndarray
    C: np.ndarray

    def __post_init__(self):
        A = as_matrix(self.A, "A")
        C = as_matrix(self.C, "C")
        if A.shape[0] != A.shape[1]:
            raise InvalidInputError(f"A must be square, got {A.shape}")
        if C.shape[1] != A.shape[0]:
            raise InvalidInputError(f"C has {C.shape[1]} columns but A is {A.shape[0]}x{A.shape[0]}")
        if C.shape[0] > A.shape[0] or np.linalg.matrix_rank(C) != C.shape[0]:
            raise InvalidInputError("C must have full row rank p <= n")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "C", C)

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def p(self):
        return self.C.shape[0]

    @property
    def measured(self):
        """Indices of measured nodes when ``C`` is a selector, else ``None``."""
        idx = []
        for row in self.C:
            nz = np.flatnonzero(row)
            if nz.size != 1 or row[nz[0]] != 1.0:
                return None
            idx.append(int(nz[0]))
        return idx

    @classmethod
    def from_sensors(cls, A, measured):
        A = as_matrix(A, "A")
        return cls(A, sensor_matrix(A.shape[0], measured))


def sensor_matrix(n, measured):
    """Selector whose k-th row picks the k-th measured node (ascending)."""
    measured = [int(i) for i in measured]
    if len(set(measured)) != len(measured):
        raise InvalidInputError(f"duplicate sensor index in {measured}")
    if any(i < 0 or i >= n for i in measured):
        raise InvalidInputError(f"sensor index out of range [0, {n})")
    if not measured:
        raise InvalidInputError("at least one node must be measured")
    return np.eye(n)[sorted(measured)]


def sparsity_mask(A, presence_threshold=PRESENCE_THRESHOLD):
    """0/1 matrix marking entries with ``|A_ij| > presence_threshold``."""
    if presence_threshold < 0:
        raise InvalidInputError("presence threshold must be non-negative")
    return (np.abs(np.asarray(A, dtype=float)) > presence_threshold).astype(float)


# ---------------------------------------------------------------------------
# random ensembles

@dataclass(frozen=True)
class GraphEnsembleConfig:
    model: str = "er"  # "er" | "ws"
    n: int = 100
    p_edge: float = 1 / 6
    K: int = 3
    beta: float = 1 / 30
    seed: int = 0

    def __post_init__(self):
        if self.model not in ("er", "ws"):
            raise InvalidInputError(f"unknown ensemble model {self.model!r}")
        if self.n < 1:
            raise InvalidInputError("n must be positive")
        if not (0.0 <= self.p_edge <= 1.0 and 0.0 <= self.beta <= 1.0):
            raise InvalidInputError("probabilities must lie in [0, 1]")
        if self.model == "ws" and not (0 <= self.K < self.n):
            raise InvalidInputError("Watts-Strogatz needs 0 <= K < n")

    @property
    def name(self):
        if self.model == "er":
            return f"ER(n={self.n},p={self.p_edge:.4g})"
        return f"WS(n={self.n},K={self.K},beta={self.beta:.4g})"


def _rng(cfg, rng):
    return np.random.default_rng(cfg.seed) if rng is None else rng


def generate_er(cfg, rng=None):
    """Directed Erdos-Renyi weights; self loops occur with the same probability."""
    rng = _rng(cfg, rng)
    n = cfg.n
    present = rng.random((n, n)) < cfg.p_edge
    weights = rng.standard_normal((n, n))
    return np.where(present, weights, 0.0)


def ws_edge_list(cfg, rng=None):
    """Edges ``(source, target, weight, rewired)`` of a directed small-world graph.

    Node ``i`` starts with edges to its ``K`` clockwise successors. Each edge is
    then redirected with probability ``beta`` to a uniformly chosen node that is
    neither ``i`` nor already a target of ``i``, so out-degrees stay at ``K``.
    """
    rng = _rng(cfg, rng)
    n, K = cfg.n, cfg.K
    weights = rng.standard_normal((n, K))
    edges = []
    for i in range(n):
        targets = [(i + k) % n for k in range(1, K + 1)]
        flags = [False] * K
        for k in range(K):
            if rng.random() < cfg.beta:
                choices = [t for t in range(n) if t != i and t not in targets]
                if choices:
                    targets[k] = int(choices[rng.integers(len(choices))])
                    flags[k] = True
        edges.extend((i, targets[k], float(weights[i, k]), flags[k]) for k in range(K))
    return edges


def generate_ws(cfg, rng=None):
    A = np.zeros((cfg.n, cfg.n))
    for src, dst, w, _ in ws_edge_list(cfg, rng):
        A[dst, src] = w
    return A


def generate(cfg, rng=None):
    return generate_er(cfg, rng) if cfg.model == "er" else generate_ws(cfg, rng)


def random_sensors(n, count, rng):
    """Uniformly sampled sensor set of the given size, sorted."""
    if not 1 <= count <= n:
        raise InvalidInputError(f"sensor count must lie in [1, {n}]")
    return sorted(int(i) for i in rng.choice(n, size=count, replace=False))


# ---------------------------------------------------------------------------
# serialisation

def system_to_dict(sys):
    return {"n": sys.n, "p": sys.p, "A": sys.A.tolist(), "C": sys.C.tolist()}


def system_from_dict(d):
    try:
        A, C = d["A"], d["C"]
    except (KeyError, TypeError) as exc:
        raise InvalidInputError(f"system object needs keys 'A' and 'C' ({exc})") from None
    sys = NetworkSystem(A, C)
    if "n" in d and int(d["n"]) != sys.n:
        raise InvalidInputError(f"declared n={d['n']} but A is {sys.n}x{sys.n}")
    if "p" in d and int(d["p"]) != sys.p:
        raise InvalidInputError(f"declared p={d['p']} but C has {sys.p} rows")
    return sys


def load_json(path):
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        line = text.splitlines()[exc.lineno - 1] if exc.lineno - 1 < len(text.splitlines()) else ""
        raise InvalidInputError(
            f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}: {line.strip()!r}") from None


def load_system(path):
    return system_from_dict(load_json(path))


def save_system(sys, path):
    Path(path).write_text(json.dumps(system_to_dict(sys), indent=1) + "\n")


def format_float(x):
    return repr(float(x))


def matrix_to_csv(M, header=None):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if header is not None:
        writer.writerow(header)
    for row in np.atleast_2d(M):
        writer.writerow([format_float(x) for x in row])
    return buf.getvalue()


def read_matrix_csv(path):
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            try:
                rows.append([float(x) for x in row])
            except ValueError:
                raise InvalidInputError(f"{path}:{lineno}: non-numeric entry in {row}") from None
    if len({len(r) for r in rows}) > 1:
        raise InvalidInputError(f"{path}: ragged rows")
    return as_matrix(rows, str(path))
