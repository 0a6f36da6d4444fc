"""Trace method on regular graphs: spectra, closed walks, non-backtracking
(irreducible) closed walks and Monte-Carlo averages over random regular graphs.

Irreducible loops of length l are counted as Tr(B^l) with B the
non-backtracking matrix on directed edges: closed walks with a base point
and a direction that never reverse along an edge, the closing step included.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import kernels

INT64_SAFE = 2 ** 62


class RejectionBudgetExceeded(RuntimeError):
    pass


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on vertices 0..n-1; ``edges`` sorted with u < v."""

    n: int
    edges: Tuple[Tuple[int, int], ...]

    def __post_init__(self):
        seen = set()
        for u, v in self.edges:
            if u == v:
                raise GraphError(f"self-loop at vertex {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise GraphError(f"edge ({u}, {v}) outside 0..{self.n - 1}")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise GraphError(f"multi-edge {key}")
            seen.add(key)
        object.__setattr__(self, "edges", tuple(sorted(seen)))

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def adjacency(self) -> np.ndarray:
        A = np.zeros((self.n, self.n), dtype=np.int64)
        for u, v in self.edges:
            A[u, v] = A[v, u] = 1
        return A

    @property
    def degrees(self) -> np.ndarray:
        return self.adjacency.sum(axis=1)

    def csr(self):
        """(indptr, indices) with sorted neighbor lists."""
        nbrs: List[List[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            nbrs[u].append(v)
            nbrs[v].append(u)
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        indptr[1:] = np.cumsum([len(x) for x in nbrs])
        indices = np.array([w for x in nbrs for w in sorted(x)], dtype=np.int64)
        return indptr, indices

    def neighbors(self) -> List[List[int]]:
        indptr, indices = self.csr()
        return [indices[indptr[v]:indptr[v + 1]].tolist() for v in range(self.n)]

    def to_edgelist(self) -> str:
        d = self.degrees
        head = f"# n={self.n} m={self.m}"
        if self.n and np.all(d == d[0]):
            head += f" d={int(d[0])}"
        return head + "\n" + "".join(f"{u} {v}\n" for u, v in self.edges)

    @classmethod
    def from_edgelist(cls, text: str, n: Optional[int] = None) -> "Graph":
        edges = []
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                for tok in line[1:].split():
                    if tok.startswith("n=") and n is None:
                        n = int(tok[2:])
                continue
            u, v = (int(t) for t in line.split()[:2])
            edges.append((u, v))
        if n is None:
            n = 1 + max((max(e) for e in edges), default=-1)
        return cls(n, tuple(edges))


@dataclass(frozen=True)
class RegularGraph(Graph):
    d: int = 0

    def __post_init__(self):
        super().__post_init__()
        deg = self.degrees
        if self.n and not np.all(deg == self.d):
            bad = int(np.argmax(deg != self.d))
            raise GraphError(f"vertex {bad} has degree {int(deg[bad])}, expected {self.d}")


def random_regular(n: int, d: int, seed=0, max_tries: int = 10000) -> RegularGraph:
    """Pairing model: match the n*d half-edges uniformly, reject loops and multi-edges."""
    if n * d % 2:
        raise GraphError("n * d must be even")
    if not 0 <= d < n:
        raise GraphError("need 0 <= d < n")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    stubs = np.repeat(np.arange(n), d)
    for _ in range(max_tries):
        pairs = rng.permutation(stubs).reshape(-1, 2)
        if np.any(pairs[:, 0] == pairs[:, 1]):
            continue
        lo = np.minimum(pairs[:, 0], pairs[:, 1])
        hi = np.maximum(pairs[:, 0], pairs[:, 1])
        key = lo * n + hi
        if len(np.unique(key)) != len(key):
            continue
        return RegularGraph(n, tuple(zip(lo.tolist(), hi.tolist())), d)
    raise RejectionBudgetExceeded(f"no simple graph after {max_tries} pairings (n={n}, d={d})")


def random_graph(n: int, p: float, seed=0) -> Graph:
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    iu = np.triu_indices(n, 1)
    keep = rng.random(len(iu[0])) < p
    return Graph(n, tuple(zip(iu[0][keep].tolist(), iu[1][keep].tolist())))


# -- spectra ------------------------------------------------------------------

@dataclass(frozen=True)
class SpectrumReport:
    eigenvalues: np.ndarray
    lambda_plus: float

    def to_json_dict(self):
        return {"eigenvalues": [float(x) for x in self.eigenvalues], "lambda_plus": float(self.lambda_plus)}


def spectrum(G: Graph) -> SpectrumReport:
    ev = np.sort(np.linalg.eigvalsh(G.adjacency.astype(float)))[::-1]
    lp = max(ev[1], -ev[-1]) if len(ev) > 1 else 0.0
    return SpectrumReport(ev, float(lp))


def is_connected(G: Graph) -> bool:
    if G.n == 0:
        return True
    nb = G.neighbors()
    seen = {0}
    stack = [0]
    while stack:
        v = stack.pop()
        for w in nb[v]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == G.n


def is_bipartite(G: Graph) -> bool:
    """Two-colouring by breadth-first search."""
    nb = G.neighbors()
    colour = [-1] * G.n
    for s in range(G.n):
        if colour[s] >= 0:
            continue
        colour[s] = 0
        queue = [s]
        while queue:
            v = queue.pop()
            for w in nb[v]:
                if colour[w] < 0:
                    colour[w] = 1 - colour[v]
                    queue.append(w)
                elif colour[w] == colour[v]:
                    return False
    return True


# -- walk counts ----------------------------------------------------------------

def closed_walk_counts(G: Graph, lmax: int) -> List[int]:
    """Tr(A^l) for l = 0..lmax, exact (falls back to Python integers on overflow risk)."""
    dmax = int(G.degrees.max()) if G.n else 0
    A = G.adjacency
    if G.n * max(dmax, 1) ** lmax >= INT64_SAFE:
        A = A.astype(object)
    out = [G.n]
    P = np.eye(G.n, dtype=A.dtype)
    for _ in range(lmax):
        P = P @ A
        out.append(int(np.trace(P)))
    return out


def closed_walk_count(G: Graph, ell: int) -> int:
    if ell < 1:
        raise ValueError("l must be at least 1")
    return closed_walk_counts(G, ell)[ell]


def irreducible_loop_counts(G: Graph, lmax: int) -> List[int]:
    """Tr(B^l) for l = 0..lmax."""
    indptr, indices = G.csr()
    dmax = int(G.degrees.max()) if G.n else 0
    if 2 * G.m * max(dmax - 1, 1) ** lmax >= INT64_SAFE:
        return _nb_traces_bigint(G, lmax)
    return [int(c) for c in kernels.nb_closed_walk_traces(indptr, indices, lmax)]


def _nb_traces_bigint(G: Graph, lmax: int) -> List[int]:
    indptr, indices = G.csr()
    B = kernels.hashimoto(indptr, indices).toarray().astype(object)
    out = [B.shape[0]]
    P = np.eye(B.shape[0], dtype=object)
    for _ in range(lmax):
        P = P @ B
        out.append(int(np.trace(P)))
    return out


def irreducible_loop_count(G: Graph, ell: int) -> int:
    if ell < 1:
        raise ValueError("l must be at least 1")
    return irreducible_loop_counts(G, ell)[ell]


def ihara_traces(G: RegularGraph, lmax: int) -> List[int]:
    """Tr(B^l) from the adjacency matrix alone (regular graphs):
    sum_lambda P_l(lambda) + (m - n)(1 + (-1)^l) with P_0 = 2, P_1 = x,
    P_{k+1} = x P_k - (d - 1) P_{k-1}; evaluated as exact integer matrices."""
    d = G.d
    A = G.adjacency.astype(object if G.n * d ** lmax >= INT64_SAFE else np.int64)
    prev = 2 * np.eye(G.n, dtype=A.dtype)
    cur = A.copy()
    traces = [int(np.trace(prev)), int(np.trace(cur))]
    for _ in range(2, lmax + 1):
        prev, cur = cur, A @ cur - (d - 1) * prev
        traces.append(int(np.trace(cur)))
    return [t + (G.m - G.n) * (1 + (-1) ** ell) for ell, t in enumerate(traces[: lmax + 1])]


def enumerate_closed_walks(G: Graph, ell: int, non_backtracking: bool = False) -> int:
    """Exhaustive oracle: count vertex sequences v_0 ... v_l = v_0 by depth-first search."""
    nb = G.neighbors()
    count = 0

    def dfs(path):
        nonlocal count
        if len(path) == ell + 1:
            if path[-1] != path[0]:
                return
            if non_backtracking and ell >= 2 and path[1] == path[-2]:
                return
            count += 1
            return
        v = path[-1]
        for w in nb[v]:
            if non_backtracking and len(path) >= 2 and w == path[-2]:
                continue
            path.append(w)
            dfs(path)
            path.pop()

    for v in range(G.n):
        dfs([v])
    return count


def spectral_bound_check(G: Graph, ell: int) -> dict:
    """|Tr(A^l) - d^l| <= n lambda_+^l with the measured slack."""
    deg = G.degrees
    if not np.all(deg == deg[0]):
        raise GraphError("spectral bound needs a regular graph")
    d = int(deg[0])
    sp = spectrum(G)
    tr = closed_walk_count(G, ell)
    lhs = abs(tr - d ** ell)
    rhs = G.n * sp.lambda_plus ** ell
    bip_spec = bool(abs(sp.eigenvalues[-1] + d) < 1e-9)
    bip = is_bipartite(G)
    return {"n": G.n, "d": d, "ell": ell, "trace": tr, "d_pow": d ** ell, "lhs": lhs,
            "rhs": float(rhs), "slack": float(rhs - lhs), "lambda_plus": sp.lambda_plus,
            "holds": bool(lhs <= rhs * (1 + 1e-9) + 1e-9),
            "bipartite": bip, "bipartite_spectral": bip_spec, "connected": is_connected(G)}


# -- Ramanujan residuals ----------------------------------------------------------

def ramanujan_residual(counts: Dict[int, float], d: int, degree: int, tol: float = 0.05,
                       stderr: Optional[Dict[int, float]] = None, z: float = 4.0,
                       max_cond: float = 1e12) -> dict:
    """Fit counts ~ p(l) (d-1)^l; residuals normalized by (d-1)^{l/2}.

    Exact inputs count as bounded when the log-slope of the running max of
    the normalized residuals stays below ``tol``.  With standard errors the
    residuals may instead be statistically consistent with zero: every
    |residual| within ``z`` standard errors.
    """
    ells = np.array(sorted(counts), dtype=float)
    if len(ells) < degree + 3:
        raise ValueError(f"need at least {degree + 3} values of l")
    y = np.array([counts[int(l)] for l in ells], dtype=float)
    q = float(d - 1)
    if q <= 1:
        raise ValueError("need d >= 3")
    V = np.vander(ells, degree + 1, increasing=True)
    scale = np.linalg.norm(V, axis=0)
    cond = float(np.linalg.cond(V / scale))
    if cond > max_cond:
        raise ValueError(f"ill-conditioned fit (condition number {cond:.3e})")
    coef, *_ = np.linalg.lstsq(V / scale, y / q ** ells, rcond=None)
    coef = coef / scale
    resid = y - (V @ coef) * q ** ells
    norm = resid / q ** (ells / 2)
    env = np.maximum.accumulate(np.abs(norm))
    peak = float(env[-1])
    if peak <= 1e-9 * max(1.0, float(np.max(np.abs(y / q ** (ells / 2))))):
        slope = 0.0
    else:
        start = int(np.argmax(env > 0))
        e = env[start:]
        slope = float(np.polyfit(ells[start:], np.log(e), 1)[0]) if len(e) >= 2 else 0.0
    out = {"d": d, "degree": degree, "coefficients": coef.tolist(), "cond": cond,
           "normalized_residuals": norm.tolist(), "max_normalized_residual": peak,
           "residual_log_slope": slope}
    bounded = slope <= tol
    if stderr is not None:
        se = np.array([stderr[int(l)] for l in ells], dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            chi = np.where(se > 0, np.abs(resid) / se, np.where(np.abs(resid) > 0, np.inf, 0.0))
        out["max_abs_z"] = float(np.max(chi))
        bounded = bounded or bool(np.all(chi <= z))
    out["bounded"] = bool(bounded)
    return out


# -- Monte Carlo ---------------------------------------------------------------------

@dataclass(frozen=True)
class MCResult:
    ells: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    n: int
    d: int
    trials: int
    seed: int

    def as_dict(self) -> Dict[int, Tuple[float, float]]:
        return {int(l): (float(m), float(s)) for l, m, s in zip(self.ells, self.mean, self.stderr)}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["ell", "mean_count", "stderr", "n", "d", "trials", "seed"])
        for l, m, s in zip(self.ells, self.mean, self.stderr):
            w.writerow([int(l), repr(float(m)), repr(float(s)), self.n, self.d, self.trials, self.seed])
        return buf.getvalue()


def _trial(args):
    n, d, lmax, child = args
    G = random_regular(n, d, np.random.default_rng(child))
    return irreducible_loop_counts(G, lmax)


def mc_expected_irreducible(n: int, d: int, lmax: int, trials: int, seed: int = 0,
                            jobs: int = 1, ell_min: int = 1) -> MCResult:
    """Mean and standard error of Tr(B^l) over independent pairing-model graphs.

    Trial i draws from the i-th child of SeedSequence(seed), so results do
    not depend on ``jobs``."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    children = np.random.SeedSequence(seed).spawn(trials)
    tasks = [(n, d, lmax, c) for c in children]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            rows = list(ex.map(_trial, tasks))
    else:
        rows = [_trial(t) for t in tasks]
    data = np.array(rows, dtype=float)[:, ell_min:]
    mean = data.mean(axis=0)
    if trials > 1:
        stderr = data.std(axis=0, ddof=1) / math.sqrt(trials)
    else:
        stderr = np.full_like(mean, np.nan)
    return MCResult(np.arange(ell_min, lmax + 1), mean, stderr, n, d, trials, seed)


def log_slope(ells: Sequence[float], values: Sequence[float], lo: float, hi: float) -> float:
    """Least-squares slope of log(values) against l on [lo, hi]."""
    ells = np.asarray(ells, dtype=float)
    values = np.asarray(values, dtype=float)
    mask = (ells >= lo) & (ells <= hi) & (values > 0)
    return float(np.polyfit(ells[mask], np.log(values[mask]), 1)[0])
