"""Simple d-regular graphs: sampling, simple switchings and forest embedding counts.

Two samplers are provided.  ``sample_pairing`` is the configuration (pairing)
model with rejection of loops and multi-edges; conditioned on acceptance it is
exactly uniform, but the acceptance probability decays like exp(-(d^2-1)/4),
so it is only practical for small degrees.  ``sample_switching`` starts from a
deterministic circulant graph and runs the double-edge-swap chain, which is
reversible with respect to the uniform law.  ``random_regular_graph`` picks
between them.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy import sparse

from ._rng import as_generator
from ._switch_kernel import run_chain
from .errors import (
    ForestTooLarge,
    IndexOutOfRange,
    InvalidParams,
    NotSwitchable,
    RetriesExceeded,
)

# Largest number of index tuples forest_sum will enumerate.
MAX_FOREST_TUPLES = 1 << 26
MAX_FOREST_VERTICES = 5
# pairing is used by the "auto" sampler while exp(-(d^2-1)/4) stays above this
PAIRING_MIN_ACCEPT = 1e-3


def _canonical_edges(edges) -> np.ndarray:
    e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    e = np.sort(e, axis=1)
    order = np.lexsort((e[:, 1], e[:, 0]))
    return e[order]


@dataclass(frozen=True, eq=False)
class RegularGraph:
    """A simple d-regular graph on vertices ``0..n-1``.

    ``edges`` is stored canonically (u < v, lexicographically sorted), so two
    graphs with the same edge set compare equal.
    """

    n: int
    d: int
    edges: np.ndarray = field(repr=False)

    def __post_init__(self):
        n, d = int(self.n), int(self.d)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "d", d)
        if not 1 <= d < n:
            raise InvalidParams(f"need 1 <= d < n, got n={n}, d={d}")
        if (n * d) % 2:
            raise InvalidParams(f"n*d must be even, got n={n}, d={d}")
        e = _canonical_edges(self.edges)
        e.setflags(write=False)
        object.__setattr__(self, "edges", e)
        if len(e) != n * d // 2:
            raise InvalidParams(f"expected {n * d // 2} edges, got {len(e)}")
        if len(e) and (e.min() < 0 or e.max() >= n):
            raise InvalidParams("edge endpoint out of range")
        if np.any(e[:, 0] == e[:, 1]):
            raise InvalidParams("self-loop")
        if len(e) > 1 and np.any(np.all(e[1:] == e[:-1], axis=1)):
            raise InvalidParams("multi-edge")
        deg = np.bincount(e.ravel(), minlength=n)
        if np.any(deg != d):
            raise InvalidParams("graph is not regular")

    @classmethod
    def from_adjacency(cls, a) -> "RegularGraph":
        a = np.asarray(a)
        if a.shape[0] != a.shape[1] or not np.array_equal(a, a.T):
            raise InvalidParams("adjacency matrix must be square and symmetric")
        u, v = np.nonzero(np.triu(a, 1))
        deg = a.sum(axis=1)
        return cls(a.shape[0], int(deg[0]) if len(deg) else 0, np.column_stack([u, v]))

    def __eq__(self, other):
        if not isinstance(other, RegularGraph):
            return NotImplemented
        return self.n == other.n and self.d == other.d and np.array_equal(self.edges, other.edges)

    def __hash__(self):
        return hash((self.n, self.d, self.edges.tobytes()))

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def _edge_keys(self) -> frozenset[int]:
        return frozenset((self.edges[:, 0] * self.n + self.edges[:, 1]).tolist())

    @cached_property
    def neighbors(self) -> tuple[tuple[int, ...], ...]:
        nbrs: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges.tolist():
            nbrs[u].append(v)
            nbrs[v].append(u)
        return tuple(tuple(sorted(x)) for x in nbrs)

    def has_edge(self, u: int, v: int) -> bool:
        if u > v:
            u, v = v, u
        return u * self.n + v in self._edge_keys

    def degrees(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.n)

    def adjacency(self, dtype=np.int64) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=dtype)
        a[self.edges[:, 0], self.edges[:, 1]] = 1
        a[self.edges[:, 1], self.edges[:, 0]] = 1
        return a

    def sparse_adjacency(self) -> sparse.csr_matrix:
        u, v = self.edges[:, 0], self.edges[:, 1]
        data = np.ones(2 * len(u))
        return sparse.csr_matrix(
            (data, (np.concatenate([u, v]), np.concatenate([v, u]))), shape=(self.n, self.n)
        )

    def to_edgelist(self) -> str:
        lines = [f"{self.n} {self.d}"]
        lines += [f"{u} {v}" for u, v in self.edges.tolist()]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_edgelist(cls, text: str) -> "RegularGraph":
        rows = [ln.split() for ln in text.strip().splitlines() if ln.strip()]
        if not rows or len(rows[0]) != 2:
            raise InvalidParams("edge list must start with a 'n d' header")
        n, d = int(rows[0][0]), int(rows[0][1])
        edges = [(int(a), int(b)) for a, b in rows[1:]]
        return cls(n, d, np.array(edges, dtype=np.int64).reshape(-1, 2))

    def save(self, path) -> None:
        Path(path).write_text(self.to_edgelist())

    @classmethod
    def load(cls, path) -> "RegularGraph":
        return cls.from_edgelist(Path(path).read_text())


def complete_graph(n: int) -> RegularGraph:
    return RegularGraph(n, n - 1, list(itertools.combinations(range(n), 2)))


def cycle_graph(n: int) -> RegularGraph:
    return RegularGraph(n, 2, [(i, (i + 1) % n) for i in range(n)])


def circulant_regular_graph(n: int, d: int) -> RegularGraph:
    """A deterministic d-regular graph: offsets 1..d//2, plus antipodal matching if d is odd."""
    _check_params(n, d)
    i = np.arange(n)
    parts = [np.column_stack([i, (i + s) % n]) for s in range(1, d // 2 + 1)]
    if d % 2:
        h = np.arange(n // 2)
        parts.append(np.column_stack([h, h + n // 2]))
    return RegularGraph(n, d, np.concatenate(parts) if parts else np.zeros((0, 2), np.int64))


def _check_params(n: int, d: int) -> None:
    if n < 1 or d < 1 or d >= n:
        raise InvalidParams(f"need 1 <= d < n, got n={n}, d={d}")
    if (n * d) % 2:
        raise InvalidParams(f"n*d must be even, got n={n}, d={d}")


# ---------------------------------------------------------------- samplers


def sample_pairing(n: int, d: int, seed=None, max_retries: int = 10_000) -> RegularGraph:
    """Uniform simple d-regular graph by the pairing model with rejection."""
    _check_params(n, d)
    rng = as_generator(seed)
    stubs = np.repeat(np.arange(n, dtype=np.int64), d)
    for _ in range(max_retries):
        pairs = rng.permutation(stubs).reshape(-1, 2)
        pairs.sort(axis=1)
        if np.any(pairs[:, 0] == pairs[:, 1]):
            continue
        keys = pairs[:, 0] * n + pairs[:, 1]
        if len(np.unique(keys)) != len(keys):
            continue
        return RegularGraph(n, d, pairs)
    raise RetriesExceeded(f"pairing model rejected {max_retries} times (n={n}, d={d})")


def pairing_acceptance(d: int) -> float:
    """Asymptotic probability that a pairing is simple."""
    return math.exp(-(d * d - 1) / 4)


def default_burnin(n: int, d: int) -> int:
    return 100 * n * d


def sample_switching(n: int, d: int, seed=None, burnin: int | None = None) -> RegularGraph:
    """Approximately uniform graph: circulant start plus `burnin` switching proposals."""
    _check_params(n, d)
    steps = default_burnin(n, d) if burnin is None else int(burnin)
    return mcmc_randomize(circulant_regular_graph(n, d), steps, seed)


def random_regular_graph(
    n: int, d: int, seed=None, method: str = "auto", burnin: int | None = None
) -> RegularGraph:
    """Sample a simple d-regular graph.

    ``method`` is ``"pairing"``, ``"switching"`` or ``"auto"`` (pairing while
    its acceptance probability is reasonable, switching otherwise).
    """
    _check_params(n, d)
    if method == "auto":
        method = "pairing" if pairing_acceptance(d) >= PAIRING_MIN_ACCEPT else "switching"
    if method == "pairing":
        return sample_pairing(n, d, seed)
    if method == "switching":
        return sample_switching(n, d, seed, burnin)
    raise InvalidParams(f"unknown sampling method {method!r}")


# ---------------------------------------------------------------- switchings


@dataclass(frozen=True)
class SwitchMove:
    """Replace edges ij, kl by ik, jl."""

    i: int
    j: int
    k: int
    l: int  # noqa: E741

    def __post_init__(self):
        if len({self.i, self.j, self.k, self.l}) != 4:
            raise InvalidParams(f"switch indices must be distinct: {self}")

    def inverse(self) -> "SwitchMove":
        return SwitchMove(self.i, self.k, self.j, self.l)

    def xi(self, n: int) -> np.ndarray:
        """Signed matrix Delta_ij + Delta_kl - Delta_ik - Delta_jl."""
        x = np.zeros((n, n), dtype=np.int64)
        for (a, b), s in (((self.i, self.j), 1), ((self.k, self.l), 1),
                          ((self.i, self.k), -1), ((self.j, self.l), -1)):
            x[a, b] += s
            x[b, a] += s
        return x


def _check_move(g: RegularGraph, m: SwitchMove) -> None:
    for idx in (m.i, m.j, m.k, m.l):
        if not 0 <= idx < g.n:
            raise IndexOutOfRange(f"vertex {idx} not in 0..{g.n - 1}")


def is_switchable(g: RegularGraph, m: SwitchMove) -> bool:
    _check_move(g, m)
    return (
        g.has_edge(m.i, m.j)
        and g.has_edge(m.k, m.l)
        and not g.has_edge(m.i, m.k)
        and not g.has_edge(m.j, m.l)
    )


def apply_switch(g: RegularGraph, m: SwitchMove) -> RegularGraph:
    if not is_switchable(g, m):
        raise NotSwitchable(f"{m} is not switchable")
    drop = {tuple(sorted((m.i, m.j))), tuple(sorted((m.k, m.l)))}
    kept = [e for e in map(tuple, g.edges.tolist()) if e not in drop]
    kept += [(m.i, m.k), (m.j, m.l)]
    return RegularGraph(g.n, g.d, kept)


def _proposal_stream(rng: np.random.Generator, m: int, steps: int):
    e1 = rng.integers(0, m, size=steps, dtype=np.int64)
    e2 = rng.integers(0, m, size=steps, dtype=np.int64)
    orient = rng.integers(0, 4, size=steps, dtype=np.int64)
    return e1, e2, orient


def _chain_python(edges, adj, e1, e2, orient, check_every_step: bool, d: int) -> int:
    accepted = 0
    for a, b, o in zip(e1.tolist(), e2.tolist(), orient.tolist()):
        if a == b:
            continue
        i, j = edges[a]
        if o & 1:
            i, j = j, i
        k, l = edges[b]  # noqa: E741
        if o & 2:
            k, l = l, k
        if len({i, j, k, l}) < 4 or adj[i, k] or adj[j, l]:
            continue
        adj[i, j] = adj[j, i] = adj[k, l] = adj[l, k] = 0
        adj[i, k] = adj[k, i] = adj[j, l] = adj[l, j] = 1
        edges[a] = (i, k)
        edges[b] = (j, l)
        accepted += 1
        if check_every_step:
            rows = adj.sum(axis=1)
            if np.any(rows != d) or np.any(np.diag(adj)) or not np.array_equal(adj, adj.T):
                raise AssertionError("switching chain left the space of simple regular graphs")
    return accepted


CHAIN_CHUNK = 1 << 20


def mcmc_randomize(g: RegularGraph, steps: int, seed=None, debug: bool = False) -> RegularGraph:
    """Run `steps` double-edge-swap proposals starting from `g`.

    Each proposal picks two uniformly random edges with random orientations,
    giving (i, j) and (k, l), and applies the switch when it is legal.  The
    proposal is symmetric, so the chain is reversible w.r.t. the uniform law.
    With ``debug`` the regular-graph invariants are checked after every
    accepted move (slow pure-Python path; same random stream).
    """
    if steps <= 0 or g.num_edges < 2:
        return g
    rng = as_generator(seed)
    edges = g.edges.copy()
    adj = g.adjacency(np.uint8)
    left = int(steps)
    while left > 0:
        chunk = min(left, CHAIN_CHUNK)
        e1, e2, orient = _proposal_stream(rng, len(edges), chunk)
        if debug:
            _chain_python(edges, adj, e1, e2, orient, True, g.d)
        else:
            run_chain(edges, adj, e1, e2, orient)
        left -= chunk
    return RegularGraph(g.n, g.d, edges)


# ---------------------------------------------------------------- forests


@dataclass(frozen=True)
class Forest:
    """Abstract forest on labels ``0..num_vertices-1``."""

    num_vertices: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(tuple(map(int, e)) for e in self.edges))
        parent = list(range(self.num_vertices))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for u, v in self.edges:
            if not (0 <= u < self.num_vertices and 0 <= v < self.num_vertices) or u == v:
                raise InvalidParams(f"bad forest edge {(u, v)}")
            ru, rv = find(u), find(v)
            if ru == rv:
                raise InvalidParams("forest contains a cycle")
            parent[ru] = rv

    @property
    def theta(self) -> int:
        """Number of connected components, singletons included."""
        return self.num_vertices - len(self.edges)

    def degrees(self) -> list[int]:
        deg = [0] * self.num_vertices
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg


def forest_sum(g: RegularGraph, f: Forest, distinct: bool = False) -> int:
    """Count embeddings: sum over vertex tuples of prod_{(u,v) in E} A[i_u, i_v].

    Brute force: the product is materialized for every tuple in {0..n-1}^v,
    optionally restricted to pairwise-distinct tuples.
    """
    v = f.num_vertices
    if v > MAX_FOREST_VERTICES or g.n**v > MAX_FOREST_TUPLES:
        raise ForestTooLarge(f"{g.n}^{v} tuples exceeds the enumeration budget")
    a = g.adjacency(bool)
    total = np.ones((g.n,) * v, dtype=bool)
    for u, w in f.edges:
        shape = [1] * v
        shape[u], shape[w] = g.n, g.n
        if u < w:
            total &= a.reshape(shape)
        else:
            total &= a.T.reshape(shape)
    if distinct:
        idx = np.indices((g.n,) * v, sparse=True)
        for p, q in itertools.combinations(range(v), 2):
            total &= idx[p] != idx[q]
    return int(np.count_nonzero(total))


def forest_sum_closed_form(n: int, d: int, f: Forest) -> int:
    """N^theta * d^|E| for the unrestricted sum."""
    return n**f.theta * d ** len(f.edges)


def forest_constant(d: int, f: Forest) -> float:
    """c_T: leading constant of the distinct-tuple sum relative to N^theta d^|E|."""
    num = 1
    for k in f.degrees():
        for r in range(1, k):
            num *= d - r
    return num / d ** (len(f.edges) - f.theta)
