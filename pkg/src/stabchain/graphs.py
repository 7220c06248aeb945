"""Finite directed multigraphs and the path bases they generate.

Every Hilbert space in the package is spanned by paths in a :class:`Graph`.
Paths of length ``L`` from ``i`` to ``j`` are enumerated in a fixed order:
lexicographic, site by site, on the pair ``(target vertex, edge index)``.
That order pins down all basis identifications made downstream.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path as _FsPath

import numpy as np

__all__ = ['GraphError', 'NotUniformlyConnected', 'Graph', 'Path', 'Interval',
           'load_graph', 'read_graph', 'uniform_reach', 'path_count', 'enumerate_paths',
           'path_index', 'paths_from', 'count_matrix', 'single_vertex_graph', 'fibonacci_graph']


class GraphError(ValueError):
    """Malformed graph input."""


class NotUniformlyConnected(ValueError):
    """No uniform reach ``m`` exists below the requested cap."""


@dataclass(frozen=True, eq=False)
class Graph:
    """Directed multigraph on vertices ``0..t-1``.

    ``multiplicities[i, j]`` is the number of edges ``i -> j``. Instances are
    immutable and compare (and hash) by identity, so they can key caches.
    """
    multiplicities: np.ndarray

    def __post_init__(self):
        n = np.array(self.multiplicities, dtype=np.int64)
        if n.ndim != 2 or n.shape[0] != n.shape[1] or n.shape[0] < 1:
            raise GraphError(f"multiplicity matrix must be square and non-empty, got shape {n.shape}")
        if (n < 0).any():
            raise GraphError("negative multiplicity")
        if not n.any():
            raise GraphError("no edges")
        n.setflags(write=False)
        object.__setattr__(self, 'multiplicities', n)

    @property
    def vertex_count(self) -> int:
        return self.multiplicities.shape[0]

    @property
    def N(self) -> np.ndarray:
        return self.multiplicities

    def is_symmetric(self) -> bool:
        return bool((self.multiplicities == self.multiplicities.T).all())

    def to_dict(self) -> dict:
        return {'vertices': self.vertex_count, 'multiplicities': self.multiplicities.tolist()}

    def __repr__(self):
        return f"Graph({self.multiplicities.tolist()})"


@dataclass(frozen=True)
class Path:
    """A path given by its start vertex and a tuple of ``(source, target, edge index)``."""
    start: int
    edges: tuple[tuple[int, int, int], ...] = ()

    @property
    def length(self) -> int:
        return len(self.edges)

    @property
    def end(self) -> int:
        return self.edges[-1][1] if self.edges else self.start

    def vertices(self) -> tuple[int, ...]:
        return (self.start,) + tuple(e[1] for e in self.edges)

    def key(self) -> tuple[tuple[int, int], ...]:
        """Sort key realizing the lexicographic site-by-site order."""
        return tuple((t, k) for (_, t, k) in self.edges)

    def __add__(self, other: 'Path') -> 'Path':
        if self.end != other.start:
            raise ValueError(f"cannot concatenate path ending at {self.end} with path starting at {other.start}")
        return Path(self.start, self.edges + other.edges)

    def split(self, at: int) -> tuple['Path', 'Path']:
        left = Path(self.start, self.edges[:at])
        return left, Path(left.end, self.edges[at:])


@dataclass(frozen=True)
class Interval:
    """Integer interval ``[lo, hi]`` (both ends included)."""
    lo: int
    hi: int

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    def __len__(self):
        return self.hi - self.lo + 1

    @property
    def length(self) -> int:
        return len(self)

    def sites(self) -> range:
        return range(self.lo, self.hi + 1)

    def __iter__(self):
        return iter(self.sites())

    def __contains__(self, site) -> bool:
        return self.lo <= site <= self.hi

    def issubset(self, other: 'Interval') -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    def enlarge(self, radius: int) -> 'Interval':
        """The ``radius``-ball around the interval."""
        return Interval(self.lo - radius, self.hi + radius)

    def clip(self, other: 'Interval') -> 'Interval':
        return Interval(max(self.lo, other.lo), min(self.hi, other.hi))

    def __repr__(self):
        return f"[{self.lo},{self.hi}]"


def load_graph(source) -> Graph:
    """Build a :class:`Graph` from a mapping or JSON text.

    Expected layout: ``{"vertices": t, "multiplicities": [[...], ...]}`` where row
    ``i`` column ``j`` counts edges ``i -> j``.
    """
    if isinstance(source, (str, bytes)):
        try:
            source = json.loads(source)
        except json.JSONDecodeError as err:
            raise GraphError(f"parse error: {err}") from err
    if not isinstance(source, dict) or 'multiplicities' not in source:
        raise GraphError("graph must be an object with a 'multiplicities' entry")
    rows = source['multiplicities']
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise GraphError("multiplicities must be a list of lists")
    t = source.get('vertices', len(rows))
    if not isinstance(t, int) or t < 1:
        raise GraphError(f"vertices must be a positive integer, got {t!r}")
    if len(rows) != t or any(len(r) != t for r in rows):
        raise GraphError(f"dimension mismatch: expected a {t}x{t} matrix")
    for r in rows:
        for x in r:
            if not isinstance(x, int) or isinstance(x, bool):
                raise GraphError(f"multiplicities must be integers, got {x!r}")
    return Graph(np.array(rows, dtype=np.int64))


def read_graph(path) -> Graph:
    return load_graph(_FsPath(path).read_text(encoding='utf-8'))


def single_vertex_graph(loops: int) -> Graph:
    """One vertex with ``loops`` self-edges; its path model is the spin chain ``M_loops``."""
    return Graph(np.array([[loops]]))


def fibonacci_graph() -> Graph:
    return Graph(np.array([[0, 1], [1, 1]]))


def uniform_reach(g: Graph, max_m: int | None = None) -> int:
    """Smallest ``m`` with ``N^l > 0`` entrywise for every ``l >= m``.

    Positivity of both ``N^m`` and ``N^(m+1)`` is checked; together they force
    every higher power to be positive as well.
    """
    if max_m is None:
        max_m = 2 * g.vertex_count ** 2
    if max_m < 1:
        raise ValueError("max_m must be positive")
    support = g.N > 0
    power = support.copy()
    for m in range(1, max_m + 1):
        nxt = (power.astype(np.int64) @ support.astype(np.int64)) > 0
        if power.all() and nxt.all():
            return m
        power = nxt
    raise NotUniformlyConnected(f"no uniform reach m <= {max_m} for {g!r}")


def _check_vertex(g: Graph, *vs):
    for v in vs:
        if not 0 <= v < g.vertex_count:
            raise IndexError(f"vertex {v} out of range for a graph with {g.vertex_count} vertices")


@lru_cache(maxsize=None)
def _power(g: Graph, length: int) -> np.ndarray:
    if length == 0:
        return np.eye(g.vertex_count, dtype=object)
    return _power(g, length - 1).dot(g.N.astype(object))


def path_count(g: Graph, length: int, i: int, j: int) -> int:
    """Number of paths ``i -> j`` of the given length, i.e. ``(N^L)_{ij}``."""
    if length < 0:
        raise ValueError("length must be nonnegative")
    _check_vertex(g, i, j)
    return int(_power(g, length)[i, j])


def count_matrix(g: Graph, length: int) -> np.ndarray:
    """``N^L`` as an int64 array."""
    return np.array(_power(g, length), dtype=np.int64)


@lru_cache(maxsize=None)
def paths_from(g: Graph, length: int, i: int) -> tuple[Path, ...]:
    """All paths of the given length starting at ``i``, in lexicographic order."""
    _check_vertex(g, i)
    if length == 0:
        return (Path(i),)
    out = []
    for p in paths_from(g, length - 1, i):
        v = p.end
        for t in range(g.vertex_count):
            for k in range(int(g.N[v, t])):
                out.append(Path(i, p.edges + ((v, t, k),)))
    return tuple(out)


@lru_cache(maxsize=None)
def enumerate_paths(g: Graph, length: int, i: int, j: int) -> tuple[Path, ...]:
    """Paths ``i -> j`` of the given length in lexicographic ``(target, edge index)`` order."""
    if length < 0:
        raise ValueError("length must be nonnegative")
    _check_vertex(g, i, j)
    if length == 0:
        return (Path(i),) if i == j else ()
    power = count_matrix(g, length - 1)
    out = []
    for v in range(g.vertex_count):
        if not (g.N[v, j] and power[i, v]):
            continue
        for p in enumerate_paths(g, length - 1, i, v):
            for k in range(int(g.N[v, j])):
                out.append(Path(i, p.edges + ((v, j, k),)))
    out.sort(key=Path.key)
    return tuple(out)


@lru_cache(maxsize=None)
def path_index(g: Graph, length: int, i: int, j: int) -> dict[Path, int]:
    return {p: n for n, p in enumerate(enumerate_paths(g, length, i, j))}
