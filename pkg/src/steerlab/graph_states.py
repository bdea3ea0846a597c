"""Colored graphs and the qudit graph states built from them.

Vertex labels are 1-based everywhere a caller sees them (constructors,
documents, presets); conversion to 0-based tensor axes happens internally.
ColoredGraph validates structure only, so an improperly colored graph can be
constructed and inspected; validate_coloring reports the violating edges and
the witness layer refuses improper colorings outright.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tensor_core import (
    LinearOperator,
    QuditRegister,
    StateVector,
    apply_local,
    register,
    uniform_register,
)

__all__ = [
    "ColoredGraph",
    "validate_coloring",
    "edge_unitary",
    "build_graph_state",
    "preset",
    "PRESET_NAMES",
    "greedy_coloring",
    "parse_graph_document",
    "format_graph_document",
]

PRESET_NAMES = ("chain", "star", "box4", "horseshoe4", "two_vertex", "g4_prime")


@dataclass(frozen=True)
class ColoredGraph:
    """Vertices 1..n of uniform dimension d, undirected edges, color classes."""

    n: int
    d: int
    edges: tuple[tuple[int, int], ...]
    colors: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("graph needs at least one vertex")
        if self.d < 2:
            raise ValueError("local dimension must be >= 2")
        seen = set()
        canon = []
        for edge in self.edges:
            if len(edge) != 2:
                raise ValueError(f"edge {edge} is not a pair")
            i, j = int(edge[0]), int(edge[1])
            if i == j:
                raise ValueError(f"self-loop at vertex {i}")
            if not (1 <= i <= self.n and 1 <= j <= self.n):
                raise ValueError(f"edge ({i},{j}) references a vertex outside 1..{self.n}")
            pair = (min(i, j), max(i, j))
            if pair in seen:
                raise ValueError(f"duplicate edge {pair}")
            seen.add(pair)
            canon.append(pair)
        object.__setattr__(self, "edges", tuple(sorted(canon)))
        classes = tuple(tuple(sorted(int(v) for v in cls)) for cls in self.colors)
        if any(not cls for cls in classes):
            raise ValueError("every color class must be nonempty")
        flat = [v for cls in classes for v in cls]
        if sorted(flat) != list(range(1, self.n + 1)):
            raise ValueError(f"color classes must partition 1..{self.n}, got {classes}")
        object.__setattr__(self, "colors", classes)

    @property
    def q(self) -> int:
        return len(self.colors)

    def neighbors(self, vertex: int) -> tuple[int, ...]:
        out = []
        for i, j in self.edges:
            if i == vertex:
                out.append(j)
            elif j == vertex:
                out.append(i)
        return tuple(sorted(out))

    def register(self) -> QuditRegister:
        return uniform_register(self.n, self.d)


def validate_coloring(graph: ColoredGraph) -> list[tuple[int, int]]:
    """Edges whose endpoints share a color class; empty list iff proper."""
    cls_of = {}
    for idx, cls in enumerate(graph.colors):
        for v in cls:
            cls_of[v] = idx
    return [(i, j) for i, j in graph.edges if cls_of[i] == cls_of[j]]


def edge_unitary(d: int) -> LinearOperator:
    """Two-qudit phase gate sum_v |v><v| (x) Z^v; controlled-Z at d=2."""
    if d < 2:
        raise ValueError("dimension must be >= 2")
    v, k = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    phases = np.exp(2j * np.pi * (v * k) / d).reshape(-1)
    return LinearOperator(register(d, d), np.diag(phases))


def build_graph_state(graph: ColoredGraph) -> StateVector:
    """Apply the edge unitaries to the product of Fourier-rotated |0> states."""
    reg = graph.register()
    amps = np.full(reg.total_dim, reg.total_dim ** -0.5, dtype=complex)
    state = StateVector(reg, amps)
    gate = edge_unitary(graph.d)
    for i, j in graph.edges:
        state = apply_local(gate, (i - 1, j - 1), state)
    return state


def _chain_graph(n: int, d: int) -> ColoredGraph:
    if n < 2:
        raise ValueError("chain needs at least 2 vertices")
    edges = tuple((i, i + 1) for i in range(1, n))
    colors = (tuple(range(1, n + 1, 2)), tuple(range(2, n + 1, 2)))
    return ColoredGraph(n, d, edges, colors)


def _star_graph(n: int, d: int) -> ColoredGraph:
    if n < 2:
        raise ValueError("star needs at least 2 vertices")
    edges = tuple((1, i) for i in range(2, n + 1))
    colors = ((1,), tuple(range(2, n + 1)))
    return ColoredGraph(n, d, edges, colors)


def _box4_graph(d: int) -> ColoredGraph:
    return ColoredGraph(4, d, ((1, 2), (2, 3), (3, 4), (4, 1)), ((1, 3), (2, 4)))


def _g4_prime_state() -> StateVector:
    amps = np.zeros(16, dtype=complex)
    amps[0b0000] = 0.5
    amps[0b0011] = 0.5
    amps[0b1100] = 0.5
    amps[0b1111] = -0.5
    return StateVector(uniform_register(4, 2), amps)


def preset(name: str, n: int | None = None, d: int = 2) -> tuple[ColoredGraph, StateVector]:
    """Named graph/state pairs with their canonical 2-colorings.

    chain(n,d), star(n,d), box4(d), horseshoe4(d) (the 4-chain), two_vertex(d),
    and g4_prime (d=2 only), whose state is written down directly from its
    amplitude expression while its graph is the 4-chain it is locally
    equivalent to.
    """
    if name == "chain":
        if n is None:
            raise ValueError("chain preset needs n")
        graph = _chain_graph(n, d)
    elif name == "star":
        if n is None:
            raise ValueError("star preset needs n")
        graph = _star_graph(n, d)
    elif name == "box4":
        if n not in (None, 4):
            raise ValueError("box4 preset is fixed at n=4")
        graph = _box4_graph(d)
    elif name == "horseshoe4":
        if n not in (None, 4):
            raise ValueError("horseshoe4 preset is fixed at n=4")
        graph = _chain_graph(4, d)
    elif name == "two_vertex":
        if n not in (None, 2):
            raise ValueError("two_vertex preset is fixed at n=2")
        graph = ColoredGraph(2, d, ((1, 2),), ((1,), (2,)))
    elif name == "g4_prime":
        if d != 2 or n not in (None, 4):
            raise ValueError("g4_prime preset is fixed at n=4, d=2")
        return _chain_graph(4, 2), _g4_prime_state()
    else:
        raise ValueError(f"unknown preset {name!r}; choose from {PRESET_NAMES}")
    return graph, build_graph_state(graph)


def greedy_coloring(n: int, edges: tuple[tuple[int, int], ...]) -> tuple[tuple[int, ...], ...]:
    """Greedy proper coloring by vertex order; a convenience fallback only."""
    adjacency: dict[int, set[int]] = {v: set() for v in range(1, n + 1)}
    for i, j in edges:
        adjacency[i].add(j)
        adjacency[j].add(i)
    assigned: dict[int, int] = {}
    for v in range(1, n + 1):
        used = {assigned[u] for u in adjacency[v] if u in assigned}
        color = 0
        while color in used:
            color += 1
        assigned[v] = color
    q = max(assigned.values()) + 1
    return tuple(tuple(v for v in range(1, n + 1) if assigned[v] == c) for c in range(q))


def format_graph_document(graph: ColoredGraph) -> str:
    """Human-readable key-value document for a colored graph."""
    lines = [
        f"n = {graph.n}",
        f"d = {graph.d}",
        "edges = " + " ".join(f"{i}-{j}" for i, j in graph.edges),
        "colors = " + " | ".join(" ".join(str(v) for v in cls) for cls in graph.colors),
    ]
    return "\n".join(lines) + "\n"


def parse_graph_document(text: str) -> ColoredGraph:
    """Parse the key-value graph format; rejects improper colorings.

    Fields: n, d, edges (pairs like 1-2), colors (classes separated by '|').
    When colors is omitted a greedy fallback coloring is derived; a supplied
    coloring is never overridden.
    """
    fields: dict[str, str] = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"malformed line {line!r}; expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip()
        if key in fields:
            raise ValueError(f"duplicate field {key!r}")
        fields[key] = value.strip()
    unknown = set(fields) - {"n", "d", "edges", "colors"}
    if unknown:
        raise ValueError(f"unknown fields {sorted(unknown)}")
    for need in ("n", "d"):
        if need not in fields:
            raise ValueError(f"missing field {need!r}")
    n = int(fields["n"])
    d = int(fields["d"])
    edges = []
    for token in fields.get("edges", "").replace(",", " ").split():
        if "-" not in token:
            raise ValueError(f"malformed edge {token!r}; expected 'i-j'")
        i, _, j = token.partition("-")
        edges.append((int(i), int(j)))
    if "colors" in fields:
        colors = tuple(
            tuple(int(v) for v in chunk.split()) for chunk in fields["colors"].split("|")
        )
    else:
        colors = greedy_coloring(n, tuple(edges))
    graph = ColoredGraph(n, d, tuple(edges), colors)
    bad = validate_coloring(graph)
    if bad:
        raise ValueError(f"improper coloring; violating edges {bad}")
    return graph
