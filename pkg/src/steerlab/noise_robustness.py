"""White-noise mixing and steerability thresholds.

The mixture (p/D) I + (1-p) |psi><psi| makes every kernel affine in p, so the
crossing with a bound is solved exactly from the two endpoint evaluations.
Bisection on full density-operator evaluations is kept as an independent
check, not as the production path.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .classical_bound import closed_form_bound
from .graph_states import preset
from .tensor_core import (
    CapExceeded,
    DensityOperator,
    NumericalFailure,
    QuditRegister,
    StateVector,
)
from .witness_kernel import WitnessSpec, evaluate_kernel, spec_from_graph

__all__ = [
    "RobustnessPoint",
    "SweepResult",
    "matched_spec",
    "maximally_mixed",
    "werner_mix",
    "threshold",
    "sweep",
    "CSV_COLUMNS",
    "write_csv",
]

CSV_COLUMNS = (
    "graph_kind",
    "n",
    "d",
    "q",
    "bound",
    "kernel_pure",
    "kernel_mixed",
    "p_threshold",
)


@dataclass(frozen=True)
class RobustnessPoint:
    """One sweep entry: a preset instance with its threshold."""

    graph_kind: str
    n: int
    d: int
    q: int
    bound: float
    kernel_pure: float
    kernel_mixed: float
    p_threshold: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.p_threshold <= 1.0:
            raise ValueError(f"threshold {self.p_threshold} outside [0,1]")


@dataclass(frozen=True)
class SweepResult:
    points: tuple[RobustnessPoint, ...]
    truncated: str | None = None


def maximally_mixed(reg: QuditRegister) -> DensityOperator:
    dim = reg.total_dim
    return DensityOperator(reg, np.eye(dim, dtype=complex) / dim)


def werner_mix(state: StateVector | DensityOperator, p: float) -> DensityOperator:
    """(p/D) I + (1-p) rho."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"noise weight {p} outside [0,1]")
    rho = state.density() if isinstance(state, StateVector) else state
    dim = rho.register.total_dim
    mat = (p / dim) * np.eye(dim, dtype=complex) + (1.0 - p) * rho.matrix
    return DensityOperator(rho.register, mat)


def threshold(
    spec: WitnessSpec,
    state: StateVector | DensityOperator,
    bound: float,
    method: str = "affine",
    tol: float = 1e-10,
) -> float:
    """Noise weight at which the kernel meets the bound.

    affine: exact two-point solve using the mixture's linearity in p.
    bisection: interval search on full mixed-state evaluations, as a check.
    """
    w0 = evaluate_kernel(spec, state)
    w1 = evaluate_kernel(spec, maximally_mixed(spec.register))
    if w0 <= bound:
        raise NumericalFailure(
            f"no crossing: kernel {w0:.6f} at p=0 does not exceed bound {bound:.6f}"
        )
    if w1 >= bound:
        raise NumericalFailure(
            f"no crossing: kernel {w1:.6f} at p=1 is not below bound {bound:.6f}"
        )
    if method == "affine":
        return (w0 - bound) / (w0 - w1)
    if method != "bisection":
        raise ValueError(f"unknown method {method!r}")
    rho = state.density() if isinstance(state, StateVector) else state
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if evaluate_kernel(spec, werner_mix(rho, mid)) > bound:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def matched_spec(graph_kind: str, graph) -> WitnessSpec:
    """Witness spec that certifies the named preset's state.

    Presets pair a graph with a pure state; for every preset except
    g4_prime the state is the graph state itself and the plain graph
    witness applies.  The g4_prime state equals the 4-chain cluster state
    up to Hadamards on the end parties, so its certifying witness is the
    chain witness conjugated the same way.
    """
    if graph_kind == "g4_prime":
        from .oneway_computing import w4_primed_spec

        return w4_primed_spec()
    return spec_from_graph(graph)


def _point(
    graph_kind: str, n: int | None, d: int, method: str = "affine"
) -> RobustnessPoint:
    graph, state = preset(graph_kind, n=n, d=d)
    spec = matched_spec(graph_kind, graph)
    bound = closed_form_bound(spec.q, d)
    w0 = evaluate_kernel(spec, state)
    w1 = evaluate_kernel(spec, maximally_mixed(spec.register))
    p_star = threshold(spec, state, bound, method=method)
    return RobustnessPoint(
        graph_kind=graph_kind,
        n=graph.n,
        d=d,
        q=spec.q,
        bound=bound,
        kernel_pure=w0,
        kernel_mixed=w1,
        p_threshold=p_star,
    )


def sweep(
    graph_kind: str,
    d_range: Iterable[int] | None = None,
    n_range: Iterable[int] | None = None,
    n: int | None = None,
    d: int = 2,
    method: str = "affine",
) -> SweepResult:
    """Threshold curve over a range of d (fixed n) or of n (fixed d).

    Stops at the first point whose register exceeds the simulation caps and
    records the truncation instead of failing the whole sweep.
    """
    if (d_range is None) == (n_range is None):
        raise ValueError("provide exactly one of d_range or n_range")
    points: list[RobustnessPoint] = []
    truncated = None
    if d_range is not None:
        grid = [("d", int(v)) for v in d_range]
    else:
        grid = [("n", int(v)) for v in n_range]
    for axis, value in grid:
        point_n, point_d = (n, value) if axis == "d" else (value, d)
        try:
            points.append(_point(graph_kind, point_n, point_d, method))
        except CapExceeded as exc:
            truncated = f"stopped at {axis}={value}: {exc}"
            break
    return SweepResult(tuple(points), truncated)


def write_csv(result: SweepResult, target) -> str:
    """Render a sweep as CSV (12 significant digits); returns the text.

    target may be a path, a writable text stream, or None for string-only.
    """
    buf = io.StringIO()
    buf.write(",".join(CSV_COLUMNS) + "\n")
    for pt in result.points:
        cells = [
            pt.graph_kind,
            str(pt.n),
            str(pt.d),
            str(pt.q),
            f"{pt.bound:.12g}",
            f"{pt.kernel_pure:.12g}",
            f"{pt.kernel_mixed:.12g}",
            f"{pt.p_threshold:.12g}",
        ]
        buf.write(",".join(cells) + "\n")
    if result.truncated:
        buf.write(f"# truncated: {result.truncated}\n")
    text = buf.getvalue()
    if target is None:
        return text
    if hasattr(target, "write"):
        target.write(text)
    else:
        with open(target, "w", encoding="utf-8") as handle:
            handle.write(text)
    return text
