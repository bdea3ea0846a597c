"""Fidelity criteria: steering threshold, kernel sandwich, multi-DOF witnesses.

The sandwich W - 1 <= F <= W/2 is derived for two-coloring witnesses; for
q > 2 the raw ends can cross once W > 2, which the clamp absorbs. Raw values
are kept on the window for diagnostics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .classical_bound import closed_form_bound
from .graph_states import preset
from .tensor_core import DensityOperator, StateVector, kron, partial_trace
from .witness_kernel import WitnessSpec, evaluate_kernel, spec_from_graph

__all__ = [
    "FidelityWindow",
    "DofSystem",
    "fidelity_threshold",
    "sandwich",
    "dof_system",
    "build_hyper_state",
    "multidof_kernel",
    "multidof_bound",
    "multidof_steering_verdict",
    "multidof_fidelity_verdict",
]


@dataclass(frozen=True)
class FidelityWindow:
    """Clamped fidelity interval with the pre-clamp values kept alongside."""

    lower: float
    upper: float
    raw_lower: float
    raw_upper: float

    def __post_init__(self) -> None:
        if self.lower > self.upper:
            raise ValueError(f"window ({self.lower}, {self.upper}) is inverted")


def _clamp01(x: float) -> float:
    return min(1.0, max(0.0, x))


def fidelity_threshold(q: int, d: int) -> float:
    """Fidelity above which a state certifies steering: half the kernel bound."""
    return closed_form_bound(q, d) / 2.0


def sandwich(kernel_value: float, q: int, d: int) -> FidelityWindow:
    """Window (W-1, W/2) for the target-state fidelity, clamped to [0,1]."""
    if q < 2:
        raise ValueError("q must be >= 2")
    if d < 2:
        raise ValueError("d must be >= 2")
    if not -1e-12 <= kernel_value <= q + 1e-12:
        raise ValueError(f"kernel value {kernel_value} outside [0, {q}]")
    raw_lower = kernel_value - 1.0
    raw_upper = kernel_value / 2.0
    return FidelityWindow(
        lower=_clamp01(raw_lower),
        upper=_clamp01(raw_upper),
        raw_lower=raw_lower,
        raw_upper=raw_upper,
    )


@dataclass(frozen=True)
class DofSystem:
    """Degrees of freedom of one photon pair, each carrying a pair witness."""

    dims: tuple[int, ...]
    specs: tuple[WitnessSpec, ...]

    def __post_init__(self) -> None:
        if not self.dims:
            raise ValueError("need at least one DOF")
        if any(d < 2 for d in self.dims):
            raise ValueError("every DOF dimension must be >= 2")
        if len(self.specs) != len(self.dims):
            raise ValueError("one spec per DOF required")

    @property
    def d_min(self) -> int:
        return min(self.dims)


def dof_system(dims: Sequence[int]) -> DofSystem:
    specs = []
    for d in dims:
        graph, _ = preset("two_vertex", d=int(d))
        specs.append(spec_from_graph(graph))
    return DofSystem(tuple(int(d) for d in dims), tuple(specs))


def _as_system(dofs: Sequence[int] | DofSystem) -> DofSystem:
    return dofs if isinstance(dofs, DofSystem) else dof_system(dofs)


def build_hyper_state(dofs: Sequence[int] | DofSystem) -> StateVector:
    """Product over DOFs of the maximally entangled two-qudit pair state.

    Each factor is (1/d) sum_{v,v'} omega^{v v'} |v>|v'>, which is exactly the
    two-vertex graph state in dimension d.
    """
    system = _as_system(dofs)
    state: StateVector | None = None
    for d in system.dims:
        _, factor = preset("two_vertex", d=d)
        state = factor if state is None else kron(state, factor)
    assert state is not None
    return state


def multidof_kernel(
    rho: DensityOperator | StateVector, dofs: Sequence[int] | DofSystem
) -> float:
    """Product over DOFs of half the per-DOF pair kernel on the reduced state."""
    system = _as_system(dofs)
    expected = tuple(d for dim in system.dims for d in (dim, dim))
    if rho.register.dims != expected:
        raise ValueError(
            f"state register {rho.register.dims} does not match DOF layout {expected}"
        )
    rho_full = rho.density() if isinstance(rho, StateVector) else rho
    value = 1.0
    for k, spec in enumerate(system.specs):
        reduced = partial_trace(rho_full, keep=(2 * k, 2 * k + 1))
        value *= 0.5 * evaluate_kernel(spec, reduced)
    return value


def multidof_bound(dofs: Sequence[int] | DofSystem) -> float:
    """Product-kernel threshold: half of (1 + 1/sqrt(d_min))."""
    system = _as_system(dofs)
    return 0.5 * (1.0 + 1.0 / math.sqrt(system.d_min))


def multidof_steering_verdict(
    value: float, dofs: Sequence[int] | DofSystem
) -> bool:
    """True iff the product kernel certifies steering in every DOF."""
    return value > multidof_bound(dofs)


def multidof_fidelity_verdict(fidelity: float, d_min: int) -> bool:
    """True iff a hyper-state fidelity certifies steering in every DOF."""
    if d_min < 2:
        raise ValueError("d_min must be >= 2")
    return fidelity > 1.0 / math.sqrt(d_min)
