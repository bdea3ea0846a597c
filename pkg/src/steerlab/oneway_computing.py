"""Measurement-based two-qubit gates on 4-qubit clusters.

Qubits 2 and 3 of a horseshoe (4-chain) or box (4-cycle) cluster are measured
in rotated bases B(alpha), B(beta); qubits 1 and 4 carry the output. The
horseshoe realizes (H (x) H) CZ and the box CZ (H (x) H) CZ on the effective
input R_z(-alpha) (x) R_z(-beta) |+>|+>, up to outcome-dependent byproduct
operators that run_branching undoes.

computation_fidelity normalizes the postselected branch overlap by the ideal
branch weight 1/4 instead of the realized branch probability; that choice
makes F_comp = wcz_kernel/2 an exact identity, and the two coincide whenever
the realized branch probability is exactly 1/4 (ideal clusters, Werner
mixtures of them with equal branch weights, and the like). A feed-forward
average over all corrected branches is provided separately as an extension
and is never substituted for the postselected figure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fidelity_bounds import FidelityWindow
from .graph_states import preset
from .tensor_core import (
    Array,
    DensityOperator,
    LinearOperator,
    NumericalFailure,
    StateVector,
    fidelity_with_pure,
    register,
    uniform_register,
)
from .witness_kernel import (
    WitnessSpec,
    apply_local_conjugation,
    relabel_parties,
    spec_from_graph,
)

__all__ = [
    "AngleSetting",
    "GateTarget",
    "BranchOutcome",
    "ANGLE_SETTINGS",
    "CLUSTER_KINDS",
    "gate_target",
    "cluster_state",
    "plus_state",
    "input_state",
    "target_output",
    "run_branching",
    "computation_fidelity",
    "feedforward_fidelity",
    "wcz_kernel",
    "fcomp_window",
    "process_and_average_bounds",
    "w4_spec",
    "w4box_spec",
    "w4_primed_spec",
    "w4box_primed_spec",
]

CLUSTER_KINDS = ("horseshoe", "box")

_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
_H = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / math.sqrt(2.0)
_CZ = np.diag([1.0, 1.0, 1.0, -1.0]).astype(complex)

_ZERO_BRANCH_TOL = 1e-12


@dataclass(frozen=True)
class AngleSetting:
    alpha: float
    beta: float


ANGLE_SETTINGS = (
    AngleSetting(0.0, 0.0),
    AngleSetting(0.0, math.pi),
    AngleSetting(math.pi, 0.0),
    AngleSetting(math.pi, math.pi),
    AngleSetting(-math.pi / 2, -math.pi / 2),
    AngleSetting(-math.pi / 2, math.pi / 2),
    AngleSetting(math.pi / 2, -math.pi / 2),
    AngleSetting(math.pi / 2, math.pi / 2),
)


@dataclass(frozen=True)
class GateTarget:
    kind: str
    unitary: LinearOperator


@dataclass(frozen=True)
class BranchOutcome:
    """One (s2, s3) measurement branch; states are None when probability ~ 0."""

    s2: int
    s3: int
    probability: float
    post_state: DensityOperator | None
    corrected_state: DensityOperator | None


def gate_target(kind: str) -> GateTarget:
    """HH_CZ = (H(x)H)CZ (horseshoe); CZ_HH_CZ = CZ(H(x)H)CZ (box)."""
    hh = np.kron(_H, _H)
    if kind == "HH_CZ":
        mat = hh @ _CZ
    elif kind == "CZ_HH_CZ":
        mat = _CZ @ hh @ _CZ
    else:
        raise ValueError(f"unknown gate kind {kind!r}")
    return GateTarget(kind, LinearOperator(register(2, 2), mat))


def _cluster_gate(cluster: str) -> GateTarget:
    if cluster == "horseshoe":
        return gate_target("HH_CZ")
    if cluster == "box":
        return gate_target("CZ_HH_CZ")
    raise ValueError(f"unknown cluster {cluster!r}; choose from {CLUSTER_KINDS}")


def cluster_state(cluster: str) -> StateVector:
    name = "horseshoe4" if cluster == "horseshoe" else "box4"
    if cluster not in CLUSTER_KINDS:
        raise ValueError(f"unknown cluster {cluster!r}; choose from {CLUSTER_KINDS}")
    return preset(name, d=2)[1]


def plus_state(angle: float, s: int) -> Array:
    """(|0> + (-1)^s e^{i angle} |1>)/sqrt(2) as a bare 2-vector."""
    if s not in (0, 1):
        raise ValueError("outcome bit must be 0 or 1")
    sign = 1.0 if s == 0 else -1.0
    return np.array([1.0, sign * np.exp(1j * angle)], dtype=complex) / math.sqrt(2.0)


def input_state(alpha: float, beta: float) -> StateVector:
    """Effective gate input |-alpha_+> |-beta_+>."""
    amps = np.kron(plus_state(-alpha, 0), plus_state(-beta, 0))
    return StateVector(register(2, 2), amps)


def target_output(cluster: str, setting: AngleSetting) -> StateVector:
    gate = _cluster_gate(cluster)
    vec = gate.unitary.matrix @ input_state(setting.alpha, setting.beta).amplitudes
    return StateVector(register(2, 2), vec)


def _byproduct(cluster: str, s2: int, s3: int) -> Array:
    if cluster == "horseshoe":
        return np.kron(np.linalg.matrix_power(_X, s2), np.linalg.matrix_power(_X, s3))
    zx = np.kron(_Z, _X)
    xz = np.kron(_X, _Z)
    return np.linalg.matrix_power(zx, s3) @ np.linalg.matrix_power(xz, s2)


def _as_density(source: DensityOperator | StateVector) -> DensityOperator:
    rho = source.density() if isinstance(source, StateVector) else source
    if rho.register.dims != (2, 2, 2, 2):
        raise ValueError(f"source must live on four qubits, got {rho.register.dims}")
    return rho


def run_branching(
    source: DensityOperator | StateVector, cluster: str, setting: AngleSetting
) -> list[BranchOutcome]:
    """Measure qubits 2, 3 and return all four outcome branches in (s2, s3) order.

    post_state is the normalized reduced state of qubits (1, 4); the corrected
    state has the byproduct operator undone and, on an ideal cluster, matches
    the gate target exactly in every branch.
    """
    rho = _as_density(source)
    _cluster_gate(cluster)
    rho8 = rho.matrix.reshape((2,) * 8)
    out_reg = register(2, 2)
    branches = []
    total = 0.0
    for s2 in (0, 1):
        for s3 in (0, 1):
            avec = plus_state(setting.alpha, s2)
            bvec = plus_state(setting.beta, s3)
            reduced = np.einsum(
                "abcdefgh,b,c,f,g->adeh",
                rho8,
                avec.conj(),
                bvec.conj(),
                avec,
                bvec,
            ).reshape(4, 4)
            prob = float(np.trace(reduced).real)
            total += prob
            if prob < _ZERO_BRANCH_TOL:
                branches.append(BranchOutcome(s2, s3, prob, None, None))
                continue
            post = DensityOperator(out_reg, reduced / prob)
            b = _byproduct(cluster, s2, s3)
            corrected = DensityOperator(out_reg, b @ post.matrix @ b.conj().T)
            branches.append(BranchOutcome(s2, s3, prob, post, corrected))
    if abs(total - 1.0) > 1e-10:
        raise NumericalFailure(f"branch probabilities sum to {total}, expected 1")
    return branches


def computation_fidelity(
    source: DensityOperator | StateVector,
    cluster: str,
    settings: tuple[AngleSetting, ...] = ANGLE_SETTINGS,
) -> float:
    """Mean postselected (s2=s3=0) output fidelity over the input settings.

    The branch overlap with the target is divided by the ideal branch weight
    1/4 (see module docstring); a branch of probability ~ 0 cannot certify a
    gate and raises.
    """
    rho = _as_density(source)
    acc = 0.0
    for setting in settings:
        branch = run_branching(rho, cluster, setting)[0]
        if branch.post_state is None:
            raise NumericalFailure(
                f"postselected branch has probability ~ 0 at "
                f"(alpha, beta) = ({setting.alpha}, {setting.beta})"
            )
        target = target_output(cluster, setting)
        overlap = branch.probability * fidelity_with_pure(branch.post_state, target)
        acc += 4.0 * overlap
    return acc / len(settings)


def feedforward_fidelity(
    source: DensityOperator | StateVector,
    cluster: str,
    settings: tuple[AngleSetting, ...] = ANGLE_SETTINGS,
) -> float:
    """Probability-weighted fidelity over all byproduct-corrected branches.

    Extension beyond the postselected figure of merit; reported separately.
    """
    rho = _as_density(source)
    acc = 0.0
    for setting in settings:
        target = target_output(cluster, setting)
        for branch in run_branching(rho, cluster, setting):
            if branch.corrected_state is None:
                continue
            acc += branch.probability * fidelity_with_pure(
                branch.corrected_state, target
            )
    return acc / len(settings)


def _setting_operator(cluster: str, setting: AngleSetting) -> Array:
    avec = plus_state(setting.alpha, 0)
    bvec = plus_state(setting.beta, 0)
    out = target_output(cluster, setting).amplitudes
    pout = np.outer(out, out.conj()).reshape(2, 2, 2, 2)
    pa = np.outer(avec, avec.conj())
    pb = np.outer(bvec, bvec.conj())
    return np.einsum("adeh,bf,cg->abcdefgh", pout, pa, pb).reshape(16, 16)


def wcz_operator(
    cluster: str, settings: tuple[AngleSetting, ...] = ANGLE_SETTINGS
) -> LinearOperator:
    """Sum over settings of (target output on 1,4) (x) (plus projectors on 2,3)."""
    total = np.zeros((16, 16), dtype=complex)
    for setting in settings:
        total += _setting_operator(cluster, setting)
    return LinearOperator(uniform_register(4, 2), total)


def wcz_kernel(
    source: DensityOperator | StateVector,
    cluster: str,
    settings: tuple[AngleSetting, ...] = ANGLE_SETTINGS,
) -> float:
    """Expectation of the gate witness; > 1 + 1/sqrt(2) certifies steering."""
    rho = _as_density(source)
    op = wcz_operator(cluster, settings)
    return float(np.einsum("ij,ji->", op.matrix, rho.matrix).real)


def _check_kernel_range(kernel: float) -> None:
    if not -1e-12 <= kernel <= 2.0 + 1e-12:
        raise ValueError(f"kernel value {kernel} outside [0, 2]")


def fcomp_window(kernel_w4: float) -> FidelityWindow:
    """Computation-fidelity window (W-1, W/4 + 1/2) from the 4-chain kernel."""
    _check_kernel_range(kernel_w4)
    raw_lower = kernel_w4 - 1.0
    raw_upper = kernel_w4 / 4.0 + 0.5
    return FidelityWindow(
        min(1.0, max(0.0, raw_lower)),
        min(1.0, max(0.0, raw_upper)),
        raw_lower,
        raw_upper,
    )


def process_and_average_bounds(kernel_w4: float) -> tuple[float, float]:
    """Lower bounds (process fidelity, average gate fidelity) = (W/2, (2W+1)/5)."""
    _check_kernel_range(kernel_w4)
    return kernel_w4 / 2.0, (2.0 * kernel_w4 + 1.0) / 5.0


def w4_spec() -> WitnessSpec:
    """Two-term witness of the 4-chain cluster."""
    return spec_from_graph(preset("horseshoe4", d=2)[0])


def w4box_spec() -> WitnessSpec:
    """Two-term witness of the 4-cycle cluster."""
    return spec_from_graph(preset("box4", d=2)[0])


def w4_primed_spec() -> WitnessSpec:
    """Chain witness conjugated by Hadamards on the end qubits 1 and 4."""
    return apply_local_conjugation(w4_spec(), {1: _H, 4: _H})


def w4box_primed_spec() -> WitnessSpec:
    """Box witness under Hadamards on all parties plus the 2<->3 relabeling.

    Evaluates identically to w4_primed_spec on every state.
    """
    rotated = apply_local_conjugation(
        w4box_spec(), {1: _H, 2: _H, 3: _H, 4: _H}
    )
    return relabel_parties(rotated, {1: 1, 2: 3, 3: 2, 4: 4})
