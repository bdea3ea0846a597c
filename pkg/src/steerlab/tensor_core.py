"""Dense linear algebra over small composite qudit Hilbert spaces.

States and operators are immutable wrappers around numpy arrays plus a
QuditRegister that records the local dimensions.  All arithmetic is exact
dense computation; the one iterative routine is a cyclic Jacobi eigensolver
for Hermitian matrices.

Party/axis indices at this level are 0-based.  The graph and witness layers
translate from the 1-based vertex labels used in their own I/O.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

Array = np.ndarray

STATE_AMPLITUDE_CAP = 2 ** 22
DENSITY_DIM_CAP = 2 ** 12

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-9
JACOBI_OFFDIAG_TOL = 1e-13
JACOBI_MAX_SWEEPS = 100

__all__ = [
    "Array",
    "CapExceeded",
    "NumericalFailure",
    "QuditRegister",
    "StateVector",
    "DensityOperator",
    "LinearOperator",
    "register",
    "uniform_register",
    "basis_state",
    "identity",
    "qft_matrix",
    "z_generalized",
    "measurement_basis",
    "kron",
    "apply_local",
    "embed_operator",
    "partial_trace",
    "hermitian_eigenvalues",
    "hermitian_max_eigenvalue",
    "fidelity_with_pure",
    "random_state",
    "states_equal_up_to_phase",
]


class CapExceeded(RuntimeError):
    """A register is too large for dense simulation under the active cap."""


class NumericalFailure(ArithmeticError):
    """A numerical routine could not produce a trustworthy result."""


def _active_cap(default: int) -> int:
    raw = os.environ.get("STEERLAB_CAP")
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError as exc:
        raise ValueError(f"STEERLAB_CAP must be an integer, got {raw!r}") from exc


@dataclass(frozen=True)
class QuditRegister:
    """Ordered local dimensions d_k of a composite Hilbert space."""

    dims: tuple[int, ...]

    def __post_init__(self) -> None:
        dims = tuple(int(d) for d in self.dims)
        object.__setattr__(self, "dims", dims)
        if not dims:
            raise ValueError("a register needs at least one qudit")
        if any(d < 2 for d in dims):
            raise ValueError(f"every local dimension must be >= 2, got {dims}")
        cap = _active_cap(STATE_AMPLITUDE_CAP)
        if self.total_dim > cap:
            raise CapExceeded(
                f"register dimension {self.total_dim} exceeds the cap {cap}; "
                "set STEERLAB_CAP to override"
            )

    @property
    def total_dim(self) -> int:
        return math.prod(self.dims)

    @property
    def n_parties(self) -> int:
        return len(self.dims)


def register(*dims: int) -> QuditRegister:
    return QuditRegister(tuple(dims))


def uniform_register(n: int, d: int) -> QuditRegister:
    """Register of n qudits of equal dimension d."""
    if n < 1:
        raise ValueError("need at least one party")
    return QuditRegister((d,) * n)


def _frozen(a: Array) -> Array:
    a.flags.writeable = False
    return a


def _check_same_register(a: QuditRegister, b: QuditRegister) -> None:
    if a.dims != b.dims:
        raise ValueError(f"register mismatch: {a.dims} vs {b.dims}")


@dataclass(frozen=True)
class StateVector:
    """Pure state: total_dim complex amplitudes over a register."""

    register: QuditRegister
    amplitudes: Array

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1).copy()
        if amps.size != self.register.total_dim:
            raise ValueError(
                f"amplitude count {amps.size} does not match register "
                f"dimension {self.register.total_dim}"
            )
        object.__setattr__(self, "amplitudes", _frozen(amps))

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        n = self.norm()
        if n < 1e-15:
            raise NumericalFailure("cannot normalize a zero vector")
        return StateVector(self.register, self.amplitudes / n)

    def overlap(self, other: "StateVector") -> complex:
        _check_same_register(self.register, other.register)
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def density(self) -> "DensityOperator":
        a = self.amplitudes
        return DensityOperator(self.register, np.outer(a, a.conj()))


@dataclass(frozen=True)
class DensityOperator:
    """Mixed state: Hermitian, unit-trace, positive-semidefinite matrix."""

    register: QuditRegister
    matrix: Array

    def __post_init__(self) -> None:
        mat = np.asarray(self.matrix, dtype=complex).copy()
        dim = self.register.total_dim
        cap = _active_cap(DENSITY_DIM_CAP)
        if dim > cap:
            raise CapExceeded(
                f"density matrix dimension {dim} exceeds the cap {cap}; "
                "set STEERLAB_CAP to override"
            )
        if mat.shape != (dim, dim):
            raise ValueError(f"matrix shape {mat.shape} does not match register dimension {dim}")
        if np.max(np.abs(mat - mat.conj().T)) > HERMITIAN_TOL:
            raise ValueError("density matrix is not Hermitian within 1e-10")
        if abs(np.trace(mat) - 1.0) > TRACE_TOL:
            raise ValueError(f"density matrix trace {np.trace(mat):.6g} is not 1 within 1e-10")
        if _jacobi_eigenvalues(mat)[0] < -PSD_TOL:
            raise ValueError("density matrix has an eigenvalue below -1e-9")
        object.__setattr__(self, "matrix", _frozen(mat))


@dataclass(frozen=True)
class LinearOperator:
    """Square complex matrix acting on a register."""

    register: QuditRegister
    matrix: Array

    def __post_init__(self) -> None:
        mat = np.asarray(self.matrix, dtype=complex).copy()
        dim = self.register.total_dim
        if mat.shape != (dim, dim):
            raise ValueError(f"matrix shape {mat.shape} does not match register dimension {dim}")
        object.__setattr__(self, "matrix", _frozen(mat))

    def dagger(self) -> "LinearOperator":
        return LinearOperator(self.register, self.matrix.conj().T)

    def is_unitary(self, tol: float = 1e-10) -> bool:
        eye = np.eye(self.register.total_dim)
        return bool(np.max(np.abs(self.matrix.conj().T @ self.matrix - eye)) <= tol)


def basis_state(reg: QuditRegister, digits: tuple[int, ...]) -> StateVector:
    """Computational basis vector |digits> of the register."""
    if len(digits) != reg.n_parties:
        raise ValueError("one digit per party required")
    index = 0
    for d, v in zip(reg.dims, digits):
        if not 0 <= v < d:
            raise ValueError(f"digit {v} out of range for dimension {d}")
        index = index * d + v
    amps = np.zeros(reg.total_dim, dtype=complex)
    amps[index] = 1.0
    return StateVector(reg, amps)


def identity(dims: int | tuple[int, ...]) -> LinearOperator:
    reg = QuditRegister((dims,) if isinstance(dims, int) else tuple(dims))
    return LinearOperator(reg, np.eye(reg.total_dim, dtype=complex))


def qft_matrix(d: int) -> LinearOperator:
    """Qudit Fourier matrix with entries omega^(v*w)/sqrt(d), omega = exp(i2pi/d)."""
    if d < 2:
        raise ValueError("dimension must be >= 2")
    v, w = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    mat = np.exp(2j * np.pi * v * w / d) / np.sqrt(d)
    return LinearOperator(register(d), mat)


def z_generalized(d: int) -> LinearOperator:
    """Diagonal phase operator diag(1, omega, ..., omega^(d-1))."""
    if d < 2:
        raise ValueError("dimension must be >= 2")
    return LinearOperator(register(d), np.diag(np.exp(2j * np.pi * np.arange(d) / d)))


def measurement_basis(d: int, setting: int) -> list[StateVector]:
    """Eigenbases of the two complementary measurements.

    Setting 1 is the computational basis {|v>}; setting 2 is the Fourier
    conjugate basis {F^dagger |v>}.  Cross-setting overlaps all have
    magnitude 1/sqrt(d).
    """
    if setting == 1:
        eye = np.eye(d, dtype=complex)
        return [StateVector(register(d), eye[:, v]) for v in range(d)]
    if setting == 2:
        fdag = qft_matrix(d).matrix.conj().T
        return [StateVector(register(d), fdag[:, v]) for v in range(d)]
    raise ValueError(f"setting must be 1 or 2, got {setting}")


def kron(a, b):
    """Tensor product of two states or two operators; register dims concatenate."""
    joined = QuditRegister(a.register.dims + b.register.dims)
    if isinstance(a, StateVector) and isinstance(b, StateVector):
        return StateVector(joined, np.kron(a.amplitudes, b.amplitudes))
    if isinstance(a, LinearOperator) and isinstance(b, LinearOperator):
        return LinearOperator(joined, np.kron(a.matrix, b.matrix))
    if isinstance(a, DensityOperator) and isinstance(b, DensityOperator):
        return DensityOperator(joined, np.kron(a.matrix, b.matrix))
    raise TypeError("kron needs two StateVectors, two LinearOperators, or two DensityOperators")


def _check_targets(op: LinearOperator, targets: tuple[int, ...], reg: QuditRegister) -> None:
    if len(set(targets)) != len(targets):
        raise ValueError(f"duplicate targets {targets}")
    if any(t < 0 or t >= reg.n_parties for t in targets):
        raise ValueError(f"target out of range for {reg.n_parties} parties: {targets}")
    want = math.prod(reg.dims[t] for t in targets)
    if op.register.total_dim != want:
        raise ValueError(
            f"operator dimension {op.register.total_dim} does not match "
            f"target dimensions (product {want})"
        )


def _apply_matrix_rows(mat: Array, array: Array, targets: tuple[int, ...], dims: tuple[int, ...]) -> Array:
    """Apply mat along the given axes of a 2-D array's row index."""
    n = len(dims)
    rest_cols = array.shape[1]
    tensor = array.reshape(dims + (rest_cols,))
    moved = np.moveaxis(tensor, targets, range(len(targets)))
    head = math.prod(dims[t] for t in targets)
    flat = moved.reshape(head, -1)
    out = mat @ flat
    out = out.reshape(moved.shape)
    out = np.moveaxis(out, range(len(targets)), targets)
    return out.reshape(array.shape)


def apply_local(op: LinearOperator, targets: tuple[int, ...] | list[int], state):
    """Embed op on the target parties (identity elsewhere) and apply it.

    Accepts a StateVector or a DensityOperator; 0-based targets.
    """
    targets = tuple(targets)
    reg = state.register
    _check_targets(op, targets, reg)
    if isinstance(state, StateVector):
        col = state.amplitudes.reshape(-1, 1)
        out = _apply_matrix_rows(op.matrix, col, targets, reg.dims)
        return StateVector(reg, out.reshape(-1))
    if isinstance(state, DensityOperator):
        left = _apply_matrix_rows(op.matrix, state.matrix, targets, reg.dims)
        both = _apply_matrix_rows(op.matrix, left.conj().T, targets, reg.dims)
        return DensityOperator(reg, both.conj().T)
    raise TypeError("state must be a StateVector or DensityOperator")


def embed_operator(op: LinearOperator, targets: tuple[int, ...] | list[int], reg: QuditRegister) -> LinearOperator:
    """Dense matrix of op acting on the targets and identity elsewhere."""
    targets = tuple(targets)
    _check_targets(op, targets, reg)
    eye = np.eye(reg.total_dim, dtype=complex)
    full = _apply_matrix_rows(op.matrix, eye, targets, reg.dims)
    return LinearOperator(reg, full)


def partial_trace(rho: DensityOperator, keep: tuple[int, ...] | list[int]) -> DensityOperator:
    """Trace out every party not in keep; keep order fixes the output order."""
    keep = tuple(keep)
    if not keep:
        raise ValueError("keep set must be nonempty")
    reg = rho.register
    n = reg.n_parties
    if len(set(keep)) != len(keep) or any(k < 0 or k >= n for k in keep):
        raise ValueError(f"invalid keep indices {keep}")
    traced = tuple(i for i in range(n) if i not in keep)
    dims = reg.dims
    tensor = rho.matrix.reshape(dims + dims)
    order = (
        tuple(keep)
        + tuple(t for t in traced)
        + tuple(n + k for k in keep)
        + tuple(n + t for t in traced)
    )
    moved = np.transpose(tensor, order)
    d_keep = math.prod(dims[k] for k in keep)
    d_traced = math.prod(dims[t] for t in traced) if traced else 1
    blocks = moved.reshape(d_keep, d_traced, d_keep, d_traced)
    reduced = np.einsum("ijkj->ik", blocks)
    return DensityOperator(QuditRegister(tuple(dims[k] for k in keep)), reduced)


def _jacobi_eigenvalues(matrix: Array) -> Array:
    """Eigenvalues of a Hermitian matrix by cyclic Jacobi rotations, ascending."""
    a = np.asarray(matrix, dtype=complex).copy()
    n = a.shape[0]
    if n == 1:
        return np.array([a[0, 0].real])
    scale = max(1.0, float(np.linalg.norm(a)))
    tol = JACOBI_OFFDIAG_TOL * scale
    skip = tol / (n * n)
    for _ in range(JACOBI_MAX_SWEEPS):
        strict = a - np.diag(np.diag(a))
        off = float(np.linalg.norm(strict))
        if off <= tol:
            diag = np.sort(np.diag(a).real)
            return diag
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = abs(apq)
                if r <= skip:
                    continue
                phase = apq / r
                tau = (a[q, q].real - a[p, p].real) / (2.0 * r)
                t = math.copysign(1.0, tau) / (abs(tau) + math.sqrt(1.0 + tau * tau)) if tau != 0.0 else 1.0
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                vpp, vpq = phase * c, phase * s
                vqp, vqq = -s, c
                col_p = a[:, p] * vpp + a[:, q] * vqp
                col_q = a[:, p] * vpq + a[:, q] * vqq
                a[:, p] = col_p
                a[:, q] = col_q
                row_p = np.conj(vpp) * a[p, :] + np.conj(vqp) * a[q, :]
                row_q = np.conj(vpq) * a[p, :] + np.conj(vqq) * a[q, :]
                a[p, :] = row_p
                a[q, :] = row_q
                a[p, q] = 0.0
                a[q, p] = 0.0
    raise NumericalFailure(f"Jacobi eigensolver did not converge in {JACOBI_MAX_SWEEPS} sweeps")


def _require_hermitian(matrix: Array) -> Array:
    mat = np.asarray(matrix, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError("expected a square matrix")
    if np.max(np.abs(mat - mat.conj().T)) > HERMITIAN_TOL:
        raise ValueError("matrix is not Hermitian within 1e-10")
    return mat


def hermitian_eigenvalues(op: LinearOperator | Array) -> Array:
    """All eigenvalues of a Hermitian operator, sorted ascending."""
    mat = op.matrix if isinstance(op, LinearOperator) else op
    return _jacobi_eigenvalues(_require_hermitian(mat))


def hermitian_max_eigenvalue(op: LinearOperator | Array) -> float:
    """Largest eigenvalue of a Hermitian operator."""
    return float(hermitian_eigenvalues(op)[-1])


def fidelity_with_pure(rho: DensityOperator, psi: StateVector) -> float:
    """<psi|rho|psi>, real in [0, 1] up to numerical noise."""
    _check_same_register(rho.register, psi.register)
    val = complex(np.vdot(psi.amplitudes, rho.matrix @ psi.amplitudes))
    if abs(val.imag) > 1e-8:
        raise NumericalFailure(f"fidelity has a non-real value {val:.3g}")
    return float(val.real)


def random_state(reg: QuditRegister, seed: int, kind: str = "pure"):
    """Seeded random pure or mixed state (Philox counter-based generator).

    Pure states have complex Gaussian amplitudes, normalized.  Mixed states
    are the partial trace of a random pure state on a doubled register.
    """
    rng = np.random.Generator(np.random.Philox(seed))
    dim = reg.total_dim
    if kind == "pure":
        z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        return StateVector(reg, z).normalized()
    if kind == "mixed":
        z = rng.standard_normal(dim * dim) + 1j * rng.standard_normal(dim * dim)
        z = z / np.linalg.norm(z)
        block = z.reshape(dim, dim)
        return DensityOperator(reg, block @ block.conj().T)
    raise ValueError(f"kind must be 'pure' or 'mixed', got {kind!r}")


def states_equal_up_to_phase(a: StateVector, b: StateVector, tol: float = 1e-10) -> bool:
    """Pure-state equality via |<a|b>|^2 = 1, ignoring global phase."""
    return abs(abs(a.overlap(b)) ** 2 - 1.0) <= tol
