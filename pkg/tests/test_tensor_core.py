"""Dense tensor machinery: registers, states, operators, eigensolver."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from steerlab.tensor_core import (
    CapExceeded,
    DensityOperator,
    LinearOperator,
    NumericalFailure,
    StateVector,
    apply_local,
    basis_state,
    embed_operator,
    fidelity_with_pure,
    hermitian_eigenvalues,
    hermitian_max_eigenvalue,
    identity,
    kron,
    measurement_basis,
    partial_trace,
    qft_matrix,
    random_state,
    register,
    states_equal_up_to_phase,
    uniform_register,
)


def _rand_hermitian(n, seed, scale=1.0):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return scale * (m + m.conj().T) / 2


# ---------------------------------------------------------------- registers


def test_register_rejects_bad_dims():
    with pytest.raises(ValueError):
        register(2, 1)
    with pytest.raises(ValueError):
        register()
    with pytest.raises(ValueError):
        uniform_register(0, 2)


def test_register_dimension_and_cap(monkeypatch):
    reg = uniform_register(3, 2)
    assert reg.total_dim == 8
    assert reg.n_parties == 3
    monkeypatch.setenv("STEERLAB_CAP", "4")
    with pytest.raises(CapExceeded):
        uniform_register(3, 2)
    monkeypatch.setenv("STEERLAB_CAP", "8")
    assert uniform_register(3, 2).total_dim == 8


# ------------------------------------------------------------------- states


def test_basis_state_amplitudes():
    reg = register(2, 3)
    psi = basis_state(reg, (1, 2))
    vec = np.zeros(6)
    vec[1 * 3 + 2] = 1.0
    assert np.allclose(psi.amplitudes, vec)


def test_basis_state_rejects_out_of_range():
    reg = register(2, 3)
    with pytest.raises(ValueError):
        basis_state(reg, (2, 0))
    with pytest.raises(ValueError):
        basis_state(reg, (0,))


def test_state_vector_norm_helpers():
    reg = register(2)
    raw = StateVector(reg, np.array([3.0, 4.0]))
    assert abs(raw.norm() - 5.0) < 1e-12
    assert abs(raw.normalized().norm() - 1.0) < 1e-12
    with pytest.raises(ValueError):
        StateVector(reg, np.array([1.0, 0.0, 0.0]))
    with pytest.raises(NumericalFailure):
        StateVector(reg, np.zeros(2)).normalized()


def test_density_validation():
    reg = register(2)
    with pytest.raises(ValueError):
        DensityOperator(reg, np.array([[0.5, 0.0], [0.1, 0.5]]))  # not Hermitian
    with pytest.raises(ValueError):
        DensityOperator(reg, np.diag([0.7, 0.7]))  # trace != 1
    with pytest.raises(ValueError):
        DensityOperator(reg, np.diag([1.5, -0.5]))  # negative eigenvalue


def test_density_of_pure_state():
    reg = register(2, 2)
    psi = random_state(reg, seed=1, kind="pure")
    rho = psi.density()
    assert np.allclose(rho.matrix, np.outer(psi.amplitudes, psi.amplitudes.conj()))


# ---------------------------------------------------------------------- QFT


@pytest.mark.parametrize("d", [2, 3, 5, 8])
def test_qft_unitary_and_entries(d):
    f = qft_matrix(d).matrix
    assert np.allclose(f @ f.conj().T, np.eye(d), atol=1e-12)
    omega = np.exp(2j * np.pi / d)
    for j in range(d):
        for k in range(d):
            assert abs(f[j, k] - omega ** (j * k) / np.sqrt(d)) < 1e-12


@pytest.mark.parametrize("d", [2, 3, 4, 7])
def test_qft_squared_is_index_reversal(d):
    f = qft_matrix(d).matrix
    rev = np.zeros((d, d))
    for v in range(d):
        rev[(-v) % d, v] = 1.0
    assert np.allclose(f @ f, rev, atol=1e-12)


@pytest.mark.parametrize("d", [2, 3, 5])
@pytest.mark.parametrize("setting", [1, 2])
def test_measurement_basis_orthonormal_complete(d, setting):
    basis = measurement_basis(d, setting)
    assert len(basis) == d
    overlap = np.array(
        [[np.vdot(a.amplitudes, b.amplitudes) for b in basis] for a in basis]
    )
    assert np.allclose(overlap, np.eye(d), atol=1e-12)
    total = sum(np.outer(b.amplitudes, b.amplitudes.conj()) for b in basis)
    assert np.allclose(total, np.eye(d), atol=1e-12)


def test_measurement_basis_setting2_is_inverse_fourier():
    d = 3
    f = qft_matrix(d).matrix
    basis = measurement_basis(d, 2)
    for v in range(d):
        assert np.allclose(basis[v].amplitudes, f.conj().T[:, v], atol=1e-12)


def test_measurement_basis_rejects_bad_setting():
    with pytest.raises(ValueError):
        measurement_basis(2, 3)


# ----------------------------------------------------------- kron and local


def test_kron_states_matches_numpy():
    a = random_state(register(2), seed=3, kind="pure")
    b = random_state(register(3), seed=4, kind="pure")
    joint = kron(a, b)
    assert joint.register.dims == (2, 3)
    assert np.allclose(joint.amplitudes, np.kron(a.amplitudes, b.amplitudes))


def test_kron_densities_matches_numpy():
    a = random_state(register(2), seed=5, kind="mixed")
    b = random_state(register(2), seed=6, kind="mixed")
    joint = kron(a, b)
    assert np.allclose(joint.matrix, np.kron(a.matrix, b.matrix))


def test_apply_local_equals_full_kron_on_state():
    reg = register(2, 3, 2)
    psi = random_state(reg, seed=7, kind="pure")
    u = qft_matrix(3)
    out = apply_local(u, (1,), psi)
    full = np.kron(np.eye(2), np.kron(u.matrix, np.eye(2)))
    assert np.allclose(out.amplitudes, full @ psi.amplitudes, atol=1e-12)


def test_apply_local_equals_full_kron_on_density():
    reg = register(2, 2)
    rho = random_state(reg, seed=8, kind="mixed")
    u = qft_matrix(2)
    out = apply_local(u, (0,), rho)
    full = np.kron(u.matrix, np.eye(2))
    assert np.allclose(out.matrix, full @ rho.matrix @ full.conj().T, atol=1e-12)


def test_apply_local_two_site_operator():
    reg = register(2, 2, 2)
    psi = basis_state(reg, (1, 1, 0))
    cz = LinearOperator(register(2, 2), np.diag([1.0, 1.0, 1.0, -1.0]))
    out = apply_local(cz, (0, 1), psi)
    assert np.allclose(out.amplitudes, -psi.amplitudes)


def test_embed_operator_matches_manual_kron():
    reg = register(2, 3, 2)
    u = qft_matrix(3)
    emb = embed_operator(u, (1,), reg)
    manual = np.kron(np.eye(2), np.kron(u.matrix, np.eye(2)))
    assert np.allclose(emb.matrix, manual)


def test_apply_local_rejects_bad_targets():
    reg = register(2, 3)
    psi = basis_state(reg, (0, 0))
    with pytest.raises(ValueError):
        apply_local(qft_matrix(2), (1,), psi)  # dimension mismatch
    with pytest.raises(ValueError):
        apply_local(qft_matrix(2), (2,), psi)  # out of range
    with pytest.raises(ValueError):
        apply_local(qft_matrix(2), (0, 0), psi)  # duplicate


# ------------------------------------------------------------ partial trace


def test_partial_trace_of_product_state():
    a = random_state(register(2), seed=9, kind="mixed")
    b = random_state(register(3), seed=10, kind="mixed")
    joint = kron(a, b)
    assert np.allclose(partial_trace(joint, (0,)).matrix, a.matrix, atol=1e-12)
    assert np.allclose(partial_trace(joint, (1,)).matrix, b.matrix, atol=1e-12)


def test_partial_trace_keep_all_is_identity_map():
    rho = random_state(register(2, 3), seed=11, kind="mixed")
    assert np.allclose(partial_trace(rho, (0, 1)).matrix, rho.matrix)


def test_partial_trace_preserves_trace_and_positivity():
    rho = random_state(register(2, 2, 3), seed=12, kind="mixed")
    red = partial_trace(rho, (0, 2))
    assert red.register.dims == (2, 3)
    assert abs(np.trace(red.matrix) - 1.0) < 1e-12
    assert min(np.linalg.eigvalsh(red.matrix)) > -1e-12


def test_partial_trace_bell_pair_is_maximally_mixed():
    reg = register(2, 2)
    bell = StateVector(reg, np.array([1.0, 0.0, 0.0, 1.0]) / np.sqrt(2))
    red = partial_trace(bell.density(), (0,))
    assert np.allclose(red.matrix, np.eye(2) / 2, atol=1e-12)


def test_partial_trace_rejects_bad_keep():
    rho = random_state(register(2, 2), seed=13, kind="mixed")
    with pytest.raises(ValueError):
        partial_trace(rho, ())
    with pytest.raises(ValueError):
        partial_trace(rho, (2,))
    with pytest.raises(ValueError):
        partial_trace(rho, (0, 0))


# ------------------------------------------------------------- eigensolver


@pytest.mark.parametrize("n", [1, 2, 3, 4, 8, 16])
def test_jacobi_matches_lapack_random(n):
    for seed in range(5):
        a = _rand_hermitian(n, seed=100 * n + seed)
        got = hermitian_eigenvalues(a)
        want = np.linalg.eigvalsh(a)
        assert np.allclose(got, want, atol=1e-10 * max(1.0, np.linalg.norm(a)))


def test_jacobi_handles_degenerate_spectrum():
    a = np.diag([2.0, 2.0, 2.0, -1.0]).astype(complex)
    u = np.linalg.qr(_rand_hermitian(4, seed=42) + 5 * np.eye(4))[0]
    b = u @ a @ u.conj().T
    b = (b + b.conj().T) / 2
    got = hermitian_eigenvalues(b)
    assert np.allclose(got, sorted([-1.0, 2.0, 2.0, 2.0]), atol=1e-9)


def test_jacobi_zero_and_scaled_matrices():
    assert np.allclose(hermitian_eigenvalues(np.zeros((3, 3))), np.zeros(3))
    a = _rand_hermitian(4, seed=21)
    for scale in (1e-9, 1e9):
        got = hermitian_eigenvalues(scale * a)
        want = np.linalg.eigvalsh(scale * a)
        assert np.allclose(got, want, rtol=1e-9, atol=1e-12 * scale)


def test_jacobi_converges_on_generic_densities():
    # Regression: near-converged off-diagonal norms must be measured
    # directly, not via cancellation-prone norm differences.
    for seed in range(30):
        rho = random_state(register(2, 2), seed=seed, kind="mixed")
        got = hermitian_eigenvalues(rho.matrix)
        assert np.allclose(got, np.linalg.eigvalsh(rho.matrix), atol=1e-10)


def test_jacobi_eigenvalues_sorted_ascending():
    a = _rand_hermitian(6, seed=33)
    vals = hermitian_eigenvalues(a)
    assert all(vals[i] <= vals[i + 1] for i in range(len(vals) - 1))


def test_max_eigenvalue_consistent():
    a = _rand_hermitian(5, seed=44)
    assert abs(hermitian_max_eigenvalue(a) - np.linalg.eigvalsh(a)[-1]) < 1e-10


def test_max_eigenvalue_accepts_linear_operator():
    assert abs(hermitian_max_eigenvalue(identity(3)) - 1.0) < 1e-12


def test_eigensolver_rejects_non_hermitian():
    with pytest.raises(ValueError):
        hermitian_eigenvalues(np.array([[0.0, 1.0], [0.0, 0.0]]))


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=2, max_value=7), st.integers(min_value=0, max_value=10**6))
def test_jacobi_matches_lapack_property(n, seed):
    a = _rand_hermitian(n, seed=seed)
    got = hermitian_eigenvalues(a)
    want = np.linalg.eigvalsh(a)
    assert np.allclose(got, want, atol=1e-9 * max(1.0, np.linalg.norm(a)))


# ---------------------------------------------------------------- fidelity


def test_fidelity_with_pure_matches_expectation():
    reg = register(2, 2)
    psi = random_state(reg, seed=14, kind="pure")
    rho = random_state(reg, seed=15, kind="mixed")
    want = float(np.real(psi.amplitudes.conj() @ rho.matrix @ psi.amplitudes))
    assert abs(fidelity_with_pure(rho, psi) - want) < 1e-12


def test_fidelity_pure_on_itself_is_one():
    psi = random_state(register(3, 2), seed=16, kind="pure")
    assert abs(fidelity_with_pure(psi.density(), psi) - 1.0) < 1e-12


def test_fidelity_orthogonal_states_is_zero():
    reg = register(2)
    zero = basis_state(reg, (0,))
    one = basis_state(reg, (1,))
    assert abs(fidelity_with_pure(zero.density(), one)) < 1e-12


# ------------------------------------------------------------ random states


def test_random_state_is_seed_deterministic():
    reg = register(2, 3)
    a = random_state(reg, seed=77, kind="pure")
    b = random_state(reg, seed=77, kind="pure")
    c = random_state(reg, seed=78, kind="pure")
    assert np.array_equal(a.amplitudes, b.amplitudes)
    assert not np.allclose(a.amplitudes, c.amplitudes)


def test_random_mixed_state_is_valid_density():
    rho = random_state(register(2, 2, 2), seed=5, kind="mixed")
    assert abs(np.trace(rho.matrix) - 1.0) < 1e-12
    assert min(np.linalg.eigvalsh(rho.matrix)) > -1e-13


def test_random_state_rejects_unknown_kind():
    with pytest.raises(ValueError):
        random_state(register(2), seed=0, kind="thermal")


def test_states_equal_up_to_phase():
    psi = random_state(register(2, 2), seed=20, kind="pure")
    rotated = StateVector(psi.register, np.exp(0.7j) * psi.amplitudes)
    other = random_state(psi.register, seed=21, kind="pure")
    assert states_equal_up_to_phase(psi, rotated)
    assert not states_equal_up_to_phase(psi, other)


# --------------------------------------------------------------------- caps


def test_cap_blocks_oversized_register(monkeypatch):
    monkeypatch.setenv("STEERLAB_CAP", "64")
    with pytest.raises(CapExceeded):
        uniform_register(7, 2)


def test_exception_hierarchy():
    assert issubclass(NumericalFailure, ArithmeticError)
    assert issubclass(CapExceeded, RuntimeError)
