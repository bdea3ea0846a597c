"""Fidelity windows, sandwich inequalities, multi-DOF product witnesses."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from steerlab.classical_bound import closed_form_bound
from steerlab.fidelity_bounds import (
    DofSystem,
    FidelityWindow,
    build_hyper_state,
    dof_system,
    fidelity_threshold,
    multidof_bound,
    multidof_fidelity_verdict,
    multidof_kernel,
    multidof_steering_verdict,
    sandwich,
)
from steerlab.graph_states import preset
from steerlab.noise_robustness import maximally_mixed, werner_mix
from steerlab.tensor_core import (
    DensityOperator,
    fidelity_with_pure,
    kron,
    random_state,
    uniform_register,
)
from steerlab.witness_kernel import evaluate_kernel, spec_from_graph


# ----------------------------------------------------------------- windows


def test_fidelity_threshold_is_half_the_bound():
    for q, d in [(2, 2), (2, 5), (3, 2)]:
        assert fidelity_threshold(q, d) == closed_form_bound(q, d) / 2.0
    assert abs(fidelity_threshold(2, 2) - 0.8535533905932737) < 1e-12


def test_sandwich_reference_window():
    w = sandwich(1.8829, 2, 2)
    assert abs(w.lower - 0.8829) < 1e-12
    assert abs(w.upper - 0.94145) < 1e-12
    assert w.raw_lower == w.lower and w.raw_upper == w.upper


def test_sandwich_clamps_and_keeps_raw_values():
    w = sandwich(0.3, 2, 2)
    assert w.lower == 0.0
    assert abs(w.raw_lower - (-0.7)) < 1e-12
    assert abs(w.upper - 0.15) < 1e-12
    top = sandwich(3.0, 3, 2)
    assert top.upper == 1.0
    assert abs(top.raw_upper - 1.5) < 1e-12


def test_sandwich_validates_inputs():
    with pytest.raises(ValueError):
        sandwich(2.5, 2, 2)  # kernel above q
    with pytest.raises(ValueError):
        sandwich(-0.5, 2, 2)
    with pytest.raises(ValueError):
        sandwich(1.0, 1, 2)
    with pytest.raises(ValueError):
        sandwich(1.0, 2, 1)


def test_window_rejects_inversion():
    with pytest.raises(ValueError):
        FidelityWindow(0.9, 0.1, 0.9, 0.1)


@settings(max_examples=40, deadline=None)
@given(st.floats(min_value=0.0, max_value=2.0))
def test_sandwich_window_is_monotone_in_kernel(w):
    win = sandwich(w, 2, 2)
    assert 0.0 <= win.lower <= win.upper <= 1.0
    assert win.lower == min(1.0, max(0.0, w - 1.0))
    assert win.upper == min(1.0, max(0.0, w / 2.0))


def test_sandwich_inequality_holds_on_random_states():
    graph, target = preset("chain", n=4, d=2)
    spec = spec_from_graph(graph)
    reg = uniform_register(4, 2)
    for seed in range(25):
        kind = "mixed" if seed % 2 else "pure"
        state = random_state(reg, seed=seed, kind=kind)
        rho = state.density() if kind == "pure" else state
        w = evaluate_kernel(spec, rho)
        f = fidelity_with_pure(rho, target)
        assert f >= w - 1.0 - 1e-9
        assert f <= w / 2.0 + 1e-9


def test_sandwich_inequality_holds_under_werner_noise():
    graph, target = preset("chain", n=4, d=2)
    spec = spec_from_graph(graph)
    for p in np.linspace(0.0, 1.0, 11):
        rho = werner_mix(target, float(p))
        w = evaluate_kernel(spec, rho)
        f = fidelity_with_pure(rho, target)
        assert w - 1.0 - 1e-12 <= f <= w / 2.0 + 1e-12


# --------------------------------------------------------------- DOF system


def test_dof_system_layout():
    system = dof_system((2, 3))
    assert system.dims == (2, 3)
    assert system.d_min == 2
    assert len(system.specs) == 2
    assert system.specs[1].register.dims == (3, 3)


def test_dof_system_validation():
    with pytest.raises(ValueError):
        dof_system(())
    with pytest.raises(ValueError):
        dof_system((2, 1))
    with pytest.raises(ValueError):
        DofSystem((2,), ())


def test_hyper_state_is_product_of_pair_states():
    system = dof_system((2, 3))
    psi = build_hyper_state(system)
    assert psi.register.dims == (2, 2, 3, 3)
    _, a = preset("two_vertex", d=2)
    _, b = preset("two_vertex", d=3)
    assert np.allclose(psi.amplitudes, kron(a, b).amplitudes)


# ------------------------------------------------------------ product kernel


def test_ideal_hyper_state_saturates_product_kernel():
    for dims in [(2, 2), (2, 3)]:
        psi = build_hyper_state(dims)
        value = multidof_kernel(psi, dims)
        assert abs(value - 1.0) < 1e-12
        assert multidof_steering_verdict(value, dims)


def test_multidof_bound_value():
    assert abs(multidof_bound((2, 2)) - 0.5 * (1 + 1 / math.sqrt(2))) < 1e-12
    assert abs(multidof_bound((2, 3)) - 0.5 * (1 + 1 / math.sqrt(2))) < 1e-12
    assert abs(multidof_bound((3, 3)) - 0.5 * (1 + 1 / math.sqrt(3))) < 1e-12


def test_one_mixed_dof_fails_the_product_bound():
    dims = (2, 2)
    psi = build_hyper_state(dims)
    rho = psi.density()
    # replace the first DOF with white noise, keep the second ideal
    pair = maximally_mixed(uniform_register(2, 2))
    _, ideal = preset("two_vertex", d=2)
    broken = DensityOperator(
        rho.register, np.kron(pair.matrix, ideal.density().matrix)
    )
    value = multidof_kernel(broken, dims)
    assert abs(value - 0.5) < 1e-12
    assert not multidof_steering_verdict(value, dims)


def test_multidof_kernel_checks_register_layout():
    psi = build_hyper_state((2, 2))
    with pytest.raises(ValueError):
        multidof_kernel(psi, (2, 3))


def test_multidof_kernel_factorizes_on_products():
    # product of independently noisy DOFs multiplies the per-DOF factors
    dims = (2, 2)
    _, pair = preset("two_vertex", d=2)
    spec = dof_system(dims).specs[0]
    noisy0 = werner_mix(pair, 0.2)
    noisy1 = werner_mix(pair, 0.5)
    joint = DensityOperator(
        uniform_register(4, 2), np.kron(noisy0.matrix, noisy1.matrix)
    )
    want = (0.5 * evaluate_kernel(spec, noisy0)) * (0.5 * evaluate_kernel(spec, noisy1))
    assert abs(multidof_kernel(joint, dims) - want) < 1e-12


# ----------------------------------------------------------------- verdicts


def test_fidelity_verdict_threshold():
    assert multidof_fidelity_verdict(0.955, 2)
    assert not multidof_fidelity_verdict(0.7, 2)
    assert abs(1 / math.sqrt(2) - 0.7071067811865475) < 1e-15
    assert not multidof_fidelity_verdict(1 / math.sqrt(2), 2)  # strict
    with pytest.raises(ValueError):
        multidof_fidelity_verdict(0.9, 1)


def test_hyper_fidelity_of_ideal_state_is_one():
    psi = build_hyper_state((2, 2))
    assert abs(fidelity_with_pure(psi.density(), psi) - 1.0) < 1e-12
