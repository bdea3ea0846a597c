"""Tomographic witnesses from full pure-state knowledge (qubits)."""

import math

import numpy as np
import pytest

from steerlab.fullstate_witness import (
    W_STATE_BOUND,
    TomographicTerm,
    brute_force_fullstate_bound,
    decompose,
    evaluate_fullstate_kernel,
    format_terms,
    ghz_state,
    witness_operator,
    w_state,
    wstate_verdict,
)
from steerlab.noise_robustness import werner_mix
from steerlab.tensor_core import (
    StateVector,
    basis_state,
    fidelity_with_pure,
    random_state,
    register,
    uniform_register,
)


# ------------------------------------------------------------ target states


def test_w_state_amplitudes():
    psi = w_state()
    want = np.zeros(8)
    want[0b001] = want[0b010] = want[0b100] = 1 / math.sqrt(3)
    assert np.allclose(psi.amplitudes, want)


def test_ghz_state_amplitudes():
    psi = ghz_state(3)
    want = np.zeros(8)
    want[0] = want[7] = 1 / math.sqrt(2)
    assert np.allclose(psi.amplitudes, want)
    with pytest.raises(ValueError):
        ghz_state(1)


# ------------------------------------------------------------ decomposition


def test_w_state_decomposition_has_27_terms():
    terms = decompose(w_state())
    assert len(terms) == 27
    assert all(len(t.observables) == 3 for t in terms)


def test_decomposition_reconstructs_the_projector():
    for psi in (w_state(), ghz_state(3)):
        op = witness_operator(decompose(psi)).matrix
        want = np.outer(psi.amplitudes, psi.amplitudes.conj())
        assert np.max(np.abs(op - want)) < 1e-12


def test_decomposition_of_product_state_uses_z_only():
    psi = basis_state(uniform_register(2, 2), (0, 1))
    terms = decompose(psi)
    assert all(t.observables == "zz" for t in terms)
    value = evaluate_fullstate_kernel(terms, psi)
    assert abs(value - 1.0) < 1e-12


def test_decompose_rejects_qudits():
    with pytest.raises(ValueError):
        decompose(basis_state(register(3, 3), (0, 0)))


def test_term_validation():
    TomographicTerm("zx", (0, 1), 0.25)
    with pytest.raises(ValueError):
        TomographicTerm("", (), 1.0)
    with pytest.raises(ValueError):
        TomographicTerm("za", (0, 0), 1.0)
    with pytest.raises(ValueError):
        TomographicTerm("zz", (0,), 1.0)
    with pytest.raises(ValueError):
        TomographicTerm("zz", (0, 2), 1.0)


# ---------------------------------------------------------------- evaluation


def test_kernel_equals_fidelity_on_seeded_cases():
    for n in (2, 3):
        reg = uniform_register(n, 2)
        for seed in range(10):
            target = random_state(reg, seed=1000 + seed, kind="pure")
            terms = decompose(target)
            rho = random_state(reg, seed=2000 + seed, kind="mixed")
            got = evaluate_fullstate_kernel(terms, rho)
            want = fidelity_with_pure(rho, target)
            assert abs(got - want) < 1e-10


def test_kernel_accepts_state_vectors():
    psi = w_state()
    terms = decompose(psi)
    assert abs(evaluate_fullstate_kernel(terms, psi) - 1.0) < 1e-12


def test_kernel_checks_register():
    terms = decompose(w_state())
    with pytest.raises(ValueError):
        evaluate_fullstate_kernel(terms, random_state(uniform_register(2, 2), seed=0))
    with pytest.raises(ValueError):
        evaluate_fullstate_kernel([], w_state())


def test_werner_kernel_is_affine():
    psi = w_state()
    terms = decompose(psi)
    for p in (0.0, 0.3, 1.0):
        got = evaluate_fullstate_kernel(terms, werner_mix(psi, p))
        assert abs(got - (1 - p + p / 8)) < 1e-12


# ------------------------------------------------------------------ verdict


def test_wstate_verdict_and_bound():
    assert abs(W_STATE_BOUND - (1 + math.sqrt(2)) / 3) < 1e-15
    assert wstate_verdict(1.0)
    assert not wstate_verdict(W_STATE_BOUND)  # strict inequality
    assert not wstate_verdict(0.5)


def test_werner_flip_point_by_bisection():
    psi = w_state()
    terms = decompose(psi)
    lo, hi = 0.0, 1.0
    while hi - lo > 1e-10:
        mid = (lo + hi) / 2
        if wstate_verdict(evaluate_fullstate_kernel(terms, werner_mix(psi, mid))):
            lo = mid
        else:
            hi = mid
    flip = (lo + hi) / 2
    assert abs(flip - 0.2231566) < 1e-6
    # affine closed form for the crossing of 1 - 7p/8 with the bound
    assert abs(flip - 8 * (1 - W_STATE_BOUND) / 7) < 1e-9


# ---------------------------------------------------------- brute diagnostic


def test_brute_force_diagnostic_frozen_value():
    # Independently enumerated bipartition optimum for the W-state witness.
    value, strategy = brute_force_fullstate_bound(decompose(w_state()))
    assert abs(value - 0.8047378541243654) < 1e-9
    untrusted = set(strategy.untrusted_set)
    assert untrusted and untrusted < {1, 2, 3}
    slots = {(p, ch) for p, ch, _ in strategy.declared}
    assert slots == {(p, ch) for p in untrusted for ch in "zxy"}


def test_brute_force_on_bell_target():
    # Hand derivation: declaring one side leaves (I + X - Y + Z)/4 on the
    # other up to sign choices, so the optimum is (1 + sqrt 3)/4.
    reg = uniform_register(2, 2)
    bell = StateVector(reg, np.array([1.0, 0.0, 0.0, 1.0]) / math.sqrt(2))
    value, strategy = brute_force_fullstate_bound(decompose(bell))
    assert abs(value - (1 + math.sqrt(3)) / 4) < 1e-12
    assert strategy.untrusted_set == (1,)


def test_brute_force_is_deterministic():
    terms = decompose(w_state())
    a = brute_force_fullstate_bound(terms)
    b = brute_force_fullstate_bound(terms)
    assert a == b


# ------------------------------------------------------------------- output


def test_format_terms_lists_each_term():
    terms = decompose(w_state())
    text = format_terms(terms)
    lines = text.strip().split("\n")
    assert len(lines) == 27
    obs, outcomes, coeff = lines[0].split()
    assert set(obs) <= set("zxy")
    assert set(outcomes) <= {"0", "1"}
    float(coeff)
