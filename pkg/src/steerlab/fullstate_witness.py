"""Witnesses built from full knowledge of a pure qubit target state.

The target projector is expanded in Pauli strings, then every string factor
is rewritten as a signed sum over the two projectors of its measurement
basis (identity factors become equal-weight computational outcomes). The
resulting kernel is a linear combination of joint outcome probabilities that
reproduces the target fidelity exactly. Qubits only.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .tensor_core import (
    Array,
    DensityOperator,
    LinearOperator,
    StateVector,
    hermitian_max_eigenvalue,
    uniform_register,
)

__all__ = [
    "TomographicTerm",
    "TomographicStrategy",
    "OBSERVABLES",
    "W_STATE_BOUND",
    "w_state",
    "ghz_state",
    "decompose",
    "witness_operator",
    "evaluate_fullstate_kernel",
    "wstate_verdict",
    "brute_force_fullstate_bound",
    "format_terms",
]

OBSERVABLES = "zxy"

W_STATE_BOUND = (1.0 + math.sqrt(2.0)) / 3.0

_SQ2 = 1.0 / math.sqrt(2.0)

_PAULI = {
    "i": np.eye(2, dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}

_BASIS_VECTORS = {
    "z": (
        np.array([1.0, 0.0], dtype=complex),
        np.array([0.0, 1.0], dtype=complex),
    ),
    "x": (
        np.array([_SQ2, _SQ2], dtype=complex),
        np.array([_SQ2, -_SQ2], dtype=complex),
    ),
    "y": (
        np.array([_SQ2, 1j * _SQ2], dtype=complex),
        np.array([_SQ2, -1j * _SQ2], dtype=complex),
    ),
}

_COEFF_TOL = 1e-13


@dataclass(frozen=True)
class TomographicTerm:
    """coefficient times the probability of seeing the listed outcomes.

    observables is one character per party from 'zxy'; outcomes are bits.
    """

    observables: str
    outcomes: tuple[int, ...]
    coefficient: float

    def __post_init__(self) -> None:
        if not self.observables:
            raise ValueError("term needs at least one party")
        if any(ch not in OBSERVABLES for ch in self.observables):
            raise ValueError(f"observables {self.observables!r} outside '{OBSERVABLES}'")
        if len(self.outcomes) != len(self.observables):
            raise ValueError("one outcome per observable required")
        if any(v not in (0, 1) for v in self.outcomes):
            raise ValueError("outcomes must be bits")


@dataclass(frozen=True)
class TomographicStrategy:
    """Cheating record for the tomographic witness.

    declared holds (party, observable, outcome) triples for untrusted parties.
    """

    untrusted_set: tuple[int, ...]
    declared: tuple[tuple[int, str, int], ...]


def w_state() -> StateVector:
    amps = np.zeros(8, dtype=complex)
    amps[0b001] = amps[0b010] = amps[0b100] = 1.0 / math.sqrt(3.0)
    return StateVector(uniform_register(3, 2), amps)


def ghz_state(n: int = 3) -> StateVector:
    if n < 2:
        raise ValueError("need at least 2 qubits")
    amps = np.zeros(2**n, dtype=complex)
    amps[0] = amps[-1] = 1.0 / math.sqrt(2.0)
    return StateVector(uniform_register(n, 2), amps)


def decompose(psi: StateVector) -> list[TomographicTerm]:
    """Signed projector expansion of |psi><psi| over the three qubit bases.

    Identity factors of the Pauli expansion are carried by the computational
    basis with both outcomes weighted equally; the frame is overcomplete, so
    other conventions shift coefficients without changing evaluations.
    """
    dims = psi.register.dims
    if any(d != 2 for d in dims):
        raise ValueError("tomographic decomposition is implemented for qubits only")
    n = len(dims)
    rho = np.outer(psi.amplitudes, psi.amplitudes.conj())
    acc: dict[tuple[str, tuple[int, ...]], float] = {}
    for string in itertools.product("ixyz", repeat=n):
        mat = np.ones((1, 1), dtype=complex)
        for ch in string:
            mat = np.kron(mat, _PAULI[ch])
        raw = np.trace(mat @ rho) / 2**n
        if abs(raw.imag) > 1e-12:
            raise ValueError(f"non-real Pauli coefficient {raw}")
        coeff = float(raw.real)
        if abs(coeff) < _COEFF_TOL:
            continue
        effective = "".join("z" if ch == "i" else ch for ch in string)
        for outcomes in itertools.product((0, 1), repeat=n):
            sign = 1.0
            for ch, v in zip(string, outcomes):
                if ch != "i" and v == 1:
                    sign = -sign
            key = (effective, outcomes)
            acc[key] = acc.get(key, 0.0) + coeff * sign
    terms = [
        TomographicTerm(obs, outcomes, c)
        for (obs, outcomes), c in sorted(acc.items())
        if abs(c) > _COEFF_TOL
    ]
    return terms


def _term_vector(term: TomographicTerm) -> Array:
    vec = np.ones(1, dtype=complex)
    for ch, v in zip(term.observables, term.outcomes):
        vec = np.kron(vec, _BASIS_VECTORS[ch][v])
    return vec


def _check_terms(terms: list[TomographicTerm]) -> int:
    if not terms:
        raise ValueError("empty term list")
    n = len(terms[0].observables)
    if any(len(t.observables) != n for t in terms):
        raise ValueError("terms disagree on party count")
    return n


def witness_operator(terms: list[TomographicTerm]) -> LinearOperator:
    """Sum of coefficient-weighted outcome projectors; equals the target projector."""
    n = _check_terms(terms)
    total = np.zeros((2**n, 2**n), dtype=complex)
    for term in terms:
        vec = _term_vector(term)
        total += term.coefficient * np.outer(vec, vec.conj())
    return LinearOperator(uniform_register(n, 2), total)


def evaluate_fullstate_kernel(
    terms: list[TomographicTerm], state: DensityOperator | StateVector
) -> float:
    """Signed sum of outcome probabilities; the target fidelity by construction."""
    n = _check_terms(terms)
    if state.register.dims != (2,) * n:
        raise ValueError(
            f"state register {state.register.dims} does not match {n} qubits"
        )
    value = 0.0
    for term in terms:
        vec = _term_vector(term)
        if isinstance(state, StateVector):
            amp = np.vdot(vec, state.amplitudes)
            prob = float(np.real(amp.conjugate() * amp))
        else:
            prob = float(np.real(np.vdot(vec, state.matrix @ vec)))
        value += term.coefficient * prob
    return value


def wstate_verdict(kernel_value: float) -> bool:
    """True iff the three-qubit W-state kernel certifies tripartite steering."""
    return kernel_value > W_STATE_BOUND


def brute_force_fullstate_bound(
    terms: list[TomographicTerm],
) -> tuple[float, TomographicStrategy]:
    """Bipartition cheating maximum for a tomographic witness.

    Same enumeration scheme as the modular-witness oracle: untrusted parties
    declare one outcome per observable, the trusted remainder holds a joint
    state, bitmask/lexicographic order with first-found ties. The value is a
    diagnostic to print beside externally stated bounds, not a verdict source.
    """
    n = _check_terms(terms)
    best = -math.inf
    best_strategy: TomographicStrategy | None = None
    for bits in range(1, 2**n - 1):
        a_parties = [p for p in range(1, n + 1) if bits >> (p - 1) & 1]
        b_parties = [p for p in range(1, n + 1) if not bits >> (p - 1) & 1]
        dim_b = 2 ** len(b_parties)
        slots = [(p, ch) for p in a_parties for ch in OBSERVABLES]
        for outcomes in itertools.product((0, 1), repeat=len(slots)):
            decl = dict(zip(slots, outcomes))
            op = np.zeros((dim_b, dim_b), dtype=complex)
            for term in terms:
                keep = True
                for p in a_parties:
                    ch = term.observables[p - 1]
                    if decl[(p, ch)] != term.outcomes[p - 1]:
                        keep = False
                        break
                if not keep:
                    continue
                vec = np.ones(1, dtype=complex)
                for p in b_parties:
                    ch = term.observables[p - 1]
                    vec = np.kron(vec, _BASIS_VECTORS[ch][term.outcomes[p - 1]])
                op += term.coefficient * np.outer(vec, vec.conj())
            value = hermitian_max_eigenvalue(op)
            if value > best:
                best = value
                best_strategy = TomographicStrategy(
                    tuple(a_parties),
                    tuple((p, ch, decl[(p, ch)]) for p, ch in slots),
                )
    assert best_strategy is not None
    return best, best_strategy


def format_terms(terms: list[TomographicTerm]) -> str:
    """Readable table: observable string, outcome string, coefficient."""
    lines = []
    for term in terms:
        outcome_str = "".join(str(v) for v in term.outcomes)
        lines.append(f"{term.observables} {outcome_str} {term.coefficient!r}")
    return "\n".join(lines) + "\n"
