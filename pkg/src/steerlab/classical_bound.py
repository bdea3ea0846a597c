"""Preexisting-state bounds for witness kernels.

Three routes: a closed form in (q, d), a two-projector eigenvalue expression
for q = 2, and a brute-force oracle that enumerates every bipartition into an
untrusted set A (declaring outcomes) and a trusted remainder B (holding an
optimal joint quantum state). Deterministic declared outcomes suffice: the
kernel is affine in the probability a randomized strategy assigns to each
declared-outcome map, so the maximum over the strategy polytope is attained
at a vertex, i.e. at a deterministic map.

For q >= 3 the two-projector eigenvalue expression and the closed form give
different numbers (2.618 vs 2.673 at q=3, d=2). The closed form is normative
for verdicts; eigenvalue_diagnostic reports the other number side by side
and nothing asserts their equality.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .tensor_core import CapExceeded, hermitian_max_eigenvalue, qft_matrix
from .witness_kernel import WitnessSpec, _party_basis_matrix

__all__ = [
    "CheatingStrategy",
    "gamma",
    "closed_form_bound",
    "eigenvalue_bound_q2",
    "eigenvalue_diagnostic",
    "brute_force_bound",
    "strategy_value",
    "BRUTE_FORCE_MAX_PARTIES",
    "BRUTE_FORCE_MAX_DIM",
]

BRUTE_FORCE_MAX_PARTIES = 4
BRUTE_FORCE_MAX_DIM = 3


@dataclass(frozen=True)
class CheatingStrategy:
    """Untrusted parties plus their declared outcomes.

    declared holds (party, term, outcome) triples; parties and terms are
    1-based, outcomes range over 0..d_party-1.
    """

    untrusted_set: tuple[int, ...]
    declared: tuple[tuple[int, int, int], ...]

    def __post_init__(self) -> None:
        if not self.untrusted_set:
            raise ValueError("untrusted set must be nonempty")
        object.__setattr__(self, "untrusted_set", tuple(sorted(self.untrusted_set)))
        object.__setattr__(self, "declared", tuple(sorted(self.declared)))

    def declared_map(self) -> dict[tuple[int, int], int]:
        return {(p, m): v for p, m, v in self.declared}


def gamma(q: int) -> int:
    """Recursion gamma_2 = 0, gamma_q = gamma_{q-1} + 2(q-3) + 1."""
    if q < 2:
        raise ValueError("q must be >= 2")
    value = 0
    for k in range(3, q + 1):
        value += 2 * (k - 3) + 1
    return value


def closed_form_bound(q: int, d: int) -> float:
    """Largest kernel value reachable without a shared entangled resource."""
    if q < 2:
        raise ValueError("q must be >= 2")
    if d < 2:
        raise ValueError("d must be >= 2")
    return 0.5 * (q + math.sqrt((2.0 * (q * q - 2 * q + 2) + gamma(q)) / d))


def _diagnostic_operator(q: int, d: int) -> np.ndarray:
    f = qft_matrix(d).matrix
    zero = np.zeros((d, d), dtype=complex)
    zero[0, 0] = 1.0
    return f.conj().T @ zero @ f + (q - 1) * zero


def eigenvalue_bound_q2(d: int) -> float:
    """Max eigenvalue of F'|0><0|F + |0><0| (F' the adjoint); equals the q=2 closed form."""
    if d < 2:
        raise ValueError("d must be >= 2")
    return hermitian_max_eigenvalue(_diagnostic_operator(2, d))


def eigenvalue_diagnostic(q: int, d: int) -> float:
    """Max eigenvalue of F'|0><0|F + (q-1)|0><0|.

    Coincides with closed_form_bound at q = 2 only; at q >= 3 it is a
    diagnostic number reported beside the closed form, never asserted equal.
    """
    if q < 2:
        raise ValueError("q must be >= 2")
    if d < 2:
        raise ValueError("d must be >= 2")
    return hermitian_max_eigenvalue(_diagnostic_operator(q, d))


def _residual_pieces(spec: WitnessSpec, b_parties: list[int]):
    """Per-term basis matrices on B plus constraint data split A/B."""
    dims = spec.register.dims
    dims_b = tuple(dims[p - 1] for p in b_parties)
    dim_b = int(np.prod(dims_b)) if b_parties else 1
    index_of = {p: i for i, p in enumerate(b_parties)}
    digits = (
        np.unravel_index(np.arange(dim_b), dims_b)
        if b_parties
        else (np.zeros(1, dtype=np.int64),)
    )
    pieces = []
    for term in spec.terms:
        v = np.ones((1, 1), dtype=complex)
        for p in b_parties:
            v = np.kron(v, _party_basis_matrix(spec, p, term.settings[p - 1]))
        constraints = []
        for c in term.constraints:
            a_parts = tuple(p for p, _ in c.participants if p not in index_of)
            b_sum = np.zeros(dim_b, dtype=np.int64)
            for p, _ in c.participants:
                if p in index_of:
                    b_sum += digits[index_of[p]]
            constraints.append((a_parts, b_sum % c.modulus, c.modulus, c.target))
        pieces.append((v, constraints))
    return dim_b, pieces


def _strategy_operator(dim_b, pieces, decl: dict[tuple[int, int], int]) -> np.ndarray:
    op = np.zeros((dim_b, dim_b), dtype=complex)
    for m, (v, constraints) in enumerate(pieces, start=1):
        mask = np.ones(dim_b, dtype=bool)
        for a_parts, b_sum, modulus, target in constraints:
            shift = sum(decl[(p, m)] for p in a_parts) % modulus
            mask &= b_sum == (target - shift) % modulus
        if mask.any():
            cols = v[:, mask]
            op += cols @ cols.conj().T
    return op


def _residual_key(pieces, decl: dict[tuple[int, int], int]) -> tuple:
    key = []
    for m, (_, constraints) in enumerate(pieces, start=1):
        key.append(
            tuple(
                (target - sum(decl[(p, m)] for p in a_parts)) % modulus
                for a_parts, _, modulus, target in constraints
            )
        )
    return tuple(key)


def brute_force_bound(
    spec: WitnessSpec,
    *,
    max_parties: int = BRUTE_FORCE_MAX_PARTIES,
    max_dim: int = BRUTE_FORCE_MAX_DIM,
) -> tuple[float, CheatingStrategy]:
    """Exhaustive maximum of the kernel over bipartition cheating strategies.

    Enumerates bipartitions by subset bitmask ascending and declared outcomes
    lexicographically (party-major, then term); ties keep the first find. For
    each strategy the trusted side holds one joint state, so its best value
    is the max eigenvalue of the summed residual projectors.
    """
    n = spec.n_parties
    dims = spec.register.dims
    if max_parties > BRUTE_FORCE_MAX_PARTIES or max_dim > BRUTE_FORCE_MAX_DIM:
        warnings.warn(
            "brute-force caps raised above defaults; strategy count is "
            "double-exponential",
            RuntimeWarning,
            stacklevel=2,
        )
    if n > max_parties:
        raise CapExceeded(f"{n} parties exceeds brute-force cap {max_parties}")
    if max(dims) > max_dim:
        raise CapExceeded(f"dimension {max(dims)} exceeds brute-force cap {max_dim}")
    q = spec.q
    best_value = -math.inf
    best_strategy: CheatingStrategy | None = None
    for bits in range(1, 2**n - 1):
        a_parties = [p for p in range(1, n + 1) if bits >> (p - 1) & 1]
        b_parties = [p for p in range(1, n + 1) if p not in set(a_parties)]
        dim_b, pieces = _residual_pieces(spec, b_parties)
        slots = [(p, m) for p in a_parties for m in range(1, q + 1)]
        ranges = [range(dims[p - 1]) for p, _ in slots]
        seen: set[tuple] = set()
        for outcomes in itertools.product(*ranges):
            decl = dict(zip(slots, outcomes))
            key = _residual_key(pieces, decl)
            if key in seen:
                continue
            seen.add(key)
            value = hermitian_max_eigenvalue(_strategy_operator(dim_b, pieces, decl))
            if value > best_value:
                best_value = value
                best_strategy = CheatingStrategy(
                    tuple(a_parties),
                    tuple((p, m, v) for (p, m), v in decl.items()),
                )
    assert best_strategy is not None
    return best_value, best_strategy


def strategy_value(spec: WitnessSpec, strategy: CheatingStrategy) -> float:
    """Replay one cheating strategy; used to audit brute_force_bound output."""
    n = spec.n_parties
    a_set = set(strategy.untrusted_set)
    if not a_set or a_set == set(range(1, n + 1)):
        raise ValueError("untrusted set must be a nonempty proper subset")
    b_parties = [p for p in range(1, n + 1) if p not in a_set]
    dim_b, pieces = _residual_pieces(spec, b_parties)
    decl = strategy.declared_map()
    for p in a_set:
        for m in range(1, spec.q + 1):
            if (p, m) not in decl:
                raise ValueError(f"strategy missing declared outcome for {(p, m)}")
    return hermitian_max_eigenvalue(_strategy_operator(dim_b, pieces, decl))
