"""Steering witness kernels built from modular outcome constraints.

A witness spec carries q terms. Term m fixes one measurement setting per
party (1 = computational basis, 2 = Fourier-conjugate basis) and a list of
modular constraints over the outcomes; its value on a state is the joint
probability that every constraint holds. The kernel is the sum over terms.
Optional per-party unitaries W_k rotate the measured bases, so locally
rotated witnesses are expressed by composition instead of by rewriting
constraint lists.

Party labels are 1-based in constraints and in the text format, matching the
graph layer.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph_states import ColoredGraph, validate_coloring
from .tensor_core import (
    Array,
    DensityOperator,
    LinearOperator,
    QuditRegister,
    StateVector,
    qft_matrix,
    register,
)

__all__ = [
    "Constraint",
    "WitnessTerm",
    "WitnessSpec",
    "SteeringReport",
    "spec_from_graph",
    "apply_local_conjugation",
    "relabel_parties",
    "effective_basis",
    "term_projector",
    "kernel_operator",
    "term_probabilities",
    "evaluate_kernel",
    "report",
    "sample_term_probability",
    "format_spec",
    "parse_spec",
    "specs_equal",
]

SETTINGS = (1, 2)


@dataclass(frozen=True)
class Constraint:
    """Modular relation: sum of listed outcomes == target (mod modulus).

    participants lists (party, setting) pairs, parties 1-based.
    """

    participants: tuple[tuple[int, int], ...]
    modulus: int
    target: int = 0

    def __post_init__(self) -> None:
        parts = tuple((int(p), int(s)) for p, s in self.participants)
        if not parts:
            raise ValueError("constraint needs at least one participant")
        labels = [p for p, _ in parts]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate party in constraint participants {parts}")
        if any(p < 1 for p in labels):
            raise ValueError("party labels are 1-based")
        if any(s not in SETTINGS for _, s in parts):
            raise ValueError("settings must be 1 (computational) or 2 (conjugate)")
        if self.modulus < 2:
            raise ValueError("modulus must be >= 2")
        if not (0 <= self.target < self.modulus):
            raise ValueError(f"target {self.target} outside 0..{self.modulus - 1}")
        object.__setattr__(self, "participants", parts)


@dataclass(frozen=True)
class WitnessTerm:
    """One global setting assignment plus the constraints checked under it."""

    settings: tuple[int, ...]
    constraints: tuple[Constraint, ...]

    def __post_init__(self) -> None:
        settings = tuple(int(s) for s in self.settings)
        if not settings:
            raise ValueError("term needs at least one party")
        if any(s not in SETTINGS for s in settings):
            raise ValueError("settings must be 1 or 2")
        object.__setattr__(self, "settings", settings)
        object.__setattr__(self, "constraints", tuple(self.constraints))
        if not self.constraints:
            raise ValueError("term needs at least one constraint")
        n = len(settings)
        for c in self.constraints:
            for party, setting in c.participants:
                if party > n:
                    raise ValueError(f"constraint references party {party} of {n}")
                if setting != settings[party - 1]:
                    raise ValueError(
                        f"constraint uses setting {setting} for party {party}, "
                        f"term assigns {settings[party - 1]}"
                    )


def _wrap_unitary(d: int, u: LinearOperator | Array | None) -> LinearOperator | None:
    if u is None:
        return None
    mat = u.matrix if isinstance(u, LinearOperator) else np.asarray(u, dtype=complex)
    op = LinearOperator(register(d), mat)
    if not op.is_unitary():
        raise ValueError("party rotation is not unitary")
    return op


@dataclass(frozen=True)
class WitnessSpec:
    """Terms over a register, with optional per-party basis rotations W_k.

    Party k's effective setting-s basis is W_k applied to the reference
    basis (computational for s=1, Fourier-conjugate for s=2).
    """

    register: QuditRegister
    terms: tuple[WitnessTerm, ...]
    party_unitaries: tuple[LinearOperator | None, ...] = field(default=())

    def __post_init__(self) -> None:
        object.__setattr__(self, "terms", tuple(self.terms))
        if not self.terms:
            raise ValueError("witness needs at least one term")
        dims = self.register.dims
        n = len(dims)
        for term in self.terms:
            if len(term.settings) != n:
                raise ValueError("term settings length must match party count")
            for c in term.constraints:
                for party, _ in c.participants:
                    if c.modulus != dims[party - 1]:
                        raise ValueError(
                            f"constraint modulus {c.modulus} does not match "
                            f"dimension {dims[party - 1]} of party {party}"
                        )
        units = self.party_unitaries
        if not units:
            units = (None,) * n
        if len(units) != n:
            raise ValueError("party_unitaries length must match party count")
        wrapped = tuple(_wrap_unitary(dims[k], units[k]) for k in range(n))
        object.__setattr__(self, "party_unitaries", wrapped)

    @property
    def q(self) -> int:
        return len(self.terms)

    @property
    def n_parties(self) -> int:
        return self.register.n_parties


@dataclass(frozen=True)
class SteeringReport:
    """Kernel value against a classical bound, with the fidelity window."""

    q: int
    d: int
    kernel_value: float
    classical_bound: float
    steerable: bool
    margin: float
    fidelity_lower: float
    fidelity_upper: float


def spec_from_graph(graph: ColoredGraph) -> WitnessSpec:
    """One term per color class: measured vertices check their neighborhoods.

    Term m sets every vertex of class m to the conjugate basis and all others
    to the computational basis; each measured vertex j contributes the
    constraint v_j + sum of neighbor outcomes == 0 (mod d).
    """
    bad = validate_coloring(graph)
    if bad:
        raise ValueError(f"improper coloring; violating edges {bad}")
    if graph.q < 2:
        raise ValueError("witness construction needs at least two color classes")
    terms = []
    for cls in graph.colors:
        members = set(cls)
        settings = tuple(2 if v in members else 1 for v in range(1, graph.n + 1))
        constraints = tuple(
            Constraint(
                participants=((j, 2),) + tuple((i, 1) for i in graph.neighbors(j)),
                modulus=graph.d,
            )
            for j in cls
        )
        terms.append(WitnessTerm(settings, constraints))
    return WitnessSpec(graph.register(), tuple(terms))


def apply_local_conjugation(
    spec: WitnessSpec, unitaries: dict[int, LinearOperator | Array]
) -> WitnessSpec:
    """Compose extra rotations onto chosen parties (1-based keys).

    The returned spec evaluated on V rho V^dag (V the product of the given
    local unitaries) equals the original spec on rho.
    """
    dims = spec.register.dims
    new_units = list(spec.party_unitaries)
    for party, u in unitaries.items():
        if not (1 <= party <= len(dims)):
            raise ValueError(f"party {party} outside 1..{len(dims)}")
        extra = _wrap_unitary(dims[party - 1], u)
        current = new_units[party - 1]
        if current is None:
            new_units[party - 1] = extra
        else:
            new_units[party - 1] = LinearOperator(
                current.register, extra.matrix @ current.matrix
            )
    return WitnessSpec(spec.register, spec.terms, tuple(new_units))


def relabel_parties(spec: WitnessSpec, mapping: dict[int, int]) -> WitnessSpec:
    """Permute party labels; mapping sends old label to new label (1-based)."""
    n = spec.n_parties
    if sorted(mapping) != list(range(1, n + 1)) or sorted(mapping.values()) != list(
        range(1, n + 1)
    ):
        raise ValueError("mapping must be a bijection on 1..n")
    dims = spec.register.dims
    for old, new in mapping.items():
        if dims[old - 1] != dims[new - 1]:
            raise ValueError("relabeling must preserve local dimensions")
    new_terms = []
    for term in spec.terms:
        settings = [0] * n
        for old in range(1, n + 1):
            settings[mapping[old] - 1] = term.settings[old - 1]
        constraints = tuple(
            Constraint(
                tuple((mapping[p], s) for p, s in c.participants), c.modulus, c.target
            )
            for c in term.constraints
        )
        new_terms.append(WitnessTerm(tuple(settings), constraints))
    new_units: list[LinearOperator | None] = [None] * n
    for old in range(1, n + 1):
        new_units[mapping[old] - 1] = spec.party_unitaries[old - 1]
    return WitnessSpec(spec.register, tuple(new_terms), tuple(new_units))


def _reference_basis_matrix(d: int, setting: int) -> Array:
    """Columns are the setting's basis vectors: identity or F^dagger."""
    if setting == 1:
        return np.eye(d, dtype=complex)
    if setting == 2:
        return qft_matrix(d).matrix.conj().T
    raise ValueError(f"setting must be 1 or 2, got {setting}")


def _party_basis_matrix(spec: WitnessSpec, party: int, setting: int) -> Array:
    d = spec.register.dims[party - 1]
    base = _reference_basis_matrix(d, setting)
    w = spec.party_unitaries[party - 1]
    return base if w is None else w.matrix @ base


def effective_basis(spec: WitnessSpec, party: int, setting: int) -> list[StateVector]:
    """Measured basis vectors of one party, with its rotation applied."""
    if not (1 <= party <= spec.n_parties):
        raise ValueError(f"party {party} outside 1..{spec.n_parties}")
    mat = _party_basis_matrix(spec, party, setting)
    reg = register(spec.register.dims[party - 1])
    return [StateVector(reg, mat[:, k]) for k in range(mat.shape[1])]


def _term_basis_matrix(spec: WitnessSpec, term: WitnessTerm) -> Array:
    v = np.ones((1, 1), dtype=complex)
    for party in range(1, spec.n_parties + 1):
        v = np.kron(v, _party_basis_matrix(spec, party, term.settings[party - 1]))
    return v


def _constraint_mask(term: WitnessTerm, dims: tuple[int, ...]) -> np.ndarray:
    total_dim = int(np.prod(dims))
    digits = np.unravel_index(np.arange(total_dim), dims)
    mask = np.ones(total_dim, dtype=bool)
    for c in term.constraints:
        acc = np.zeros(total_dim, dtype=np.int64)
        for party, _ in c.participants:
            acc += digits[party - 1]
        mask &= (acc % c.modulus) == c.target
    return mask


def term_projector(
    term: WitnessTerm, reg: QuditRegister, spec: WitnessSpec | None = None
) -> LinearOperator:
    """Projector onto the outcome subspace a term accepts.

    Pass the owning spec to honor its party rotations; without it the
    reference bases are used.
    """
    if spec is None:
        spec = WitnessSpec(reg, (term,))
    v = _term_basis_matrix(spec, term)
    cols = v[:, _constraint_mask(term, reg.dims)]
    return LinearOperator(reg, cols @ cols.conj().T)


def kernel_operator(spec: WitnessSpec) -> LinearOperator:
    """Sum of the term projectors; the kernel is its expectation value."""
    total = np.zeros((spec.register.total_dim,) * 2, dtype=complex)
    for term in spec.terms:
        total += term_projector(term, spec.register, spec).matrix
    return LinearOperator(spec.register, total)


def _check_register(spec: WitnessSpec, state: StateVector | DensityOperator) -> None:
    if state.register.dims != spec.register.dims:
        raise ValueError(
            f"state register {state.register.dims} does not match "
            f"spec register {spec.register.dims}"
        )


def term_probabilities(
    spec: WitnessSpec, state: StateVector | DensityOperator
) -> list[float]:
    """Per-term joint success probabilities, in term order."""
    _check_register(spec, state)
    out = []
    for term in spec.terms:
        v = _term_basis_matrix(spec, term)
        cols = v[:, _constraint_mask(term, spec.register.dims)]
        if isinstance(state, StateVector):
            amps = cols.conj().T @ state.amplitudes
            out.append(float(np.real(np.vdot(amps, amps))))
        else:
            block = cols.conj().T @ state.matrix @ cols
            out.append(float(np.trace(block).real))
    return out


def evaluate_kernel(spec: WitnessSpec, state: StateVector | DensityOperator) -> float:
    """Kernel value: sum of the per-term probabilities."""
    return float(sum(term_probabilities(spec, state)))


def report(
    spec: WitnessSpec,
    state: StateVector | DensityOperator,
    bound: float | None = None,
) -> SteeringReport:
    """Evaluate and compare against a classical bound (closed form if omitted)."""
    dims = set(spec.register.dims)
    if len(dims) != 1:
        raise ValueError("report needs a uniform local dimension")
    d = dims.pop()
    if bound is None:
        from .classical_bound import closed_form_bound

        bound = closed_form_bound(spec.q, d)
    from .fidelity_bounds import sandwich

    value = evaluate_kernel(spec, state)
    window = sandwich(value, spec.q, d)
    return SteeringReport(
        q=spec.q,
        d=d,
        kernel_value=value,
        classical_bound=float(bound),
        steerable=value > bound,
        margin=value - float(bound),
        fidelity_lower=window.lower,
        fidelity_upper=window.upper,
    )


def sample_term_probability(
    spec: WitnessSpec,
    term_index: int,
    state: StateVector | DensityOperator,
    shots: int,
    seed: int,
) -> float:
    """Finite-shot estimate of one term probability.

    Draws measurement outcomes from the exact joint distribution with a
    counter-based generator. This is a statistical cross-check for the exact
    projector route, not a production path.
    """
    _check_register(spec, state)
    if shots < 1:
        raise ValueError("shots must be positive")
    term = spec.terms[term_index]
    v = _term_basis_matrix(spec, term)
    if isinstance(state, StateVector):
        amps = v.conj().T @ state.amplitudes
        probs = np.real(amps.conj() * amps)
    else:
        probs = np.real(np.einsum("ji,jk,ki->i", v.conj(), state.matrix, v))
    probs = np.clip(probs, 0.0, None)
    total = probs.sum()
    if abs(total - 1.0) > 1e-8:
        raise ValueError(f"outcome distribution sums to {total}, expected 1")
    probs /= total
    rng = np.random.Generator(np.random.Philox(seed))
    counts = rng.multinomial(shots, probs)
    mask = _constraint_mask(term, spec.register.dims)
    return float(counts[mask].sum() / shots)


def _format_complex(z: complex) -> str:
    re, im = float(np.real(z)), float(np.imag(z))
    sign = "+" if (im >= 0 or np.isnan(im)) else "-"
    return f"{re!r}{sign}{abs(im)!r}j"


def format_spec(spec: WitnessSpec) -> str:
    """Text form of a spec; parse_spec inverts it exactly."""
    lines = ["register = " + " ".join(str(d) for d in spec.register.dims)]
    for term in spec.terms:
        lines.append("begin term")
        lines.append("settings = " + " ".join(str(s) for s in term.settings))
        for c in term.constraints:
            parts = " ".join(f"{p}:{s}" for p, s in c.participants)
            lines.append(f"constraint = {parts} mod {c.modulus} target {c.target}")
        lines.append("end term")
    for party, w in enumerate(spec.party_unitaries, start=1):
        if w is None:
            continue
        lines.append(f"begin unitary {party}")
        for row in w.matrix:
            lines.append("row = " + " ".join(_format_complex(z) for z in row))
        lines.append("end unitary")
    return "\n".join(lines) + "\n"


def parse_spec(text: str) -> WitnessSpec:
    """Inverse of format_spec. Floats round-trip bit-exactly via repr."""
    dims: tuple[int, ...] | None = None
    terms: list[WitnessTerm] = []
    unitaries: dict[int, Array] = {}
    mode: str | None = None
    settings: tuple[int, ...] | None = None
    constraints: list[Constraint] = []
    rows: list[list[complex]] = []
    unitary_party = 0

    def fail(line: str, why: str) -> ValueError:
        return ValueError(f"{why}: {line!r}")

    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("register ="):
            if dims is not None:
                raise fail(line, "duplicate register line")
            dims = tuple(int(tok) for tok in line.partition("=")[2].split())
        elif line == "begin term":
            if mode is not None:
                raise fail(line, "nested block")
            mode, settings, constraints = "term", None, []
        elif line == "end term":
            if mode != "term" or settings is None:
                raise fail(line, "end term outside a term block")
            terms.append(WitnessTerm(settings, tuple(constraints)))
            mode = None
        elif line.startswith("begin unitary"):
            if mode is not None:
                raise fail(line, "nested block")
            mode, rows = "unitary", []
            unitary_party = int(line.split()[2])
        elif line == "end unitary":
            if mode != "unitary":
                raise fail(line, "end unitary outside a unitary block")
            unitaries[unitary_party] = np.array(rows, dtype=complex)
            mode = None
        elif line.startswith("settings =") and mode == "term":
            settings = tuple(int(tok) for tok in line.partition("=")[2].split())
        elif line.startswith("constraint =") and mode == "term":
            body = line.partition("=")[2].strip()
            head, _, tail = body.partition(" mod ")
            mod_tok, _, target_tok = tail.partition(" target ")
            participants = []
            for tok in head.split():
                p, _, s = tok.partition(":")
                participants.append((int(p), int(s)))
            constraints.append(
                Constraint(tuple(participants), int(mod_tok), int(target_tok))
            )
        elif line.startswith("row =") and mode == "unitary":
            rows.append([complex(tok) for tok in line.partition("=")[2].split()])
        else:
            raise fail(line, "unrecognized line")
    if mode is not None:
        raise ValueError(f"unterminated {mode} block")
    if dims is None:
        raise ValueError("missing register line")
    units: list[LinearOperator | Array | None] = [None] * len(dims)
    for party, mat in unitaries.items():
        if not (1 <= party <= len(dims)):
            raise ValueError(f"unitary party {party} outside 1..{len(dims)}")
        units[party - 1] = mat
    return WitnessSpec(QuditRegister(dims), tuple(terms), tuple(units))


def specs_equal(a: WitnessSpec, b: WitnessSpec, tol: float = 0.0) -> bool:
    """Structural equality; unitary entries compared within tol (exact at 0)."""
    if a.register.dims != b.register.dims or a.terms != b.terms:
        return False
    for wa, wb in zip(a.party_unitaries, b.party_unitaries):
        if (wa is None) != (wb is None):
            return False
        if wa is not None and wb is not None:
            if tol == 0.0:
                if not np.array_equal(wa.matrix, wb.matrix):
                    return False
            elif np.max(np.abs(wa.matrix - wb.matrix)) > tol:
                return False
    return True
