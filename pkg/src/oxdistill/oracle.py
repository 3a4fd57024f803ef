"""Dense density-matrix reference for one purification round.

Qubit order for two pairs is ``(Alice_1, Bob_1, Alice_2, Bob_2)``, big-endian,
so ``tensor_pairs(r1, r2) = kron(r1, r2)``.  Everything here works on plain
numpy matrices and never uses the closed-form recurrences, so it can be used
to check them.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product

import numpy as np

from .bell import (
    ATOL,
    PAULIS,
    CorrelationTriple,
    LocalRotation,
    check_density_matrix,
    from_density_matrix,
    to_density_matrix,
)
from .protocol import (
    MIN_SUCCESS_PROBABILITY,
    NOISELESS,
    AlwaysDiscardedError,
    NoiseModel,
    StepResult,
    Variant,
)

PAULI_LABELS = ("1", "x", "y", "z")
_P0 = np.diag([1.0, 0.0]).astype(complex)
_P1 = np.diag([0.0, 1.0]).astype(complex)


def embed(ops: dict[int, np.ndarray], n_qubits: int) -> np.ndarray:
    """Kronecker product placing ``ops[q]`` on qubit ``q`` and identity elsewhere."""
    out = np.ones((1, 1), dtype=complex)
    for q in range(n_qubits):
        out = np.kron(out, ops.get(q, PAULIS[0]))
    return out


def cnot(control: int, target: int, n_qubits: int) -> np.ndarray:
    return embed({control: _P0}, n_qubits) + embed({control: _P1, target: PAULIS[1]}, n_qubits)


def partial_trace(rho: np.ndarray, keep: list[int], n_qubits: int) -> np.ndarray:
    """Trace out every qubit not in ``keep`` (kept qubits stay in order)."""
    r = np.asarray(rho).reshape([2] * (2 * n_qubits))
    traced = [q for q in range(n_qubits) if q not in keep]
    # trace highest qubit first so remaining axis numbers stay valid
    for q in sorted(traced, reverse=True):
        n = r.ndim // 2
        r = np.trace(r, axis1=q, axis2=q + n)
    d = 2 ** len(keep)
    return r.reshape(d, d)


def tensor_pairs(s1: np.ndarray, s2: np.ndarray) -> np.ndarray:
    check_density_matrix(s1, 4)
    check_density_matrix(s2, 4)
    return np.kron(s1, s2)


@lru_cache(maxsize=1)
def _bcnot() -> np.ndarray:
    u = cnot(0, 2, 4) @ cnot(1, 3, 4)
    u.setflags(write=False)
    return u


def build_bcnot() -> np.ndarray:
    """Alice_1 -> Alice_2 and Bob_1 -> Bob_2 CNOTs; pair 1 holds the controls."""
    return _bcnot().copy()


def conjugate(u: np.ndarray, rho: np.ndarray) -> np.ndarray:
    return u @ rho @ u.conj().T


def pauli_decompose(op: np.ndarray) -> dict[str, complex]:
    """Coefficients of a two-qubit operator in the ``sigma_mu (x) sigma_nu`` basis."""
    out = {}
    for (i, p), (j, q) in product(enumerate(PAULIS), repeat=2):
        c = np.trace(np.kron(p, q).conj().T @ op) / 4
        if abs(c) > 1e-12:
            out[PAULI_LABELS[i] + PAULI_LABELS[j]] = complex(np.round(c, 12))
    return out


# Reference table as usually quoted for one side of the BCNOT: rows are the
# operator on the source qubit, columns on the target qubit.  Entries are
# (sign, source Pauli, target Pauli).
QUOTED_CNOT_TABLE = {
    ("1", "1"): (1, "1", "1"),
    ("1", "x"): (1, "x", "x"),
    ("1", "y"): (1, "y", "x"),
    ("1", "z"): (1, "z", "1"),
    ("x", "1"): (1, "1", "x"),
    ("x", "x"): (1, "x", "1"),
    ("x", "y"): (1, "1", "y"),
    ("x", "z"): (1, "z", "x"),
    ("y", "1"): (1, "z", "y"),
    ("y", "x"): (1, "y", "y"),
    ("y", "y"): (-1, "x", "z"),
    ("y", "z"): (1, "1", "y"),
    ("z", "1"): (1, "z", "z"),
    ("z", "x"): (-1, "y", "y"),
    ("z", "y"): (1, "x", "y"),
    ("z", "z"): (1, "1", "z"),
}


@dataclass(frozen=True)
class ConjugationEntry:
    source: str
    target: str
    sign: int
    out_source: str
    out_target: str
    quoted: tuple[int, str, str]

    @property
    def computed(self) -> tuple[int, str, str]:
        return (self.sign, self.out_source, self.out_target)

    @property
    def agrees(self) -> bool:
        return self.computed == self.quoted


def format_term(sign: int, source: str, target: str) -> str:
    """Render ``(sign, mu, nu)`` as e.g. ``-sy(1) sz(2)``."""
    parts = [f"s{lbl}({k})" for k, lbl in ((1, source), (2, target)) if lbl != "1"]
    return ("-" if sign < 0 else "") + (" ".join(parts) or "1")


def pauli_conjugation_table(control: int = 0) -> list[ConjugationEntry]:
    """Conjugate every ``sigma_mu(1) sigma_nu(2)`` by a single CNOT and diff with
    :data:`QUOTED_CNOT_TABLE`.

    ``control=0`` makes qubit 1 the control (the source qubit).  Each image must
    be one signed Pauli product; anything else raises.
    """
    u = cnot(control, 1 - control, 2)
    entries = []
    for (i, p), (j, q) in product(enumerate(PAULIS), repeat=2):
        terms = pauli_decompose(conjugate(u, np.kron(p, q)))
        if len(terms) != 1:
            raise AssertionError(f"image of {PAULI_LABELS[i]}{PAULI_LABELS[j]} is not a Pauli product")
        (label, coeff), = terms.items()
        if abs(coeff.imag) > 1e-12 or abs(abs(coeff.real) - 1) > 1e-12:
            raise AssertionError(f"non-unit coefficient {coeff}")
        key = (PAULI_LABELS[i], PAULI_LABELS[j])
        entries.append(
            ConjugationEntry(key[0], key[1], int(np.sign(coeff.real)), label[0], label[1],
                             QUOTED_CNOT_TABLE[key])
        )
    return entries


def depolarize_pair(rho: np.ndarray, p: float, qubit: int = 0) -> np.ndarray:
    """``rho -> p rho + (1-p) (rho with ``qubit`` replaced by I/2)`` on one pair."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p={p} outside [0, 1]")
    rho = np.asarray(rho)
    other = 1 - qubit
    marginal = partial_trace(rho, [other], 2)
    mixed = np.kron(PAULIS[0] / 2, marginal) if qubit == 0 else np.kron(marginal, PAULIS[0] / 2)
    return p * rho + (1 - p) * mixed


def noisy_bcnot(rho: np.ndarray, p: float) -> np.ndarray:
    """``p^2 U rho U^dagger + (1 - p^2) I/16``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p={p} outside [0, 1]")
    out = conjugate(_bcnot(), rho)
    if p == 1.0:
        return out
    return p * p * out + (1 - p * p) * np.eye(16) / 16


@lru_cache(maxsize=1)
def _coincidence_projector() -> np.ndarray:
    # targets (qubits 2, 3) both |0> or both |1>
    return embed({2: _P0, 3: _P0}, 4) + embed({2: _P1, 3: _P1}, 4)


def coincidence_project(rho: np.ndarray) -> tuple[np.ndarray, float]:
    """Post-select equal z outcomes on pair 2; return (normalised pair-1 state, N)."""
    proj = _coincidence_projector()
    kept = proj @ rho @ proj
    n = float(np.trace(kept).real)
    if n < MIN_SUCCESS_PROBABILITY:
        raise AlwaysDiscardedError(f"success probability {n:.3g}")
    reduced = partial_trace(kept, [0, 1], 4)
    return reduced / n, n


def oracle_step(
    s1: CorrelationTriple,
    s2: CorrelationTriple,
    variant: Variant = Variant.OX2,
    noise: NoiseModel = NOISELESS,
) -> StepResult:
    """Full 16x16 simulation of one round; the reference for ``analytic_step``."""
    variant = Variant(variant)
    r1, r2 = to_density_matrix(s1), to_density_matrix(s2)
    if variant is Variant.OX1:
        u = LocalRotation.U12X.unitary()
        r1, r2 = conjugate(u, r1), conjugate(u, r2)
    if noise.channel in ("transmission", "both"):
        r1, r2 = depolarize_pair(r1, noise.p), depolarize_pair(r2, noise.p)
    joint = tensor_pairs(r1, r2)
    gate_p = noise.p if noise.channel in ("gate", "both") else 1.0
    joint = noisy_bcnot(joint, gate_p)
    out, n = coincidence_project(joint)
    out = (out + out.conj().T) / 2
    return StepResult(from_density_matrix(out, atol=ATOL), n, variant, noise)
