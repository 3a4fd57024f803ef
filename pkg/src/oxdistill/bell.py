"""Bell-diagonal two-qubit states.

A Bell-diagonal state is stored as the signed triple ``(ax, ay, az)`` with

    rho = 1/4 (1 + ax XX + ay YY + az ZZ)

where ``XX`` is ``sigma_x (x) tau_x`` and so on (Alice's qubit first).  Two other
sign conventions are common and both are supported at the boundary:

* target frame ``(cx, cy, cz)``: ``rho = 1/4 (1 + cx XX - cy YY + cz ZZ)``.  The
  target state |Phi+> is ``(1, 1, 1)`` and the fidelity is ``(1 + cx + cy + cz)/4``.
  Maps as ``(ax, ay, az) = (cx, -cy, cz)``.
* minus form ``(cx, cy, cz)``: ``rho = 1/4 (1 - cx XX - cy YY - cz ZZ)``.  The
  singlet is ``(1, 1, 1)``.  Maps as ``(ax, ay, az) = (-cx, -cy, -cz)``.

Bell populations are labelled ``A, B, C, D = Phi+, Psi-, Psi+, Phi-``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

ATOL = 1e-10

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (PAULI_I, PAULI_X, PAULI_Y, PAULI_Z)


class DomainError(ValueError):
    """Parameters outside the physical domain (state would not be positive)."""


class NotBellDiagonalError(ValueError):
    """A density matrix has correlations outside the Bell-diagonal family."""


def _clean(x: float) -> float:
    # folds -0.0 into 0.0 so formatting is sign-stable
    return float(x) + 0.0


def _populations(ax, ay, az):
    return (
        0.25 * (1 + ax - ay + az),  # Phi+
        0.25 * (1 - ax - ay - az),  # Psi-
        0.25 * (1 + ax + ay - az),  # Psi+
        0.25 * (1 - ax + ay + az),  # Phi-
    )


@dataclass(frozen=True)
class BellPopulations:
    """Diagonal of a Bell-diagonal state in the Bell basis (A = Phi+ = fidelity)."""

    A: float
    B: float
    C: float
    D: float

    def __post_init__(self):
        vals = (self.A, self.B, self.C, self.D)
        if min(vals) < -ATOL or abs(sum(vals) - 1.0) > ATOL:
            raise DomainError(f"not a probability vector: {vals}")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.A, self.B, self.C, self.D)


@dataclass(frozen=True)
class CorrelationTriple:
    """Signed Pauli correlations ``(ax, ay, az)`` of a Bell-diagonal state."""

    ax: float
    ay: float
    az: float

    def __post_init__(self):
        for name in ("ax", "ay", "az"):
            v = _clean(getattr(self, name))
            if not math.isfinite(v) or abs(v) > 1.0 + ATOL:
                raise DomainError(f"{name}={v} outside [-1, 1]")
            object.__setattr__(self, name, v)
        pops = _populations(self.ax, self.ay, self.az)
        if min(pops) < -ATOL:
            raise DomainError(
                f"triple {self.as_tuple()} is not a state (Bell populations {pops})"
            )

    @classmethod
    def from_target_frame(cls, cx: float, cy: float, cz: float) -> CorrelationTriple:
        return cls(cx, -cy, cz)

    @classmethod
    def from_minus_form(cls, cx: float, cy: float, cz: float) -> CorrelationTriple:
        return cls(-cx, -cy, -cz)

    @property
    def target(self) -> tuple[float, float, float]:
        """The triple in the target frame (ideal state = ``(1, 1, 1)``)."""
        return (self.ax, _clean(-self.ay), self.az)

    @property
    def minus(self) -> tuple[float, float, float]:
        return (_clean(-self.ax), _clean(-self.ay), _clean(-self.az))

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.ax, self.ay, self.az)

    def as_array(self) -> np.ndarray:
        return np.array([self.ax, self.ay, self.az])

    def abs_sum(self) -> float:
        return abs(self.ax) + abs(self.ay) + abs(self.az)


IDEAL = CorrelationTriple(1.0, -1.0, 1.0)
MAXIMALLY_MIXED = CorrelationTriple(0.0, 0.0, 0.0)


def make_werner(t: float) -> CorrelationTriple:
    """Werner state ``1/4 [1 - t (XX + YY + ZZ)]``, singlet-centred.

    Valid for ``-1/3 <= t <= 1``; separable iff ``t <= 1/3``.
    """
    if not -1 / 3 - ATOL <= t <= 1 + ATOL:
        raise DomainError(f"Werner parameter t={t} outside [-1/3, 1]")
    return CorrelationTriple.from_minus_form(t, t, t)


def make_isotropic(fidelity: float) -> CorrelationTriple:
    """Werner state rotated onto the target: target frame ``(t, t, t)``.

    ``t = (4F - 1)/3``; this is ``make_werner(t)`` after a local ``sigma_y`` on
    Alice's qubit.
    """
    if not 0.0 - ATOL <= fidelity <= 1.0 + ATOL:
        raise DomainError(f"fidelity {fidelity} outside [0, 1]")
    t = (4 * fidelity - 1) / 3
    if t < -1 / 3 - ATOL:
        raise DomainError(f"fidelity {fidelity} gives no isotropic state")
    return CorrelationTriple.from_target_frame(t, t, t)


def make_binary(f: float) -> CorrelationTriple:
    """Rank-two state with populations ``f`` on Phi+ and ``1 - f`` on Psi+."""
    if not 0.0 < f <= 1.0:
        raise DomainError(f"binary weight f={f} outside (0, 1]")
    g = 2 * f - 1
    return CorrelationTriple.from_target_frame(1.0, g, g)


def fidelity(s: CorrelationTriple) -> float:
    """Overlap with the target |Phi+>."""
    return 0.25 * (1 + s.ax - s.ay + s.az)


def bell_populations(s: CorrelationTriple) -> BellPopulations:
    return BellPopulations(*_populations(s.ax, s.ay, s.az))


def separable_by_coefficients(cx: float, cy: float, cz: float) -> bool:
    """Coefficient test on minus-form numbers: ``sum |c| <= 1`` or ``cx cy cz <= 0``.

    Works on bare numbers and does not check that they describe a state.
    """
    return abs(cx) + abs(cy) + abs(cz) <= 1.0 + 1e-12 or cx * cy * cz <= 0.0


def partial_transpose(rho: np.ndarray, qubit: int = 1) -> np.ndarray:
    """Partial transpose of a two-qubit matrix on ``qubit`` (0 = Alice, 1 = Bob)."""
    r = np.asarray(rho).reshape(2, 2, 2, 2)
    if qubit == 0:
        r = r.transpose(2, 1, 0, 3)
    else:
        r = r.transpose(0, 3, 2, 1)
    return r.reshape(4, 4)


def ppt_min_eigenvalue(s: CorrelationTriple) -> float:
    return float(np.linalg.eigvalsh(partial_transpose(to_density_matrix(s))).min())


def is_separable(s: CorrelationTriple, method: str = "coefficients") -> bool:
    """PPT separability.

    ``method="coefficients"`` uses the closed-form test on the minus-form
    triple; ``method="ppt"`` diagonalises the partial transpose.
    """
    if method == "coefficients":
        return separable_by_coefficients(*s.minus)
    if method == "ppt":
        return ppt_min_eigenvalue(s) >= -ATOL
    raise ValueError(f"unknown method {method!r}")


def raw_separability(s: CorrelationTriple) -> float:
    """``3/2 - (|ax| + |ay| + |az|)/2`` with no clamping."""
    return 1.5 - 0.5 * s.abs_sum()


def degree_of_separability(s: CorrelationTriple) -> float:
    """0 for a maximally entangled state, 1 for every separable state."""
    if is_separable(s):
        return 1.0
    return raw_separability(s)


def to_density_matrix(s: CorrelationTriple) -> np.ndarray:
    rho = np.eye(4, dtype=complex)
    for a, p in zip(s.as_tuple(), PAULIS[1:]):
        rho = rho + a * np.kron(p, p)
    return rho / 4


def check_density_matrix(rho: np.ndarray, dim: int, atol: float = ATOL) -> np.ndarray:
    """Validate shape, hermiticity, unit trace and positivity; returns ``rho``."""
    rho = np.asarray(rho)
    if rho.shape != (dim, dim):
        raise ValueError(f"expected a {dim}x{dim} matrix, got {rho.shape}")
    if not np.allclose(rho, rho.conj().T, atol=atol, rtol=0):
        raise ValueError("matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > atol:
        raise ValueError(f"trace {np.trace(rho).real} != 1")
    if np.linalg.eigvalsh(rho).min() < -atol:
        raise ValueError("matrix is not positive semidefinite")
    return rho


def from_density_matrix(rho: np.ndarray, atol: float = ATOL) -> CorrelationTriple:
    """Extract ``(ax, ay, az)``; raise NotBellDiagonalError on any other Pauli weight."""
    rho = check_density_matrix(rho, 4, atol)
    diag = []
    for i, p in enumerate(PAULIS):
        for j, q in enumerate(PAULIS):
            if i == j == 0:
                continue
            val = np.trace(rho @ np.kron(p, q)).real
            if i == j:
                diag.append(val)
            elif abs(val) > atol:
                raise NotBellDiagonalError(
                    f"<{'IXYZ'[i]}{'IXYZ'[j]}> = {val:.3g} is nonzero"
                )
    return CorrelationTriple(*diag)


class LocalRotation(enum.Enum):
    """Local unitaries that keep the Bell-diagonal family closed.

    ``U1*`` / ``U2*`` are pi rotations (Pauli operators) on Alice's / Bob's
    qubit; each flips the two coefficients orthogonal to its axis.  ``U12*``
    are pi/2 rotations on both qubits that fix |Phi+> and swap the two
    target-frame coefficients orthogonal to the axis.
    """

    U1X = "U1x"
    U1Y = "U1y"
    U1Z = "U1z"
    U2X = "U2x"
    U2Y = "U2y"
    U2Z = "U2z"
    U12X = "U12x"
    U12Y = "U12y"
    U12Z = "U12z"

    def unitary(self) -> np.ndarray:
        return _unitary(self)


@lru_cache(maxsize=None)
def _unitary(r: LocalRotation) -> np.ndarray:
    _, x, y, z = PAULIS
    one = PAULI_I
    single = {"U1X": np.kron(x, one), "U1Y": np.kron(y, one), "U1Z": np.kron(z, one),
              "U2X": np.kron(one, x), "U2Y": np.kron(one, y), "U2Z": np.kron(one, z)}
    if r.name in single:
        return single[r.name]

    def half_turn(p, sign):
        # exp(i pi sign p / 4) for a Pauli p
        return (np.eye(2) + 1j * sign * p) / math.sqrt(2)

    if r is LocalRotation.U12X:
        return np.kron(half_turn(x, 1), half_turn(x, -1))
    if r is LocalRotation.U12Y:
        return np.kron(half_turn(y, 1), half_turn(y, 1))
    return np.kron(half_turn(z, 1), half_turn(z, -1))


_COEFF_MAPS = {
    LocalRotation.U1X: lambda ax, ay, az: (ax, -ay, -az),
    LocalRotation.U2X: lambda ax, ay, az: (ax, -ay, -az),
    LocalRotation.U1Y: lambda ax, ay, az: (-ax, ay, -az),
    LocalRotation.U2Y: lambda ax, ay, az: (-ax, ay, -az),
    LocalRotation.U1Z: lambda ax, ay, az: (-ax, -ay, az),
    LocalRotation.U2Z: lambda ax, ay, az: (-ax, -ay, az),
    LocalRotation.U12X: lambda ax, ay, az: (ax, -az, -ay),
    LocalRotation.U12Y: lambda ax, ay, az: (az, ay, ax),
    LocalRotation.U12Z: lambda ax, ay, az: (-ay, -ax, az),
}


def apply_local_rotation(s: CorrelationTriple, r: LocalRotation) -> CorrelationTriple:
    """Exact coefficient action of ``rho -> U rho U^dagger``."""
    return CorrelationTriple(*_COEFF_MAPS[r](s.ax, s.ay, s.az))


# swaps of target-frame positions
_SWAPS = {(1, 2): LocalRotation.U12X, (0, 2): LocalRotation.U12Y, (0, 1): LocalRotation.U12Z}


def canonicalize(s: CorrelationTriple) -> tuple[CorrelationTriple, list[LocalRotation]]:
    """Sort target-frame magnitudes into descending order and make cx, cy >= 0.

    cz ends up >= 0 whenever the state has an all-positive representative.
    Returns the canonical triple and the rotations (applied in order) that
    produce it.  Canonical input yields an empty witness.
    """
    rotations: list[LocalRotation] = []
    cur = s

    def mags(t):
        return [abs(v) for v in t.target]

    for i, j in ((0, 1), (0, 2), (1, 2)):
        m = mags(cur)
        if m[j] > m[i]:
            r = _SWAPS[(i, j)]
            cur = apply_local_rotation(cur, r)
            rotations.append(r)

    cx, cy, _ = cur.target
    flip = None
    if cx < 0 and cy < 0:
        flip = LocalRotation.U1Z
    elif cx < 0:
        flip = LocalRotation.U1Y
    elif cy < 0:
        flip = LocalRotation.U1X
    if flip is not None:
        cur = apply_local_rotation(cur, flip)
        rotations.append(flip)
    return cur, rotations
