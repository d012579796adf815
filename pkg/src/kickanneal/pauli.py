"""Qubit register conventions and matrix-free Pauli-string kernels.

Basis indices are little-endian: qubit ``q`` is bit ``q`` of the index, so
qubit 0 is the least-significant bit. System qubits occupy the low bits
``0..n_system-1`` and ancillas the high bits, which makes the ancilla
partial trace a sum over contiguous blocks. ``Z|0> = +|0>``.

Besides X, Y and Z a fourth single-qubit label ``XY`` stands for
``(X + Y)/sqrt(2)``; it is Hermitian, squares to the identity and so behaves
like any other Pauli factor inside closed-form rotations.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

from .exceptions import ConfigurationError, NormalizationError

MAX_QUBITS = 24
MAX_DENSE_QUBITS = 10
LABELS = ("X", "Y", "Z", "XY")

_SQRT_HALF = 1.0 / np.sqrt(2.0)

SINGLE_QUBIT = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "XY": _SQRT_HALF * np.array([[0, 1 - 1j], [1 + 1j, 0]], dtype=complex),
}

# phase picked up by |b> under each label, indexed by the bit value b
_PHASES = {
    "X": (1.0, 1.0),
    "Y": (1j, -1j),
    "Z": (1.0, -1.0),
    "XY": ((1 + 1j) * _SQRT_HALF, (1 - 1j) * _SQRT_HALF),
}


@dataclass(frozen=True)
class QubitRegister:
    """System qubits first, then ancillas."""

    n_system: int
    n_ancilla: int = 0

    def __post_init__(self):
        if int(self.n_system) != self.n_system or self.n_system < 1:
            raise ConfigurationError(f"n_system must be an integer >= 1, got {self.n_system}")
        if int(self.n_ancilla) != self.n_ancilla or self.n_ancilla < 0:
            raise ConfigurationError(f"n_ancilla must be an integer >= 0, got {self.n_ancilla}")
        if self.n_system + self.n_ancilla > MAX_QUBITS:
            raise ConfigurationError(
                f"register of {self.n_system + self.n_ancilla} qubits exceeds the {MAX_QUBITS}-qubit cap"
            )

    @property
    def n_qubits(self) -> int:
        return self.n_system + self.n_ancilla

    @property
    def dim(self) -> int:
        return 1 << self.n_qubits

    @property
    def system_dim(self) -> int:
        return 1 << self.n_system

    @property
    def ancilla_dim(self) -> int:
        return 1 << self.n_ancilla

    def system_qubits(self) -> range:
        return range(self.n_system)

    def ancilla_qubits(self) -> range:
        return range(self.n_system, self.n_qubits)

    def system_only(self) -> "QubitRegister":
        return QubitRegister(self.n_system, 0)


@dataclass(frozen=True)
class PauliString:
    """``coeff`` times a tensor product of single-qubit factors.

    ``factors`` maps qubit index to one of ``X``, ``Y``, ``Z`` or ``XY``;
    qubits not listed carry the identity. An empty map is the identity term.
    """

    coeff: float
    factors: Mapping[int, str] = field(default_factory=dict)

    def __post_init__(self):
        items = {}
        for q, label in dict(self.factors).items():
            if label == "I":
                continue
            if label not in LABELS:
                raise ConfigurationError(f"unknown Pauli label {label!r} on qubit {q}")
            if int(q) != q or q < 0:
                raise ConfigurationError(f"qubit index must be a non-negative integer, got {q}")
            items[int(q)] = label
        object.__setattr__(self, "factors", dict(sorted(items.items())))
        object.__setattr__(self, "coeff", float(self.coeff))

    @classmethod
    def from_label(cls, label: str, coeff: float = 1.0, offset: int = 0) -> "PauliString":
        """Build from a string such as ``"XIZ"``; character ``k`` acts on qubit ``offset + k``."""
        return cls(coeff, {offset + k: c for k, c in enumerate(label) if c != "I"})

    @property
    def key(self) -> tuple:
        return tuple(self.factors.items())

    @property
    def is_diagonal(self) -> bool:
        return all(label == "Z" for label in self.factors.values())

    @property
    def max_qubit(self) -> int:
        return max(self.factors, default=-1)

    def scaled(self, factor: float) -> "PauliString":
        return PauliString(self.coeff * factor, self.factors)

    def commutes_with(self, other: "PauliString") -> bool:
        """Exact commutation test for strings over {X, Y, Z, XY}.

        Two single-qubit factors either coincide (commute) or anticommute,
        except XY against X or Y which does neither; such an overlap is
        reported as non-commuting.
        """
        anti = 0
        for q, a in self.factors.items():
            b = other.factors.get(q)
            if b is None or a == b:
                continue
            if "XY" in (a, b) and "Z" not in (a, b):
                return False
            anti += 1
        return anti % 2 == 0

    def __str__(self):
        body = " ".join(f"{lab}{q}" for q, lab in self.factors.items()) or "I"
        return f"{self.coeff:+g}*{body}"


@dataclass(frozen=True)
class StateVector:
    register: QubitRegister
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.register.dim,):
            raise ConfigurationError(
                f"expected {self.register.dim} amplitudes for {self.register}, got shape {amps.shape}"
            )
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> "StateVector":
        return StateVector(self.register, self.amplitudes.copy())

    def system_block(self) -> np.ndarray:
        """Amplitudes reshaped to ``(ancilla_dim, system_dim)``."""
        return self.amplitudes.reshape(self.register.ancilla_dim, self.register.system_dim)


@dataclass(frozen=True)
class DensityMatrix:
    entries: np.ndarray

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def purity(self) -> float:
        return float(np.real(np.trace(self.entries @ self.entries)))

    def check(self, atol: float = 1e-10, psd_tol: float = 1e-9) -> None:
        """Raise ``ValueError`` if the matrix is not Hermitian, unit-trace and PSD."""
        rho = self.entries
        herm = np.max(np.abs(rho - rho.conj().T)) if rho.size else 0.0
        if herm > atol:
            raise ValueError(f"density matrix not Hermitian (max deviation {herm:.2e})")
        tr = np.trace(rho)
        if abs(tr - 1.0) > atol:
            raise ValueError(f"density matrix trace {tr} != 1")
        lowest = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0]
        if lowest < -psd_tol:
            raise ValueError(f"density matrix has negative eigenvalue {lowest:.2e}")


def basis_state(register: QubitRegister, index: int) -> StateVector:
    amps = np.zeros(register.dim, dtype=complex)
    amps[index] = 1.0
    return StateVector(register, amps)


def product_state(register: QubitRegister, single: Sequence[np.ndarray]) -> StateVector:
    """Tensor product of per-qubit 2-vectors, ``single[q]`` on qubit ``q``."""
    if len(single) != register.n_qubits:
        raise ConfigurationError("need one single-qubit vector per qubit")
    amps = np.ones(1, dtype=complex)
    for vec in single:
        amps = np.kron(np.asarray(vec, dtype=complex), amps)
    return StateVector(register, amps)


def _check_indices(p: PauliString, n_qubits: int) -> None:
    if p.max_qubit >= n_qubits:
        raise ConfigurationError(
            f"Pauli string {p} addresses qubit {p.max_qubit} on a {n_qubits}-qubit register"
        )


@lru_cache(maxsize=512)
def _kernel(key: tuple, n_qubits: int) -> tuple[np.ndarray | None, np.ndarray]:
    """Return ``(perm, phase)`` with ``(P psi)[j] = phase[j] * psi[perm[j]]``.

    ``perm`` is None for diagonal strings.
    """
    idx = np.arange(1 << n_qubits, dtype=np.int64)
    flip = 0
    for q, label in key:
        if label != "Z":
            flip |= 1 << q
    src = idx ^ flip if flip else idx
    phase = np.ones(idx.size, dtype=complex)
    for q, label in key:
        p0, p1 = _PHASES[label]
        bit = (src >> q) & 1
        phase *= np.where(bit == 1, p1, p0)
    if flip:
        return src, phase
    return None, phase


def pauli_kernel(p: PauliString, n_qubits: int) -> tuple[np.ndarray | None, np.ndarray]:
    _check_indices(p, n_qubits)
    return _kernel(p.key, n_qubits)


def apply_pauli_array(psi: np.ndarray, p: PauliString, n_qubits: int, with_coeff: bool = True) -> np.ndarray:
    perm, phase = pauli_kernel(p, n_qubits)
    out = phase * (psi if perm is None else psi[perm])
    if with_coeff:
        out *= p.coeff
    return out


def apply_pauli_string(state: StateVector, p: PauliString) -> StateVector:
    """Return ``coeff * P |state>`` without building any matrix."""
    n = state.register.n_qubits
    return StateVector(state.register, apply_pauli_array(state.amplitudes, p, n))


def expectation_array(psi: np.ndarray, terms: Iterable[PauliString], n_qubits: int) -> complex:
    total = 0j
    for p in terms:
        total += np.vdot(psi, apply_pauli_array(psi, p, n_qubits))
    return total


def expectation(state: StateVector, h: Iterable[PauliString], norm_tol: float = 1e-8) -> float:
    """Real expectation value ``<psi|H|psi>`` of a sum of Pauli strings.

    The state must already be normalized; it is never rescaled here.
    """
    norm = state.norm
    if abs(norm - 1.0) > norm_tol:
        raise NormalizationError(f"state norm {norm:.12f} differs from 1 by more than {norm_tol}")
    value = expectation_array(state.amplitudes, h, state.register.n_qubits)
    if abs(value.imag) > 1e-10:
        raise ValueError(f"expectation has imaginary residue {value.imag:.2e}; operator not Hermitian")
    return float(value.real)


def partial_trace_ancilla(state: StateVector) -> DensityMatrix:
    """Reduced system state ``rho_S[a, b] = sum_c psi[a + c*2^NS] conj(psi[b + c*2^NS])``."""
    block = state.system_block()
    return DensityMatrix(block.T @ block.conj())


def dense_matrix(
    h: Iterable[PauliString], register: QubitRegister | int, max_qubits: int = MAX_DENSE_QUBITS
) -> np.ndarray:
    """Explicit Kronecker-product matrix; oracle use only."""
    n = register if isinstance(register, int) else register.n_qubits
    if n > max_qubits:
        raise ConfigurationError(f"dense oracle refuses registers above {max_qubits} qubits (got {n})")
    dim = 1 << n
    out = np.zeros((dim, dim), dtype=complex)
    for p in h:
        _check_indices(p, n)
        mat = np.ones((1, 1), dtype=complex)
        for q in range(n):
            # qubit 0 is the least significant bit, i.e. the rightmost Kronecker factor
            mat = np.kron(SINGLE_QUBIT[p.factors.get(q, "I")], mat)
        out += p.coeff * mat
    return out
