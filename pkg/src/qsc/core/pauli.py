"""Symbolic Pauli operators with phase tracking.

An operator is ``i^phase_power * prod_q X_q^{x} Z_q^{z}`` over integer qubit
keys (positions or workspace labels).  Conjugation rules cover the Clifford
generators; CNOT conjugation is derived from H and CZ rather than a bespoke
phase rule.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import QscError
from .gates import I2, X, Y, Z


@dataclass
class PauliOperator:
    phase_power: int = 0  # power of i, mod 4
    bits: dict[int, tuple[int, int]] = field(default_factory=dict)  # q -> (x, z)

    def __post_init__(self):
        self.phase_power %= 4
        self.bits = {q: (x, z) for q, (x, z) in self.bits.items() if x or z}

    @classmethod
    def identity(cls) -> "PauliOperator":
        return cls()

    @classmethod
    def single(cls, qubit: int, name: str) -> "PauliOperator":
        table = {"I": (0, (0, 0)), "X": (0, (1, 0)), "Z": (0, (0, 1)), "Y": (1, (1, 1))}
        if name not in table:
            raise QscError(f"unknown Pauli name {name!r}")
        ph, xz = table[name]
        return cls(ph, {qubit: xz} if xz != (0, 0) else {})

    def xz(self, qubit: int) -> tuple[int, int]:
        return self.bits.get(qubit, (0, 0))

    @property
    def phase(self) -> complex:
        return 1j ** self.phase_power

    def is_identity(self) -> bool:
        return not self.bits and self.phase_power == 0

    def copy(self) -> "PauliOperator":
        return PauliOperator(self.phase_power, dict(self.bits))

    def compose(self, other: "PauliOperator") -> "PauliOperator":
        """Operator product self * other (self applied after other)."""
        phase = self.phase_power + other.phase_power
        bits: dict[int, tuple[int, int]] = dict(self.bits)
        for q, (x2, z2) in other.bits.items():
            x1, z1 = bits.get(q, (0, 0))
            # X^x1 Z^z1 X^x2 Z^z2 = (-1)^(z1 x2) X^(x1+x2) Z^(z1+z2)
            phase += 2 * (z1 * x2)
            bits[q] = (x1 ^ x2, z1 ^ z2)
        return PauliOperator(phase, bits)

    def inverse(self) -> "PauliOperator":
        phase = -self.phase_power
        for x, z in self.bits.values():
            phase += 2 * (x * z)  # (X Z)^dagger = Z X = -X Z
        return PauliOperator(phase, dict(self.bits))

    def remap(self, mapping: dict[int, int]) -> "PauliOperator":
        return PauliOperator(
            self.phase_power, {mapping.get(q, q): xz for q, xz in self.bits.items()}
        )

    # -- Clifford conjugation: returns g P g^dagger ---

    def conjugate_h(self, q: int) -> "PauliOperator":
        x, z = self.xz(q)
        out = self.copy()
        out.phase_power = (out.phase_power + 2 * (x * z)) % 4
        out._set(q, z, x)
        return out

    def conjugate_s(self, q: int) -> "PauliOperator":
        x, z = self.xz(q)
        out = self.copy()
        out.phase_power = (out.phase_power + x) % 4
        out._set(q, x, z ^ x)
        return out

    def conjugate_sdg(self, q: int) -> "PauliOperator":
        x, z = self.xz(q)
        out = self.copy()
        out.phase_power = (out.phase_power + 3 * x) % 4
        out._set(q, x, z ^ x)
        return out

    def conjugate_z(self, q: int) -> "PauliOperator":
        x, _ = self.xz(q)
        out = self.copy()
        out.phase_power = (out.phase_power + 2 * x) % 4
        return out

    def conjugate_x(self, q: int) -> "PauliOperator":
        _, z = self.xz(q)
        out = self.copy()
        out.phase_power = (out.phase_power + 2 * z) % 4
        return out

    def conjugate_y(self, q: int) -> "PauliOperator":
        x, z = self.xz(q)
        out = self.copy()
        out.phase_power = (out.phase_power + 2 * (x ^ z)) % 4
        return out

    def conjugate_cz(self, a: int, b: int) -> "PauliOperator":
        xa, za = self.xz(a)
        xb, zb = self.xz(b)
        out = self.copy()
        out.phase_power = (out.phase_power + 2 * (xa * xb)) % 4
        out._set(a, xa, za ^ xb)
        out._set(b, xb, zb ^ xa)
        return out

    def conjugate_cnot(self, control: int, target: int) -> "PauliOperator":
        # CNOT = (I x H) CZ (I x H) on (control, target)
        return (
            self.conjugate_h(target).conjugate_cz(control, target).conjugate_h(target)
        )

    def conjugate_swap(self, a: int, b: int) -> "PauliOperator":
        out = self.copy()
        xa, za = self.xz(a)
        xb, zb = self.xz(b)
        out._set(a, xb, zb)
        out._set(b, xa, za)
        return out

    def conjugate_gate(self, name: str, targets: list[int]) -> "PauliOperator":
        """Conjugate through a named Clifford gate; raises on non-Clifford."""
        key = name.lower()
        one = {"h": self.conjugate_h, "s": self.conjugate_s, "sdg": self.conjugate_sdg,
               "x": self.conjugate_x, "y": self.conjugate_y, "z": self.conjugate_z,
               "i": lambda q: self.copy(), "id": lambda q: self.copy()}
        two = {"cz": self.conjugate_cz, "cx": self.conjugate_cnot,
               "cnot": self.conjugate_cnot, "swap": self.conjugate_swap}
        if key in one:
            (q,) = targets
            return one[key](q)
        if key in two:
            a, b = targets
            return two[key](a, b)
        raise QscError(f"cannot conjugate a Pauli through non-Clifford gate '{name}'")

    def _set(self, q: int, x: int, z: int):
        if x or z:
            self.bits[q] = (x, z)
        else:
            self.bits.pop(q, None)

    # -- dense form ---

    def dense(self, qubits: list[int]) -> np.ndarray:
        """Dense matrix over the listed qubits (qubits[a] = bit a of the index)."""
        single = {(0, 0): I2, (1, 0): X, (0, 1): Z, (1, 1): X @ Z}
        mat = np.array([[self.phase]], dtype=complex)
        for q in qubits:
            mat = np.kron(single[self.xz(q)], mat)
        for q in self.bits:
            if q not in qubits:
                raise QscError(f"Pauli acts on qubit {q} outside {qubits}")
        return mat

    def support(self) -> list[int]:
        return sorted(self.bits)

    def __str__(self):
        names = {(1, 0): "X", (0, 1): "Z", (1, 1): "XZ"}
        parts = [f"{names[xz]}{q}" for q, xz in sorted(self.bits.items())]
        ph = {0: "+", 1: "i", 2: "-", 3: "-i"}[self.phase_power]
        return ph + ("*".join(parts) if parts else "I")


def pauli_from_dense(mat: np.ndarray, qubits: list[int],
                     atol: float = 1e-8) -> PauliOperator | None:
    """Recognize a dense matrix as a phased Pauli over ``qubits``, else None."""
    k = len(qubits)
    for combo in range(4 ** k):
        bits = {}
        rem = combo
        for a in range(k):
            code = rem % 4
            rem //= 4
            xz = [(0, 0), (1, 0), (0, 1), (1, 1)][code]
            if xz != (0, 0):
                bits[qubits[a]] = xz
        for ph in range(4):
            cand = PauliOperator(ph, bits)
            if np.allclose(cand.dense(qubits), mat, atol=atol):
                return cand
    return None
