"""Dual-rail logical layer.

A qubit lives on two spatial modes: a photon in the first rail means logical
|1>, in the second rail logical |0> (so |1>_L is the Fock ket |10> on the
pair and |0>_L is |01>). This module translates between logical amplitudes
and Fock kets, builds Bell pairs, and applies Pauli corrections on a pair.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .fock import FockState

# Weight outside the one-photon-per-pair subspace above this is reported as
# leakage instead of being silently renormalized: post-selected branches in
# the gate protocols must be exactly leakage-free, so any leakage is a bug
# signal.
LEAK_TOL = 1e-10

BELL_KINDS = ("phi+", "phi-", "psi+", "psi-")


class LeakageError(ValueError):
    """State has weight outside the dual-rail subspace on a qubit pair."""

    def __init__(self, message: str, leakage: float) -> None:
        super().__init__(f"{message} (leakage weight {leakage:.3e})")
        self.leakage = leakage


@dataclass(frozen=True)
class DualRailQubit:
    """Mode pair carrying one qubit; photon in ``rail1`` = logical |1>."""

    rail1: int
    rail0: int

    def __post_init__(self) -> None:
        if self.rail1 == self.rail0:
            raise ValueError("rail1 and rail0 must be distinct modes")

    @property
    def modes(self) -> tuple[int, int]:
        return (self.rail1, self.rail0)


@dataclass(frozen=True)
class LogicalAmplitudes:
    """Coefficients (a0, a1) of logical |0> and |1>."""

    a0: complex
    a1: complex

    @classmethod
    def zero(cls) -> LogicalAmplitudes:
        return cls(1.0, 0.0)

    @classmethod
    def one(cls) -> LogicalAmplitudes:
        return cls(0.0, 1.0)

    @classmethod
    def from_bloch(cls, theta: float, phi: float) -> LogicalAmplitudes:
        return cls(math.cos(theta / 2.0), cmath.exp(1j * phi) * math.sin(theta / 2.0))

    def as_array(self) -> np.ndarray:
        return np.array([self.a0, self.a1], dtype=complex)

    def norm_squared(self) -> float:
        return abs(self.a0) ** 2 + abs(self.a1) ** 2

    def normalized(self) -> LogicalAmplitudes:
        n = math.sqrt(self.norm_squared())
        if n == 0.0:
            raise ValueError("cannot normalize a zero amplitude pair")
        return LogicalAmplitudes(self.a0 / n, self.a1 / n)


def require_normalized(q: LogicalAmplitudes) -> None:
    if abs(q.norm_squared() - 1.0) > 1e-6:
        raise ValueError(f"logical amplitudes are not normalized: |.|^2 = {q.norm_squared()}")


def encode(q: LogicalAmplitudes, placement: DualRailQubit, total_modes: int) -> FockState:
    """Place a logical qubit on its rail pair; every other mode is vacuum."""
    require_normalized(q)
    for m in placement.modes:
        if not 0 <= m < total_modes:
            raise ValueError(f"mode {m} out of range for {total_modes} modes")
    terms = []
    if q.a0 != 0:
        ket = [0] * total_modes
        ket[placement.rail0] = 1
        terms.append((tuple(ket), q.a0))
    if q.a1 != 0:
        ket = [0] * total_modes
        ket[placement.rail1] = 1
        terms.append((tuple(ket), q.a1))
    return FockState(total_modes, terms)


def decode_register(state: FockState, pairs: Sequence[DualRailQubit]) -> np.ndarray:
    """Read a register of dual-rail qubits back into 2^n logical amplitudes.

    Every stored ket must carry exactly one photon per pair, (0,1) or (1,0),
    and nothing anywhere else; offending weight raises ``LeakageError``. The
    first pair is the most significant bit of the returned index.
    """
    used: list[int] = []
    for p in pairs:
        used.extend(p.modes)
    if len(set(used)) != len(used):
        raise ValueError("qubit pairs share a mode")
    for m in used:
        if not 0 <= m < state.mode_count:
            raise ValueError(f"mode {m} out of range for {state.mode_count} modes")
    rest = [m for m in range(state.mode_count) if m not in set(used)]

    amps = np.zeros(2 ** len(pairs), dtype=complex)
    leakage = 0.0
    for ket, amp in state.terms.items():
        if any(ket[m] != 0 for m in rest):
            leakage += abs(amp) ** 2
            continue
        index = 0
        ok = True
        for p in pairs:
            bits = (ket[p.rail1], ket[p.rail0])
            if bits == (0, 1):
                index = index * 2
            elif bits == (1, 0):
                index = index * 2 + 1
            else:
                ok = False
                break
        if not ok:
            leakage += abs(amp) ** 2
            continue
        amps[index] += amp
    if leakage > LEAK_TOL:
        raise LeakageError("state leaks outside the dual-rail subspace", leakage)
    return amps


def decode(state: FockState, placement: DualRailQubit) -> LogicalAmplitudes:
    """Inverse of ``encode`` for a single qubit (all other modes vacuum)."""
    a0, a1 = decode_register(state, [placement])
    return LogicalAmplitudes(complex(a0), complex(a1))


def bell_state(
    kind: str, pair_a: DualRailQubit, pair_b: DualRailQubit, total_modes: int
) -> FockState:
    """One of the four Bell states on two dual-rail qubits.

    phi+- = (|00> +- |11>)/sqrt2 and psi+- = (|10> +- |01>)/sqrt2 in logical
    notation, with pair_a the left qubit.
    """
    if kind not in BELL_KINDS:
        raise ValueError(f"unknown Bell state {kind!r}; expected one of {BELL_KINDS}")
    modes = pair_a.modes + pair_b.modes
    if len(set(modes)) != 4:
        raise ValueError("Bell state needs four distinct modes")
    sign = 1.0 if kind.endswith("+") else -1.0
    if kind.startswith("phi"):
        left, right = ("0", "0"), ("1", "1")
    else:
        left, right = ("1", "0"), ("0", "1")

    def place(bits: tuple[str, str]) -> tuple[int, ...]:
        ket = [0] * total_modes
        for bit, pair in zip(bits, (pair_a, pair_b)):
            ket[pair.rail1 if bit == "1" else pair.rail0] = 1
        return tuple(ket)

    s = 1.0 / math.sqrt(2.0)
    return FockState(total_modes, [(place(left), s), (place(right), sign * s)])


def pauli_correction(state: FockState, placement: DualRailQubit, which: str) -> FockState:
    """Apply I, X, Z or Y on one dual-rail pair; other modes ride along.

    Restricted to the pair, every term must hold exactly one photon; Y is
    [[0,-i],[i,0]] on (|0>_L, |1>_L), i.e. i X Z.
    """
    if which not in ("I", "X", "Z", "Y"):
        raise ValueError(f"unknown Pauli label {which!r}")
    for m in placement.modes:
        if not 0 <= m < state.mode_count:
            raise ValueError(f"mode {m} out of range for {state.mode_count} modes")
    leakage = sum(
        abs(amp) ** 2
        for ket, amp in state.terms.items()
        if (ket[placement.rail1], ket[placement.rail0]) not in ((0, 1), (1, 0))
    )
    if leakage > LEAK_TOL:
        raise LeakageError("Pauli correction outside the dual-rail subspace", leakage)
    if which == "I":
        return state

    out: dict[tuple[int, ...], complex] = {}
    r1, r0 = placement.rail1, placement.rail0
    for ket, amp in state.terms.items():
        is_one = ket[r1] == 1
        if which == "Z":
            out[ket] = out.get(ket, 0j) + (-amp if is_one else amp)
            continue
        swapped = list(ket)
        swapped[r1], swapped[r0] = ket[r0], ket[r1]
        key = tuple(swapped)
        if which == "X":
            out[key] = out.get(key, 0j) + amp
        else:  # Y: |0>_L -> i|1>_L, |1>_L -> -i|0>_L
            out[key] = out.get(key, 0j) + (-1j * amp if is_one else 1j * amp)
    return FockState(state.mode_count, out)
