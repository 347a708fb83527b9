"""Photon-counting detection and projective post-selection.

Detectors are ideal and destructive: measured modes are consumed and removed
from the residual state, which keeps downstream mode indices dense. Each
branch carries the original indices of the surviving modes so labels stay
traceable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .fock import FockState


@dataclass(frozen=True)
class DetectionPattern:
    """Required photon counts on a set of modes, stored sorted by mode."""

    items: tuple[tuple[int, int], ...]

    def __init__(self, requirements: Mapping[int, int] | Iterable[tuple[int, int]]) -> None:
        pairs = requirements.items() if isinstance(requirements, Mapping) else requirements
        normalized = tuple(sorted((int(m), int(c)) for m, c in pairs))
        modes = [m for m, _ in normalized]
        if len(set(modes)) != len(modes):
            raise ValueError(f"duplicate modes in detection pattern {normalized}")
        if any(c < 0 for _, c in normalized):
            raise ValueError("photon counts must be non-negative")
        if not normalized:
            raise ValueError("detection pattern must cover at least one mode")
        object.__setattr__(self, "items", normalized)

    @property
    def modes(self) -> tuple[int, ...]:
        return tuple(m for m, _ in self.items)

    @property
    def requirements(self) -> dict[int, int]:
        return dict(self.items)


@dataclass
class BranchResult:
    """One post-selection outcome.

    ``residual`` is the normalized state on the surviving modes, or None for
    an explicit zero-probability branch. ``kept_modes`` maps residual mode
    positions back to the indices they had before detection.
    """

    pattern: DetectionPattern
    probability: float
    residual: FockState | None
    kept_modes: tuple[int, ...]
    correction_applied: str | None = None
    accepted: bool = False


def _validate_modes(state: FockState, modes: Sequence[int]) -> None:
    for m in modes:
        if not 0 <= m < state.mode_count:
            raise ValueError(f"mode {m} out of range for {state.mode_count} modes")


def project_detection(state: FockState, pattern: DetectionPattern) -> BranchResult:
    """Project onto the given photon counts; consume the measured modes.

    The branch probability is the kept weight; the residual is renormalized.
    A pattern matching nothing yields an explicit empty branch (probability
    0, residual None) so acceptance policies can be total over patterns.
    """
    _validate_modes(state, pattern.modes)
    required = pattern.requirements
    kept = tuple(m for m in range(state.mode_count) if m not in required)

    residual_terms: dict[tuple[int, ...], complex] = {}
    weight = 0.0
    for ket, amp in state.terms.items():
        if any(ket[m] != c for m, c in required.items()):
            continue
        weight += abs(amp) ** 2
        rest = tuple(ket[m] for m in kept)
        residual_terms[rest] = residual_terms.get(rest, 0j) + amp

    if weight == 0.0 or not residual_terms:
        return BranchResult(pattern, 0.0, None, kept)
    if not kept:
        # Whole state measured: the branch keeps its probability, nothing remains.
        return BranchResult(pattern, weight, None, kept)
    scale = 1.0 / math.sqrt(weight)
    residual = FockState(len(kept), {k: v * scale for k, v in residual_terms.items()})
    return BranchResult(pattern, weight, residual, kept)


def outcome_distribution(state: FockState, detector_modes: Sequence[int]) -> list[BranchResult]:
    """All photon-count outcomes on the listed modes, as disjoint branches.

    Only outcomes with support in the state appear; their probabilities sum
    to the state norm. Branches are ordered by count tuple, so enumeration is
    deterministic regardless of evaluation order.
    """
    modes = [int(m) for m in detector_modes]
    if len(set(modes)) != len(modes):
        raise ValueError(f"duplicate detector modes in {modes}")
    _validate_modes(state, modes)
    outcomes = sorted({tuple(ket[m] for m in modes) for ket in state.terms})
    return [
        project_detection(state, DetectionPattern(zip(modes, counts)))
        for counts in outcomes
    ]


def project_onto_state(
    state: FockState, modes: Sequence[int], reference: FockState
) -> tuple[float, FockState | None]:
    """Project the listed modes onto a reference state (e.g. a Bell state).

    Returns the branch probability and the normalized residual on the other
    modes; the reference is read with its mode i matching ``modes[i]``.
    """
    modes = [int(m) for m in modes]
    if len(set(modes)) != len(modes):
        raise ValueError(f"duplicate modes in {modes}")
    _validate_modes(state, modes)
    if reference.mode_count != len(modes):
        raise ValueError("reference state width does not match the listed modes")
    if abs(reference.norm_squared() - 1.0) > 1e-9:
        raise ValueError("reference state must be normalized")

    kept = tuple(m for m in range(state.mode_count) if m not in set(modes))
    residual_terms: dict[tuple[int, ...], complex] = {}
    for ket, amp in state.terms.items():
        part = tuple(ket[m] for m in modes)
        ref_amp = reference.terms.get(part)
        if ref_amp is None:
            continue
        rest = tuple(ket[m] for m in kept)
        residual_terms[rest] = residual_terms.get(rest, 0j) + ref_amp.conjugate() * amp

    weight = sum(abs(v) ** 2 for v in residual_terms.values())
    if weight == 0.0 or not kept:
        return weight, None
    scale = 1.0 / math.sqrt(weight)
    residual = FockState(len(kept), {k: v * scale for k, v in residual_terms.items()})
    return weight, residual
