"""Classical reference algorithms and complexity bookkeeping.

The greedy bit-flip descent only makes progress when every flip toward the
marked string lowers the energy (a Hamming-ladder spectrum); on the flat
search landscape it stalls beyond distance one.  Both energy models are
provided because that distinction is the point of the comparison.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable


@dataclass(frozen=True)
class EnergyModel:
    """Oracle energy over bitstrings plus the marked-state test."""

    name: str
    energy: Callable[[int], float]
    is_ground: Callable[[int], bool]


def hamming_ladder_energy(n: int, ground: int) -> EnergyModel:
    """Energy = Hamming distance to the marked string (shifted spectrum)."""
    return EnergyModel(
        "hamming_ladder",
        energy=lambda x: float(bin(x ^ ground).count("1")),
        is_ground=lambda x: x == ground,
    )


def flat_grover_energy(n: int, ground: int, gap: float = 1.0) -> EnergyModel:
    """Energy = -gap on the marked string, 0 elsewhere (unstructured search)."""
    return EnergyModel(
        "flat_grover",
        energy=lambda x: -gap if x == ground else 0.0,
        is_ground=lambda x: x == ground,
    )


@dataclass(frozen=True)
class GreedyRun:
    start: int
    flips: tuple[int, ...]
    found: bool
    queries: int
    final: int


def greedy_search(n: int, oracle: EnergyModel, start: int) -> GreedyRun:
    """Single deterministic pass proposing each bit flip left to right.

    A flip is accepted iff the oracle energy strictly decreases; bits are
    scanned from the most significant down (position 0 is the leftmost bit
    of the n-bit string).  At most n proposals are made, each costing one
    oracle query on top of the initial evaluation.
    """
    if not 0 <= start < 2**n:
        raise ValueError("start out of range")
    current = start
    energy = oracle.energy(current)
    queries = 1
    flips: list[int] = []
    for pos in range(n):
        candidate = current ^ (1 << (n - 1 - pos))
        cand_energy = oracle.energy(candidate)
        queries += 1
        if cand_energy < energy:
            current = candidate
            energy = cand_energy
            flips.append(pos)
    return GreedyRun(start, tuple(flips), oracle.is_ground(current), queries, current)


def exhaustive_search_cost(n_dim: int, marked_count: int) -> float:
    """Expected oracle queries of exhaustive search under a uniform random
    ordering: (N + 1)/(M + 1)."""
    if not 1 <= marked_count < n_dim:
        raise ValueError("need 1 <= M < N")
    return (n_dim + 1) / (marked_count + 1)
