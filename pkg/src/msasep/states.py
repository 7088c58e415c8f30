"""Configurations of N particles on the integer line."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Sequence

from .combinatorics import Sector, Word, format_word, parse_word

__all__ = ["State", "parse_positions", "window_states"]


def parse_positions(text: str | Sequence[int]) -> tuple[int, ...]:
    if isinstance(text, str):
        try:
            return tuple(int(v) for v in text.split(","))
        except ValueError:
            raise ValueError(f"malformed position list {text!r}") from None
    return tuple(int(v) for v in text)


@dataclass(frozen=True, order=True)
class State:
    """Particle positions (strictly increasing) and their species, left to right."""

    positions: tuple[int, ...]
    species: Word

    def __post_init__(self):
        pos = parse_positions(self.positions)
        species = parse_word(self.species)
        if len(pos) != len(species):
            raise ValueError(f"{len(pos)} positions but {len(species)} species")
        if any(b <= a for a, b in zip(pos, pos[1:])):
            raise ValueError(f"positions must be strictly increasing, got {pos}")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "species", species)

    @property
    def n(self) -> int:
        return len(self.positions)

    def __str__(self):
        return f"({','.join(map(str, self.positions))};{format_word(self.species)})"


def window_states(lo: int, hi: int, sector: Sector) -> Iterator[State]:
    """States of ``sector`` with every particle in ``[lo, hi]``, positions-major order."""
    for pos in itertools.combinations(range(lo, hi + 1), sector.length):
        for w in sector:
            yield State(pos, w)
