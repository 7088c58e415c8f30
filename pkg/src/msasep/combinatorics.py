"""Species words, multiset sectors and permutations.

A species word is a tuple of positive integer labels, e.g. ``(1, 2, 1)``.
All words that are rearrangements of one multiset form a *sector*; the
words of a sector are indexed in lexicographic order, which is the row and
column order used by every amplitude block in the package.

>>> s = sector_of((1, 2, 1))
>>> s.words
((1, 1, 2), (1, 2, 1), (2, 1, 1))
>>> s.rank((1, 2, 1))
1
"""

from __future__ import annotations

import itertools
import math
import random
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Sequence

__all__ = [
    "Word", "Sector", "TranspositionPath",
    "parse_word", "format_word", "multinomial", "sector_of", "all_sectors",
    "check_permutation", "inversions", "inversion_count", "decompose",
    "apply_transposition", "random_decomposition",
]

Word = tuple[int, ...]

# sectors up to this size keep an explicit word list and rank table
EAGER_LIMIT = 10_080


def parse_word(text: str | Sequence[int]) -> Word:
    """Parse ``"1213"`` or ``"1,12,3"`` (or pass a sequence through)."""
    if not isinstance(text, str):
        word = tuple(int(c) for c in text)
    else:
        text = text.strip()
        if not text:
            raise ValueError("empty species word")
        parts = text.split(",") if "," in text else list(text)
        try:
            word = tuple(int(c) for c in parts)
        except ValueError:
            raise ValueError(f"malformed species word {text!r}") from None
    if not word:
        raise ValueError("empty species word")
    if min(word) < 1:
        raise ValueError(f"species labels must be >= 1, got {word}")
    return word


def format_word(word: Sequence[int]) -> str:
    if all(c <= 9 for c in word):
        return "".join(str(c) for c in word)
    return ",".join(str(c) for c in word)


def multinomial(counts: Sequence[int]) -> int:
    total = math.factorial(sum(counts))
    for c in counts:
        total //= math.factorial(c)
    return total


@dataclass(frozen=True)
class Sector:
    """All distinct rearrangements of a multiset, in lexicographic order."""

    multiset: Word
    dim: int = field(init=False)

    def __post_init__(self):
        ms = tuple(sorted(self.multiset))
        if not ms:
            raise ValueError("empty multiset")
        if ms[0] < 1:
            raise ValueError(f"species labels must be >= 1, got {ms}")
        object.__setattr__(self, "multiset", ms)
        object.__setattr__(self, "dim", multinomial(list(Counter(ms).values())))

    @property
    def length(self) -> int:
        return len(self.multiset)

    @property
    def words(self) -> tuple[Word, ...]:
        if self.dim > EAGER_LIMIT:
            raise MemoryError(f"sector of dimension {self.dim} is not enumerated eagerly")
        return _words(self.multiset)

    def __iter__(self) -> Iterator[Word]:
        if self.dim <= EAGER_LIMIT:
            return iter(_words(self.multiset))
        return (self.unrank(k) for k in range(self.dim))

    def __len__(self) -> int:
        return self.dim

    def __contains__(self, word) -> bool:
        return tuple(sorted(word)) == self.multiset

    def rank(self, word: Sequence[int]) -> int:
        word = tuple(word)
        if word not in self:
            raise ValueError(f"word {format_word(word)} is not in sector {format_word(self.multiset)}")
        if self.dim <= EAGER_LIMIT:
            return _rank_table(self.multiset)[word]
        return _count_rank(word)

    def unrank(self, k: int) -> Word:
        if not 0 <= k < self.dim:
            raise IndexError(f"rank {k} out of range for dimension {self.dim}")
        if self.dim <= EAGER_LIMIT:
            return _words(self.multiset)[k]
        counts = Counter(self.multiset)
        out = []
        for _ in range(self.length):
            for letter in sorted(counts):
                if not counts[letter]:
                    continue
                counts[letter] -= 1
                block = multinomial([c for c in counts.values() if c])
                if k < block:
                    out.append(letter)
                    break
                k -= block
                counts[letter] += 1
        return tuple(out)

    def __str__(self):
        return f"[{','.join(map(str, self.multiset))}]"


@lru_cache(maxsize=256)
def _words(multiset: Word) -> tuple[Word, ...]:
    # permutations of a sorted sequence come out lexicographically sorted
    return tuple(sorted(set(itertools.permutations(multiset))))


@lru_cache(maxsize=256)
def _rank_table(multiset: Word) -> dict[Word, int]:
    return {w: k for k, w in enumerate(_words(multiset))}


def _count_rank(word: Word) -> int:
    counts = Counter(word)
    rank = 0
    for letter in word:
        for smaller in sorted(counts):
            if smaller >= letter:
                break
            if counts[smaller]:
                counts[smaller] -= 1
                rank += multinomial([c for c in counts.values() if c])
                counts[smaller] += 1
        counts[letter] -= 1
    return rank


def sector_of(word: Sequence[int], alphabet: int | None = None) -> Sector:
    """Sector containing ``word``; ``alphabet`` optionally bounds the labels."""
    word = parse_word(word)
    if alphabet is not None and max(word) > alphabet:
        raise ValueError(f"label {max(word)} exceeds alphabet size {alphabet}")
    return Sector(word)


def all_sectors(length: int, alphabet: int) -> list[Sector]:
    """Every sector of words of ``length`` letters drawn from ``1..alphabet``."""
    return [Sector(ms) for ms in
            itertools.combinations_with_replacement(range(1, alphabet + 1), length)]


# -- permutations, one-line notation, 1-based --------------------------------

def check_permutation(sigma: Sequence[int]) -> tuple[int, ...]:
    sigma = tuple(int(s) for s in sigma)
    if sorted(sigma) != list(range(1, len(sigma) + 1)):
        raise ValueError(f"{sigma} is not a permutation of 1..{len(sigma)}")
    return sigma


def inversions(sigma: Sequence[int]) -> set[tuple[int, int]]:
    """Pairs ``(beta, alpha)``, ``beta > alpha``, with beta left of alpha."""
    sigma = check_permutation(sigma)
    return {(sigma[i], sigma[j])
            for i in range(len(sigma)) for j in range(i + 1, len(sigma))
            if sigma[i] > sigma[j]}


def inversion_count(sigma: Sequence[int]) -> int:
    return len(inversions(sigma))


def apply_transposition(sigma: Sequence[int], a: int) -> tuple[int, ...]:
    """Swap the entries at 1-based positions ``a`` and ``a + 1``."""
    s = list(sigma)
    s[a - 1], s[a] = s[a], s[a - 1]
    return tuple(s)


@dataclass(frozen=True)
class TranspositionPath:
    """A reduced word ``sigma = T_{a_n} ... T_{a_1}`` built up from the identity.

    ``intermediates[k]`` is the permutation after the first ``k`` swaps and
    ``pairs[k]`` is the ``(beta, alpha)`` pair swapped at step ``k + 1``.
    """

    word: tuple[int, ...]
    intermediates: tuple[tuple[int, ...], ...]
    pairs: tuple[tuple[int, int], ...]

    @property
    def target(self) -> tuple[int, ...]:
        return self.intermediates[-1]

    @classmethod
    def from_word(cls, n: int, word: Sequence[int]) -> "TranspositionPath":
        current = tuple(range(1, n + 1))
        inter = [current]
        pairs = []
        for a in word:
            if not 1 <= a < n:
                raise ValueError(f"transposition position {a} out of range for degree {n}")
            pairs.append((current[a], current[a - 1]))
            current = apply_transposition(current, a)
            inter.append(current)
        return cls(tuple(word), tuple(inter), tuple(pairs))


def _sorting_swaps(sigma: tuple[int, ...], strategy: str, rng: random.Random | None) -> list[int]:
    # positions of adjacent swaps that sort sigma, each removing one inversion
    w = list(sigma)
    n = len(w)
    swaps = []
    if strategy == "bubble":
        for end in range(n - 1, 0, -1):
            for i in range(end):
                if w[i] > w[i + 1]:
                    w[i], w[i + 1] = w[i + 1], w[i]
                    swaps.append(i + 1)
    elif strategy == "insertion":
        for j in range(1, n):
            i = j
            while i > 0 and w[i - 1] > w[i]:
                w[i - 1], w[i] = w[i], w[i - 1]
                swaps.append(i)
                i -= 1
    elif strategy == "random":
        rng = rng or random.Random()
        while True:
            descents = [i for i in range(n - 1) if w[i] > w[i + 1]]
            if not descents:
                break
            i = rng.choice(descents)
            w[i], w[i + 1] = w[i + 1], w[i]
            swaps.append(i + 1)
    else:
        raise ValueError(f"unknown decomposition strategy {strategy!r}")
    return swaps


def decompose(sigma: Sequence[int], strategy: str = "bubble",
              rng: random.Random | None = None) -> TranspositionPath:
    """Minimal adjacent-transposition path from the identity to ``sigma``.

    The path is obtained by sorting ``sigma`` with adjacent swaps and reading
    the swaps backwards. ``strategy`` is ``"bubble"`` (canonical),
    ``"insertion"`` or ``"random"`` (uniform choice among descents).
    """
    sigma = check_permutation(sigma)
    swaps = _sorting_swaps(sigma, strategy, rng)
    return TranspositionPath.from_word(len(sigma), swaps[::-1])


def random_decomposition(sigma: Sequence[int], rng: random.Random) -> TranspositionPath:
    return decompose(sigma, "random", rng)
