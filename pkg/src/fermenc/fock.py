"""Reference fermionic semantics on occupation bitstrings.

Modes are 1-based in the public API.  Phases are integers mod 4, read as
powers of i, so the oracle never touches floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence


class CapacityError(ValueError):
    """Raised when a state has more (or fewer) fermions than a layout allows."""


@dataclass(frozen=True)
class FockBitstring:
    """Occupation numbers b_1..b_M, stored as a tuple of 0/1 ints."""

    bits: tuple[int, ...]

    def __post_init__(self):
        bits = tuple(int(v) for v in self.bits)
        if any(v not in (0, 1) for v in bits):
            raise ValueError("occupations must be 0 or 1")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def from_str(cls, text: str) -> "FockBitstring":
        return cls(tuple(int(ch) for ch in text.replace(" ", "")))

    @classmethod
    def from_modes(cls, M: int, occupied: Iterable[int]) -> "FockBitstring":
        bits = [0] * M
        for j in occupied:
            if not 1 <= j <= M:
                raise IndexError(f"mode {j} outside 1..{M}")
            bits[j - 1] = 1
        return cls(tuple(bits))

    @property
    def modes(self) -> int:
        return len(self.bits)

    @property
    def weight(self) -> int:
        return sum(self.bits)

    def occupied(self) -> list[int]:
        """1-based indices of occupied modes, ascending."""
        return [j + 1 for j, v in enumerate(self.bits) if v]

    def __getitem__(self, j: int) -> int:
        if not 1 <= j <= len(self.bits):
            raise IndexError(f"mode {j} outside 1..{len(self.bits)}")
        return self.bits[j - 1]

    def __str__(self) -> str:
        return "".join(map(str, self.bits))


@dataclass(frozen=True)
class Capacity:
    """Allowed particle numbers F-k .. F+k, clamped to 0..M by `weights`."""

    F: int
    k: int = 0

    def __post_init__(self):
        if self.F < 0 or self.k < 0:
            raise ValueError("F and k must be non-negative")

    def weights(self, M: int) -> range:
        return range(max(0, self.F - self.k), min(M, self.F + self.k) + 1)

    def contains(self, b: FockBitstring) -> bool:
        lo = self.F - self.k
        return lo <= b.weight <= self.F + self.k


def _check_mode(j: int, M: int) -> None:
    if not 1 <= j <= M:
        raise IndexError(f"mode {j} outside 1..{M}")


def sgn_rank_oracle(j: int, b: FockBitstring) -> int:
    """(-1) to the number of occupied modes among 1..j."""
    _check_mode(j, b.modes)
    return -1 if sum(b.bits[:j]) % 2 else 1


def bit_flip_oracle(j: int, b: FockBitstring) -> FockBitstring:
    _check_mode(j, b.modes)
    bits = list(b.bits)
    bits[j - 1] ^= 1
    return FockBitstring(tuple(bits))


def majorana_oracle(mu: int, b: FockBitstring) -> tuple[int, FockBitstring]:
    """Action of gamma_mu on |b>, returned as (power of i, new bitstring).

    gamma_{2j-1} picks up the parity of modes before j; gamma_{2j} picks up
    i times the parity of modes up to and including j.  Both flip mode j.
    Normalised so that gamma^2 = I.
    """
    M = b.modes
    if not 1 <= mu <= 2 * M:
        raise IndexError(f"Majorana index {mu} outside 1..{2 * M}")
    j = (mu + 1) // 2
    if mu % 2:
        phase = 2 * (sum(b.bits[: j - 1]) % 2)
    else:
        phase = (1 + 2 * (sum(b.bits[:j]) % 2)) % 4
    return phase, bit_flip_oracle(j, b)


def info_bound(M: int, F: int) -> int:
    """ceil(log2(C(M, F))) computed exactly."""
    if F < 0 or M < 0 or F > M:
        raise ValueError(f"need 0 <= F <= M, got M={M}, F={F}")
    return (math.comb(M, F) - 1).bit_length()


def ceil_log2(n: int) -> int:
    """Smallest e with 2**e >= n (0 for n <= 1)."""
    return (n - 1).bit_length() if n > 1 else 0


def weight_class(M: int, f: int) -> list[FockBitstring]:
    """All weight-f strings of length M in lexicographic order."""
    out = []
    for ones in combinations(range(M), f):
        bits = [0] * M
        for i in ones:
            bits[i] = 1
        out.append(FockBitstring(tuple(bits)))
    out.sort(key=lambda s: s.bits)
    return out


def enumerate_capacity_states(M: int, cap: Capacity) -> list[FockBitstring]:
    """States allowed by `cap`, ordered by weight and then lexicographically."""
    out: list[FockBitstring] = []
    for f in cap.weights(M):
        out.extend(weight_class(M, f))
    return out


def all_states(M: int, max_weight: int | None = None) -> list[FockBitstring]:
    top = M if max_weight is None else min(M, max_weight)
    return enumerate_capacity_states(M, Capacity(0, top)) if top >= 0 else []


def majorana_matrix(mu: int, M: int, basis: Sequence[FockBitstring] | None = None):
    """Dense matrix of gamma_mu over `basis` (default: all 2^M strings)."""
    import numpy as np

    basis = list(basis) if basis is not None else all_states(M)
    index = {s.bits: i for i, s in enumerate(basis)}
    mat = np.zeros((len(basis), len(basis)), dtype=complex)
    for col, s in enumerate(basis):
        ph, out = majorana_oracle(mu, s)
        if out.bits in index:
            mat[index[out.bits], col] = 1j**ph
    return mat
