"""Critical energy levels generated by topology and singular sources.

Blowup analysis quantizes the admissible concentration energies: each
level is 8*pi times an integer m plus 8*pi*(1+gamma_l) over a subset
of the singular points. Everything here works with levels normalized
by 8*pi, so a level is m + sum_{l in subset} (1 + gamma_l).
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import OnCriticalSurface, OutOfRange, TooManyLevels

__all__ = [
    "SingularitySet",
    "ExponentKey",
    "CriticalSpectrum",
    "enumerate_spectrum",
    "locate_region",
]

DEFAULT_MERGE_TOL = 1e-9
DEFAULT_LEVEL_LIMIT = 10**6
DEFAULT_CRITICAL_TOL = 1e-8


@dataclass(frozen=True)
class SingularitySet:
    """Singular source strengths, optionally with their locations.

    Each strength gamma_l must exceed -1. Positions are only needed by
    the torus solver; degree counting uses the strengths alone.
    """

    gammas: tuple[float, ...]
    positions: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self) -> None:
        gammas = tuple(float(g) for g in self.gammas)
        object.__setattr__(self, "gammas", gammas)
        for l, g in enumerate(gammas):
            if not math.isfinite(g) or g <= -1.0:
                raise ValueError(f"gamma[{l}] = {g!r} must be finite and > -1")
        if self.positions is not None:
            positions = tuple(
                (float(p[0]), float(p[1])) for p in self.positions
            )
            object.__setattr__(self, "positions", positions)
            if len(positions) != len(gammas):
                raise ValueError(
                    f"{len(positions)} positions for {len(gammas)} strengths"
                )
            if len(set(positions)) != len(positions):
                raise ValueError("singular positions must be pairwise distinct")

    @classmethod
    def empty(cls) -> "SingularitySet":
        return cls(())

    @property
    def count(self) -> int:
        return len(self.gammas)

    @property
    def mus(self) -> tuple[float, ...]:
        """Shift amounts mu_l = 1 + gamma_l, all positive."""
        return tuple(1.0 + g for g in self.gammas)

    @property
    def total_gamma(self) -> float:
        return float(sum(self.gammas))


class ExponentKey(NamedTuple):
    """Exact exponent identity: ladder index m plus a source subset mask."""

    m: int
    subset: int

    def value(self, mus: tuple[float, ...]) -> float:
        # Ascending-bit accumulation; enumerate_spectrum uses the same
        # order so equal keys give bit-identical floats everywhere.
        s = 0.0
        mask = self.subset
        l = 0
        while mask:
            if mask & 1:
                s += mus[l]
            mask >>= 1
            l += 1
        return float(self.m) + s


def _subset_sums(mus: tuple[float, ...]) -> np.ndarray:
    """All 2^N subset sums, accumulated over bits in ascending order."""
    sums = np.zeros(1 << len(mus))
    for l, mu in enumerate(mus):
        half = 1 << l
        sums[half : 2 * half] = sums[:half] + mu
    return sums


@dataclass(frozen=True)
class CriticalSpectrum:
    """Strictly increasing normalized levels n_1 < n_2 < ... within (0, cap]."""

    levels: tuple[float, ...]
    cap: float
    merge_tol: float

    def level(self, k: int) -> float:
        """n_k with the convention n_0 = 0."""
        if k == 0:
            return 0.0
        return self.levels[k - 1]


def enumerate_spectrum(
    singularities: SingularitySet,
    cap: float,
    merge_tol: float = DEFAULT_MERGE_TOL,
    limit: int = DEFAULT_LEVEL_LIMIT,
) -> CriticalSpectrum:
    """All normalized critical levels up to ``cap``.

    Candidate values are m + sum of mu_l over a subset, for m in
    0..ceil(cap) and every subset of the sources; 0 is excluded and
    values within ``merge_tol`` collapse onto the smallest of them.

    Raises
    ------
    TooManyLevels
        If the candidate count (ceil(cap)+1) * 2^N exceeds ``limit``.
    """
    if not (cap > 0.0) or not math.isfinite(cap):
        raise ValueError(f"cap must be positive and finite, got {cap!r}")
    if merge_tol < 0.0:
        raise ValueError("merge_tol must be nonnegative")
    mus = singularities.mus
    m_max = math.ceil(cap)
    candidates = (m_max + 1) * (1 << len(mus))
    if candidates > limit:
        raise TooManyLevels(
            f"{candidates} candidate levels exceed the limit {limit}; "
            f"reduce cap or the number of sources"
        )
    sums = _subset_sums(mus)
    grid = np.arange(m_max + 1, dtype=np.float64)[:, None] + sums[None, :]
    values = grid.ravel()
    values = values[(values > 0.0) & (values <= cap)]
    values.sort()
    levels: list[float] = []
    for v in values:
        if not levels or v - levels[-1] > merge_tol:
            levels.append(float(v))
    return CriticalSpectrum(tuple(levels), float(cap), float(merge_tol))


def locate_region(
    q: float,
    spectrum: CriticalSpectrum,
    tol: float = DEFAULT_CRITICAL_TOL,
) -> int:
    """Index k of the region n_k < q < n_{k+1} between consecutive levels.

    Returns 0 for q below the first level.

    Raises
    ------
    OnCriticalSurface
        If q lies within ``tol`` of some level n_k.
    OutOfRange
        If q exceeds the largest enumerated level, so no upper neighbor
        is known.
    """
    if not (q > 0.0):
        raise ValueError(f"normalized energy must be positive, got {q!r}")
    levels = spectrum.levels
    idx = bisect_left(levels, q)
    for i in (idx - 1, idx):
        if 0 <= i < len(levels) and abs(q - levels[i]) <= tol:
            raise OnCriticalSurface(i + 1, levels[i], q)
    if idx >= len(levels):
        top = levels[-1] if levels else 0.0
        raise OutOfRange(
            f"q = {q!r} exceeds the largest enumerated level {top!r}; "
            f"raise the cap"
        )
    return idx
