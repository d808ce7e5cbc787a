"""Blow-up mass identities: the Pohozaev hypersurface and its consequences.

Local masses sigma_i concentrating at a point of weight mu = 1+gamma
satisfy sum_ij a_ij sigma_i sigma_j = 4 mu sum_i sigma_i. Everything
downstream of blowup analysis reduces to this quadric: minimal-mass
bounds, comparison between blowup points, and the critical surfaces
swept out in rho-space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .errors import DegenerateDirection, ZeroMass
from .matrix import ConditionReport, Violation, as_interaction_matrix

__all__ = [
    "MassVector",
    "pohozaev_residual",
    "solve_mass_on_hypersurface",
    "minimal_mass_check",
    "energy_scaling_between_points",
    "nonsimple_blowup_admissible",
    "local_mass_split",
    "critical_surface_from_blowup",
]

FloatVector = NDArray[np.float64]

DEFAULT_INTEGER_TOL = 1e-9


@dataclass(frozen=True)
class MassVector:
    """Local masses at one blowup point of weight mu = 1 + gamma > 0."""

    sigma: FloatVector
    mu: float

    def __post_init__(self) -> None:
        sigma = np.array(self.sigma, dtype=np.float64)
        if sigma.ndim != 1:
            raise ValueError("sigma must be a vector")
        if not np.all(np.isfinite(sigma)) or np.any(sigma < 0.0):
            raise ValueError("sigma components must be finite and nonnegative")
        sigma.setflags(write=False)
        object.__setattr__(self, "sigma", sigma)
        if not (self.mu > 0.0) or not math.isfinite(self.mu):
            raise ValueError(f"mu = {self.mu!r} must be positive and finite")


def pohozaev_residual(a, masses: MassVector) -> float:
    """sum_ij a_ij sigma_i sigma_j - 4 mu sum_i sigma_i, zero on the
    hypersurface."""
    m = as_interaction_matrix(a)
    s = masses.sigma
    return float(s @ m.entries @ s - 4.0 * masses.mu * s.sum())


def solve_mass_on_hypersurface(a, mu: float, direction) -> MassVector:
    """Unique positive multiple of ``direction`` on the Pohozaev
    hypersurface: t = 4 mu (sum d) / (d^T A d).

    Raises
    ------
    DegenerateDirection
        If the quadratic energy d^T A d is not positive.
    """
    m = as_interaction_matrix(a)
    d = np.asarray(direction, dtype=np.float64)
    if d.ndim != 1 or d.shape[0] != m.n:
        raise ValueError(f"direction must be a vector of length {m.n}")
    if np.any(d <= 0.0):
        raise ValueError("direction components must be strictly positive")
    quad = float(d @ m.entries @ d)
    if quad <= 0.0:
        raise DegenerateDirection(
            f"direction has quadratic energy {quad!r} <= 0, "
            f"no positive mass scale exists"
        )
    t = 4.0 * mu * float(d.sum()) / quad
    return MassVector(t * d, mu)


def minimal_mass_check(a, masses: MassVector) -> ConditionReport:
    """Fully-bubbling lower bound: m_i = sum_j a_ij sigma_j > 2 mu for
    every component."""
    m = as_interaction_matrix(a)
    minimal = m.entries @ masses.sigma
    bound = 2.0 * masses.mu
    violations = tuple(
        Violation("minimal-mass", (i,), float(minimal[i]))
        for i in range(m.n)
        if not (minimal[i] > bound)
    )
    return ConditionReport(violations)


def energy_scaling_between_points(sigma_p: MassVector, mu_q: float) -> MassVector:
    """Masses seen from a blowup point of weight mu_q: scale by mu_q/mu_p."""
    if not (mu_q > 0.0):
        raise ValueError(f"mu_q = {mu_q!r} must be positive")
    return MassVector((mu_q / sigma_p.mu) * sigma_p.sigma, mu_q)


def nonsimple_blowup_admissible(
    gamma: float, tol: float = DEFAULT_INTEGER_TOL
) -> bool:
    """Whether non-simple blowup is possible at strength gamma: only
    when mu = 1 + gamma is a positive integer (within ``tol``)."""
    if not (gamma > -1.0):
        raise ValueError(f"gamma = {gamma!r} must exceed -1")
    mu = 1.0 + gamma
    nearest = round(mu)
    return nearest >= 1 and abs(mu - nearest) <= tol


def local_mass_split(rho, mus) -> NDArray[np.float64]:
    """Split total masses over blowup points proportionally to their
    weights: sigma_{i,l} = rho_i mu_l / (2 pi sum_s mu_s).

    Rows reconstruct rho: 2 pi sum_l sigma_{i,l} = rho_i.
    """
    rho = np.asarray(rho, dtype=np.float64)
    mus_arr = np.asarray(mus, dtype=np.float64)
    if mus_arr.ndim != 1 or mus_arr.size == 0:
        raise ValueError("mus must be a nonempty vector")
    if np.any(mus_arr <= 0.0):
        raise ValueError("all weights mu_l must be positive")
    denom = 2.0 * math.pi * mus_arr.sum()
    return rho[:, None] * (mus_arr[None, :] / denom)


def critical_surface_from_blowup(a, rho, mus) -> float:
    """Residual of the critical surface swept by blowup with weights
    mu_l: sum_ij a_ij rho_i rho_j - 8 pi (sum_l mu_l) (sum_i rho_i).

    Zero exactly when the instance sits at normalized level sum(mus).

    Raises
    ------
    ZeroMass
        If sum(rho) <= 0.
    """
    m = as_interaction_matrix(a)
    rho = np.asarray(rho, dtype=np.float64)
    total = float(rho.sum())
    if total <= 0.0:
        raise ZeroMass("total mass sum(rho) must be positive")
    mus_arr = np.asarray(mus, dtype=np.float64)
    quad = float(rho @ m.entries @ rho)
    return quad - 8.0 * math.pi * float(mus_arr.sum()) * total
