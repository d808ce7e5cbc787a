"""Spectral solver for the coupled mean field system on the unit flat torus.

The system

    Delta u_i + sum_j a_ij rho_j (h_j e^{u_j} / <h_j e^{u_j}> - 1) = 0

is discretized on a uniform M x M grid over [0,1)^2 with mean-zero
unknowns. Derivatives are exact on grid modes (FFT), integrals use the
equal-weight quadrature (spectrally accurate on the torus), and the
nonlinear system is path-followed in the total mass with a damped
Newton iteration whose linear solves are GMRES preconditioned by the
inverse Laplacian. The solver only operates strictly below the first
critical energy level, where solutions stay bounded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray
from scipy.sparse.linalg import LinearOperator, gmres

from .degree import ProblemInstance, normalized_energy
from .errors import NegativeGamma, NoConvergence, StepFailure, ZeroMassDensity
from .spectrum import SingularitySet, enumerate_spectrum

__all__ = [
    "TorusGrid",
    "FieldSet",
    "WeightSpec",
    "SolverOptions",
    "StepDiagnostics",
    "SolveResult",
    "SolutionReport",
    "green_function",
    "build_weights",
    "residual",
    "functional_J",
    "functional_gradient",
    "solve_continuation",
    "verify_solution",
]

FloatGrid = NDArray[np.float64]

MEAN_ZERO_TOL = 1e-12

DEFAULT_RESOLUTION = 64


class TorusGrid:
    """Uniform M x M grid on the unit flat torus with spectral calculus.

    Wavenumbers are the integer FFT modes per axis (from -M/2 up to
    M/2 - 1); the quadrature weight per node is 1/M^2, so the torus has
    volume 1.
    """

    def __init__(self, resolution: int = DEFAULT_RESOLUTION) -> None:
        m = int(resolution)
        if m <= 0 or m % 2 != 0:
            raise ValueError(f"resolution must be a positive even integer, got {m}")
        self.resolution = m
        axis = np.arange(m) / m
        self.x, self.y = np.meshgrid(axis, axis, indexing="ij")
        k = np.rint(np.fft.fftfreq(m, d=1.0 / m)).astype(np.int64)
        self.kx, self.ky = np.meshgrid(k, k, indexing="ij")
        # Symbol of the Laplacian on mode k: -4 pi^2 |k|^2.
        self._symbol = -4.0 * math.pi**2 * (
            self.kx.astype(np.float64) ** 2 + self.ky.astype(np.float64) ** 2
        )
        inv = np.zeros_like(self._symbol)
        nz = self._symbol != 0.0
        inv[nz] = 1.0 / self._symbol[nz]
        self._inv_symbol = inv
        for arr in (self.x, self.y, self.kx, self.ky, self._symbol, inv):
            arr.setflags(write=False)

    def integrate(self, f: FloatGrid) -> float:
        """Quadrature over the torus; exact volume normalization."""
        return float(np.mean(f))

    def laplacian(self, f: FloatGrid) -> FloatGrid:
        return np.real(np.fft.ifft2(np.fft.fft2(f) * self._symbol))

    def inverse_laplacian(self, f: FloatGrid) -> FloatGrid:
        """Solve Delta g = f - <f> with <g> = 0 (zero mode annihilated)."""
        return np.real(np.fft.ifft2(np.fft.fft2(f) * self._inv_symbol))

    def gradient_inner(self, f: FloatGrid, g: FloatGrid) -> float:
        """Integral of grad f . grad g over the torus, via the mode sums."""
        fh = np.fft.fft2(f)
        gh = np.fft.fft2(g)
        scale = float(self.resolution) ** 4
        return float(np.sum(-self._symbol * np.real(fh * np.conj(gh))) / scale)

    def __repr__(self) -> str:
        return f"TorusGrid(resolution={self.resolution})"


@dataclass(frozen=True)
class FieldSet:
    """Mean-zero unknowns u_1..u_n sampled on the grid."""

    values: FloatGrid

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 3 or values.shape[1] != values.shape[2]:
            raise ValueError(
                f"expected shape (n, M, M), got {values.shape}"
            )
        means = values.mean(axis=(1, 2))
        worst = float(np.max(np.abs(means))) if means.size else 0.0
        if worst > MEAN_ZERO_TOL:
            raise ValueError(
                f"component mean {worst:.3e} exceeds the mean-zero "
                f"tolerance {MEAN_ZERO_TOL:.0e}"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, n: int, resolution: int) -> "FieldSet":
        return cls(np.zeros((n, resolution, resolution)))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def resolution(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class WeightSpec:
    """Weights h_i = g_i * prod_l w(x - p_l)^{gamma_l}.

    ``smooth_factors`` holds one entry per component: None (constant 1),
    a positive scalar, an (M, M) array, or a callable of the two grid
    coordinate arrays.
    """

    smooth_factors: tuple
    singularities: SingularitySet

    @classmethod
    def uniform(cls, n: int, singularities: SingularitySet | None = None) -> "WeightSpec":
        return cls(
            tuple([None] * n),
            singularities if singularities is not None else SingularitySet.empty(),
        )

    @property
    def n(self) -> int:
        return len(self.smooth_factors)


def green_function(grid: TorusGrid, q: tuple[float, float]) -> FloatGrid:
    """Mean-zero Green's function of -Delta with pole at q.

    G(x, q) = sum over nonzero grid modes of
    exp(2 pi i k.(x-q)) / (4 pi^2 |k|^2); the real part makes the
    kernel even in x - q, hence symmetric in its arguments.
    """
    qx, qy = float(q[0]) % 1.0, float(q[1]) % 1.0
    phase = np.exp(-2j * math.pi * (grid.kx * qx + grid.ky * qy))
    m2 = float(grid.resolution) ** 2
    coeffs = -phase * grid._inv_symbol * m2
    return np.real(np.fft.ifft2(coeffs))


def band_limited_source(grid: TorusGrid, q: tuple[float, float]) -> FloatGrid:
    """Projection of delta_q - 1 onto the grid modes; -Delta G equals it."""
    qx, qy = float(q[0]) % 1.0, float(q[1]) % 1.0
    phase = np.exp(-2j * math.pi * (grid.kx * qx + grid.ky * qy))
    m2 = float(grid.resolution) ** 2
    coeffs = phase * m2
    coeffs[0, 0] = 0.0
    return np.real(np.fft.ifft2(coeffs))


def singular_weight(grid: TorusGrid, p: tuple[float, float]) -> FloatGrid:
    """Canonical periodic factor vanishing quadratically at p:
    w(z) = (sin^2(pi z1) + sin^2(pi z2)) / pi^2, so w ~ |z|^2 near p."""
    z1 = grid.x - float(p[0])
    z2 = grid.y - float(p[1])
    return (np.sin(math.pi * z1) ** 2 + np.sin(math.pi * z2) ** 2) / math.pi**2


def build_weights(w: WeightSpec, grid: TorusGrid) -> FloatGrid:
    """Evaluate the n weight functions h_i on the grid.

    Raises
    ------
    NegativeGamma
        If some strength is negative: the quadrature cannot handle an
        unbounded integrand.
    """
    m = grid.resolution
    rows = []
    for i, factor in enumerate(w.smooth_factors):
        g = _evaluate_smooth_factor(factor, grid)
        if float(g.min()) <= 0.0:
            raise ValueError(
                f"smooth factor {i} must be strictly positive everywhere"
            )
        rows.append(g)
    h = np.stack(rows) if rows else np.zeros((0, m, m))
    sing = w.singularities
    if sing.count:
        for l, gamma in enumerate(sing.gammas):
            if gamma < 0.0:
                raise NegativeGamma(
                    f"gamma[{l}] = {gamma!r} is negative, outside solver scope"
                )
        if sing.positions is None:
            raise ValueError("solver weights need singular positions")
        wrapped = [(px % 1.0, py % 1.0) for px, py in sing.positions]
        if len(set(wrapped)) != len(wrapped):
            raise ValueError("singular positions coincide on the torus")
        factor = np.ones((m, m))
        for (px, py), gamma in zip(wrapped, sing.gammas):
            if gamma == 0.0:
                continue
            factor = factor * singular_weight(grid, (px, py)) ** gamma
        h = h * factor[None, :, :]
    return h


def _evaluate_smooth_factor(factor, grid: TorusGrid) -> FloatGrid:
    m = grid.resolution
    if factor is None:
        return np.ones((m, m))
    if callable(factor):
        out = np.asarray(factor(grid.x, grid.y), dtype=np.float64)
        if out.shape != (m, m):
            raise ValueError(
                f"smooth factor callable returned shape {out.shape}, "
                f"expected {(m, m)}"
            )
        return out
    arr = np.asarray(factor, dtype=np.float64)
    if arr.ndim == 0:
        return np.full((m, m), float(arr))
    if arr.shape != (m, m):
        raise ValueError(
            f"smooth factor has shape {arr.shape}, expected {(m, m)}"
        )
    return arr.copy()


def _density_means(h: FloatGrid, u: FloatGrid) -> FloatGrid:
    """Per-component quadratures <h_i e^{u_i}>; must all be positive."""
    dens = h * np.exp(u)
    means = dens.mean(axis=(1, 2))
    if not np.all(np.isfinite(means)) or np.any(means <= 0.0):
        bad = int(np.argmin(means))
        raise ZeroMassDensity(
            f"<h_{bad} e^(u_{bad})> = {means[bad]!r} is not positive"
        )
    return means


def _residual_arrays(
    u: FloatGrid,
    entries: FloatGrid,
    rho: FloatGrid,
    h: FloatGrid,
    grid: TorusGrid,
) -> FloatGrid:
    dens = h * np.exp(u)
    means = dens.mean(axis=(1, 2))
    forcing = dens / means[:, None, None] - 1.0
    coeff = entries * rho[None, :]
    out = np.einsum("ij,jxy->ixy", coeff, forcing)
    for i in range(u.shape[0]):
        out[i] += grid.laplacian(u[i])
    return out


def residual(
    u: FieldSet, p: ProblemInstance, h: FloatGrid, grid: TorusGrid
) -> FieldSet:
    """Equation residual R_i = Delta u_i + sum_j a_ij rho_j
    (h_j e^{u_j}/<h_j e^{u_j}> - 1); its analytic mean is zero.

    Raises
    ------
    ZeroMassDensity
        If some quadrature <h_j e^{u_j}> is not positive.
    """
    _density_means(h, u.values)
    rho = np.asarray(p.rho, dtype=np.float64)
    return FieldSet(
        _residual_arrays(u.values, p.matrix.entries, rho, h, grid)
    )


def functional_J(
    u: FieldSet, p: ProblemInstance, h: FloatGrid, grid: TorusGrid
) -> float:
    """Variational energy
    J = (1/2) sum_ij a^{ij} int grad u_i . grad u_j - sum_i rho_i log <h_i e^{u_i}>.

    The quadratic part is evaluated through the mode sums, which makes
    the solver residual its exact discrete Euler-Lagrange gradient.
    """
    inv = p.matrix.inverse()
    values = u.values
    n = values.shape[0]
    quad = 0.0
    hats = [np.fft.fft2(values[i]) for i in range(n)]
    scale = float(grid.resolution) ** 4
    mult = -grid._symbol
    for i in range(n):
        for j in range(n):
            if inv[i, j] == 0.0:
                continue
            quad += inv[i, j] * float(
                np.sum(mult * np.real(hats[i] * np.conj(hats[j]))) / scale
            )
    means = _density_means(h, values)
    rho = np.asarray(p.rho, dtype=np.float64)
    return 0.5 * quad - float(np.sum(rho * np.log(means)))


def functional_gradient(
    u: FieldSet, p: ProblemInstance, h: FloatGrid, grid: TorusGrid
) -> FloatGrid:
    """First variation of J against mean-zero directions:
    V_i = sum_j a^{ij} (-Delta u_j) - rho_i (h_i e^{u_i}/<h_i e^{u_i}> - 1).

    Applying the coupling matrix A to V recovers -R(u) identically.
    """
    inv = p.matrix.inverse()
    values = u.values
    n = values.shape[0]
    lap = np.stack([grid.laplacian(values[j]) for j in range(n)])
    dens = h * np.exp(values)
    means = _density_means(h, values)
    forcing = dens / means[:, None, None] - 1.0
    rho = np.asarray(p.rho, dtype=np.float64)
    return (
        -np.einsum("ij,jxy->ixy", inv, lap)
        - rho[:, None, None] * forcing
    )


@dataclass(frozen=True)
class SolverOptions:
    tol: float = 1e-8
    steps: int = 10
    t_start: float = 0.1
    max_newton: int = 40
    gmres_rtol: float = 1e-10
    max_krylov: int = 200
    damping_floor: float = 1e-6


@dataclass(frozen=True)
class StepDiagnostics:
    t: float
    newton_iterations: int
    residual_history: tuple[float, ...]
    max_norm: float


@dataclass(frozen=True)
class SolveResult:
    fields: FieldSet
    steps: tuple[StepDiagnostics, ...]
    residual_norm: float


@dataclass
class _NewtonState:
    u: FloatGrid
    history: list = field(default_factory=list)


def solve_continuation(
    p: ProblemInstance,
    w: WeightSpec,
    grid: TorusGrid,
    opts: SolverOptions | None = None,
) -> SolveResult:
    """Path-follow the mass from t_start * rho up to rho, solving each
    stage with damped Newton started from the previous solution.

    Raises
    ------
    ValueError
        If the target energy is not strictly below the first critical
        level (the solver's validity region).
    NoConvergence
        If a Newton stage exhausts its iteration budget.
    StepFailure
        If backtracking hits the damping floor without reducing the
        residual.
    """
    if opts is None:
        opts = SolverOptions()
    if w.n != p.matrix.n:
        raise ValueError(
            f"{w.n} weight factors for a {p.matrix.n}-component system"
        )
    q = normalized_energy(p.rho, p.matrix)
    n1 = enumerate_spectrum(p.singularities, cap=2.0).levels[0]
    if q >= n1:
        raise ValueError(
            f"normalized energy q = {q!r} is not strictly below the first "
            f"critical level n_1 = {n1!r}; the solver only runs subcritically"
        )
    h = build_weights(w, grid)
    rho = np.asarray(p.rho, dtype=np.float64)
    entries = p.matrix.entries
    n = p.matrix.n
    m = grid.resolution
    u = np.zeros((n, m, m))
    diagnostics: list[StepDiagnostics] = []
    final_norm = 0.0
    if opts.steps < 1:
        raise ValueError("continuation needs at least one step")
    schedule = (
        np.array([1.0])
        if opts.steps == 1
        else np.linspace(opts.t_start, 1.0, opts.steps)
    )
    for t in schedule:
        u, step_diag = _newton_stage(
            u, float(t), rho, entries, h, grid, opts
        )
        diagnostics.append(step_diag)
        final_norm = step_diag.residual_history[-1]
    return SolveResult(FieldSet(u), tuple(diagnostics), final_norm)


def _l2_norm(r: FloatGrid, m: int) -> float:
    return float(np.sqrt(np.sum(r * r)) / m)


def _newton_stage(
    u: FloatGrid,
    t: float,
    rho: FloatGrid,
    entries: FloatGrid,
    h: FloatGrid,
    grid: TorusGrid,
    opts: SolverOptions,
) -> tuple[FloatGrid, StepDiagnostics]:
    m = grid.resolution
    rho_t = t * rho
    history: list[float] = []
    for iteration in range(opts.max_newton + 1):
        r = _residual_arrays(u, entries, rho_t, h, grid)
        rnorm = _l2_norm(r, m)
        history.append(rnorm)
        if rnorm <= opts.tol:
            return u, StepDiagnostics(
                t, iteration, tuple(history), float(np.max(np.abs(u)))
            )
        if iteration == opts.max_newton:
            raise NoConvergence(
                f"stage t = {t:g} still at residual {rnorm:.3e} after "
                f"{opts.max_newton} Newton iterations",
                rnorm,
            )
        delta = _newton_direction(u, rho_t, entries, h, grid, opts, -r)
        u = _backtrack(u, delta, rnorm, rho_t, entries, h, grid, opts, t)
    raise AssertionError("unreachable")


def _newton_direction(
    u: FloatGrid,
    rho_t: FloatGrid,
    entries: FloatGrid,
    h: FloatGrid,
    grid: TorusGrid,
    opts: SolverOptions,
    rhs: FloatGrid,
) -> FloatGrid:
    n, m, _ = u.shape
    size = n * m * m
    dens = h * np.exp(u)
    means = dens.mean(axis=(1, 2))
    coeff = entries * rho_t[None, :]

    def jac_matvec(x: np.ndarray) -> np.ndarray:
        delta = x.reshape(n, m, m)
        weighted = dens * delta
        inner = weighted.mean(axis=(1, 2))
        # Derivative of h_j e^{u_j}/<h_j e^{u_j}> in direction delta_j.
        term = (
            weighted / means[:, None, None]
            - dens * (inner / means**2)[:, None, None]
        )
        out = np.einsum("ij,jxy->ixy", coeff, term)
        for i in range(n):
            out[i] += grid.laplacian(delta[i])
        return out.ravel()

    def precond_matvec(x: np.ndarray) -> np.ndarray:
        delta = x.reshape(n, m, m)
        out = np.empty_like(delta)
        for i in range(n):
            out[i] = grid.inverse_laplacian(delta[i])
        return out.ravel()

    op = LinearOperator((size, size), matvec=jac_matvec, dtype=np.float64)
    prec = LinearOperator((size, size), matvec=precond_matvec, dtype=np.float64)
    x, _info = gmres(
        op,
        rhs.ravel(),
        rtol=opts.gmres_rtol,
        atol=0.0,
        restart=opts.max_krylov,
        maxiter=1,
        M=prec,
    )
    # An inexact direction is acceptable: backtracking rejects bad steps.
    return x.reshape(n, m, m)


def _backtrack(
    u: FloatGrid,
    delta: FloatGrid,
    rnorm: float,
    rho_t: FloatGrid,
    entries: FloatGrid,
    h: FloatGrid,
    grid: TorusGrid,
    opts: SolverOptions,
    t: float,
) -> FloatGrid:
    lam = 1.0
    while lam >= opts.damping_floor:
        trial = u + lam * delta
        trial -= trial.mean(axis=(1, 2))[:, None, None]
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            r = _residual_arrays(trial, entries, rho_t, h, grid)
            tnorm = _l2_norm(r, grid.resolution)
        if math.isfinite(tnorm) and tnorm < rnorm:
            return trial
        lam *= 0.5
    raise StepFailure(
        f"stage t = {t:g}: no residual decrease above the damping floor "
        f"{opts.damping_floor:g} (residual {rnorm:.3e})"
    )


@dataclass(frozen=True)
class SolutionReport:
    residual_l2: tuple[float, ...]
    residual_means: tuple[float, ...]
    field_means: tuple[float, ...]
    normalized_masses: tuple[float, ...]
    functional_value: float
    residual_norm: float


def verify_solution(
    u: FieldSet, p: ProblemInstance, w: WeightSpec, grid: TorusGrid
) -> SolutionReport:
    """Consistency report for a candidate solution: per-component
    residual sizes, mean defects, the masses <h_i e^{v_i}> after the
    normalizing shift v_i = u_i - log<h_i e^{u_i}> (each must be 1), and
    the functional value."""
    h = build_weights(w, grid)
    values = u.values
    means = _density_means(h, values)
    shifted = values - np.log(means)[:, None, None]
    masses = (h * np.exp(shifted)).mean(axis=(1, 2))
    rho = np.asarray(p.rho, dtype=np.float64)
    r = _residual_arrays(values, p.matrix.entries, rho, h, grid)
    m = grid.resolution
    per_component = tuple(
        float(np.sqrt(np.mean(r[i] ** 2))) for i in range(values.shape[0])
    )
    return SolutionReport(
        residual_l2=per_component,
        residual_means=tuple(float(x) for x in r.mean(axis=(1, 2))),
        field_means=tuple(float(x) for x in values.mean(axis=(1, 2))),
        normalized_masses=tuple(float(x) for x in masses),
        functional_value=functional_J(u, p, h, grid),
        residual_norm=_l2_norm(r, m),
    )
