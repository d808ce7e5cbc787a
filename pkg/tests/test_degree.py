"""Degree computation from topology and singularity data."""

import math
import warnings

import numpy as np
import pytest

from liouville import (
    HypothesisViolation,
    InteractionMatrix,
    NegativeMassWarning,
    NegativeRho,
    OnCriticalSurface,
    OutOfRange,
    PreconditionFailed,
    ProblemInstance,
    SingularitySet,
    SurfaceSpec,
    ZeroMass,
    existence_certificate,
    leray_schauder_degree,
    normalized_energy,
    prescribed_masses,
    torus_special_degree,
)

EXCHANGE = [[0.0, 1.0], [1.0, 0.0]]
A1_ONES = [[0.0, 1.0, 1.0], [1.0, 0.0, 1.0], [1.0, 1.0, 0.0]]


def scalar_instance(chi: int, gammas: tuple[float, ...], q: float):
    """n=1, a=1 instance with the requested normalized energy (q = rho/8pi)."""
    return ProblemInstance(
        surface=SurfaceSpec.from_chi(chi),
        singularities=SingularitySet(gammas),
        matrix=InteractionMatrix([[1.0]]),
        rho=(8.0 * math.pi * q,),
    )


# -------------------------------------------------------- normalized_energy


def test_scalar_energy_is_rho_over_8pi():
    assert normalized_energy((8.0 * math.pi,), [[1.0]]) == pytest.approx(1.0)
    assert normalized_energy((12.0 * math.pi,), [[1.0]]) == pytest.approx(1.5)


def test_two_component_energy():
    q = normalized_energy((1.0, 1.0), EXCHANGE)
    assert q == pytest.approx(1.0 / (8.0 * math.pi))


def test_energy_rejects_bad_masses():
    with pytest.raises(NegativeRho):
        normalized_energy((1.0, -0.5), EXCHANGE)
    with pytest.raises(ZeroMass):
        normalized_energy((0.0,), [[1.0]])


# --------------------------------------------------- leray_schauder_degree


def test_sphere_ladder_degree():
    result = leray_schauder_degree(scalar_instance(2, (), 1.5))
    assert result.degree == -1
    assert result.region_k == 1
    assert result.partial_coefficients == (1, -2)
    assert result.nearest_levels == (1.0, 2.0)


def test_torus_two_sources_degree():
    result = leray_schauder_degree(scalar_instance(0, (1.0, 2.0), 1.5))
    assert result.degree == 3
    assert result.region_k == 1
    assert result.q_normalized == pytest.approx(1.5)


def test_degree_is_one_below_the_first_level():
    for chi in (2, 0, -2):
        result = leray_schauder_degree(scalar_instance(chi, (0.5,), 0.5))
        assert result.degree == 1
        assert result.region_k == 0


def test_critical_hit_raises():
    with pytest.raises(OnCriticalSurface):
        leray_schauder_degree(scalar_instance(0, (), 1.0))


def test_hypothesis_gate():
    p = ProblemInstance(
        surface=SurfaceSpec.from_chi(0),
        singularities=SingularitySet.empty(),
        matrix=InteractionMatrix([[2.0, 1.0], [1.0, 2.0]]),
        rho=(1.0, 1.0),
    )
    with pytest.raises(HypothesisViolation):
        leray_schauder_degree(p)


def test_energy_beyond_cap_is_out_of_range():
    with pytest.raises(OutOfRange):
        leray_schauder_degree(scalar_instance(0, (), 25.0), cap=20.0)


def test_planar_domain_uses_the_same_formula():
    # an annulus has chi = 0, so it matches the torus coefficients
    annulus = ProblemInstance(
        surface=SurfaceSpec.planar_domain(holes=1),
        singularities=SingularitySet((1.0, 2.0)),
        matrix=InteractionMatrix([[1.0]]),
        rho=(12.0 * math.pi,),
    )
    assert leray_schauder_degree(annulus).degree == 3


def test_surface_constructors_resolve_chi():
    assert SurfaceSpec.closed_surface(genus=0).chi == 2
    assert SurfaceSpec.closed_surface(genus=2).chi == -2
    assert SurfaceSpec.planar_domain(holes=0).chi == 1
    assert SurfaceSpec.planar_domain(holes=3).chi == -2
    assert SurfaceSpec.torus().chi == 0
    assert SurfaceSpec.from_chi(-7).chi == -7


# ------------------------------------------------------ torus special case


def test_special_degree_two_sources():
    result = torus_special_degree(SingularitySet((1.0, 2.0)), EXCHANGE)
    assert result.degree == 3
    assert result.q == pytest.approx(1.5)
    np.testing.assert_allclose(result.rho, [4.0 * math.pi * 3.0] * 2)


def test_special_degree_single_source():
    result = torus_special_degree(SingularitySet((1.0,)), [[1.0]])
    assert result.degree == 1


def test_special_degree_three_unit_sources():
    result = torus_special_degree(SingularitySet((1.0, 1.0, 1.0)), A1_ONES)
    assert result.degree == 4


def test_special_degree_rejects_even_total():
    with pytest.raises(PreconditionFailed):
        torus_special_degree(SingularitySet((1.0, 1.0)), EXCHANGE)


def test_special_degree_rejects_fractional_strengths():
    with pytest.raises(PreconditionFailed):
        torus_special_degree(SingularitySet((0.5, 0.5)), EXCHANGE)


def test_special_degree_requires_hypotheses():
    with pytest.raises(HypothesisViolation):
        torus_special_degree(SingularitySet((1.0,)), [[2.0, 1.0], [1.0, 2.0]])


def test_two_routes_agree_on_random_instances():
    rng = np.random.default_rng(20240818)
    matrices = [
        [[1.0]],
        EXCHANGE,
        [[0.0, 2.0], [2.0, 1.0]],
        A1_ONES,
        [[0.0, 1.0, 1.5], [1.0, 0.0, 2.0], [1.5, 2.0, 0.0]],
    ]
    found = 0
    while found < 50:
        n_sources = int(rng.integers(1, 5))
        gammas = tuple(float(g) for g in rng.integers(1, 5, size=n_sources))
        if int(sum(gammas)) % 2 == 0:
            continue
        found += 1
        a = matrices[int(rng.integers(0, len(matrices)))]
        result = torus_special_degree(SingularitySet(gammas), a)
        closed_form = math.prod(int(g) + 1 for g in gammas) // 2
        assert result.degree == closed_form
        p = ProblemInstance(
            SurfaceSpec.torus(),
            SingularitySet(gammas),
            InteractionMatrix(a),
            tuple(result.rho),
        )
        series_route = leray_schauder_degree(
            p, cap=max(20.0, sum(gammas) + 1.0)
        )
        assert series_route.degree == result.degree


# -------------------------------------------------------- prescribed masses


def test_prescribed_masses_scalar():
    out = prescribed_masses(SingularitySet((1.0, 2.0)), [[1.0]])
    np.testing.assert_allclose(out, [12.0 * math.pi])


def test_prescribed_masses_exchange():
    out = prescribed_masses(SingularitySet((1.0,)), EXCHANGE)
    np.testing.assert_allclose(out, [4.0 * math.pi, 4.0 * math.pi])


def test_prescribed_masses_no_sources_warns_on_zero_vector():
    with pytest.warns(NegativeMassWarning):
        out = prescribed_masses(SingularitySet.empty(), [[1.0]])
    np.testing.assert_allclose(out, [0.0])


def test_prescribed_masses_match_the_special_route():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        result = torus_special_degree(SingularitySet((2.0, 1.0)), A1_ONES)
        expected = prescribed_masses(SingularitySet((2.0, 1.0)), A1_ONES)
    np.testing.assert_allclose(result.rho, expected)


# ------------------------------------------------------------- existence


def test_existence_positive_degree():
    cert = existence_certificate(scalar_instance(0, (1.0, 2.0), 1.5))
    assert cert.solvable
    assert cert.structural
    assert cert.result.degree == 3
    assert "solution exists" in cert.explanation


def test_existence_zero_degree_is_inconclusive():
    cert = existence_certificate(scalar_instance(2, (), 2.5))
    assert not cert.solvable
    assert not cert.structural
    assert cert.result.degree == 0


def test_existence_below_first_level_is_always_solvable():
    cert = existence_certificate(scalar_instance(2, (0.5,), 0.5))
    assert cert.solvable
    assert cert.result.degree == 1


def test_structural_condition_needs_chi_nonpositive_and_integer_strengths():
    cert = existence_certificate(scalar_instance(0, (0.5,), 0.7))
    assert not cert.structural
    cert2 = existence_certificate(scalar_instance(1, (1.0,), 0.5))
    assert not cert2.structural
    cert3 = existence_certificate(scalar_instance(-2, (2.0,), 0.5))
    assert cert3.structural


def test_structural_instances_always_have_positive_degree():
    rng = np.random.default_rng(19)
    checked = 0
    while checked < 100:
        chi = -2 * int(rng.integers(0, 3))
        n_sources = int(rng.integers(0, 4))
        gammas = tuple(float(g) for g in rng.integers(0, 4, size=n_sources))
        q = float(rng.uniform(0.05, 10.0))
        if min(abs(q - round(q)), abs(q)) < 1e-6:
            continue
        cert = existence_certificate(scalar_instance(chi, gammas, q), cap=12.0)
        assert cert.structural
        assert cert.result.degree >= 1
        checked += 1


# -------------------------------------------------------------- properties


def test_scaling_invariance():
    rng = np.random.default_rng(21)
    for _ in range(50):
        gammas = tuple(rng.uniform(0.0, 2.0, size=2).tolist())
        a = np.asarray(EXCHANGE) * float(rng.uniform(0.5, 2.0))
        rho = rng.uniform(0.5, 20.0, size=2)
        c = float(rng.uniform(0.25, 4.0))
        p1 = ProblemInstance(
            SurfaceSpec.torus(),
            SingularitySet(gammas),
            InteractionMatrix(a),
            tuple(rho),
        )
        p2 = ProblemInstance(
            SurfaceSpec.torus(),
            SingularitySet(gammas),
            InteractionMatrix(a / c),
            tuple(c * rho),
        )
        try:
            d1 = leray_schauder_degree(p1)
        except OnCriticalSurface:
            continue
        d2 = leray_schauder_degree(p2)
        assert d1.degree == d2.degree
        assert d1.q_normalized == pytest.approx(d2.q_normalized, rel=1e-12)


def test_degree_jumps_by_the_next_coefficient():
    gammas = (1.0, 2.0)
    s = SingularitySet(gammas)
    from liouville import build_generating_function, enumerate_spectrum

    spec = enumerate_spectrum(s, cap=6.0)
    g = build_generating_function(chi=0, singularities=s, cap=6.0)
    coeffs = dict(g.sorted_terms())
    for k, level in enumerate(spec.levels[:-1]):
        below = leray_schauder_degree(scalar_instance(0, gammas, level - 0.25))
        above = leray_schauder_degree(scalar_instance(0, gammas, level + 0.25))
        jump = above.degree - below.degree
        assert jump == coeffs.get(level, 0)
        assert below.region_k == k
        assert above.region_k == k + 1
