import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from npspectra.geometry import (ConstructionError, admissible_c0, admissibility_conditions,
                                beta_of_t, build_perturbed_curve, build_sphere_curve,
                                check_constraints, is_admissible, perturbation_epsilon,
                                smoothstep)
from npspectra.specfun import DomainError

ALPHA = math.pi / 2 - 0.08


def test_sphere_starts_at_south_pole(sphere):
    g1, g2 = sphere.point(0.0)
    assert g1[0] == 0.0 and g2[0] == -1.0


def test_sphere_graph_form(sphere):
    g1, g2 = sphere.point(0.1)
    assert abs(g1[0] - 0.1) < 1e-15 and abs(g2[0] + math.sqrt(0.99)) < 1e-15


def test_sphere_reaches_north_pole(sphere):
    g1, g2 = sphere.point(1.0)
    assert abs(g1[0]) < 1e-14 and abs(g2[0] - 1.0) < 1e-14


def test_sphere_speed_bracket(sphere):
    s = sphere.speed(np.linspace(0, 1, 100_001))
    assert s.min() >= 0.25 and s.max() <= 4.0


def test_sphere_on_unit_circle(sphere):
    g1, g2 = sphere.point(np.linspace(0, 1, 10_001))
    assert np.max(np.abs(np.hypot(g1, g2) - 1.0)) < 1e-13


def test_sphere_derivatives_match_finite_differences(sphere):
    t = np.linspace(0.01, 0.99, 97)
    h = 1e-6
    v, vp, vm = sphere.evaluate(t), sphere.evaluate(t + h), sphere.evaluate(t - h)
    assert np.max(np.abs((vp[:2] - vm[:2]) / (2 * h) - v[2:4])) < 1e-7
    assert np.max(np.abs((vp[2:4] - vm[2:4]) / (2 * h) - v[4:6])) < 1e-5


def test_sphere_constraints_pass(sphere):
    report = check_constraints(sphere)
    assert report.passed, report.failures()


@pytest.mark.parametrize("t,expected", [(0.0, math.pi), (1.0, 0.0), (0.1, math.pi - math.asin(0.1))])
def test_beta_examples(sphere, t, expected):
    assert abs(beta_of_t(sphere, t) - expected) < 1e-13


def test_beta_monotone_and_consistent(sphere):
    t = np.linspace(0, 1, 2001)
    b = beta_of_t(sphere, t)
    g1, g2 = sphere.point(t)
    assert np.all(np.diff(b) < 0)
    assert np.max(np.abs(np.cos(b) - g2)) < 1e-13 and np.max(np.abs(np.sin(b) - g1)) < 1e-13


def test_beta_rejects_perturbed_curve(perturbed):
    with pytest.raises(DomainError):
        beta_of_t(perturbed, 0.5)


def test_epsilon_from_alpha(perturbed):
    assert abs(perturbed.epsilon - 0.01) < 1e-15
    assert perturbation_epsilon(math.pi / 2 + 0.08) == pytest.approx(0.01, abs=1e-15)


def test_cone_slope_exact(perturbed):
    v = perturbed.evaluate(np.array([perturbed.epsilon / 4]))
    assert v[3, 0] == 1.0 / math.tan(ALPHA)


def test_equals_sphere_beyond_eps(perturbed, sphere):
    t = np.linspace(perturbed.epsilon, 1, 50_001)
    assert np.max(np.abs(perturbed.evaluate(t)[:4] - sphere.evaluate(t)[:4])) <= 1e-14


def test_perturbed_constraints_pass(perturbed):
    report = check_constraints(perturbed, npts=100_000)
    assert report.passed, report.failures()
    assert report["|g2''| <= 40 near vertex"].measured <= 40.0


def test_inward_perturbation_constraints_pass():
    report = check_constraints(build_perturbed_curve(math.pi / 2 + 0.08))
    assert report.passed, report.failures()


def test_continuity_at_joins(perturbed):
    eps = perturbed.epsilon
    for p in (eps / 2, eps):
        lo, hi = perturbed.evaluate(np.array([p - 1e-12, p + 1e-12]))[:4].T
        assert np.max(np.abs(hi - lo)) < 1e-9


def _bad_blend(x):
    s, ds, dds = smoothstep(x)
    xc = np.clip(x, 0.0, 1.0)
    b = 0.5 * np.sin(math.pi * xc)
    return s - b, ds - 0.5 * math.pi * np.cos(math.pi * xc), dds + 0.5 * math.pi**2 * np.sin(math.pi * xc)


def test_corrupted_blend_rejected():
    with pytest.raises(ConstructionError, match="blend slope"):
        build_perturbed_curve(ALPHA, blend=_bad_blend)


def test_corrupted_blend_flagged_by_checker():
    curve = build_perturbed_curve(ALPHA, blend=_bad_blend, validate=False)
    report = check_constraints(curve, npts=20_001)
    assert not report["blend slope <= |cot a|"].passed


@pytest.mark.parametrize("alpha", [math.pi / 2, math.pi / 2 - 0.5, math.pi / 2 + 0.5, 0.3])
def test_inadmissible_alpha_rejected(alpha):
    with pytest.raises(DomainError):
        build_perturbed_curve(alpha)


def test_c0_threshold_is_sharp():
    c0 = admissible_c0()
    assert 0.08 < c0 < 0.5
    assert is_admissible(math.pi / 2 - 0.999 * c0) and is_admissible(math.pi / 2 + 0.999 * c0)
    assert not (is_admissible(math.pi / 2 - 1.01 * c0) and is_admissible(math.pi / 2 + 1.01 * c0))


def test_blend_slack():
    # the slope changes by at most 2|cot a| <= (9/4)|a - pi/2|
    d = 0.08
    assert 2 * abs(1 / math.tan(math.pi / 2 - d)) <= 9 / 4 * d


@settings(max_examples=15, deadline=None)
@given(offset=st.floats(0.005, 0.2), sign=st.sampled_from([-1, 1]))
def test_admissible_curves_satisfy_bounds(offset, sign):
    alpha = math.pi / 2 + sign * offset
    if not is_admissible(alpha):
        with pytest.raises(DomainError):
            build_perturbed_curve(alpha)
        return
    curve = build_perturbed_curve(alpha)
    report = check_constraints(curve, npts=20_001)
    assert report.passed, report.failures()
    assert all(c[3] for c in admissibility_conditions(alpha))


@settings(max_examples=25, deadline=None)
@given(t=st.floats(0.0, 1.0), tp=st.floats(0.0, 1.0))
def test_chord_comparable_to_parameter_distance(perturbed, t, tp):
    if abs(t - tp) < 1e-9:
        return
    g = perturbed.evaluate(np.array([t, tp]))
    ratio = math.hypot(g[0, 0] - g[0, 1], g[1, 0] - g[1, 1]) / abs(t - tp)
    assert 0.25 <= ratio <= 4.0
