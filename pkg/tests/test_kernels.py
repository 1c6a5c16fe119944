import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import optimize

from npspectra.geometry import beta_of_t, build_perturbed_curve
from npspectra.kernels import (SplitFitError, chi_minus_one, diagonal_split, full_np_kernel,
                               full_s_kernel, modal_k, modal_k_oracle, modal_s, modal_s_oracle)
from npspectra.specfun import DomainError

CURVE_NAMES = ("inward", "outward", "sphere")


@pytest.fixture(scope="module")
def curves(sphere, perturbed):
    return {"sphere": sphere, "outward": perturbed,
            "inward": build_perturbed_curve(math.pi / 2 + 0.08)}


def rel(a, b):
    return abs(a - b) / abs(b)


# --- full kernels ---------------------------------------------------------------

def test_sphere_np_kernel_at_unit_distance(sphere):
    # a point 60 degrees from the south pole is at chord distance 1
    tp = optimize.brentq(lambda t: beta_of_t(sphere, t) - (math.pi - math.pi / 3), 0.0, 1.0, xtol=1e-15)
    assert abs(full_s_kernel(sphere, 0.0, 0.0, tp) - 1.0) < 1e-12
    assert abs(full_np_kernel(sphere, 0.0, 0.0, tp) - 0.5) < 1e-12


def test_sphere_np_kernel_is_half_single_layer(sphere):
    rng = np.random.default_rng(3)
    for t, th, tp in zip(rng.uniform(0, 1, 50), rng.uniform(0, 2 * math.pi, 50), rng.uniform(0, 1, 50)):
        k, s = full_np_kernel(sphere, t, th, tp), full_s_kernel(sphere, t, th, tp)
        assert abs(k - 0.5 * s) <= 1e-10 * s


def test_np_kernel_vanishes_along_cone_generator(perturbed):
    eps = perturbed.epsilon
    assert abs(full_np_kernel(perturbed, 0.1 * eps, 0.0, 0.4 * eps)) < 1e-8


def test_np_kernel_ambient_recomputation(perturbed):
    t, th, tp = 0.3, 1.0, 0.7
    g, gp = perturbed.evaluate(np.array([t, tp])).T[:, :4]
    r = np.array([g[0] * math.cos(th), g[0] * math.sin(th), g[1]])
    rp = np.array([gp[0], 0.0, gp[1]])
    # outward normal: rotate the tangent (g1', g2') clockwise in the profile plane
    tang = np.array([g[2] * math.cos(th), g[2] * math.sin(th), g[3]])
    radial = np.array([math.cos(th), math.sin(th), 0.0])
    nu = np.cross(tang, np.cross(radial, np.array([0.0, 0.0, 1.0])))
    nu = nu if nu @ radial * g[3] >= 0 else -nu
    nu /= np.linalg.norm(nu)
    d = r - rp
    expected = d @ nu / np.linalg.norm(d) ** 3
    assert rel(full_np_kernel(perturbed, t, th, tp), expected) < 1e-12


def test_full_kernels_reject_coincident_points(sphere):
    with pytest.raises(DomainError):
        full_np_kernel(sphere, 0.4, 0.0, 0.4)
    with pytest.raises(DomainError):
        full_s_kernel(sphere, 0.4, 0.0, 0.4)


# --- modal kernels ----------------------------------------------------------------

def test_sphere_modal_k_is_half_modal_s(sphere):
    rng = np.random.default_rng(4)
    t, tp = rng.uniform(1e-3, 1 - 1e-3, (2, 400))
    keep = np.abs(t - tp) > 1e-6
    for n in (0, 1, 5, 20):
        k, s = modal_k(n, t[keep], tp[keep], sphere), modal_s(n, t[keep], tp[keep], sphere)
        assert np.max(np.abs(k - 0.5 * s) / s) < 1e-12


def test_modal_kernels_even_in_n(perturbed):
    t, tp = np.array([0.005, 0.3, 0.8]), np.array([0.6, 0.31, 0.2])
    assert np.array_equal(modal_k(-3, t, tp, perturbed), modal_k(3, t, tp, perturbed))
    assert np.array_equal(modal_s(-7, t, tp, perturbed), modal_s(7, t, tp, perturbed))


def test_modal_k_oracle_example(sphere):
    assert rel(modal_k(2, 0.3, 0.6, sphere), modal_k_oracle(2, 0.3, 0.6, sphere)) < 1e-9


def test_modal_s_oracle_example(sphere):
    assert rel(modal_s(0, 0.2, 0.8, sphere), modal_s_oracle(0, 0.2, 0.8, sphere)) < 1e-9


def test_modal_kernels_reject_diagonal(sphere):
    with pytest.raises(DomainError):
        modal_k(1, 0.4, 0.4, sphere)


def test_chi_exceeds_one_off_diagonal(perturbed):
    t = np.linspace(0.001, 0.999, 101)
    c = chi_minus_one(perturbed, t[:, None], t[None, :])
    off = ~np.eye(t.size, dtype=bool)
    assert np.all(c[off] > 0)


@settings(max_examples=25, deadline=None)
@given(n=st.integers(0, 30), t=st.floats(1e-3, 0.999), tp=st.floats(1e-3, 0.999),
       kind=st.sampled_from(CURVE_NAMES))
def test_oracle_equivalence_property(curves, n, t, tp, kind):
    if abs(t - tp) < 1e-6:
        return
    curve = curves[kind]
    assert rel(modal_k(n, t, tp, curve), modal_k_oracle(n, t, tp, curve)) < 1e-9
    assert rel(modal_s(n, t, tp, curve), modal_s_oracle(n, t, tp, curve)) < 1e-9


@settings(max_examples=40, deadline=None)
@given(n=st.integers(0, 64), t=st.floats(1e-4, 0.9999), tp=st.floats(1e-4, 0.9999))
def test_modal_s_positive(perturbed, n, t, tp):
    if t == tp:
        return
    assert modal_s(n, t, tp, perturbed) >= 0


def test_log_singularity_is_bounded(perturbed):
    t = 0.4
    d = np.logspace(-12, -3, 40)
    s = modal_s(3, t, t + d, perturbed)
    ratio = s / np.abs(np.log(d))
    assert np.all(np.isfinite(ratio)) and ratio.max() < 2 * ratio.min()


# --- diagonal split ----------------------------------------------------------------


def test_split_log_coefficient_matches_oracle_limit(sphere):
    t = 0.5
    d1, d2 = 1e-5, 1e-6
    slope = (modal_s_oracle(0, t, t + d1, sphere) - modal_s_oracle(0, t, t + d2, sphere)) / math.log(d1 / d2)
    a, _ = diagonal_split(0, t, sphere, 1e-4, which="s")
    assert rel(a, slope) < 1e-4


def test_split_smooth_part_is_richardson_stable(perturbed):
    t = 0.35
    b = [diagonal_split(4, t, perturbed, h, which="k")[1] for h in (5e-4, 2.5e-4, 1.25e-4)]
    # the fit error behaves like h^2 log h: second-order extrapolation, two levels
    r1, r2 = (4 * b[1] - b[0]) / 3, (4 * b[2] - b[1]) / 3
    assert abs(r1 - r2) <= 1e-3 * abs(r2)
    assert abs(r2 - diagonal_split(4, t, perturbed, 1e-5, which="k")[1]) <= 1e-3 * abs(r2)


def test_split_k_minus_half_s_on_sphere(sphere):
    a, _ = diagonal_split(2, 0.6, sphere, 1e-3, which="k-s/2")
    a_s, _ = diagonal_split(2, 0.6, sphere, 1e-3, which="s")
    assert abs(a) <= 1e-9 * abs(a_s)


def test_split_reports_bad_fit(perturbed):
    # straddling the blend join at eps the kernel is not log + smooth at this scale
    with pytest.raises(SplitFitError):
        diagonal_split(0, perturbed.epsilon, perturbed, 0.004, which="k", rtol=1e-9)


def test_oracle_close_pair_near_vertex(perturbed):
    # |t - t'| = 6e-6 inside the blend: the normal term is a second-order cancellation
    t, tp = 0.0054404699869020755, 0.005434451104395828
    assert rel(modal_k(26, t, tp, perturbed), modal_k_oracle(26, t, tp, perturbed)) < 1e-9
