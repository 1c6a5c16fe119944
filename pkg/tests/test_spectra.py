import math
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from npspectra.cone import essential_interval
from npspectra.discretize import assemble, build_grid
from npspectra.specfun import DomainError
from npspectra.spectra import (SpectrumReport, detect_discrete, eigenpair_residual,
                               energy_spectrum, sphere_eigenvalues, sphere_harmonic_profile)

ALPHA = math.pi / 2 - 0.08


def _fake_operator(A, P, n=0):
    grid = SimpleNamespace(size=A.shape[0])
    return SimpleNamespace(n=n, A=A, P=P, grid=grid, gram_asymmetry=0.0)


def test_identity_pencil():
    rng = np.random.default_rng(0)
    M = rng.normal(size=(12, 12))
    P = M @ M.T + 12 * np.eye(12)
    rep = energy_spectrum(_fake_operator(np.eye(12), P))
    assert np.allclose(rep.eigenvalues, 1.0, atol=1e-13)


def test_sphere_mode_zero_top_six(sphere, sphere_grid, operator):
    rep = energy_spectrum(operator(0, sphere, sphere_grid))
    assert np.max(np.abs(rep.top(6) - [1, 1 / 3, 1 / 5, 1 / 7, 1 / 9, 1 / 11])) <= 1e-6


def test_sphere_mode_three_top(sphere, sphere_grid, operator):
    rep = energy_spectrum(operator(3, sphere, sphere_grid))
    assert abs(rep.eigenvalues[0] - 1 / 7) <= 1e-6


def test_sphere_spectrum_in_unit_interval(sphere, sphere_grid, operator):
    for n in (0, 2, 6):
        ev = energy_spectrum(operator(n, sphere, sphere_grid)).eigenvalues
        assert ev.max() <= 1 / (2 * n + 1) + 1e-6 and ev.min() > -1e-4


def test_diagnostics_reported(perturbed, perturbed_grid, operator):
    rep = energy_spectrum(operator(2, perturbed, perturbed_grid))
    d = rep.diagnostics
    assert {"energy_residual", "gram_asymmetry", "symmetrization_bound"} <= set(d)
    assert 0 < d["energy_residual"] < 1e-2
    assert np.all(np.diff(rep.eigenvalues) <= 0)


def test_eigenvectors_p_orthonormal(perturbed, perturbed_grid, operator):
    op = operator(4, perturbed, perturbed_grid)
    V = energy_spectrum(op, keep_vectors=True).vectors
    assert np.max(np.abs(V.T @ op.P @ V - np.eye(V.shape[1]))) < 1e-8


def test_sphere_eigenvector_shape(sphere):
    # order-16 panels: the pencil's eigenvector error tracks the near-field asymmetry
    grid = build_grid(sphere, 256, order=16)
    for n in range(0, 9):
        op = assemble(n, sphere, grid)
        v = energy_spectrum(op, keep_vectors=True).vectors[:, 0]
        f = sphere_harmonic_profile(n, grid.nodes)
        cos = abs(f @ op.P @ v) / math.sqrt((f @ op.P @ f) * (v @ op.P @ v))
        assert cos >= 1 - 1e-8, n


def test_mode_sign_spectra_identical(perturbed, perturbed_grid):
    a = energy_spectrum(assemble(3, perturbed, perturbed_grid)).eigenvalues
    b = energy_spectrum(assemble(-3, perturbed, perturbed_grid)).eigenvalues
    assert np.array_equal(a, b)


def test_discrete_eigenvalue_converges_monotonically(perturbed):
    z = []
    for N in (128, 256, 512):
        rep = energy_spectrum(assemble(2, perturbed, build_grid(perturbed, N)))
        z.append(rep.nearest(0.2))
    d1, d2 = abs(z[0] - z[1]), abs(z[1] - z[2])
    assert d2 <= d1 / 4


def _report(vals):
    return SpectrumReport(n=0, N=len(vals), eigenvalues=np.array(sorted(vals, reverse=True)))


def test_detect_discrete_smooth_surface():
    rep = _report([1.0, 0.3333333, 0.2, 1e-5, 3e-6])
    ref = _report([1.0, 0.3333334, 0.2000002, 6e-6, 1e-7])
    assert detect_discrete(rep, ref, None, 1e-6) == [1.0, 0.3333333, 0.2]
    assert rep.discrete == [1.0, 0.3333333, 0.2]


def test_detect_discrete_zero_tolerance():
    rep = _report([0.5, 0.25])
    assert detect_discrete(rep, _report([0.5 + 1e-12, 0.25 + 1e-9]), None, 0.0) == []


def test_detect_discrete_excludes_essential_interval():
    rep = _report([0.5, 0.01, 0.0099])
    ref = _report([0.5, 0.01, 0.0099])
    assert detect_discrete(rep, ref, (0.0, 0.0099), 1e-3) == [0.5]


def test_detect_discrete_on_perturbed_curve(perturbed, perturbed_grid, operator):
    n = 8
    iv = essential_interval(n, ALPHA).as_tuple()
    rep = energy_spectrum(operator(n, perturbed, perturbed_grid), essential_interval=iv)
    ref = energy_spectrum(assemble(n, perturbed, build_grid(perturbed, 512)), essential_interval=iv)
    found = detect_discrete(rep, ref, iv, 1e-6)
    assert any(abs(z - 1 / 17) < 1e-6 for z in found)
    assert all(not iv[0] - 1e-6 <= z <= iv[1] + 1e-6 for z in found)
    cluster = [x for x in rep.eigenvalues if iv[0] <= x <= iv[1]]
    assert cluster and not set(cluster) & set(found)


def test_sphere_residual_small(sphere, sphere_grid):
    for n in (1, 4, 8):
        assert eigenpair_residual(n, sphere, sphere_grid) <= 1e-8


def test_mode_zero_residual_is_top_eigenvalue_error(sphere, sphere_grid, operator):
    op = operator(0, sphere, sphere_grid)
    res = eigenpair_residual(0, sphere, sphere_grid, op=op)
    err = abs(energy_spectrum(op).eigenvalues[0] - 1.0)
    assert res <= err + 1e-8


def test_perturbed_residual_bounded_constant(perturbed, perturbed_grid, sphere):
    size = 0.08 + 0.01
    scaled = [eigenpair_residual(n, perturbed, perturbed_grid) * n / size for n in (4, 8, 16)]
    # fitted once over these modes: the whole sequence sits at the quadrature floor
    assert max(scaled) <= 1e-7


def test_residual_degenerate_norm_raises(sphere):
    grid = build_grid(sphere, 64)
    M = grid.size
    op = SimpleNamespace(A=np.eye(M), P=np.zeros((M, M)))
    with pytest.raises(DomainError):
        eigenpair_residual(3, sphere, grid, op=op)


@settings(max_examples=10, deadline=None)
@given(n=st.integers(0, 40), count=st.integers(1, 10))
def test_sphere_eigenvalue_formula(n, count):
    ev = sphere_eigenvalues(n, count)
    assert ev[0] == 1 / (2 * n + 1)
    assert np.all(np.diff(ev) < 0)
    assert np.array_equal(ev, sphere_eigenvalues(-n, count))
