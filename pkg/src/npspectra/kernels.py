"""Axisymmetric NP and single-layer kernels and their Fourier-mode kernels.

Modal kernels are evaluated from the closed form in terms of ``Q_{n-1/2}`` and
``R_n``:

.. math::
    K^n(t, t') = \\frac{1}{\\pi\\sqrt{g_1 g_1'}}\\Big[\\frac{g_2'(t)}{2 g_1(t)|g'(t)|}
                 (Q + R) - \\frac{\\langle g(t) - g(t'), \\nu(t)\\rangle}
                 {|g(t) - g(t')|^2} R\\Big],
    \\qquad S^n(t, t') = \\frac{Q}{\\pi\\sqrt{g_1 g_1'}}

with ``Q = Q_{n-1/2}(chi)``, ``R = R_n(chi)`` and ``nu`` the outward profile normal.
The constant ``1/pi`` is what the Fourier-coefficient definition
``K^n = (1/2pi) int e^{-in theta} K(t, theta, t', 0) d theta`` produces.

:func:`modal_k_oracle` and :func:`modal_s_oracle` compute the same quantities by
direct theta-quadrature of the ambient kernels and are meant for verification.
"""

import math
import warnings

import mpmath
import numpy as np
from scipy import integrate

from .specfun import DomainError, q_and_r

__all__ = [
    "chord",
    "same_piece",
    "full_np_kernel",
    "full_s_kernel",
    "chi_minus_one",
    "modal_k",
    "modal_s",
    "modal_kernels_from_geometry",
    "modal_k_oracle",
    "modal_s_oracle",
    "diagonal_split",
    "SplitFitError",
]


class SplitFitError(ArithmeticError):
    """The log/smooth fit near the diagonal left a residual above tolerance."""


def _ambient(curve, t, theta):
    v = curve.evaluate(np.atleast_1d(t))[:, 0]
    g1, g2, d1, d2 = v[:4]
    sp = math.hypot(d1, d2)
    c, s = math.cos(theta), math.sin(theta)
    r = np.array([g1 * c, g1 * s, g2])
    nu = np.array([d2 * c, d2 * s, -d1]) / sp
    return r, nu


def full_np_kernel(curve, t, theta, tprime):
    """``<r - r', nu_r> / |r - r'|^3`` at ``r = r(t, theta)`` and ``r' = r(t', 0)``."""
    r, nu = _ambient(curve, t, theta)
    rp, _ = _ambient(curve, tprime, 0.0)
    d = r - rp
    dist = float(np.linalg.norm(d))
    if dist == 0.0:
        raise DomainError("coincident points")
    return float(d @ nu) / dist**3


def full_s_kernel(curve, t, theta, tprime):
    """``1 / |r - r'|`` at ``r = r(t, theta)`` and ``r' = r(t', 0)``."""
    r, _ = _ambient(curve, t, theta)
    rp, _ = _ambient(curve, tprime, 0.0)
    dist = float(np.linalg.norm(r - rp))
    if dist == 0.0:
        raise DomainError("coincident points")
    return 1.0 / dist


def _pair_geometry(gt, gs, chord=None):
    """``chi - 1`` and the planar normal term from profile data of targets and sources.

    ``chord`` optionally supplies ``g(t) - g(t')`` computed without cancellation.
    """
    if chord is None:
        dx = gt[0] - gs[0]
        dy = gt[1] - gs[1]
    else:
        dx, dy = chord
    dist2 = dx * dx + dy * dy
    chim1 = dist2 / (2.0 * gt[0] * gs[0])
    sp = np.hypot(gt[2], gt[3])
    # <g(t) - g(t'), nu(t)> / |g(t) - g(t')|^2 with nu = (g2', -g1')/|g'|;
    # undefined on the diagonal, which callers reject or never form
    with np.errstate(divide="ignore", invalid="ignore"):
        normal = (dx * gt[3] - dy * gt[2]) / (sp * dist2)
    return chim1, normal, sp


_CHORD_X, _CHORD_W = np.polynomial.legendre.leggauss(10)


def chord(curve, t, tprime):
    """``g(t) - g(t')`` as ``int_{t'}^{t} g'(u) du`` by 10-point Gauss-Legendre.

    Accurate to a few ulps of ``|g'| |t - t'|`` when the curve is smooth between the
    two parameters, i.e. when they lie in one piece between breakpoints.
    """
    t = np.asarray(t, float)
    tprime = np.asarray(tprime, float)
    half = 0.5 * (t - tprime)
    mid = 0.5 * (t + tprime)
    u = (mid[..., None] + half[..., None] * _CHORD_X).ravel()
    v = curve.evaluate(u)
    shape = np.shape(mid) + (_CHORD_X.size,)
    dx = half * (v[2].reshape(shape) @ _CHORD_W)
    dy = half * (v[3].reshape(shape) @ _CHORD_W)
    return dx, dy


def chi_minus_one(curve, t, tprime):
    """``chi - 1 = |g(t) - g(t')|^2 / (2 g1(t) g1(t'))`` elementwise."""
    t, tprime = np.broadcast_arrays(np.asarray(t, float), np.asarray(tprime, float))
    gt = curve.evaluate(t.ravel())
    gs = curve.evaluate(tprime.ravel())
    return _pair_geometry(gt, gs)[0].reshape(t.shape)


def modal_kernels_from_geometry(n, gt, gs, want=("k", "s"), chord=None):
    """Modal K and/or S kernels for paired columns of profile data.

    ``gt`` and ``gs`` are ``(6, m)`` arrays from :meth:`GeneratingCurve.evaluate` at
    targets and sources. Returns a dict keyed by ``"k"``/``"s"``. Near the diagonal
    pass ``chord = (dx, dy)``, an accurate ``g(t) - g(t')``; differencing nodal
    values loses ``eps/|t - t'|^2`` relative accuracy in the normal term.
    """
    chim1, normal, sp = _pair_geometry(gt, gs, chord)
    if np.any(~(chim1 > 0)):
        raise DomainError("modal kernels are singular on the diagonal t = t'")
    q, r = q_and_r(abs(int(n)), chim1)
    pref = 1.0 / (math.pi * np.sqrt(gt[0] * gs[0]))
    out = {}
    if "s" in want:
        out["s"] = pref * q
    if "k" in want:
        out["k"] = pref * (gt[3] / (2.0 * gt[0] * sp) * (q + r) - normal * r)
    return out


def same_piece(curve, t, tprime):
    """True where ``t`` and ``t'`` lie between the same pair of curve breakpoints."""
    edges = np.asarray(curve.breakpoints, float)
    return np.searchsorted(edges, t) == np.searchsorted(edges, tprime)


# pairs closer than this (in t) get the integrated chord
_CHORD_RANGE = 0.05


def _modal(n, t, tprime, curve, which):
    t, tprime = np.broadcast_arrays(np.asarray(t, float), np.asarray(tprime, float))
    shape = t.shape
    t, tprime = t.ravel(), tprime.ravel()
    gt = curve.evaluate(t)
    gs = curve.evaluate(tprime)
    dx, dy = gt[0] - gs[0], gt[1] - gs[1]
    close = (np.abs(t - tprime) < _CHORD_RANGE) & same_piece(curve, t, tprime)
    if close.any():
        dx[close], dy[close] = chord(curve, t[close], tprime[close])
    val = modal_kernels_from_geometry(n, gt, gs, want=(which,), chord=(dx, dy))[which]
    return val.reshape(shape) if shape else float(val[0])


def modal_k(n, t, tprime, curve):
    """Mode-``n`` NP kernel ``K^n(t, t')``; ``n`` and ``-n`` give the same kernel."""
    return _modal(n, t, tprime, curve, "k")


def modal_s(n, t, tprime, curve):
    """Mode-``n`` single-layer kernel ``S^n(t, t')``."""
    return _modal(n, t, tprime, curve, "s")


def _oracle_chord(curve, t, tprime):
    # g(t) - g(t') by adaptive Gauss-Kronrod on g', split at the curve's breakpoints:
    # the absolute error is then ~ eps |t - t'| rather than eps |g|
    lo, hi = sorted((t, tprime))
    pts = [b for b in curve.breakpoints if lo < b < hi] or None
    out = []
    for row in (2, 3):
        val, _ = integrate.quad(lambda u: float(curve.evaluate(np.array([u]))[row, 0]), lo, hi,
                                points=pts, epsabs=0.0, epsrel=2e-14, limit=200)
        out.append(val if t >= tprime else -val)
    return out


def _theta_oracle(kind, n, t, tprime, curve, dps):
    # profile data enter as doubles; the theta integral itself runs in extended
    # precision because high modes are tiny Fourier coefficients of an O(1) kernel
    v = curve.evaluate(np.array([t, tprime], dtype=float))
    if t == tprime:
        raise DomainError("oracle needs distinct profile points")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        c1, c2 = _oracle_chord(curve, t, tprime)
    if dps is None:
        # the coefficient is ~ (chi + sqrt(chi^2 - 1))^-(n + 1/2) times an O(1) kernel;
        # carry that many digits on top of the 30 we want to keep
        chi = 1.0 + (c1 * c1 + c2 * c2) / (2.0 * v[0, 0] * v[0, 1])
        dps = 30 + int((n + 0.5) * math.log10(chi + math.sqrt(chi * chi - 1.0))) + 1
    with mpmath.workdps(dps):
        g1, d1, d2 = (mpmath.mpf(float(x)) for x in (v[0, 0], v[2, 0], v[3, 0]))
        h1 = mpmath.mpf(float(v[0, 1]))
        e1, e2 = mpmath.mpf(c1), mpmath.mpf(c2)
        sp = mpmath.sqrt(d1 * d1 + d2 * d2)

        def integrand(th):
            # with s = sin^2(theta/2): |r - r'|^2 = e1^2 + e2^2 + 4 g1 h1 s and
            # <r - r', nu> |g'| = d2 (e1 + 2 h1 s) - e2 d1, both free of cancellation
            s = mpmath.sin(th / 2) ** 2
            r2 = e1 * e1 + e2 * e2 + 4 * g1 * h1 * s
            if kind == "s":
                val = 1 / mpmath.sqrt(r2)
            else:
                val = (d2 * (e1 + 2 * h1 * s) - e2 * d1) / (sp * r2 * mpmath.sqrt(r2))
            return mpmath.cos(n * th) * val

        # the integrand peaks in a theta-window of width ~ |t - t'| / g1 around 0
        width = abs(t - tprime) / max(float(g1), float(h1))
        pts = sorted({0.0, *(x for x in (width, 10 * width, 0.3) if x < math.pi)})
        val = mpmath.quad(integrand, pts + [mpmath.pi]) / mpmath.pi
        return float(val)


def modal_k_oracle(n, t, tprime, curve, dps=None):
    """``(1/2pi) int_0^{2pi} e^{-in theta} K_Gamma(t, theta, t', 0) d theta`` by direct quadrature.

    Runs tanh-sinh quadrature at ``dps`` decimal digits on the ambient kernel; by
    default the precision grows with the expected decay of the coefficient. Slow,
    meant for verification.
    """
    return _theta_oracle("k", abs(int(n)), float(t), float(tprime), curve, dps)


def modal_s_oracle(n, t, tprime, curve, dps=None):
    """Same Fourier coefficient for the single-layer kernel ``1/|r - r'|``."""
    return _theta_oracle("s", abs(int(n)), float(t), float(tprime), curve, dps)


def diagonal_split(n, t, curve, h, which="k", rtol=1e-3):
    """Fit ``K^n(t, t + d) ~ a log|d| + b + c d`` from samples at ``d = +-h, +-2h``.

    Returns ``(a, b)``: the log coefficient and the smooth part at the diagonal.
    ``which`` selects ``"k"``, ``"s"`` or ``"k-s/2"``. A :class:`SplitFitError` is
    raised when the least-squares residual exceeds ``rtol`` relative to the data.
    """
    d = np.array([-2.0 * h, -h, h, 2.0 * h])
    tp = t + d
    if np.any(tp <= 0) or np.any(tp >= 1):
        raise DomainError("split samples leave (0, 1)")
    gt = curve.evaluate(np.full(4, float(t)))
    gs = curve.evaluate(tp)
    vals = modal_kernels_from_geometry(n, gt, gs, chord=chord(curve, np.full(4, float(t)), tp))
    if which == "k":
        y = vals["k"]
    elif which == "s":
        y = vals["s"]
    elif which == "k-s/2":
        y = vals["k"] - 0.5 * vals["s"]
    else:
        raise ValueError(f"unknown kernel {which!r}")
    design = np.column_stack([np.log(np.abs(d)), np.ones(4), d])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = float(np.max(np.abs(design @ coef - y)))
    # roundoff floor: the normal term loses about eps/h relative accuracy and K - S/2
    # vanishes identically on the sphere
    allowed = rtol * float(np.max(np.abs(y))) + 1e-14 / h * float(np.max(np.abs(vals["s"])))
    if resid > allowed:
        raise SplitFitError(f"diagonal fit residual {resid:.3e} exceeds {allowed:.3e}")
    return float(coef[0]), float(coef[1])
