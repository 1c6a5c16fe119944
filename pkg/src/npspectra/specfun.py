"""Half-integer degree Legendre functions of the second kind (toroidal functions).

Two evaluation routes are provided:

* :func:`legendre_q_half` integrates the defining integral

  .. math::
      Q_{n-1/2}(\\chi) = \\int_{-\\pi}^{\\pi} \\frac{\\cos(n\\theta)\\,d\\theta}
                                         {\\sqrt{8(\\chi - \\cos\\theta)}}

  with adaptive Gauss-Kronrod quadrature, one scalar at a time.
* :func:`q_pair` evaluates ``Q_{n-1/2}`` and ``Q_{n+1/2}`` on whole arrays, seeding
  with complete elliptic integrals and running the three-term recurrence forward
  (near the diagonal) or as a continued fraction for the ratios (away from it).
  Kernel assembly uses this route.

Arguments are passed as ``chi - 1`` wherever possible so that points close to the
diagonal keep their relative accuracy.
"""

import math
import warnings

import numpy as np
from scipy import integrate, special

__all__ = [
    "DomainError",
    "ToleranceError",
    "legendre_q_half",
    "legendre_r",
    "q_pair",
    "q_and_r",
    "q_plus_r",
    "envelope_ratio",
    "envelope_bound",
    "CHI_MIN_OFFSET",
]

#: Arguments with ``chi - 1`` at or below this are rejected by the scalar routines.
CHI_MIN_OFFSET = 1e-14

# forward recurrence is used while (n + 1) * acosh(chi) stays below this
_FORWARD_LIMIT = 2.5
# from here on R_n and Q + R come from the series in 1/chi^2
_SERIES_CHIM1 = 16.0
# continued fraction tail length: exp(-2 * eta * depth) < exp(-2 * _CF_DEPTH)
_CF_DEPTH = 20.0


class DomainError(ValueError):
    """Argument outside the domain where a function is defined or a bound applies."""


class ToleranceError(ArithmeticError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, message, achieved):
        super().__init__(f"{message} (achieved error estimate {achieved:.3e})")
        self.achieved = achieved


def _check_chim1(chim1):
    if not chim1 > CHI_MIN_OFFSET:
        raise DomainError(f"chi must exceed 1 + {CHI_MIN_OFFSET:g}, got 1 + {chim1!r}")


def legendre_q_half(n, chi, tol=1e-12, chim1=None):
    """Return ``Q_{n-1/2}(chi)`` by adaptive quadrature of the defining integral.

    Parameters
    ----------
    n : int
        Fourier order. Negative orders give the same value (the integrand is even in n).
    chi : float
        Argument, strictly greater than one.
    tol : float
        Absolute tolerance handed to the Gauss-Kronrod integrator. A
        :class:`ToleranceError` is raised when the error estimate exceeds it.
    chim1 : float, optional
        ``chi - 1`` computed by the caller without cancellation.
    """
    n = abs(int(n))
    if chim1 is None:
        chim1 = chi - 1.0
    _check_chim1(chim1)

    # chi - cos(theta) = (chi - 1) + 2 sin^2(theta / 2)
    def integrand(theta):
        s = math.sin(0.5 * theta)
        return math.cos(n * theta) / math.sqrt(8.0 * (chim1 + 2.0 * s * s))

    # the near-singularity sits at theta = 0; split close to it when chi ~ 1
    width = math.sqrt(2.0 * chim1)
    points = [p for p in (width, 10.0 * width) if p < math.pi]
    # the error estimate is checked below; QUADPACK's roundoff notice adds nothing
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        value, err = integrate.quad(
            integrand, 0.0, math.pi, points=points or None,
            epsabs=0.25 * tol, epsrel=0.0, limit=500,
        )
    if not err <= 0.5 * tol:
        raise ToleranceError(f"Q_{{{n}-1/2}}({chi}) did not converge", 2.0 * err)
    return 2.0 * value


def legendre_r(n, chi, tol=1e-12, chim1=None):
    """Return ``R_n(chi) = (2n - 1)/(chi + 1) * (chi Q_{n-1/2} - Q_{n-3/2})``.

    For ``n = 0`` the order ``-3/2`` is folded to ``1/2`` by the evenness of the
    defining integral in the order.
    """
    n = abs(int(n))
    if chim1 is None:
        chim1 = chi - 1.0
    q0 = legendre_q_half(n, chi, tol=tol, chim1=chim1)
    qm = legendre_q_half(n - 1, chi, tol=tol, chim1=chim1)
    return (2 * n - 1) / (chi + 1.0) * (chi * q0 - qm)


def _seed(chim1):
    """``Q_{-1/2}`` and ``Q_{1/2}`` from complete elliptic integrals."""
    chi = 1.0 + chim1
    # parameter m = 2/(chi + 1), complement 1 - m = (chi - 1)/(chi + 1)
    p = chim1 / (chi + 1.0)
    kk = special.ellipkm1(p)
    ee = special.ellipe(1.0 - p)
    c = np.sqrt(2.0 / (chi + 1.0))
    q_m = c * kk
    q_p = chi * c * kk - np.sqrt(2.0 * (chi + 1.0)) * ee
    return q_m, q_p


def _forward(n, chim1):
    chi = 1.0 + chim1
    q_prev, q_cur = _seed(chim1)  # Q_{-1/2}, Q_{1/2}
    for k in range(1, n + 1):
        # (k + 1/2) Q_{k+1/2} = 2k chi Q_{k-1/2} - (k - 1/2) Q_{k-3/2}
        q_next = (2.0 * k * chi * q_cur - (k - 0.5) * q_prev) / (k + 0.5)
        q_prev, q_cur = q_cur, q_next
    return q_prev, q_cur


def _continued_fraction(n, chim1, depth):
    chi = 1.0 + chim1
    top = n + depth
    r = np.zeros_like(chim1)
    # ratios r_k = Q_{k+1/2}/Q_{k-1/2}, run downward from r_top = 0
    ratios = []
    for k in range(top, 0, -1):
        r = (k - 0.5) / (2.0 * k * chi - (k + 0.5) * r)
        if k - 1 <= n:
            ratios.append(r)
    ratios.reverse()  # ratios[k] = r_k for k = 0..n
    q_m = _seed(chim1)[0]
    q = q_m
    for k in range(n):
        q = q * ratios[k]
    return q, q * ratios[n]


def q_pair(n, chim1):
    """Return ``(Q_{n-1/2}, Q_{n+1/2})`` evaluated at ``chi = 1 + chim1`` elementwise.

    ``chim1`` must be positive. Works on arrays of any shape.
    """
    n = abs(int(n))
    chim1 = np.asarray(chim1, dtype=float)
    shape = chim1.shape
    x = chim1.ravel()
    if np.any(~(x > 0)):
        raise DomainError("chi - 1 must be positive")
    eta = np.log1p(x + np.sqrt(x * (x + 2.0)))  # acosh(chi)
    lo = np.empty_like(x)
    hi = np.empty_like(x)

    fwd = (n + 1) * eta <= _FORWARD_LIMIT
    if fwd.any():
        lo[fwd], hi[fwd] = _forward(n, x[fwd])

    # group the rest by continued-fraction depth (powers of two)
    rest = np.flatnonzero(~fwd)
    if rest.size:
        need = np.ceil(_CF_DEPTH / eta[rest]) + 2
        bins = np.ceil(np.log2(need)).astype(int)
        for b in np.unique(bins):
            idx = rest[bins == b]
            lo[idx], hi[idx] = _continued_fraction(n, x[idx], 2 ** int(b))
    return lo.reshape(shape), hi.reshape(shape)


def _large_chi(n, chim1):
    """``(Q_{n-1/2}, R_n, Q_{n-1/2} + R_n)`` from the hypergeometric series in ``1/chi^2``.

    ``Q_{n-1/2}(chi) = C (2 chi)^{-(n+1/2)} F(a, b; n+1; chi^{-2})`` with
    ``a = (2n+3)/4``, ``b = (2n+1)/4``; differentiating and using ``R_n = 2 (chi-1) dQ/dchi``
    gives both combinations without subtracting nearly equal terms.
    """
    chi = 1.0 + chim1
    w = 1.0 / (chi * chi)
    a, b, c = (2 * n + 3) / 4.0, (2 * n + 1) / 4.0, n + 1.0
    pre = np.exp(0.5 * math.log(math.pi) + special.gammaln(n + 0.5) - special.gammaln(n + 1.0)
                 - (n + 0.5) * np.log(2.0 * chi))
    S = special.hyp2f1(a, b, c, w)
    dS = a * b / c * special.hyp2f1(a + 1, b + 1, c + 1, w)
    tail = 4.0 * chim1 * dS / chi**3
    q = pre * S
    r = -pre * ((2 * n + 1) * chim1 / chi * S + tail)
    return q, r, pre * ((1.0 - 2 * n * chim1) / chi * S - tail)


def _q_r_sum(n, chim1):
    n = abs(int(n))
    chim1 = np.asarray(chim1, dtype=float)
    q0, q1 = q_pair(n, chim1)
    chi = 1.0 + chim1
    r = (2 * n + 1) / (chi + 1.0) * (q1 - chi * q0)
    total = q0 + r
    far = chim1 >= _SERIES_CHIM1
    if np.any(far):
        qf, rf, sf = _large_chi(n, chim1[far])
        q0, r, total = q0.copy(), r.copy(), total.copy()
        q0[far], r[far], total[far] = qf, rf, sf
    return q0, r, total


def q_and_r(n, chim1):
    """Return ``(Q_{n-1/2}, R_n)`` elementwise on arrays.

    Near the diagonal ``R_n`` is formed as ``(2n + 1)/(chi + 1) (Q_{n+1/2} - chi Q_{n-1/2})``
    (algebraically ``2 (chi - 1) dQ_{n-1/2}/dchi``). That difference cancels to
    relative order ``chi^-2``, so for ``chi - 1 >= 16`` both values come from the
    hypergeometric series in ``1/chi^2``.
    """
    q0, r, _ = _q_r_sum(n, chim1)
    return q0, r


def q_plus_r(n, chim1):
    """``Q_{n-1/2} + R_n``; for ``n = 0`` the two terms cancel to ``O(chi^-3/2)`` at large chi."""
    return _q_r_sum(n, chim1)[2]


_REGIMES = ("far", "mid", "near")


def envelope_bound(n, delta, regime):
    """Right-hand side of the three size bounds for ``Q_{n-1/2}(1 + delta^2)``."""
    if regime not in _REGIMES:
        raise DomainError(f"unknown regime {regime!r}")
    if n < 1 or not delta > 0:
        raise DomainError("need n >= 1 and delta > 0")
    if regime == "far":
        if delta < 1:
            raise DomainError("far regime needs delta >= 1")
        return 1.0 / (n * n * delta**3)
    if regime == "mid":
        if delta >= 2:
            raise DomainError("mid regime needs delta < 2")
        return 1.0 / (n * delta) ** 2
    if n * delta >= 0.5:
        raise DomainError("near regime needs n * delta < 1/2")
    return math.log(1.0 / (n * delta))


def envelope_ratio(n, delta, regime):
    """``max(Q_{n-1/2}, |R_n|)`` at ``chi = 1 + delta^2`` divided by the regime bound."""
    bound = envelope_bound(n, delta, regime)
    q, r = q_and_r(n, np.array([delta * delta]))
    return float(max(q[0], abs(r[0])) / bound)
