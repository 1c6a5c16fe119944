"""Mode-``n`` symbol of a straight cone and the essential spectrum it generates.

For the cone with opening angle ``alpha`` to the axis the modal kernel is
homogeneous,

    K^n_w(t, 1) = cos(alpha) / (2 pi sin^2 alpha) * (Q_{n-1/2} + R_n)(chi) / t^{3/2},
    chi - 1 = (t - 1)^2 / (2 t sin^2 alpha),

and its Mellin transform ``Pi(z) = sin(alpha) int_0^oo t^z K^n_w(t, 1) dt/t`` is the
symbol. With ``u = log t`` the argument ``chi - 1 = 2 sinh^2(u/2) / sin^2 alpha``
is even in ``u``, which gives ``Pi(z) = Pi(3 - z)`` and a real symbol on the
line ``Re z = 3/2``. The essential spectrum of mode ``n`` in the energy space is the
interval between 0 and ``sup |Pi(3/2 + i xi)|``; ``Re z = 1`` gives the ``L^2``
radius.
"""

import functools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .specfun import DomainError, q_plus_r

__all__ = [
    "ConeSymbol",
    "EssentialInterval",
    "LINES",
    "cone_modal_kernel",
    "mellin_symbol",
    "mellin_symbol_line",
    "essential_radius",
    "essential_interval",
    "symbol_trace",
]

#: named vertical lines: energy space and L^2
LINES = {"energy": 1.5, "l2": 1.0}

_FLAT_TOL = 1e-15
_PANEL = 0.25          # u-panel length away from the diagonal
_PANEL_ORDER = 20
_NEAR_ORDER = 12
_NEAR_LEVELS = 60      # geometric pieces toward u = 0
_GL_FAR = np.polynomial.legendre.leggauss(_PANEL_ORDER)
_GL_NEAR = np.polynomial.legendre.leggauss(_NEAR_ORDER)


def _is_flat(alpha):
    return abs(math.cos(alpha)) < _FLAT_TOL


def _prefactor(alpha):
    s = math.sin(alpha)
    return math.cos(alpha) / (2.0 * math.pi * s * s)


def _resolve_line(line):
    if isinstance(line, str):
        if line not in LINES:
            raise DomainError(f"unknown line {line!r}; use one of {sorted(LINES)}")
        return LINES[line]
    return float(line)


def cone_modal_kernel(n, alpha, t):
    """``K^n_w(t, 1)`` of the straight cone, elementwise in ``t > 0``, ``t != 1``."""
    if not 0 < alpha < math.pi:
        raise DomainError("alpha must lie in (0, pi)")
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise DomainError("cone kernel needs t > 0")
    if np.any(t == 1):
        raise DomainError("cone kernel is singular at t = 1")
    if _is_flat(alpha):
        return np.zeros_like(t) if t.ndim else 0.0
    sa = math.sin(alpha)
    chim1 = (t - 1.0) ** 2 / (2.0 * t * sa * sa)
    out = _prefactor(alpha) * q_plus_r(abs(int(n)), chim1) / t**1.5
    return out if t.ndim else float(out)


def _profile(n, alpha, u):
    """``(Q + R)(chi(u))`` with ``chi - 1 = 2 sinh^2(u/2) / sin^2 alpha``, for ``u != 0``."""
    sa = math.sin(alpha)
    chim1 = 2.0 * np.sinh(0.5 * u) ** 2 / (sa * sa)
    return q_plus_r(n, chim1)


def _decay_rate(n, beta):
    # (Q + R)(chi) ~ chi^-(n + 1/2) for n >= 1 and ~ chi^-3/2 for n = 0 (the leading
    # terms cancel); chi grows like e^|u|, and the Mellin weight adds |beta - 3/2|
    d = 1.5 if n == 0 else n + 0.5
    return d - abs(beta - 1.5)


@dataclass(frozen=True)
class _Rule:
    """Quadrature nodes and weights for ``int_{-U}^{U} f(u) du`` with a log singularity at 0.

    Only ``u > 0`` is stored; the integrand's evenness in ``u`` supplies the mirror half.
    ``u0`` is the innermost uncovered width, closed with a fitted ``a log u + b``.
    """

    u: np.ndarray
    w: np.ndarray
    u0: float
    U: float


def _panel_length(xi_max):
    # keep e^{i xi u} to about 1.3 periods per 20-point panel
    return min(_PANEL, 8.0 / max(float(xi_max), 1e-300))


@functools.lru_cache(maxsize=64)
def _rule(U, panel):
    x, wx = _GL_NEAR
    pieces_u, pieces_w = [], []
    hi = min(panel, U)
    for _ in range(_NEAR_LEVELS):
        lo = 0.5 * hi
        pieces_u.append(0.5 * (hi + lo) + 0.5 * (hi - lo) * x)
        pieces_w.append(0.5 * (hi - lo) * wx)
        hi = lo
    u0 = hi
    x, wx = _GL_FAR
    m = max(1, math.ceil((U - panel) / panel))
    edges = np.linspace(panel, U, m + 1) if U > panel else np.array([U])
    for lo, hi_ in zip(edges[:-1], edges[1:]):
        pieces_u.append(0.5 * (hi_ + lo) + 0.5 * (hi_ - lo) * x)
        pieces_w.append(0.5 * (hi_ - lo) * wx)
    return _Rule(u=np.concatenate(pieces_u), w=np.concatenate(pieces_w), u0=u0, U=U)


def _truncation(n, beta, tol):
    rate = _decay_rate(n, beta)
    if rate <= 0:
        raise DomainError("Mellin integral diverges on this line")
    # tail of int_U^oo e^{-rate u} (log-free far regime) below tol, with margin
    return float(min(400.0, (math.log(1.0 / tol) + 6.0) / rate + 2.0))


def _line_integrals(n, alpha, beta, xis, tol, panel=None):
    """``Pi(beta + i xi)`` for an array of ``xi`` plus the absolute-value bound."""
    U = _truncation(n, beta, tol)
    xis = np.asarray(xis, dtype=float)
    if panel is None:
        panel = _panel_length(np.max(np.abs(xis), initial=0.0))
    rule = _rule(U, panel)
    F = _profile(n, alpha, rule.u)
    pref = _prefactor(alpha) * math.sin(alpha)
    g = beta - 1.5
    # both halves u > 0 and u < 0 share |u|: e^{(g + i xi) u} + e^{-(g + i xi) u}
    zeta = g + 1j * np.asarray(xis, dtype=float)
    vals = (2.0 * np.cosh(zeta[:, None] * rule.u[None, :]) * (F * rule.w)[None, :]).sum(axis=1)
    # innermost interval (-u0, u0): F ~ a log u + b, exponential weight ~ 1 there
    u1 = np.array([rule.u0, 2 * rule.u0])
    f1 = _profile(n, alpha, u1)
    a = (f1[1] - f1[0]) / math.log(2.0)
    b = f1[0] - a * math.log(rule.u0)
    inner = 2.0 * (a * rule.u0 * (math.log(rule.u0) - 1.0) + b * rule.u0)
    vals = pref * (vals + inner)
    bound = abs(pref) * ((2.0 * np.cosh(g * rule.u) * np.abs(F) * rule.w).sum()
                         + 2.0 * abs(a * rule.u0 * (math.log(rule.u0) - 1.0) + b * rule.u0))
    return vals, float(bound), rule


def mellin_symbol(n, alpha, z, tol=1e-10):
    """``Pi^n_alpha(z)`` for ``0 < Re z < 3``; scalar or array ``z`` sharing one real part.

    The ``u = log t`` integral is truncated at ``|u| = U`` where the far-field
    exponential tail drops below ``tol``.
    """
    z = np.asarray(z, dtype=complex)
    if np.any(~((z.real > 0) & (z.real < 3))):
        raise DomainError("Mellin symbol defined for 0 < Re z < 3")
    if _is_flat(alpha):
        return np.zeros_like(z) if z.ndim else 0j
    n = abs(int(n))
    out = np.empty(z.shape, dtype=complex)
    flat = z.ravel()
    res = out.ravel()
    for beta in np.unique(flat.real):
        idx = flat.real == beta
        res[idx] = _line_integrals(n, alpha, float(beta), flat.imag[idx], tol)[0]
    out = res.reshape(z.shape)
    return out if z.ndim else complex(out)


def mellin_symbol_line(n, alpha, line, xis, tol=1e-10):
    """Samples of ``Pi^n_alpha(beta + i xi)`` on one line, plus the bound ``int |integrand|``."""
    beta = _resolve_line(line)
    if not 0 < beta < 3:
        raise DomainError("line must satisfy 0 < Re z < 3")
    xis = np.asarray(xis, dtype=float)
    if _is_flat(alpha):
        return np.zeros(xis.shape, complex), 0.0
    vals, bound, _ = _line_integrals(abs(int(n)), alpha, beta, xis, tol)
    return vals, bound


@dataclass
class ConeSymbol:
    """Symbol samples on one vertical line and the radius they determine."""

    n: int
    alpha: float
    line: float
    xi: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    radius: float = 0.0
    argmax: float = 0.0
    diagnostics: dict = field(default_factory=dict)

    @property
    def max_imag_ratio(self):
        """``max |Im Pi| / max(1, |Re Pi|)`` over the samples."""
        return float(np.max(np.abs(self.values.imag) / np.maximum(1.0, np.abs(self.values.real))))

    def rows(self):
        return [(float(x), float(v.real), float(v.imag)) for x, v in zip(self.xi, self.values)]


def symbol_trace(n, alpha, line="energy", xi_max=40.0, step=0.05, tol=1e-10, max_extend=4):
    """Sample ``Pi`` on ``[0, xi_max]`` and refine the maximum of ``|Pi|`` by bounded search.

    The near-diagonal log singularity of the kernel makes ``|Pi|`` decay only like
    ``1/xi``, and for large ``n`` the peak sits near ``xi ~ n``. When the sampled
    maximum falls in the last fifth of the window the window is doubled, up to
    ``max_extend`` times.
    """
    beta = _resolve_line(line)
    n = abs(int(n))
    if _is_flat(alpha):
        m = int(round(xi_max / step))
        xi = np.linspace(0.0, m * step, m + 1)
        return ConeSymbol(n=n, alpha=alpha, line=beta, xi=xi, values=np.zeros(xi.shape, complex),
                          diagnostics={"abs_bound": 0.0, "tail_max": 0.0, "xi_max": xi_max})
    for _ in range(max_extend + 1):
        m = int(round(xi_max / step))
        xi = np.linspace(0.0, m * step, m + 1)
        panel = _panel_length(xi[-1])
        vals, bound, rule = _line_integrals(n, alpha, beta, xi, tol, panel)
        mag = np.abs(vals)
        if np.argmax(mag) < 0.8 * m:
            break
        xi_max *= 2.0

    def neg_modulus(x):
        return -abs(_line_integrals(n, alpha, beta, np.array([x]), tol, panel)[0][0])

    best_xi, best = float(xi[np.argmax(mag)]), float(mag.max())
    # refine every sampled local maximum within a factor 2 of the best one
    for i in range(mag.size):
        left = i == 0 or mag[i] >= mag[i - 1]
        right = i == mag.size - 1 or mag[i] >= mag[i + 1]
        if not (left and right) or mag[i] < 0.5 * best:
            continue
        lo, hi = xi[max(i - 1, 0)], xi[min(i + 1, mag.size - 1)]
        r = optimize.minimize_scalar(neg_modulus, bounds=(lo, hi), method="bounded",
                                     options={"xatol": 1e-9})
        if -r.fun > best:
            best, best_xi = float(-r.fun), float(r.x)
    tail = float(mag[int(0.9 * mag.size):].max())
    diagnostics = {
        "abs_bound": bound,
        "tail_max": tail,
        "xi_max": float(xi[-1]),
        "truncation_U": rule.U,
        "nodes": int(rule.u.size),
    }
    return ConeSymbol(n=n, alpha=alpha, line=beta, xi=xi, values=vals, radius=best,
                      argmax=best_xi, diagnostics=diagnostics)


def essential_radius(n, alpha, line="energy", xi_max=40.0, step=0.05, tol=1e-10):
    """``sup_xi |Pi^n_alpha(beta + i xi)|`` on ``beta = 3/2`` (energy) or ``beta = 1`` (L^2).

    The sampled scan covers ``[0, xi_max]`` (``|Pi|`` is even in ``xi`` on both
    lines); beyond it ``|Pi|`` decays by the Riemann-Lebesgue lemma, and the
    absolute-value integral recorded in the diagnostics bounds it everywhere.
    """
    return symbol_trace(n, alpha, line, xi_max, step, tol).radius


@dataclass(frozen=True)
class EssentialInterval:
    """``[0, r]`` for outward cones (``alpha < pi/2``), ``[-r, 0]`` for inward ones."""

    n: int
    alpha: float
    lo: float
    hi: float

    @property
    def radius(self):
        return max(abs(self.lo), abs(self.hi))

    def contains(self, x, tol=0.0):
        return self.lo - tol <= x <= self.hi + tol

    def as_tuple(self):
        return (self.lo, self.hi)


def essential_interval(n, alpha, **kwargs):
    """Mode-``n`` essential interval in the energy space; ``{0}`` for ``alpha = pi/2``."""
    if _is_flat(alpha):
        return EssentialInterval(n=abs(int(n)), alpha=alpha, lo=0.0, hi=0.0)
    r = essential_radius(n, alpha, "energy", **kwargs)
    if alpha < math.pi / 2:
        return EssentialInterval(n=abs(int(n)), alpha=alpha, lo=0.0, hi=r)
    return EssentialInterval(n=abs(int(n)), alpha=alpha, lo=-r, hi=0.0)
