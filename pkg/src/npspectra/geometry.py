"""Generating curves: the unit sphere profile and its conical perturbations.

A curve is a map ``t -> (g1(t), g2(t))`` on ``[0, 1]`` whose revolution about the
vertical axis gives the surface. ``t = 0`` is the bottom axis point (south pole, or
the cone vertex after perturbation) and ``t = 1`` the top one.

Sphere parametrization
    ``gamma0 = (sin b(t), cos b(t))`` with the polar angle ``b`` running from ``pi``
    to ``0``. On ``[0, 1/5]`` we take ``b = pi - arcsin t`` which makes the curve a
    graph over ``g1 = t``. The angular speed then ramps (quintic smoothstep in ``b'``)
    over ``[1/5, 3/10]`` to a constant, chosen so that ``b(1) = 0``.

Perturbation
    On ``[0, eps]`` the curve is a graph ``(t, g2(t))`` with slope ``cot(alpha)`` on
    ``[0, eps/2]`` and the slope blended by the same smoothstep into the sphere's
    slope on ``[eps/2, eps]``. This join is C^3.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .specfun import DomainError

__all__ = [
    "GeneratingCurve",
    "ConstraintReport",
    "ConstructionError",
    "build_sphere_curve",
    "build_perturbed_curve",
    "beta_of_t",
    "check_constraints",
    "perturbation_epsilon",
    "admissibility_conditions",
    "admissible_c0",
    "is_admissible",
    "smoothstep",
    "GRAPH_END",
]

GRAPH_END = 0.2
RAMP_END = 0.3
CURVATURE_BOUND = 40.0
SPEED_BOUNDS = (0.25, 4.0)

_GL_X, _GL_W = np.polynomial.legendre.leggauss(24)


class ConstructionError(ValueError):
    """A perturbed curve violates one of its defining bounds."""


def smoothstep(x):
    """Quintic smoothstep ``6x^5 - 15x^4 + 10x^3`` (clipped) and its first two derivatives."""
    x = np.clip(x, 0.0, 1.0)
    s = x**3 * (10.0 - 15.0 * x + 6.0 * x * x)
    ds = 30.0 * x * x * (1.0 - x) ** 2
    dds = 60.0 * x * (1.0 - x) * (1.0 - 2.0 * x)
    return s, ds, dds


def _integrate(f, a, b):
    """Vectorized fixed Gauss-Legendre integral of ``f`` over ``[a, b]`` (arrays)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    pts = mid[..., None] + half[..., None] * _GL_X
    return half * (f(pts) @ _GL_W)


@dataclass(frozen=True)
class GeneratingCurve:
    """Profile curve with first and second derivatives.

    ``evaluate(t)`` returns a ``(6, len(t))`` array of
    ``g1, g2, g1', g2', g1'', g2''``.
    """

    kind: str
    _eval: object = field(repr=False)
    alpha: float = math.pi / 2
    epsilon: float = 0.0
    vertex_offset: float = -1.0
    breakpoints: tuple = ()

    def evaluate(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return self._eval(t)

    def point(self, t):
        v = self.evaluate(t)
        return v[0], v[1]

    def speed(self, t):
        v = self.evaluate(t)
        return np.hypot(v[2], v[3])

    def measure_density(self, t):
        """``g1(t) |g'(t)|``, the density of the modal measure."""
        v = self.evaluate(t)
        return v[0] * np.hypot(v[2], v[3])

    @property
    def is_sphere(self):
        return self.kind == "sphere"

    def metadata(self):
        return {
            "kind": self.kind,
            "alpha": self.alpha,
            "epsilon": self.epsilon,
            "vertex_offset": self.vertex_offset,
            "breakpoints": list(self.breakpoints),
        }


# --- sphere ---------------------------------------------------------------

_RAMP = RAMP_END - GRAPH_END


def _inv_sqrt(t):
    return 1.0 / np.sqrt(1.0 - t * t)


def _ramp_speed(t, plateau):
    s, ds, dds = smoothstep((t - GRAPH_END) / _RAMP)
    vl = _inv_sqrt(t)
    dvl = t * vl**3
    ddvl = (1.0 + 2.0 * t * t) * vl**5
    v = vl * (1.0 - s) + plateau * s
    dv = dvl * (1.0 - s) + (plateau - vl) * ds / _RAMP
    ddv = ddvl * (1.0 - s) - 2.0 * dvl * ds / _RAMP + (plateau - vl) * dds / _RAMP**2
    return v, dv, ddv


def _sphere_plateau():
    b_graph = math.pi - math.asin(GRAPH_END)
    # int_{0.2}^{0.3} v = I_L + P * RAMP / 2 ; total drop b_graph = that + P * (1 - RAMP_END)
    i_l = float(_integrate(lambda x: _inv_sqrt(x) * (1.0 - smoothstep((x - GRAPH_END) / _RAMP)[0]),
                           GRAPH_END, RAMP_END))
    return (b_graph - i_l) / (1.0 - RAMP_END + 0.5 * _RAMP), b_graph


_PLATEAU, _B_GRAPH = _sphere_plateau()
_B_RAMP = _PLATEAU * (1.0 - RAMP_END)


def _sphere_beta(t):
    """Polar angle and its first two derivatives for the sphere parametrization."""
    b = np.empty_like(t)
    db = np.empty_like(t)
    ddb = np.empty_like(t)
    g = t <= GRAPH_END
    r = (t > GRAPH_END) & (t < RAMP_END)
    p = t >= RAMP_END
    tg = t[g]
    b[g] = math.pi - np.arcsin(tg)
    db[g] = -_inv_sqrt(tg)
    ddb[g] = -tg * _inv_sqrt(tg) ** 3
    tr = t[r]
    if tr.size:
        v, dv, _ = _ramp_speed(tr, _PLATEAU)
        b[r] = _B_GRAPH - _integrate(lambda x: _ramp_speed(x, _PLATEAU)[0], GRAPH_END, tr)
        db[r] = -v
        ddb[r] = -dv
    b[p] = _PLATEAU * (1.0 - t[p])
    db[p] = -_PLATEAU
    ddb[p] = 0.0
    return b, db, ddb


def _sphere_eval(t):
    b, db, ddb = _sphere_beta(t)
    sb, cb = np.sin(b), np.cos(b)
    # graph region: use the exact graph form to avoid rounding in sin(pi - arcsin t)
    g = t <= GRAPH_END
    sb = np.where(g, t, sb)
    cb = np.where(g, -np.sqrt(np.where(g, 1.0 - t * t, 1.0)), cb)
    out = np.empty((6, t.size))
    out[0] = sb
    out[1] = cb
    out[2] = db * cb
    out[3] = -db * sb
    out[4] = ddb * cb - db * db * sb
    out[5] = -ddb * sb - db * db * cb
    return out


def build_sphere_curve():
    """Unit sphere profile from the south pole ``(0, -1)`` to the north pole ``(0, 1)``."""
    return GeneratingCurve(
        kind="sphere", _eval=_sphere_eval, vertex_offset=-1.0,
        breakpoints=(GRAPH_END, RAMP_END),
    )


def beta_of_t(curve, t):
    """Polar angle ``b(t)`` with ``cos b = g2`` and ``sin b = g1`` on the sphere."""
    if not curve.is_sphere:
        raise DomainError("beta_of_t is defined for the sphere parametrization only")
    t = np.asarray(t, dtype=float)
    b = _sphere_beta(np.atleast_1d(t))[0]
    return b.reshape(t.shape) if t.ndim else float(b[0])


# --- perturbation ---------------------------------------------------------

def perturbation_epsilon(alpha):
    return abs(alpha - math.pi / 2) / 8.0


def admissibility_conditions(alpha):
    """The three admissibility inequalities as ``(name, lhs, rhs, holds)`` tuples."""
    d = abs(alpha - math.pi / 2)
    eps = d / 8.0
    cot = abs(1.0 / math.tan(alpha)) if d > 0 else 0.0
    six = 6.0 * eps
    slope = six / math.sqrt(1.0 - six * six) if six < 1 else math.inf
    return [
        ("6eps<1/5", six, 0.2, six < 0.2),
        ("sphere slope at 6eps<|cot a|", slope, cot, slope < cot),
        ("|cot a|<sqrt8", cot, math.sqrt(8.0), cot < math.sqrt(8.0)),
        ("|cot a|<=9/8|a-pi/2|", cot, 9.0 / 8.0 * d, cot <= 9.0 / 8.0 * d),
    ]


def is_admissible(alpha):
    return abs(alpha - math.pi / 2) > 0 and all(c[3] for c in admissibility_conditions(alpha))


def admissible_c0(tol=1e-12):
    """Largest ``c0`` such that every ``0 < |alpha - pi/2| < c0`` satisfies the inequalities.

    Found by bisection on the offset; the predicate is monotone on ``(0, pi/2)``.
    """
    lo, hi = 1e-8, math.pi / 2 - 1e-8
    if not is_admissible(math.pi / 2 - lo):
        return 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if is_admissible(math.pi / 2 - mid) and is_admissible(math.pi / 2 + mid):
            lo = mid
        else:
            hi = mid
    return lo


def _sphere_graph(t):
    q = np.sqrt(1.0 - t * t)
    return -q, t / q, 1.0 / q**3


def _perturbed_eval_factory(alpha, eps, blend):
    cot = 1.0 / math.tan(alpha)
    half = 0.5 * eps

    def slope(t):
        s = blend((t - half) / half)[0]
        return cot * (1.0 - s) + _sphere_graph(t)[1] * s

    g2_eps = _sphere_graph(np.array([eps]))[0][0]
    g2_half = g2_eps - float(_integrate(slope, half, eps))
    offset = g2_half - cot * half

    def evaluate(t):
        out = _sphere_eval(t)
        inner = t < eps
        if inner.any():
            ti = t[inner]
            g2 = np.empty_like(ti)
            d2 = np.empty_like(ti)
            dd2 = np.empty_like(ti)
            cone = ti <= half
            g2[cone] = offset + cot * ti[cone]
            d2[cone] = cot
            dd2[cone] = 0.0
            tb = ti[~cone]
            if tb.size:
                s, ds = blend((tb - half) / half)[:2]
                sg, dsg, ddsg = _sphere_graph(tb)
                g2[~cone] = g2_eps - _integrate(slope, tb, np.full_like(tb, eps))
                d2[~cone] = cot * (1.0 - s) + dsg * s
                dd2[~cone] = (dsg - cot) * ds / half + ddsg * s
            out[0, inner] = ti
            out[1, inner] = g2
            out[2, inner] = 1.0
            out[3, inner] = d2
            out[4, inner] = 0.0
            out[5, inner] = dd2
        return out

    return evaluate, offset


def build_perturbed_curve(alpha, blend=smoothstep, validate=True):
    """(alpha, eps)-perturbation of the sphere with ``eps = |alpha - pi/2| / 8``.

    ``blend`` maps ``x in [0, 1]`` to ``(s, s', s'')`` and controls the slope
    transition on ``[eps/2, eps]``; it exists so that tests can inject a faulty
    blend. With ``validate`` the defining bounds are checked on a dense grid and a
    :class:`ConstructionError` names the first one violated.
    """
    alpha = float(alpha)
    if not is_admissible(alpha):
        raise DomainError(f"alpha={alpha!r} is not admissible (need 0 < |alpha - pi/2| < c0)")
    eps = perturbation_epsilon(alpha)
    evaluate, offset = _perturbed_eval_factory(alpha, eps, blend)
    curve = GeneratingCurve(
        kind="perturbed", _eval=evaluate, alpha=alpha, epsilon=eps,
        vertex_offset=offset, breakpoints=(0.5 * eps, eps, GRAPH_END, RAMP_END),
    )
    if validate:
        report = check_constraints(curve, npts=20001)
        for name in ("blend slope <= |cot a|", "|g2''| <= 40 near vertex"):
            item = report[name]
            if not item.passed:
                raise ConstructionError(
                    f"{name} violated: measured {item.measured:.6g}, bound {item.bound:.6g}")
    return curve


# --- constraint checking --------------------------------------------------

@dataclass
class Constraint:
    name: str
    measured: float
    bound: float
    passed: bool
    note: str = ""

    def __post_init__(self):
        self.measured, self.bound, self.passed = float(self.measured), float(self.bound), bool(self.passed)


@dataclass
class ConstraintReport:
    curve: dict
    items: list

    def __getitem__(self, name):
        for c in self.items:
            if c.name == name:
                return c
        raise KeyError(name)

    @property
    def passed(self):
        return all(c.passed for c in self.items)

    def failures(self):
        return [c for c in self.items if not c.passed]

    def to_dict(self):
        return {
            "curve": self.curve,
            "passed": self.passed,
            "constraints": [vars(c) for c in self.items],
        }


def _join_jumps(curve, points, h=1e-9):
    jumps = []
    for p in points:
        lo = curve.evaluate(np.array([p - h]))[:, 0]
        hi = curve.evaluate(np.array([p + h]))[:, 0]
        jumps.append(float(np.max(np.abs(hi - lo))))
    return max(jumps) if jumps else 0.0


def check_constraints(curve, npts=100_000):
    """Measure every defining property of ``curve`` on a uniform grid of ``npts`` points."""
    t = np.linspace(0.0, 1.0, npts)
    v = curve.evaluate(t)
    speed = np.hypot(v[2], v[3])
    items = []
    add = lambda *a, **k: items.append(Constraint(*a, **k))  # noqa: E731

    add("axis endpoints", float(abs(v[0, 0]) + abs(v[0, -1])), 1e-14,
        abs(v[0, 0]) + abs(v[0, -1]) <= 1e-14)
    add("g1>0 interior", float(v[0, 1:-1].min()), 0.0, bool(v[0, 1:-1].min() > 0))
    add("speed in [1/4,4]", float(speed.min()), SPEED_BOUNDS[0],
        bool(speed.min() >= SPEED_BOUNDS[0] and speed.max() <= SPEED_BOUNDS[1]),
        note=f"max {speed.max():.6g}")
    add("C2 joins", _join_jumps(curve, curve.breakpoints), 1e-6,
        _join_jumps(curve, curve.breakpoints) <= 1e-6)

    if curve.is_sphere:
        add("g2(0)=-1", float(abs(v[1, 0] + 1.0)), 1e-14, abs(v[1, 0] + 1.0) <= 1e-14)
        add("g2(1)=1", float(abs(v[1, -1] - 1.0)), 1e-12, abs(v[1, -1] - 1.0) <= 1e-12)
        g = t <= GRAPH_END
        dev = float(np.max(np.abs(v[0, g] - t[g]) + np.abs(v[1, g] + np.sqrt(1 - t[g] ** 2))))
        add("graph on [0,1/5]", dev, 1e-14, dev <= 1e-14)
        rad = float(np.max(np.abs(np.hypot(v[0], v[1]) - 1.0)))
        add("unit radius", rad, 1e-13, rad <= 1e-13)
        return ConstraintReport(curve.metadata(), items)

    alpha, eps = curve.alpha, curve.epsilon
    cot = 1.0 / math.tan(alpha)
    v0 = _sphere_eval(t)
    outer = t >= eps
    dev = float(np.max(np.abs(v[:4, outer] - v0[:4, outer]))) if outer.any() else 0.0
    add("equals sphere on [eps,1]", dev, 1e-14, dev <= 1e-14)
    inner = t <= eps
    dev = float(np.max(np.abs(v[0, inner] - t[inner])))
    add("graph on [0,eps]", dev, 1e-15, dev <= 1e-15)
    cone = t <= 0.5 * eps
    dev = float(np.max(np.abs(v[3, cone] - cot)))
    add("cone slope cot(alpha)", dev, 1e-15, dev <= 1e-15)
    blend = (t >= 0.5 * eps) & inner
    m = float(np.max(np.abs(v[3, blend])))
    add("blend slope <= |cot a|", m, abs(cot), m <= abs(cot) * (1 + 1e-14))
    m = float(np.max(np.abs(v[5, inner])))
    add("|g2''| <= 40 near vertex", m, CURVATURE_BOUND, m <= CURVATURE_BOUND)
    for name, lhs, rhs, ok in admissibility_conditions(alpha):
        add(f"admissible {name}", lhs, rhs, bool(ok))
    # chord-length comparability on a coarse random-free sample
    s = np.linspace(0.0, 1.0, 401)
    p = curve.evaluate(s)
    dx = p[0][:, None] - p[0][None, :]
    dy = p[1][:, None] - p[1][None, :]
    dt = np.abs(s[:, None] - s[None, :])
    off = dt > 0
    ratio = np.hypot(dx, dy)[off] / dt[off]
    add("chord ratio in [1/4,4]", float(ratio.min()), SPEED_BOUNDS[0],
        bool(ratio.min() >= SPEED_BOUNDS[0] and ratio.max() <= SPEED_BOUNDS[1]),
        note=f"max {ratio.max():.6g}")
    return ConstraintReport(curve.metadata(), items)
