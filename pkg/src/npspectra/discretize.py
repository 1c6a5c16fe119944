"""Nyström discretization of the mode-``n`` operators on composite Gauss-Legendre panels.

The grid carries the modal measure ``dmu = g1 |g'| dt`` in its weights. Matrix
entries act on nodal values:

    A_ij ~ contribution of the value at node j to  int K^n(t_i, s) g(s) dmu(s).

Far panels use the plain panel rule. For each target, the panel containing it and
every panel closer than its own length are integrated with an oversampled
geometric rule graded toward the target, and the oversampled values are mapped
back to panel nodes by barycentric interpolation. The few-ulp interval around the
diagonal left over by the geometric rule is closed with the fitted
``a log|d| + b`` split of the kernel.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .kernels import chord, modal_kernels_from_geometry, same_piece

__all__ = [
    "Grid",
    "ModalOperator",
    "AssemblyError",
    "build_grid",
    "assemble",
    "gauss_column_sums",
    "operator_difference_norm",
    "DEFAULT_ORDER",
    "DEFAULT_VERTEX_LEVELS",
]

DEFAULT_ORDER = 8
DEFAULT_VERTEX_LEVELS = 10

# oversampled rule: points per geometric piece and how far the self-panel grading
# runs toward the target, relative to the panel length
_PIECE_ORDER = 12
_SELF_DEPTH = 2.0**-44
_PIECE_X, _PIECE_W = np.polynomial.legendre.leggauss(_PIECE_ORDER)


class AssemblyError(RuntimeError):
    """The assembled energy Gram matrix is not positive definite."""


@dataclass(frozen=True, eq=False)
class Grid:
    """Composite Gauss-Legendre grid on ``(0, 1)``.

    ``base_weights`` are the plain ``dt`` weights; ``weights`` include the measure
    density of ``curve``. ``panels`` is an ``(M, 2)`` array of panel ends, and node
    ``i`` lives in panel ``i // order``.
    """

    nodes: np.ndarray
    base_weights: np.ndarray
    weights: np.ndarray
    panels: np.ndarray
    order: int
    grading: float
    curve: object = field(repr=False)
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def size(self):
        return self.nodes.size

    @property
    def breaks(self):
        return np.append(self.panels[:, 0], self.panels[-1, 1])

    def weights_for(self, curve):
        """Measure weights of the same nodes for another curve."""
        if curve is self.curve:
            return self.weights
        return self.base_weights * curve.measure_density(self.nodes)


def _grading_map(s, q):
    sq = s**q
    return sq / (sq + (1.0 - s) ** q)


def _grading_inverse(t, q):
    # psi(s) = t  <=>  s/(1 - s) = (t/(1 - t))^(1/q)
    t = np.clip(np.asarray(t, float), 0.0, np.nextafter(1.0, 0.0))
    r = (t / (1.0 - t)) ** (1.0 / q)
    return np.where(t >= np.nextafter(1.0, 0.0), 1.0, r / (1.0 + r))


def build_grid(curve, N=256, grading=2.0, extra_refine_at=(), order=DEFAULT_ORDER,
               vertex_levels=None):
    """Build a graded panel grid with about ``N`` nodes for ``curve``.

    Mandatory panel breaks are the curve's own breakpoints, ``extra_refine_at``
    and, for curves with a conical vertex, ``vertex_levels`` dyadic points
    ``(eps/2) 2^-k`` toward ``t = 0``. Remaining panels are added by bisecting, in
    the coordinate ``s`` with ``t = s^q/(s^q + (1-s)^q)``, whichever panel is
    longest in ``s``; this grades the mesh algebraically toward both axis points.
    The panel count is ``ceil(N / order)``, raised if the mandatory breaks need
    more, so ``grid.size`` can exceed ``N``.
    """
    if N < 16:
        raise ValueError("need N >= 16")
    if grading < 1:
        raise ValueError("grading exponent must be >= 1")
    if vertex_levels is None:
        vertex_levels = DEFAULT_VERTEX_LEVELS if curve.epsilon > 0 else 0
    breaks = {0.0, 1.0}
    breaks.update(float(b) for b in curve.breakpoints)
    breaks.update(float(b) for b in extra_refine_at)
    if curve.epsilon > 0:
        breaks.update(0.5 * curve.epsilon * 2.0**-k for k in range(1, vertex_levels + 1))
    breaks = sorted(b for b in breaks if 0.0 <= b <= 1.0)

    n_panels = max(math.ceil(N / order), len(breaks) - 1)
    s = list(_grading_inverse(np.array(breaks), grading))
    while len(s) - 1 < n_panels:
        lengths = np.diff(s)
        k = int(np.argmax(lengths))
        s.insert(k + 1, 0.5 * (s[k] + s[k + 1]))
    s = np.array(s)
    t = _grading_map(s, grading)
    # keep mandatory breaks bit-exact
    for b in breaks:
        t[np.argmin(np.abs(t - b))] = b
    t[0], t[-1] = 0.0, 1.0
    panels = np.column_stack([t[:-1], t[1:]])

    x, w = np.polynomial.legendre.leggauss(order)
    half = 0.5 * (panels[:, 1] - panels[:, 0])
    mid = 0.5 * (panels[:, 1] + panels[:, 0])
    nodes = (mid[:, None] + half[:, None] * x).ravel()
    base = (half[:, None] * w).ravel()
    weights = base * curve.measure_density(nodes)
    return Grid(nodes=nodes, base_weights=base, weights=weights, panels=panels,
                order=order, grading=float(grading), curve=curve)


# --- near-field plan ---------------------------------------------------------


def _self_pieces(a, b, target, depth):
    """Pieces of ``[a, b]`` halving in length toward the interior point ``target``.

    Returns the pieces and the widths left uncovered on each side of the target.
    """
    pieces = []
    d_left = target - a
    while d_left > depth:
        pieces.append((target - d_left, target - 0.5 * d_left))
        d_left *= 0.5
    d_right = b - target
    while d_right > depth:
        pieces.append((target + 0.5 * d_right, target + d_right))
        d_right *= 0.5
    return pieces, d_left, d_right


def _neighbor_pieces(a, b, target):
    """Geometric pieces of a panel not containing ``target``, refined toward it."""
    if target < a:
        d0, end, sign = a - target, b, 1.0
        base = a
    else:
        d0, end, sign = target - b, a, -1.0
        base = b
    length = abs(end - base)
    out = []
    pos = 0.0
    step = max(d0, 1e-3 * length)
    while pos < length:
        nxt = min(length, pos + step)
        lo, hi = base + sign * pos, base + sign * nxt
        out.append((min(lo, hi), max(lo, hi)))
        pos = nxt
        step = d0 + nxt
    return out


def _barycentric_matrix(x_nodes, x_eval):
    """Lagrange basis of ``x_nodes`` evaluated at ``x_eval``: shape (len(x_eval), len(x_nodes))."""
    diff = x_nodes[:, None] - x_nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    bw = 1.0 / np.prod(diff, axis=1)
    d = x_eval[:, None] - x_nodes[None, :]
    exact = d == 0.0
    d[exact] = 1.0
    terms = bw / d
    out = terms / terms.sum(axis=1, keepdims=True)
    rows = np.flatnonzero(exact.any(axis=1))
    if rows.size:
        out[rows] = exact[rows].astype(float)
    return out


@dataclass
class _NearPlan:
    tgt: np.ndarray          # target node for each oversampled point
    panel: np.ndarray        # source panel for each point
    s: np.ndarray            # source parameter
    chord: tuple             # g(t_i) - g(s), accurate near the diagonal
    wq: np.ndarray           # quadrature weight times measure density
    interp: np.ndarray       # Lagrange row (order,) per point
    far_mask: np.ndarray     # N x N boolean: entry taken from the plain rule
    split_t: np.ndarray      # targets that get the diagonal remainder
    split_h: np.ndarray      # (left, right) widths of that remainder interval
    split_mu: np.ndarray     # measure density at those targets
    split_fit_h: np.ndarray  # sampling step of the log fit


def _near_plan(grid, curve):
    key = id(curve)
    hit = grid._cache.get(key)
    if hit is not None and hit[0] is curve:
        return hit[1]

    order = grid.order
    panels = grid.panels
    nodes = grid.nodes
    N = nodes.size
    lengths = panels[:, 1] - panels[:, 0]
    ipanel = np.arange(N) // order

    tgt, pan, s_all, w_all, interp = [], [], [], [], []
    far = np.ones((N, N), dtype=bool)
    split_t, split_h, split_fit = [], [], []
    for i, ti in enumerate(nodes):
        dist = np.maximum(panels[:, 0] - ti, ti - panels[:, 1])
        dist = np.maximum(dist, 0.0)
        near = np.flatnonzero(dist < lengths)
        near = np.union1d(near, [ipanel[i]])
        for p in near:
            a, b = panels[p]
            far[i, p * order:(p + 1) * order] = False
            if p == ipanel[i]:
                # stop well above the spacing of floats around t_i
                depth = max(_SELF_DEPTH * (b - a), 4096 * np.spacing(ti))
                pieces, d_left, d_right = _self_pieces(a, b, ti, depth)
                split_t.append(ti)
                split_h.append((d_left, d_right))
                split_fit.append(1e-4 * min(ti - a, b - ti, ti, 1.0 - ti))
            else:
                pieces = _neighbor_pieces(a, b, ti)
            pieces = np.array(pieces)
            ph = 0.5 * (pieces[:, 1] - pieces[:, 0])
            pm = 0.5 * (pieces[:, 1] + pieces[:, 0])
            sq = (pm[:, None] + ph[:, None] * _PIECE_X).ravel()
            wq = (ph[:, None] * _PIECE_W).ravel()
            tgt.append(np.full(sq.size, i, dtype=np.int32))
            pan.append(np.full(sq.size, p, dtype=np.int32))
            s_all.append(sq)
            w_all.append(wq)
            interp.append(_barycentric_matrix(nodes[p * order:(p + 1) * order], sq))

    s_all = np.concatenate(s_all)
    tgt = np.concatenate(tgt)
    t_all = nodes[tgt]
    dx = np.empty_like(s_all)
    dy = np.empty_like(s_all)
    close = (np.abs(s_all - t_all) < 0.25 * lengths[ipanel[tgt]]) & same_piece(curve, t_all, s_all)
    far_pts = ~close
    g_s = curve.evaluate(s_all[far_pts])
    g_t = curve.evaluate(t_all[far_pts])
    dx[far_pts], dy[far_pts] = g_t[0] - g_s[0], g_t[1] - g_s[1]
    dx[close], dy[close] = chord(curve, t_all[close], s_all[close])
    plan = _NearPlan(
        tgt=tgt,
        chord=(dx, dy),
        panel=np.concatenate(pan),
        s=s_all,
        wq=np.concatenate(w_all) * curve.measure_density(s_all),
        interp=np.concatenate(interp),
        far_mask=far,
        split_t=np.array(split_t),
        split_h=np.array(split_h),
        split_mu=curve.measure_density(np.array(split_t)),
        split_fit_h=np.array(split_fit),
    )
    grid._cache[key] = (curve, plan)
    return plan


# --- assembly ------------------------------------------------------------------


def _kernel_values(n, gt, gs, transpose, chord_=None):
    """Both modal kernels at paired columns; ``transpose`` swaps target and source."""
    if transpose:
        gt, gs = gs, gt
        if chord_ is not None:
            chord_ = (-chord_[0], -chord_[1])
    return modal_kernels_from_geometry(n, gt, gs, chord=chord_)


def _diagonal_remainder(n, grid, curve, plan, transpose):
    """``int K(t_i, t_i + d) dmu`` over the uncovered ``-d_left < d < d_right``, from the fit ``a log|d| + b``."""
    t = plan.split_t
    h = plan.split_fit_h
    d = np.stack([-2 * h, -h, h, 2 * h])
    tt = np.repeat(t, 4)
    ss = (t + d).T.ravel()
    vals = _kernel_values(n, curve.evaluate(tt), curve.evaluate(ss), transpose,
                          chord(curve, tt, ss))
    y = {k: v.reshape(t.size, 4) for k, v in vals.items()}
    logd = np.log(np.abs(d.T))
    # least-squares fit y ~ a log|d| + b + c d, solved per target via the normal equations
    design = np.stack([logd, np.ones_like(logd), d.T], axis=-1)
    gram = np.einsum("mki,mkj->mij", design, design)
    out = {}
    dl, dr = plan.split_h[:, 0], plan.split_h[:, 1]
    log_part = dl * (np.log(dl) - 1.0) + dr * (np.log(dr) - 1.0)
    for k, yy in y.items():
        rhs = np.einsum("mki,mk->mi", design, yy)
        coef = np.linalg.solve(gram, rhs[..., None])[..., 0]
        out[k] = plan.split_mu * (coef[:, 0] * log_part + coef[:, 1] * (dl + dr))
    return out


def _assemble_matrices(n, curve, grid, transpose=False):
    plan = _near_plan(grid, curve)
    nodes = grid.nodes
    N = nodes.size
    order = grid.order
    g = curve.evaluate(nodes)
    weights = grid.weights_for(curve)

    # far field on every off-diagonal pair, overwritten below where near
    ii, jj = np.nonzero(plan.far_mask)
    vals = _kernel_values(n, g[:, ii], g[:, jj], transpose)
    mats = {}
    for k in ("k", "s"):
        m = np.zeros((N, N))
        m[ii, jj] = vals[k] * weights[jj]
        mats[k] = m

    gt = g[:, plan.tgt]
    gs = curve.evaluate(plan.s)
    vals = _kernel_values(n, gt, gs, transpose, plan.chord)
    cols = (plan.panel.astype(np.int64) * order)[:, None] + np.arange(order)
    flat = (plan.tgt.astype(np.int64)[:, None] * N + cols).ravel()
    for k in ("k", "s"):
        contrib = ((vals[k] * plan.wq)[:, None] * plan.interp).ravel()
        mats[k] += np.bincount(flat, weights=contrib, minlength=N * N).reshape(N, N)

    rem = _diagonal_remainder(n, grid, curve, plan, transpose)
    # the remainder interval is a few ulps wide around t_i: the density there is g(t_i)
    idx = np.arange(N)
    for k in ("k", "s"):
        mats[k][idx, idx] += rem[k]
    return mats["k"], mats["s"]


@dataclass(frozen=True, eq=False)
class ModalOperator:
    """Nyström matrices of the mode-``n`` operators on one grid.

    ``A`` and ``S`` discretize the double-layer-type and single-layer modal
    operators on nodal values. ``P = sym(W S)`` is the energy Gram matrix with
    ``W = diag(weights)``; ``gram_asymmetry`` is ``||W S - (W S)^T||_F / ||W S||_F``
    before symmetrization and ``energy_residual`` is
    ``||P A - A^T P||_F / ||P A||_F``.
    """

    n: int
    grid: Grid = field(repr=False)
    curve: object = field(repr=False)
    A: np.ndarray = field(repr=False)
    S: np.ndarray = field(repr=False)
    P: np.ndarray = field(repr=False)
    gram_asymmetry: float
    energy_residual: float

    @property
    def weights(self):
        return self.grid.weights_for(self.curve)

    def metadata(self):
        return {
            "n": self.n,
            "N": int(self.grid.size),
            "order": self.grid.order,
            "grading": self.grid.grading,
            "curve": self.curve.metadata(),
            "gram_asymmetry": self.gram_asymmetry,
            "energy_residual": self.energy_residual,
        }


def assemble(n, curve, grid):
    """Assemble the mode-``n`` operators of ``curve`` on ``grid``.

    Raises :class:`AssemblyError` when the Cholesky factorization of ``P`` fails.
    """
    n = abs(int(n))
    A, S = _assemble_matrices(n, curve, grid)
    w = grid.weights_for(curve)
    ws = w[:, None] * S
    asym = float(np.linalg.norm(ws - ws.T) / np.linalg.norm(ws))
    P = 0.5 * (ws + ws.T)
    try:
        linalg.cholesky(P, lower=True)
    except linalg.LinAlgError as exc:
        raise AssemblyError(f"energy Gram matrix of mode {n} is not positive definite "
                            f"on {grid.size} nodes (grid too coarse?)") from exc
    PA = P @ A
    resid = float(np.linalg.norm(PA - PA.T) / np.linalg.norm(PA))
    return ModalOperator(n=n, grid=grid, curve=curve, A=A, S=S, P=P,
                         gram_asymmetry=asym, energy_residual=resid)


def gauss_column_sums(curve, grid):
    """``int K^0(t, t_j) dmu(t)`` for every node ``t_j``, integrating over the target.

    For a closed surface these equal one. The integral in the first argument is
    the transposed problem, so the same near-field machinery is applied with the
    kernel's arguments swapped.
    """
    At, _ = _assemble_matrices(0, curve, grid, transpose=True)
    return At.sum(axis=1)


def operator_difference_norm(n, curve_a, curve_b, grid, which="k"):
    """Spectral norm of the difference of two curves' mode-``n`` operators on ``L^2(mu_ref)``.

    Both operators are discretized on the nodes of ``grid``; ``curve_b`` supplies the
    reference measure. The kernel of ``curve_a`` is carried over to that measure by
    the ratio of measure densities, so the Nyström matrices coincide with the plain
    ones and the norm is ``||D^(1/2) (A_a - A_b) D^(-1/2)||_2`` with ``D`` the
    reference weights. ``which`` selects the ``"k"`` or ``"s"`` operator.
    """
    if which not in ("k", "s"):
        raise ValueError("which must be 'k' or 's'")
    if curve_a is curve_b:
        return 0.0
    n = abs(int(n))
    ka, sa = _assemble_matrices(n, curve_a, grid)
    kb, sb = _assemble_matrices(n, curve_b, grid)
    diff = (ka - kb) if which == "k" else (sa - sb)
    d = np.sqrt(grid.weights_for(curve_b))
    return float(np.linalg.norm(d[:, None] * diff / d[None, :], 2))
