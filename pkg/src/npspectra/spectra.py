"""Energy-space eigenvalues of the discretized modal operators.

The mode-``n`` operator is self-adjoint in the single-layer energy inner product,
so the discrete problem is posed as the symmetric-definite pencil ``(B, P)`` with
``B = (P A + A^T P)/2``. Whatever asymmetry ``P A`` has is discretization error;
it is measured and reported alongside the eigenvalues.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .discretize import AssemblyError, assemble
from .geometry import beta_of_t, build_sphere_curve
from .specfun import DomainError

__all__ = [
    "SpectrumReport",
    "energy_spectrum",
    "detect_discrete",
    "eigenpair_residual",
    "sphere_harmonic_profile",
    "sphere_eigenvalues",
]

# below this energy norm the trial vector is treated as numerically zero
_TINY_NORM = 1e-250


@dataclass
class SpectrumReport:
    """Eigenvalues of one mode on one grid, sorted in decreasing order.

    ``vectors`` (columns, P-orthonormal) are kept only when requested.
    ``essential_interval`` is ``None`` for smooth curves.
    """

    n: int
    N: int
    eigenvalues: np.ndarray
    essential_interval: tuple = None
    discrete: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)
    vectors: np.ndarray = field(default=None, repr=False)

    def top(self, k):
        return self.eigenvalues[:k]

    def nearest(self, value):
        i = int(np.argmin(np.abs(self.eigenvalues - value)))
        return float(self.eigenvalues[i])

    def to_dict(self):
        return {
            "n": self.n,
            "N": self.N,
            "eigenvalues": [float(x) for x in self.eigenvalues],
            "essential_interval": None if self.essential_interval is None
            else [float(x) for x in self.essential_interval],
            "discrete": [float(x) for x in self.discrete],
            "diagnostics": {k: float(v) for k, v in self.diagnostics.items()},
        }


def energy_spectrum(op, essential_interval=None, keep_vectors=False):
    """Solve ``B v = lambda P v`` for a :class:`~npspectra.discretize.ModalOperator`.

    The pencil is reduced with the Cholesky factor ``P = L L^T`` to the standard
    symmetric problem for ``L^-1 B L^-T``.
    """
    P, A = op.P, op.A
    try:
        L = linalg.cholesky(P, lower=True)
    except linalg.LinAlgError as exc:
        raise AssemblyError(f"energy Gram matrix of mode {op.n} is not positive definite") from exc
    PA = P @ A
    anti = PA - PA.T
    B = 0.5 * (PA + PA.T)
    # C = L^-1 B L^-T
    X = linalg.solve_triangular(L, B, lower=True)
    C = linalg.solve_triangular(L, X.T, lower=True)
    C = 0.5 * (C + C.T)
    vals, y = linalg.eigh(C)
    order = np.argsort(vals)[::-1]
    vals = vals[order]
    diagnostics = {
        "energy_residual": float(np.linalg.norm(anti) / np.linalg.norm(PA)),
        "gram_asymmetry": float(op.gram_asymmetry),
        # ||L^-1 (PA - A^T P) L^-T||_2 / 2 bounds how far symmetrization can move eigenvalues
        "symmetrization_bound": float(0.5 * np.linalg.norm(
            linalg.solve_triangular(L, linalg.solve_triangular(L, anti, lower=True).T,
                                    lower=True), 2)),
    }
    vectors = None
    if keep_vectors:
        vectors = linalg.solve_triangular(L.T, y[:, order], lower=False)
    return SpectrumReport(n=op.n, N=op.grid.size, eigenvalues=vals,
                          essential_interval=essential_interval,
                          diagnostics=diagnostics, vectors=vectors)


def detect_discrete(report, refined, essential=None, tol=1e-6):
    """Eigenvalues of ``report`` that are stable under refinement and outside ``essential``.

    An eigenvalue is kept when the nearest eigenvalue of ``refined`` lies within
    ``tol`` (strictly) and it is not inside ``[lo - tol, hi + tol]``. The result is
    also stored on ``report.discrete``.
    """
    ref = np.asarray(refined.eigenvalues)
    kept = []
    for lam in report.eigenvalues:
        if essential is not None:
            lo, hi = essential
            if lo - tol <= lam <= hi + tol:
                continue
        if np.min(np.abs(ref - lam)) < tol:
            kept.append(float(lam))
    report.discrete = kept
    return kept


def sphere_eigenvalues(n, count):
    """``1/(2l + 1)`` for ``l = |n|, ..., |n| + count - 1``."""
    n = abs(int(n))
    return 1.0 / (2.0 * np.arange(n, n + count) + 1.0)


def sphere_harmonic_profile(n, t):
    """``Y^n_n(b(t), 0)`` on the sphere parametrization: ``c_n sin^n b(t)``.

    ``c_n = (-1)^n sqrt((2n+1)!/(4 pi)) / (2^n n!)`` is the usual normalization.
    """
    n = abs(int(n))
    b = beta_of_t(build_sphere_curve(), np.asarray(t, float))
    logc = 0.5 * (math.lgamma(2 * n + 2) - math.log(4 * math.pi)) - n * math.log(2) - math.lgamma(n + 1)
    return (-1) ** n * math.exp(logc) * np.sin(b) ** n


def eigenpair_residual(n, curve, grid, op=None, reference=None):
    """``||(A - lambda_n) f||_P / ||f||_P`` with ``f = Y^n_n(b(t_i))`` and ``lambda_n = 1/(2n+1)``.

    The trial function is the sphere's exact mode-``n`` eigenfunction sampled on the
    grid nodes; for curves equal to the sphere away from the vertex this measures
    how far it is from being an eigenfunction.

    With ``reference`` (the sphere curve) the residual vector is formed as
    ``(A - A_ref) f``. Since ``f`` is an exact eigenfunction of the reference
    operator this is the same quantity, minus the reference's own quadrature
    error, which otherwise sets a floor near 1e-11 that hides the perturbation's
    contribution for all but the lowest modes.
    """
    n = abs(int(n))
    if op is None:
        op = assemble(n, curve, grid)
    f = sphere_harmonic_profile(n, grid.nodes)
    norm_f = math.sqrt(max(float(f @ op.P @ f), 0.0))
    if not norm_f > _TINY_NORM:
        raise DomainError(f"trial function of mode {n} underflows on this grid")
    if reference is None:
        r = op.A @ f - f / (2 * n + 1)
    else:
        r = op.A @ f - assemble(n, reference, grid).A @ f
    return math.sqrt(max(float(r @ op.P @ r), 0.0)) / norm_f
