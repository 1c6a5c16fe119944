"""The sphere as a calibration target.

On the unit sphere every mode of the Neumann-Poincare operator is known in closed
form: mode n has eigenvalues 1/(2l+1) for l >= n, and the double-layer kernel is
exactly half the single-layer kernel. A discretization that cannot reproduce both
is not worth running on anything harder.
"""

import numpy as np

from npspectra import assemble, build_grid, build_sphere_curve, energy_spectrum, sphere_eigenvalues

sphere = build_sphere_curve()
grid = build_grid(sphere, 256)
print(f"grid: {grid.size} nodes on panels graded toward both poles\n")

for n in (0, 3, 8):
    op = assemble(n, sphere, grid)
    computed = energy_spectrum(op).top(4)
    exact = sphere_eigenvalues(n, 4)
    identity = np.linalg.norm(op.A - 0.5 * op.S) / np.linalg.norm(op.S)
    print(f"mode {n}")
    for c, e in zip(computed, exact):
        print(f"   {c:.12f}   exact {e:.12f}   diff {abs(c - e):.1e}")
    print(f"   |A - S/2| / |S| = {identity:.1e}\n")

# The lower end of each spectrum is a dense cluster near 0: the discrete versions
# of 1/(2l+1) for large l. They converge slowly and are not used as data.
