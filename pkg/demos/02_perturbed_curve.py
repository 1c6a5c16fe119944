"""Pushing a cone point into the south pole.

The perturbed surface agrees with the sphere outside a cap of parameter width eps,
which shrinks with the vertex angle: eps = |alpha - pi/2| / 8. Inside the cap the
profile is a straight cone near the tip, blended smoothly into the sphere.
"""

import math

from npspectra import build_perturbed_curve, check_constraints

for alpha in (math.pi / 2 - 0.08, math.pi / 2 + 0.08):
    curve = build_perturbed_curve(alpha)
    report = check_constraints(curve, npts=100_000)
    print(f"alpha = pi/2 {'-' if alpha < math.pi / 2 else '+'} 0.08, eps = {curve.epsilon:.4f}")
    for c in report.items:
        print(f"   {'ok  ' if c.passed else 'FAIL'} {c.name:32s} {c.measured:12.6g}  bound {c.bound:.6g}")
    print()

# Angles too far from pi/2 cannot satisfy the blend-slope and curvature bounds at
# the same time; the builder refuses them.
try:
    build_perturbed_curve(math.pi / 2 - 0.5)
except ValueError as exc:
    print("alpha = pi/2 - 0.5 rejected:", exc)
