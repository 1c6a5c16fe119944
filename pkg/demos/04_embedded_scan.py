"""Eigenvalues that survive inside the essential spectrum.

Away from the vertex the perturbed surface is the sphere, so its mode-n operator
keeps an eigenvalue close to the sphere's 1/(2n+1). The essential interval of mode
n shrinks faster than 1/(2n+1) does, so from some mode on that eigenvalue sits
above sigma_n but still below sigma_0: inside the essential spectrum of the full,
non-separated operator. For an inward vertex the interval is negative and the
positive eigenvalues never meet it.

This takes about half a minute (two grids per mode, 33 modes).
"""

import math

from npspectra import ExperimentConfig, run_embedded_scan

rows, summary = run_embedded_scan(ExperimentConfig(alpha=math.pi / 2 - 0.08))
print(f"sigma_0 = {summary['sigma_0']:.6f}\n")
print("   n   1/(2n+1)      z_n           sigma_n       embedded")
for r in rows:
    print(f"{r.n:4d}   {r.lambda_n:.8f}   {r.z_n:.8f}   {r.sigma_n:.6e}   {'yes' if r.embedded else 'no'}")
print(f"\nevery mode from n0 = {summary['onset_n0']} on is embedded")
