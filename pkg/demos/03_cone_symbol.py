"""Where the essential spectrum comes from.

A cone point adds an interval of essential spectrum for each Fourier mode. Its
end point is the supremum of a Mellin symbol along the line Re z = 3/2. The
symbol is real on that line, its sign follows the vertex orientation, and it
shrinks both as n grows and as the cone flattens.
"""

import math

import numpy as np

from npspectra import essential_interval, mellin_symbol, symbol_trace

alpha = math.pi / 2 - 0.08
print("mode   sigma_n       argmax xi   size of Im on the line")
for n in (0, 1, 2, 4, 8, 16, 32):
    tr = symbol_trace(n, alpha)
    print(f"{n:4d}   {tr.radius:.6e}   {tr.argmax:8.3f}    {tr.max_imag_ratio:.1e}")

print("\nparity Pi(z) = Pi(3 - z) at z = 0.7 + 2i:",
      abs(mellin_symbol(3, alpha, 0.7 + 2j) - mellin_symbol(3, alpha, 2.3 - 2j)))

print("\nflattening the cone: sigma_0 / |alpha - pi/2|")
for d in (0.2, 0.1, 0.05, 0.02):
    print(f"   d = {d:5.2f}   {essential_interval(0, math.pi / 2 - d).radius / d:.6f}")

inward = essential_interval(0, math.pi / 2 + 0.08)
print(f"\ninward vertex: interval [{inward.lo:.6f}, {inward.hi:.1f}]")
print("n = 0 symbol values along xi:", np.round(symbol_trace(0, alpha).values.real[::100], 6))
