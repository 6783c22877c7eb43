"""The integration-by-parts identities and the path-dependence dichotomy.

The punchline: pairing complementary-order fractional derivatives by an inner
product is path independent (useless for damping), while pairing them by a
convolution keeps path dependence (and is exactly what the mixed convolved
action exploits).

Run:  python3 demos/02_integration_by_parts_zoo.py
"""

from convact import Grid, sample
from convact.identities import (
    IdentityKind,
    complementary_conv,
    complementary_inner,
    cubic_path_profile,
    inner_u_udot,
    run_identity_sweep,
)

print("== identity residual sweep ==")
rows = run_identity_sweep(list(IdentityKind), [0.25, 0.5, 0.75], [64, 128, 256])
seen = set()
for row in rows:
    key = (row.report.kind, row.report.alpha)
    if key in seen or row.order_estimate is None:
        continue
    seen.add(key)
for key in sorted(seen, key=str):
    cells = [r for r in rows if (r.report.kind, r.report.alpha) == key]
    res = " -> ".join(f"{c.report.residual:.2e}" for c in cells)
    last = cells[-1].order_estimate
    print(f"  {key[0].value:20s} alpha={key[1]!s:5}  {res}   (order {last:.2f})")

print("\n== memory of a constant signal ==")
grid = Grid(1.0, 256)
const = sample(lambda t: 2.0, grid)
print("integer pairing  int u u' dtau          =", f"{inner_u_udot(const).lhs:+.3e}",
      " (memoryless: zero)")
print("complementary pairing (alpha = 1/2)     =",
      f"{complementary_inner(const, 0.5).lhs:+.6f}", " (keeps u0^2 = 4)")

print("\n== path dependence split ==")
p1 = sample(cubic_path_profile(31, 1.0, 0.8, -0.3), grid)
p2 = sample(cubic_path_profile(35, 1.0, 0.8, -0.3), grid)
inner_gap = abs(complementary_inner(p1, 0.5).lhs - complementary_inner(p2, 0.5).lhs)
conv_gap = abs(complementary_conv(p1, 0.5).lhs - complementary_conv(p2, 0.5).lhs)
print(f"two paths, same endpoints: inner-product values differ by {inner_gap:.2e}")
print(f"                           convolution values differ by   {conv_gap:.2e}")
print("the convolved pairing sees the path; the inner product does not.")

print("\n== the convolved pairing is order-free ==")
u = sample(cubic_path_profile(23, 1.0, 0.6, -0.2), grid)
for alpha in (0.25, 0.5, 0.75):
    rep = complementary_conv(u, alpha)
    print(f"  alpha={alpha}: value {rep.lhs:+.10f} vs integer-derivative oracle "
          f"{rep.rhs:+.10f}")
