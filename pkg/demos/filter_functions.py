"""Shape of the rational filters behind the contour solver.

Prints |f_k(lam)| along the real axis for a 16-node Gauss-Legendre circle and
a flat ellipse around [-1, 1], then compares node counts.
"""
import numpy as np

from beastflex.quadrature import Interval, build_contour, filter_value

interval = Interval(-1.0, 1.0)
lam = np.array([0.0, 0.5, 0.9, 0.99, 1.01, 1.1, 1.5, 2.0, 3.0])

print("moment filters on the circle, q = 16")
circle = build_contour(interval, ecc=1.0, rule_kind="gauss", q=16)
print(f"{'lam':>6} " + " ".join(f"{'|f_%d|' % k:>10}" for k in range(4)))
for x in lam:
    vals = [abs(filter_value(circle, k, x)) for k in range(4)]
    print(f"{x:6.2f} " + " ".join(f"{v:10.2e}" for v in vals))

print("\nzeroth-moment filter, circle vs flat ellipse (ecc 0.1)")
flat = build_contour(interval, ecc=0.1, rule_kind="gauss", q=16)
for x in lam:
    print(f"{x:6.2f} {abs(filter_value(circle, 0, x)):10.2e} {abs(filter_value(flat, 0, x)):10.2e}")

print("\ndamping at lam = 1.5 as the node count grows")
for q in (8, 16, 24, 32):
    rule = build_contour(interval, ecc=1.0, rule_kind="gauss", q=q)
    print(f"q = {q:2d}: |f_0(1.5)| = {abs(filter_value(rule, 0, 1.5)):.2e}, {rule.stored_nodes} solves per iteration")
