#!/usr/bin/env python3
"""Tour of the outward-rounded interval substrate.

Every downstream guarantee rests on one property: the result interval of
an operation contains every real result of operand points.  This script
shows the containment behavior, the exactness fast paths, and the rigorous
transcendental enclosures.
"""

from fractions import Fraction

from rigdens import EPS_MACH, PI, Interval, from_fraction, iv

print("machine epsilon used by the float ledger:", EPS_MACH)

# Exact dyadic arithmetic stays exact: no gratuitous widening.
s = iv(1) + iv(2)
print(f"\n[1,1] + [2,2] = {s}   (width {s.width})")

# 1/3 is not representable: the quotient interval has positive width and
# provably contains the rational 1/3.
q = iv(1) / iv(3)
print(f"[1,1] / [3,3] = {q}")
print("  contains 1/3:", Fraction(q.lo) < Fraction(1, 3) < Fraction(q.hi))

# Monotone endpoint analysis for products.
p = iv(1, 2) * iv(-1, 1)
print(f"[1,2] * [-1,1] = {p}")

# A rational converts to the tightest containing machine interval.
f = from_fraction(Fraction(5, 17))
print(f"\n5/17 encloses to {f}  (width = one unit in the last place)")

# Transcendental enclosures: the sine of an interval straddling pi/2 must
# reach exactly 1, and log 1 must contain 0.
half_pi = PI.mid / 2
s = Interval(half_pi - 1e-5, half_pi + 1e-5).sin()
print(f"\nsin([pi/2 -+ 1e-5]) = {s}   (upper end exactly 1)")
print("log([1,1]) =", iv(1).log())
print("log([3,3]) =", iv(3).log(), " contains ln 3 = 1.0986122886681098...")

# The pi enclosure itself.
print(f"\npi enclosure: {PI}  (width {PI.width})")
