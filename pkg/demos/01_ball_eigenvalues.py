"""
Principal Robin eigenvalue of a ball
====================================

With a positive boundary parameter the first eigenvalue of -Δ with
∂_ν u = αu is negative. On a ball it solves k I_{ν+1}(kr)/I_ν(kr) = α with
λ = -k², ν = n/2 - 1.
"""

import math

import numpy as np

from robiniso.ball import BallProblem, ball_eigenvalue, ball_monotonicity_check, shooting_eigenvalue

# the Bessel root and an ODE shooting oracle agree to rounding
for n in (2, 3, 4):
    p = BallProblem(n, 1.0, 1.0)
    lam = ball_eigenvalue(p).lam
    print(f"n={n}: λ = {lam:.15f}  shooting {shooting_eigenvalue(p):.15f}")

# as the ball grows, sqrt|λ| decreases to α
for r in (1, 5, 20, 50, 200):
    print(f"r={r:4d}  sqrt|λ| = {math.sqrt(-ball_eigenvalue(BallProblem(2, 1.0, r)).lam):.6f}")

# λ(B_r) increases in r, and so does the scale-free quantity r^{n/2} sqrt|λ|
rep = ball_monotonicity_check(2, 1.0, np.geomspace(0.1, 10, 8))
for r, lam, y in zip(rep.radii, rep.lam, rep.y):
    print(f"r={r:7.3f}  λ={lam:12.6f}  y={y:9.5f}")
print("monotone:", rep.passed)
