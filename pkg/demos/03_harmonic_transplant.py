"""
Green's function, harmonic radius and level sets
================================================

G(x, y) = (-ln|x-y| - H(x, y)) / 2π. The harmonic radius r(y) = e^{-H(y,y)}
is largest at the harmonic centre, where it equals r_Ω. Superlevel sets of
G are compared with those of the disk of radius r_Ω.
"""

import numpy as np

from robiniso.domains import DomainSpec
from robiniso.mesh import triangulate
from robiniso.transplant import (
    green_function,
    harmonic_center,
    level_set_measures,
    mesh_allowance,
    verify_capacity_equality,
    verify_lemma_cap2,
)

mesh = triangulate(DomainSpec.ellipse(2.0, 1.0), 0.05)
y, r = harmonic_center(mesh)
print(f"2:1 ellipse: centre {np.round(y, 8)}, r_Ω = {r:.6f}, |Ω| = {mesh.area:.6f}")

green = green_function(mesh, y)
table = level_set_measures(green, np.geomspace(1e-3, 0.5, 8))
print(f"γ = {table.gamma_ratio:.6f}")
for row in table.rows():
    print("t={t:8.4f}  m_Ω={m_Omega:9.5f}  m_B={m_Ball:9.5f}  γ²m_B={bound:9.5f}".format(**row))
print("m_Ω <= γ² m_B everywhere:", verify_lemma_cap2(table, mesh_allowance(mesh))["passed"])

# capacities of Ω \ Ω^t and of the annulus B_rΩ \ B_rt coincide
for t in (0.05, 0.1, 0.2):
    cd, cb, gap = verify_capacity_equality(green, t)
    print(f"t={t}: cap {cd:.5f} vs annulus {cb:.5f} (gap {gap:.1e})")
