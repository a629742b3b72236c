"""
Energy comparison with a radial problem
=======================================

E(v) = ∫|∇v|² + c²∫v² - 2μ∮vρ is minimised on Ω, evaluated at the
transplanted comparison profile U, and compared with the radial energy on
B_rΩ. Splitting the energies term by term shows where the chain
E(Ω) <= E(U) <= E_B breaks on an ellipse: the gradient terms agree, but the
c²∫U² term exceeds γ² times its disk value.
"""

import math

from robiniso.domains import DomainSpec
from robiniso.mesh import triangulate
from robiniso.steklov import BoundaryWeight, ComparisonProblem, EnergyProblem, quadratic_sink, verify_energy_bound
from robiniso.transplant import green_function, harmonic_center

for name, spec in (("disk", DomainSpec.disk(1.0)), ("ellipse 2:1", DomainSpec.ellipse(2.0, 1.0))):
    mesh = triangulate(spec, 0.05)
    y, r = harmonic_center(mesh)
    p = EnergyProblem(mesh, quadratic_sink(1.0), 1.0, BoundaryWeight(1.0))
    cp = ComparisonProblem(r, p.boundary_mass(), mesh.area / (math.pi * r * r))
    rep = verify_energy_bound(p, cp, green_function(mesh, y))
    q = rep.quantities
    print(f"{name}: E(Ω)={q['E_min']:.4f}  E(U)={q['E_transplant']:.4f}  E_B={q['E_comparison']:.4f}")
    print(f"   ∫|∇U|²={q['grad_transplant']:.4f} vs {q['grad_ball']:.4f};  "
          f"∫U²/2={-q['G_transplant']:.4f} vs γ²∫φ²/2={-q['gamma_n'] * q['G_ball']:.4f}")
    for a in rep.assertions:
        print(f"   {a.name:40s} {'ok' if a.passed else 'violated'}{' (recorded)' if a.recorded_only else ''}")
