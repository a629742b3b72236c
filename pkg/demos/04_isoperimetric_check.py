"""
Scaled eigenvalue comparison
============================

For α > 0 the product |Ω|λ(Ω) is compared with |B|λ(B) for the disk B of
radius r_Ω. The disk is the equality case; every other domain gives a
strict inequality. The report also records the comparison with the disk of
equal area and the constant-function bound.
"""

from robiniso.domains import DomainSpec
from robiniso.transplant import theorem1_check

domains = {
    "disk": DomainSpec.disk(1.0),
    "ellipse 2:1": DomainSpec.ellipse(2.0, 1.0),
    "ellipse 3:1": DomainSpec.ellipse(3.0, 1.0),
    "3-fold star": DomainSpec.star(1.0, (0.0, 0.0, 0.3)),
}
for name, spec in domains.items():
    rep = theorem1_check(spec, 1.0, 0.05)
    q = rep.quantities
    print(f"{name:12s} |Ω|λ={q['scaled_Omega']:9.5f}  |B|λ_B={q['scaled_ball']:9.5f}  "
          f"margin {q['relative_margin']:+.2%}  λ ≤ λ(B_R): {rep['λ(Ω) <= λ(B_R)'].passed}")
