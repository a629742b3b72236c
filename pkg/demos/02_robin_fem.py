"""
Finite elements for the Robin eigenvalue
========================================

P1 elements on a quality triangulation; the Robin term enters as a boundary
mass matrix. The lowest eigenvalue comes from shift-and-invert iteration
with the shift certified by an inertia count.
"""

from robiniso.ball import BallProblem, ball_eigenvalue
from robiniso.domains import DomainSpec
from robiniso.fem import robin_principal_eigen
from robiniso.mesh import triangulate

exact = ball_eigenvalue(BallProblem(2, 1.0, 1.0)).lam
print(f"unit disk, α=1, exact λ = {exact:.8f}")
prev = None
for h in (0.1, 0.05, 0.025):
    mesh = triangulate(DomainSpec.disk(1.0), h)
    eig = robin_principal_eigen(mesh, 1.0)
    err = abs(eig.lam - exact)
    ratio = "" if prev is None else f"  ratio {prev / err:.2f}"
    print(f"h={h:<6} nodes={mesh.n_nodes:6d}  λ_h={eig.lam:.8f}  error={err:.2e}{ratio}")
    prev = err

# elongated domains need the certified shift when α is large
mesh = triangulate(DomainSpec.ellipse(3.0, 1.0), 0.05)
for alpha in (0.5, 1.0, 4.0):
    eig = robin_principal_eigen(mesh, alpha)
    print(f"3:1 ellipse α={alpha}: λ={eig.lam:.6f} after {eig.iterations} iterations")
