import pytest

from robiniso.domains import DomainSpec
from robiniso.mesh import triangulate
from robiniso.transplant import green_function, harmonic_center


@pytest.fixture(scope="session")
def disk_mesh():
    return triangulate(DomainSpec.disk(1.0), 0.05)


@pytest.fixture(scope="session")
def ellipse_mesh():
    return triangulate(DomainSpec.ellipse(2.0, 1.0), 0.05)


@pytest.fixture(scope="session")
def disk_green(disk_mesh):
    y, _ = harmonic_center(disk_mesh)
    return green_function(disk_mesh, y)


@pytest.fixture(scope="session")
def ellipse_green(ellipse_mesh):
    y, _ = harmonic_center(ellipse_mesh)
    return green_function(ellipse_mesh, y)
