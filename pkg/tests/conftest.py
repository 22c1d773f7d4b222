import numpy as np
import pytest

from axivort.fields import GridField
from axivort.initdata import DataFamily, make_initial
from axivort.kernel import KernelConfig


@pytest.fixture(scope="session")
def ring_coarse():
    """Gaussian ring on a coarse lattice (fast shared fixture)."""
    return make_initial(DataFamily("gaussian_ring"), grid=(2.4, -1.2, 1.2, 2.4 / 32))


@pytest.fixture(scope="session")
def ring_cfg():
    return KernelConfig(blob_delta=2 * 2.4 / 32)


def manufactured_grid(h, rmax=4.2, zmax=4.2):
    """q = omega/r for the closed-form stream function r^2 exp(-r^2-z^2)."""
    nr = int(round(rmax / h))
    nz = int(round(2 * zmax / h))
    r = (np.arange(nr) + 0.5) * h
    z = -zmax + (np.arange(nz) + 0.5) * h
    R, Z = np.meshgrid(r, z, indexing="ij")
    E = np.exp(-R ** 2 - Z ** 2)
    omega = -(3.0 - 14.0 * R ** 2 + 4.0 * R ** 4 + 4.0 * Z ** 2 * R ** 2) * E
    return GridField(rmax, -zmax, zmax, h, omega / R)


def manufactured_exact(r, z):
    """(psi, u_r, u_z) of the manufactured stream function."""
    E = np.exp(-r ** 2 - z ** 2)
    return r ** 2 * E, 2.0 * z * r ** 2 * E, (3.0 * r - 2.0 * r ** 3) * E
