"""axivort: vortex-particle laboratory for axisymmetric Euler flow without swirl.

Evolves q = omega_theta / r as a Lagrangian invariant, recovers velocity
through the axisymmetric Green-function kernel, and ships an empirical
verification harness for the conservation laws, kernel bounds and local
integrability estimates the scheme is built on.
"""

from .fields import (
    CylinderRegion,
    GridField,
    HalfPlaneRect,
    MeridianPoint,
    NormSpec,
    ParticleField,
    SampledField,
    VelocityGrid,
    VelocitySample,
    VortexParticle,
    WholeSpace,
    as_particles,
    divergence_residual,
    lp_norm,
    remesh,
)
from .kernel import (
    KernelConfig,
    KernelValue,
    angular_kernel,
    stream_eval,
    velocity_eval,
    velocity_field,
    velocity_gradient_eval,
)
from .initdata import DataFamily, MollifierSpec, cutoff, make_initial, mollify
from .transport import SimConfig, TrajectoryRecord, advect_step, simulate
from .estimates import EstimateReport
from .harness import ResidualReport, WeakTestFunction

__version__ = "0.1.0"
