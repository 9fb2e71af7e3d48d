"""Structure-preserving stochastic midpoint integrators on SO(3)."""

from ._core import (  # noqa: F401
    Ad_star,
    HeavyTop,
    NoiseHamiltonian,
    RigidBody,
    WienerGrid,
    __version__,
    ad_star,
    casimirs_ht,
    cayley,
    cayley_inv,
    coupled_errors_rigid_body,
    dcayinv_dual,
    diamond,
    effective_potential,
    euler_from_rotation,
    hat,
    heavytop_momentum_map,
    integrate_heavy_top,
    integrate_rigid_body,
    normal_quantile,
    nutation_bounds,
    orbit_radius,
    orthogonality_defect,
    rotation_from_euler,
    spatial_momentum,
    truncate_increment,
    truncation_level,
    vee,
)
