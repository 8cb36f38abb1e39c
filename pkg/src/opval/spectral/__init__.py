"""Spectral analysis of the two-dimensional example: exact series and curves,
then Stieltjes inversion for the density of a*a."""

from ._poly import BivarPoly, UnivarRatPoly, discriminant, resultant
from .appendix import (
    DISCRIMINANT_FACTOR,
    NORM_POLYNOMIAL,
    ComponentSeries,
    DiscriminantReport,
    appendix_component_series,
    discriminant_roots,
    eliminate_h,
    exact_discriminant,
    h_quartic_residual,
    h_to_G_curve,
    hpoly,
    operator_norm,
    verify_h_quartic,
)
from .stieltjes import (
    ASYMPTOTE_A,
    ASYMPTOTE_B,
    SUPPORT_EDGE,
    BranchTrackingError,
    DensitySamples,
    PuiseuxReport,
    atom_mass,
    atom_profile,
    check_puiseux,
    default_grid,
    density,
    density_asymptote,
    g1_expansion,
    g2_expansion,
    integrate_moments,
    quartic_coeffs,
    quartic_residual,
    quartic_roots,
    stieltjes_G,
    write_csv,
    write_svg,
)
