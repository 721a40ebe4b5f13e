"""Geometric stable laws: characteristic functions, densities, samplers and
fractional operators, with numerical verification of their evolution equations."""

from .gslaw import (FellerParams, GammaParams, SpectralMeasure, StableParams, feller_from_params, gamma_charfn,
                    gamma_density, gs_charfn, levy_fp_density, mittag_leffler, multivariate_gs_charfn,
                    stable_char_exponent, stable_charfn)
from .sampling import SampleBatch, sample_gamma, sample_gs, sample_isotropic_gs, sample_stable
from .spectral import DensityField, Grid1D, SpectralGrid, gs_density, invert_charfn, stable_density
from .verify import EQUATION_IDS, ResidualReport

__all__ = [
    "DensityField", "EQUATION_IDS", "FellerParams", "GammaParams", "Grid1D", "ResidualReport", "SampleBatch", "SpectralGrid",
    "SpectralMeasure", "StableParams", "feller_from_params", "gamma_charfn", "gamma_density", "gs_charfn",
    "gs_density", "invert_charfn", "levy_fp_density", "mittag_leffler", "multivariate_gs_charfn",
    "sample_gamma", "sample_gs", "sample_isotropic_gs", "sample_stable", "stable_char_exponent", "stable_charfn", "stable_density",
]
