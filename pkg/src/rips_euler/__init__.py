"""Euler characteristic process of Vietoris-Rips complexes over Poisson samples."""
from .harness import (CampaignConfig, ExperimentReport, run_fclt, run_moment_asymptotics,
                      run_palm_check, run_slln)
from .limits import (CovarianceGrid, GPPath, IndicatorVolumeQuery, PsiEstimate, SeriesTruncation,
                     covariance_grid, gp_increment_check, gp_sample, indicator_volume,
                     limit_covariance, limit_mean, psi)
from .point_process import (DensityModel, PiecewiseConstant, PointCloud, ScalingContext,
                            TruncatedGaussian, UniformCube, power_integral, sample_poisson)
from .region import ALL_SPACE, RegionSpec
from .rips import EulerCurve, FiltrationSimplex, enumerate_cliques, euler_curve, simplex_counts

__version__ = "0.1.0"
