"""Edge statistics of Dyson Brownian motion with deterministic initial data.

Submodules:
  initial_data -- spectra, Stieltjes transforms, regularity certification
  freeconv     -- free-convolution solver, edge data, densities, quantiles
  dbm          -- Gaussian ensembles, eigenvalue routes, coupled SDE flow
  shortrange   -- short-range topology, generator, finite-speed/energy probes
  edgestats    -- rescaled edge statistics and statistical verdicts
  experiments  -- reproducible experiment pipelines and manifests
"""

__version__ = "0.1.0"

from .initial_data import (InitialData, RegularityReport, check_eta_regular,
                           quantile_initial_data, stieltjes_transform,
                           weighted_moment)
from .freeconv import (DensityTable, FreeConvolutionProfile, SpectralPoint,
                       F_map, build_density_table, compute_profile, density,
                       density_grid, find_edge, gamma0, interpolating_measure,
                       matching_compare, quantiles, solve_mfc,
                       stability_coefficients)
from .dbm import (ParticleSystem, ensemble_eigenvalues, pad_system,
                  sample_gaussian_ensemble, sde_evolve, strip_sentinels)
from .shortrange import (GeneratorSnapshot, LawPath, ShortRangeTopology,
                         build_generator, build_law_path, energy_decay_probe,
                         finite_speed_probe, propagate_semigroup,
                         semicircle_branch, short_range_evolve,
                         short_range_topology)
from .edgestats import (EdgeSampleSet, ecdf, ks_distance, local_law_report,
                        rescaled_edge_statistics, rigidity_report,
                        two_sample_compare)
from .streams import NoiseLedger, derive_stream
from .experiments import RunConfig, run_experiment
