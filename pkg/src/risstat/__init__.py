"""Statistical-CSI design of a single-user RIS-aided MISO downlink."""

from .model import (ChannelRealization, EffectiveStatistics, ModelError, Observation,
                    SingularMatrixError, StatisticalModel, SystemDims, as_phase_vector,
                    coupling_matrix, coupling_scalar, effective_covariance)
from .optim import (OptimizerConfig, OptimizerReport, ascent_direction,
                    brute_force_phases, elementwise_matrices, elementwise_update,
                    objective, objective_gradient, optimize_elementwise, optimize_pgd,
                    project_unit_modulus, random_phases)
from .precoding import (Precoder, optimal_transform, rate_lower_bound, scalar_snr,
                        snr_lower_bound_general, snr_lower_bound_optimal)
from .simulate import (RateEstimate, Scenario, Scheme, generate_covariances,
                       monte_carlo_rate, sample_channel, sample_observation, substream)

__version__ = "0.1.0"
