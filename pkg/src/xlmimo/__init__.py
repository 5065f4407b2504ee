"""XL-MIMO downlink scheduling/precoding simulator under imperfect CSI."""
from .correlation import (CorrelationMatrix, build_correlation_matrix,
                          correlation_entry_closed_form, correlation_entry_farfield,
                          correlation_entry_quadrature)
from .csi import (AgingConfig, InnovationModel, error_covariance, estimate_channel,
                  evolve_channel, innovation_covariance, innovation_model,
                  temporal_correlation)
from .errors import ConfigError, DomainError, NumericalError, SingularMatrixError
from .experiment import ExperimentRecord, SweepPlan, aggregate, snr_sweep
from .nearfield import (draw_channel, element_radius, equivalent_gain,
                        expected_gain_exact, specular_response)
from .precoding import PrecoderSet, sum_se, waterfill, zf_precoders
from .scenario import (ArrayGeometry, Scenario, ScenarioConfig, SpecularPath,
                       UserGeometry, build_scenario, sample_specular_paths, substream)
from .scheduling import (MODES, ChannelState, PipelineResult, ScheduleResult,
                         SchedulerConfig, candidate_set, isp_schedule,
                         prelog_factor, run_block_pipeline, sus_schedule,
                         update_equivalent_gain)
from .special import bessel_j0, complex_erf, faddeeva_w

__version__ = "0.1.0"
