"""Distributed phase sensing with multi-mode N00N states."""

__version__ = "0.1.0"

from .errors import (CapacityError, DimensionError, InfeasibleCountsError, InvalidSpecError,
                     NoonSenseError, NumericalError, SingularInformationError, SingularityError,
                     SpecError, UnsupportedProbeError)
from .fock import Arm, ModeRef, PureState, apply_beam_splitter, apply_phase, inner_product, ket, number_moments
from .probes import ProbeKind, ProbeSpec, four_mode_2002, multi_mode_noon, separable_noon
from .network import GlobalParameter, SensorNetwork, encode_phases, global_parameter
from .measurement import (FringeModel, FullCountingModel, LocalMeasurementModel, Outcome,
                          OutcomeDistribution, VisibilityModel, enumerate_outcomes,
                          fringe_probabilities, ideal_probabilities)
from .fisher import (FisherKind, FisherMatrix, SensitivityReport, bounds, cfim, qfim, qfim_analytic,
                     reference_lines, table1)
from .estimation import (CountRecord, EstimationRun, bootstrap_std, mle_estimate, mle_estimate_joint,
                         monte_carlo, sample_counts)
