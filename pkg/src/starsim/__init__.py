"""Simulator and optimizers for a simultaneously transmitting and
reflecting surface serving a two-user MISO downlink."""

from .beamforming import (
    Infeasible,
    MulticastSolution,
    NonConvergence,
    UnicastSolution,
    multicast_min_power,
    single_user_min_power,
    unicast_min_power,
)
from .channel import (
    ChannelSet,
    FadingParams,
    Geometry,
    dbm_to_watts,
    generate_channel_set,
    path_loss_linear,
    watts_to_dbm,
)
from .model import (
    EffectiveChannels,
    Multicast,
    Protocol,
    Scenario,
    StarCoefficients,
    Unicast,
    coefficients_satisfy,
    effective_channel,
    multicast_snrs,
    rate_to_sinr,
    star_effective_channels,
    unicast_sinrs,
)
from .protocols import (
    GridSpec,
    RefusedSize,
    SolveResult,
    TsAllocation,
    exhaustive_oracle,
    oracle_enumeration_size,
    optimize_coefficients,
    optimize_ts,
    ts_time_allocation,
)
from .harness import (
    AggregateRecord,
    SweepConfig,
    TrialRecord,
    aggregate_trials,
    default_config,
    emit_plot_data,
    load_config,
    run_sweep,
    run_trial,
)
from .validation import validate

__version__ = "0.1.0"
