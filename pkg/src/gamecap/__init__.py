"""Sum-capacity toolkit for interference channels built from non-local games.

Build a channel whose inputs carry (question, answer) pairs of a non-local
game, compute the sum capacity that cooperating transmitters achieve in
closed form, upper-bound what non-cooperating transmitters can do with a
multi-user capacity iteration, and simulate the winning-strategy coding
scheme.
"""

__version__ = "0.1.0"

from ._info import binary_entropy, entropy_bits
from ._kernels import BACKEND
from .capacity import (
    CapacityResult,
    GbaConfig,
    ProductDistribution,
    StartTrajectory,
    SweepRow,
    ba_point_to_point,
    cooperation_gap,
    eta_sweep,
    gba_sum_capacity,
    mutual_information,
    write_sweep_csv,
)
from .channels import (
    MODE_GLOBAL,
    MODE_PER_RECEIVER,
    Channel,
    ChannelParams,
    GameChannelReport,
    GameChannelValidationError,
    build_game_channel,
    closed_form_sum_capacity,
    conditional_output_entropy,
    is_weakly_symmetric,
    single_user_channel,
    validate_game_channel,
    weakly_symmetric_capacity,
    winning_input_mask,
)
from .correlations import (
    CorrelationTable,
    DeterministicStrategy,
    NoSignalingReport,
    SharedRandomnessStrategy,
    classical_max_win,
    is_no_signaling,
    make_pr_box,
    random_shared_randomness,
    table_from_deterministic,
    table_from_shared_randomness,
    winning_probability,
)
from .games import (
    BUILTIN_GAMES,
    Game,
    game_from_spec,
    game_to_spec,
    is_winning,
    make_chsh,
    make_magic_square,
    make_parity,
)
from .quantum import (
    DensityMatrix,
    MeasurementSet,
    QuantumStrategy,
    born_table,
    make_ghz_parity,
    make_mermin_peres,
    make_tsirelson_chsh,
    pure_state_density,
    validate_measurement,
)
from .simulate import (
    Codebook,
    DecompositionReport,
    EndToEndReport,
    SimConfig,
    channel_sample,
    cooperative_transmit,
    empirical_decomposition_test,
    end_to_end,
    make_rng,
    mixture_dominance_test,
    random_codebook,
    repetition_codebook,
    truncated_box_table,
    winning_fraction,
)

__all__ = [
    "__version__",
    "BACKEND",
    "MODE_GLOBAL",
    "MODE_PER_RECEIVER",
    "binary_entropy",
    "entropy_bits",
    # games
    "BUILTIN_GAMES",
    "Game",
    "game_from_spec",
    "game_to_spec",
    "is_winning",
    "make_chsh",
    "make_magic_square",
    "make_parity",
    # correlations
    "CorrelationTable",
    "DeterministicStrategy",
    "NoSignalingReport",
    "SharedRandomnessStrategy",
    "classical_max_win",
    "is_no_signaling",
    "make_pr_box",
    "random_shared_randomness",
    "table_from_deterministic",
    "table_from_shared_randomness",
    "winning_probability",
    # quantum
    "DensityMatrix",
    "MeasurementSet",
    "QuantumStrategy",
    "born_table",
    "make_ghz_parity",
    "make_mermin_peres",
    "make_tsirelson_chsh",
    "pure_state_density",
    "validate_measurement",
    # channels
    "Channel",
    "ChannelParams",
    "GameChannelReport",
    "GameChannelValidationError",
    "build_game_channel",
    "closed_form_sum_capacity",
    "conditional_output_entropy",
    "is_weakly_symmetric",
    "single_user_channel",
    "validate_game_channel",
    "weakly_symmetric_capacity",
    "winning_input_mask",
    # capacity
    "CapacityResult",
    "GbaConfig",
    "ProductDistribution",
    "StartTrajectory",
    "SweepRow",
    "ba_point_to_point",
    "cooperation_gap",
    "eta_sweep",
    "gba_sum_capacity",
    "mutual_information",
    "write_sweep_csv",
    # simulate
    "Codebook",
    "DecompositionReport",
    "EndToEndReport",
    "SimConfig",
    "channel_sample",
    "cooperative_transmit",
    "empirical_decomposition_test",
    "end_to_end",
    "make_rng",
    "mixture_dominance_test",
    "random_codebook",
    "repetition_codebook",
    "truncated_box_table",
    "winning_fraction",
]
