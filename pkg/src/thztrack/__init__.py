"""Sensing-assisted THz beam tracking with real-time beamwidth adaptation.

The package simulates a base station that periodically senses a moving
target, predicts its path, and serves it with precoders whose main lobe is
shaped to cover the predicted sine-space interval. It includes the precoder
family, a penalised average-rate optimiser, codebook precomputation and
persistence, three tracking schemes, and a batch CLI.
"""

from .channel import (
    ArrayConfig,
    FarFieldWarning,
    LinkBudget,
    achievable_rate,
    array_response,
    channel_gain,
    dbm_to_watt,
    fraunhofer_distance,
    response_matrix,
    watt_to_dbm,
)
from .codebook import (
    Codebook,
    CodebookBuildError,
    CodebookCorruptError,
    CodebookEntry,
    CodebookError,
    CodebookFingerprintError,
    CodebookGrid,
    CodebookRangeError,
    CodebookVersionError,
    build_codebook,
    entry_precoder,
    load,
    lookup,
    lookup_indices,
    save,
    scenario_fingerprint,
)
from .config import (
    ConfigError,
    RunConfig,
    build_array,
    build_budget,
    build_event_params,
    build_grid,
    build_objective_template,
    build_pso,
    build_scenario,
    default_config,
    parse_config,
    parse_config_file,
    render_config,
    resolve_r_min,
)
from .geometry import (
    AngularInterval,
    BsGeometry,
    MotionModel,
    SensedState,
    TargetPose,
    UniformRectilinearMotion,
    path_to_interval,
    point_at_direction,
    pose_to_direction,
    predict_pose,
)
from .optimizer import (
    ObjectiveSpec,
    OptResult,
    PsoConfig,
    objective,
    optimize_omega,
    penalty,
    pso_bounds,
    violation_mass,
)
from .precoder import (
    Precoder,
    adaptive_precoder,
    beta_coeff,
    bf_gain_closed_form,
    bf_gain_direct,
    bf_gain_profile,
    g_coeff,
    mrt_precoder,
    sample_fn,
)
from .tracking import (
    SCHEME_CONVENTIONAL,
    SCHEME_EVENT,
    SCHEME_PROPOSED,
    EventBasedParams,
    Metrics,
    Scenario,
    SweepRow,
    TrackRecord,
    TrackingRunError,
    compute_metrics,
    mean_realignment_slots,
    run_conventional,
    run_event_based,
    run_sensing_assisted,
    run_sensing_assisted_direct,
    sweep,
)

__version__ = "0.1.0"
