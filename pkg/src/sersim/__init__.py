"""Nonlinear lumped magnetic-circuit toolkit for saturable reluctance switches."""

from .circuit import (
    AirGap,
    Device,
    LeakagePath,
    MagnetElement,
    ShuntElement,
    circle_area,
    gap_reluctance,
    magnet_mmf,
    magnet_reluctance,
    pair_reluctance_off,
    pair_reluctance_on,
    reluctance_off,
    reluctance_on,
    residual,
    residual_slope,
    shunt_field,
)
from .design import (
    ConditionMargins,
    ConditionReport,
    ConditionStatus,
    McAlphaSummary,
    PrimaryCoreModel,
    ToleranceReport,
    ToleranceSpec,
    alpha_core,
    alpha_mismatch,
    approx_isat,
    check_conditions,
    fg_sat,
    kappa_off,
    monte_carlo_alpha,
    off_state_flux,
    on_state_flux,
    output_offset,
    predict_isat,
    total_reluctance,
)
from .devicefile import (
    ParsedDevice,
    example_device_path,
    parse_device,
    read_sweep_csv,
    serialize_device,
    write_sweep_csv,
)
from .errors import (
    BracketingError,
    ConsistencyError,
    ConvergenceError,
    DeviceFileError,
    GeometryError,
    KneeNotFoundError,
    MaterialError,
    SersError,
    SolverError,
    ValidationError,
)
from .materials import (
    DEFAULT_SAT_EPS,
    MU0,
    BhTable,
    MaterialModel,
    b_of_h,
    build_table_material,
    calibrate_saturating_material,
    h_sat,
    make_linear_material,
    make_saturating_material,
    mu_diff,
    mumetal_like,
    ns4750_like,
    v_permendur_like,
)
from .power import (
    PROTOTYPE_WIRE,
    RHO_COPPER_300K,
    CcwReference,
    WireSpec,
    ccw_equivalent,
    joule_power,
    single_layer_wire,
    solenoid_resistance,
    wire_length,
)
from .solver import (
    OperatingPoint,
    ShuntState,
    SolveOptions,
    Sweep,
    detect_knee,
    sensitivity,
    solve_operating_point,
    sweep,
)

__version__ = "0.1.0"
