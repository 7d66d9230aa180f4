"""pmesim: photon-mediated entanglement of trapped ions with integrated photonics.

An exact few-photon density-operator engine plus the surrounding physics:
protocol drivers with herald tables and fidelity budgets, five-wire
surface-trap geometry and pseudopotential strength, dipole collection
through the trap aperture, and analytic grating-coupler design helpers.
"""

from .fock import (
    DOWN,
    UP,
    BasisKet,
    BeamsplitterSpec,
    Channel,
    DetectionOutcome,
    DetectorSpec,
    JointState,
    Match,
    ModeLabel,
    PSI_MINUS,
    PSI_PLUS,
    apply_beamsplitter,
    apply_crosstalk,
    apply_loss,
    apply_phase,
    bell_fidelity,
    detect,
    make_state,
)
from .protocols import (
    HeraldEntry,
    HeraldTable,
    KINDS,
    NodeParams,
    ProtocolConfig,
    analytic_herald_prob,
    balance_excitation,
    default_config,
    phase_jitter_fidelity,
    prepare_node_state,
    rate_ratio_number_vs_two_photon,
    run_protocol,
    splitter_imbalance_infidelity,
)
from .trap import (
    ApertureSpec,
    TradeoffTable,
    TrapGeometry,
    exposure_strength_tradeoff,
    ion_height,
    optimal_gap,
    radial_frequency,
    rf_gap_for_height,
    rf_null_height,
    rf_width_for_gap,
    solid_angle_fraction,
    solid_angle_monte_carlo,
    strip_field,
    strip_potential,
)
from .emission import (
    CollectionChannel,
    DipoleTransition,
    channel_balance,
    collected_fraction,
    crosstalk_infidelity,
    dipole_intensity,
    temporal_overlap,
)
from .grating import (
    GratingSpec,
    PitchViolation,
    Tooth,
    adiabatic_length_scale,
    fabrication_lint,
    pitch_for_angle,
    tooth_positions,
    write_tooth_csv,
)
from .presets import DETECTOR_EFFICIENCY, SPECIES, SPECIES_TABLE_VERSION, species

__version__ = "0.1.0"
