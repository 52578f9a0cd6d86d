"""Energy budget and optimal schedule for a LiDAR mapping robot that offloads
its scans over a wireless link while driving the perimeter of a square."""

__version__ = "0.1.0"

from .channel import (
    ChannelModel,
    ChannelRealization,
    FramePayload,
    instantaneous_rate,
    link_mu,
    realize_channel,
    received_power,
    sample_channel,
    transmitted_bits,
)
from .energy import (
    EnergyBreakdown,
    MechanicalParams,
    derivative_numerator,
    mechanical_power,
    total_energy,
    total_energy_upper_bound,
    upper_bound_derivative,
)
from .geometry import (
    MissionConfig,
    SchedulePlan,
    distance_to_ap,
    make_plan,
    max_distance_in_window,
    period_count,
    robot_position,
)
from .planner import (
    FeasibilityReport,
    SweepTable,
    check_feasibility,
    min_upper_bound_energy,
    optimal_plan,
    optimal_speed,
    optimal_t_sens,
    sweep_area,
    sweep_speed,
    sweep_t_sens,
    upper_bound_link_terms,
)
from .power import (
    DutyRatioReport,
    PowerSolution,
    PowerSolverError,
    solve_period_power,
    solve_period_powers,
    upper_bound_power,
    verify_full_window_optimal,
    xi,
)
