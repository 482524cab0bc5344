"""Robot-agnostic real-time control middleware with a simulated three-finger
robot and a grasp-force optimal-control stack."""

from .clocks import MonotonicClock, SimulatedClock
from .control import (
    ControlStepInfo,
    GraspController,
    ObjectState,
    TipGains,
    TrajectorySample,
    WrenchGains,
    circle_trajectory,
    com_wrench,
    impedance_torques,
    lift_trajectory,
)
from .envs import (
    ApproxEnv,
    AugmentedEnv,
    AugmentedState,
    ReachEnv,
    ReachTaskSpec,
    ReducedRateEnv,
    reach_policy,
)
from .errors import (
    ConfigError,
    EvictedIndexError,
    ShutdownError,
    TimeSeriesError,
    WaitTimeoutError,
)
from .grasp import (
    Contact,
    ContactSet,
    ForceDistributor,
    GraspQP,
    InfeasibleWrenchError,
    QPSolution,
    QPStatus,
    build_friction_pyramid,
    build_grasp_matrix,
    distribute_forces,
    solve_qp,
    unpack_forces,
)
from .hand import (
    CameraFrame,
    HandAction,
    HandObservation,
    NUM_FINGERS,
    NUM_JOINTS,
    effective_torque,
)
from .kinematics import (
    FingerGeometry,
    HandGeometry,
    IKResult,
    forward_kinematics,
    gravity_torque,
    inverse_kinematics,
    jacobian,
)
from .log_csv import LogRecord, read_log, write_log
from .object_sim import CubeParams, object_step, side_grasp_contacts
from .robot import (
    Backend,
    BackendConfig,
    Frontend,
    LateActionPolicy,
    Mode,
    RobotData,
    Status,
    StatusRecord,
)
from .safety import (
    SafetyConfig,
    apply_torque_safety,
    clip_torque,
    position_limit_pd,
    safety_chain,
    velocity_damping,
    watchdog_expired,
)
from .sim_driver import SimDriver, SimParams
from .timeseries import TimeSeries

__version__ = "0.1.0"
