"""Optimal human-robot collaboration trajectories between fixed boundary
states, tracked in joint space by a neuro-adaptive PID controller on a
simulated 2-link planar arm."""

from .config import ScenarioConfig, load_config, parse_config, serialize_config
from .manipulator import (CartesianState, JointState, ManipulatorParams,
                          forward_dynamics, forward_kinematics,
                          inverse_kinematics, jacobian)
from .interaction import (HumanParams, ImpedanceParams, MatrixSchedule,
                          UnifiedState, evaluate_schedule, unified_matrices)
from .riccati import (LQProblem, OptimalTrajectory, RiccatiSolution, cost,
                      optimal_control, rollout, solve_riccati_backward,
                      transcription_oracle)
from .tracking import (ControllerGains, RbfNetwork, adapt, commutative_error,
                       control_torque, gain, make_rbf_network, rbf_features)
from .simulation import (ReferenceTrajectory, SimulationReport,
                         cartesian_to_joint_reference, phase1_optimize,
                         phase2_track, rk4_step, run_scenario)
from .reporting import OutputBundle, emit_plot_script, render_figure, write_timeseries

__version__ = "0.1.0"
