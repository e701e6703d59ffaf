"""5G eMBB/URLLC slicing simulator for teleoperation.

A discrete-time model of physical-resource-block allocation between an
enhanced-mobile-broadband slice and an ultra-reliable-low-latency slice,
driven either by a proportional-fair baseline or by two actor-critic
agents trained against a Lagrangian drift-plus-penalty objective, coupled
to a delay-robust robot control loop whose dexterity index feeds back into
the URLLC service rate.
"""

from .config import (ConfigError, ControlConfig, DrlConfig, NetworkConfig,
                     QueueConfig, SimConfig, load_config)
from .channel import (ChannelState, PRBAllocation, RateVector, compute_rates,
                      sample_channel, validate_allocation)
from .queues import (ArrivalSample, ServiceSample, SliceQueues, arrival_pmf,
                     sample_urllc_arrivals, step_queues, urllc_departure)
from .robot import (DexterityIndex, ReferenceTrajectory, RobotState,
                    compute_di, make_reference, step_plant)
from .control import (AdjustedGain, GainCertificate, Infeasible,
                      SynthesisError, adjust_gain, razumikhin_feasible,
                      synthesize_gain)
from .objective import (DelaySample, LagrangianState, cost_h, delay_slack,
                        drift_plus_penalty, lagrangian_update, sample_delay)
from .baseline import PFState, pf_allocate
from .drl import Agent, ReplayBuffer, coordinate_allocations, train
from .sim import EpisodeTrace, SliceEnv, compare_policies, run_episode, run_sweep

__version__ = "0.1.0"
