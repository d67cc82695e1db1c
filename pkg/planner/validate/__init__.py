"""Independent post-hoc oracles: leg kinematics, torque replay, collision sweeps and audits"""

from planner.kinematics import PlanarLeg, leg_fk, leg_ik, leg_jacobian
from planner.validate.audit import feasibility_audit, foothold_audit
from planner.validate.collisions import collision_sweep
from planner.validate.torques import torque_replay

__all__ = [
    "PlanarLeg",
    "collision_sweep",
    "feasibility_audit",
    "foothold_audit",
    "leg_fk",
    "leg_ik",
    "leg_jacobian",
    "torque_replay",
]
