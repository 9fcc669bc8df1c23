"""Simulator for a three-magnet actuation rig and a pivot-walking millirobot.

Subpackage map:
    magnetostatics  analytic fields of permanent magnets + superposition
    rig             the M1/M2/M3 assembly, control angles alpha/beta, cone fit
    robot           millirobot geometry, dipole moment, force/weight analyses
    gait            anchored-pivot walking kinematics
    scenario        time-domain runner, deployment FSM, characterization sweeps
    control         open-loop beta schedules and the waypoint follower
    teleop          interactive session service (WebSocket)
    cli             command-line entry point
"""

__version__ = "0.1.0"
