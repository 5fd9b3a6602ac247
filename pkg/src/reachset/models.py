"""Built-in benchmark problems: double integrator and CWH rendezvous."""

from __future__ import annotations

import numpy as np
from scipy.linalg import expm

from .geometry import HPolytope, VPolytope
from .probability import GaussianDisturbance
from .reach import LinearSystem, ReachProblem

MU_EARTH_KM3_S2 = 398600.4418
DEFAULT_ORBIT_RADIUS_KM = 6871.0
#: Mean motion of a circular low-Earth orbit at the default radius [rad/s].
DEFAULT_ORBITAL_RATE = float(np.sqrt(MU_EARTH_KM3_S2 / DEFAULT_ORBIT_RADIUS_KM ** 3))


def zero_order_hold(Ac: np.ndarray, Bc: np.ndarray, Ts: float):
    """Exact ZOH discretization via the augmented matrix exponential."""
    Ac = np.atleast_2d(np.asarray(Ac, dtype=float))
    Bc = np.atleast_2d(np.asarray(Bc, dtype=float))
    n, m = Ac.shape[0], Bc.shape[1]
    M = np.zeros((n + m, n + m))
    M[:n, :n] = Ac
    M[:n, n:] = Bc
    Md = expm(M * Ts)
    return Md[:n, :n], Md[:n, n:]


def double_integrator(sampling_time: float = 0.25,
                      variance: float = 0.005,
                      state_bound: float = 1.0,
                      input_bound: float = 1.0,
                      beta: float = 0.8,
                      horizon: int = 5) -> ReachProblem:
    """Planar double integrator with an additive Gaussian disturbance.

    Position/velocity dynamics sampled at `sampling_time`, safe and target
    sets both equal to the centered box of half-width `state_bound` (a
    viability-style setup), scalar input bounded by `input_bound`.
    """
    if sampling_time <= 0.0:
        raise ValueError("sampling time must be positive")
    T = float(sampling_time)
    A = np.array([[1.0, T], [0.0, 1.0]])
    B = np.array([[T * T / 2.0], [T]])
    disturbance = GaussianDisturbance(np.zeros(2), variance * np.eye(2))
    box = HPolytope.from_bounds([-state_bound, -state_bound],
                                [state_bound, state_bound])
    inputs = VPolytope([[-input_bound], [input_bound]])
    return ReachProblem(LinearSystem(A, B, disturbance), box, box, inputs,
                        beta, horizon)


def cwh_rendezvous(orbital_rate: float = DEFAULT_ORBITAL_RATE,
                   deputy_mass: float = 300.0,
                   sampling_time: float = 20.0,
                   beta: float = 0.8,
                   horizon: int = 5,
                   los_cap: float = 1.0) -> ReachProblem:
    """Spacecraft rendezvous-docking under Clohessy-Wiltshire-Hill dynamics.

    State z = [x, y, xdot, ydot] is the deputy position/velocity relative to
    the chief; inputs are planar thrust components.  The in-plane CWH
    equations

        xddot = 3 w^2 x + 2 w ydot + Fx / m
        yddot = -2 w xdot + Fy / m

    are discretized exactly by zero-order hold.  The line-of-sight cone
    |z1| <= z2 is capped at z2 <= `los_cap` to keep the safe set compact;
    the cap sits far outside what the dynamics can reach over the horizon.

    The orbital rate, deputy mass and sampling time default to
    representative values (low-Earth orbit at 6871 km, 300 kg, 20 s); they
    are engineering choices, not benchmark constants, and can be overridden.
    """
    if orbital_rate <= 0.0 or deputy_mass <= 0.0 or sampling_time <= 0.0:
        raise ValueError("orbital rate, deputy mass and sampling time must be positive")
    w = float(orbital_rate)
    Ac = np.array([
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [3.0 * w * w, 0.0, 0.0, 2.0 * w],
        [0.0, 0.0, -2.0 * w, 0.0],
    ])
    Bc = np.array([
        [0.0, 0.0],
        [0.0, 0.0],
        [1.0 / deputy_mass, 0.0],
        [0.0, 1.0 / deputy_mass],
    ])
    A, B = zero_order_hold(Ac, Bc, sampling_time)

    target = HPolytope.from_bounds([-0.1, -0.1, -0.01, -0.01],
                                   [0.1, 0.0, 0.01, 0.01])
    safe = HPolytope(
        np.array([
            [1.0, -1.0, 0.0, 0.0],   # z1 <= z2
            [-1.0, -1.0, 0.0, 0.0],  # -z1 <= z2
            [0.0, 1.0, 0.0, 0.0],    # z2 <= cap
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, -1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [0.0, 0.0, 0.0, -1.0],
        ]),
        np.array([0.0, 0.0, los_cap, 0.05, 0.05, 0.05, 0.05]),
    )
    inputs = VPolytope([[-0.1, -0.1], [-0.1, 0.1], [0.1, -0.1], [0.1, 0.1]])
    disturbance = GaussianDisturbance(
        np.zeros(4), 1e-4 * np.diag([1.0, 1.0, 0.0005, 0.0005]))
    return ReachProblem(LinearSystem(A, B, disturbance), safe, target, inputs,
                        beta, horizon)
