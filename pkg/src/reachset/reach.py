"""Robust reach-avoid recursion and stochastic level-set underapproximation.

The t-step robust reach-avoid set collects the initial states from which
some control policy reaches the target at step t while staying inside the
safe set, for every disturbance drawn from a bounded set E.  It satisfies
the backward recursion

    RA_0 = target
    RA_k = safe  intersect  PreImage_A( (RA_{k-1} minus E) plus (-B U) )

where "minus" is the Pontryagin difference and "plus" the Minkowski sum.
Running the recursion with E equal to the ellipsoid carrying Gaussian mass
beta**(1/N) produces a guaranteed underapproximation of the set of states
whose maximal reach-avoid probability is at least beta.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import (
    CONTAIN_TOL,
    EMPTY_TOL,
    Ellipsoid,
    HPolytope,
    NotFullDimensional,
    VPolytope,
)
from .probability import GaussianDisturbance, disturbance_level_set


@dataclass(frozen=True)
class LinearSystem:
    """x_{k+1} = A x_k + B u_k + w_k with Gaussian w_k."""

    A: np.ndarray
    B: np.ndarray
    disturbance: GaussianDisturbance

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        B = np.atleast_2d(np.asarray(self.B, dtype=float))
        if A.shape[0] != A.shape[1]:
            raise ValueError("state matrix must be square")
        if B.shape[0] != A.shape[0]:
            raise ValueError("input matrix row count must match state dimension")
        if np.linalg.cond(A) > 1e12:
            raise ValueError("state matrix must be invertible")
        if self.disturbance.dim != A.shape[0]:
            raise ValueError("disturbance dimension must match state dimension")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]


def _check_bounded(S: HPolytope, name: str) -> None:
    if not S.is_bounded():
        raise ValueError(f"{name} must be bounded")


@dataclass(frozen=True)
class ReachProblem:
    """Problem bundle: system, safe/target sets, input set, beta, horizon."""

    system: LinearSystem
    safe_set: HPolytope
    target_set: HPolytope
    input_set: VPolytope
    beta: float
    horizon: int

    def __post_init__(self):
        n, m = self.system.n, self.system.m
        if self.safe_set.dim != n or self.target_set.dim != n:
            raise ValueError("safe and target sets must live in the state space")
        if self.input_set.dim != m:
            raise ValueError("input set dimension must match the input count")
        if self.safe_set.is_empty or self.target_set.is_empty:
            raise ValueError("safe and target sets must be nonempty")
        if self.input_set.is_empty:
            raise ValueError("input set must be nonempty")
        _check_bounded(self.safe_set, "safe set")
        _check_bounded(self.target_set, "target set")
        if not (0.0 <= self.beta <= 1.0):
            raise ValueError("beta must lie in [0, 1]")
        if self.horizon < 1 or int(self.horizon) != self.horizon:
            raise ValueError("horizon must be a positive integer")


@dataclass(frozen=True)
class StepInfo:
    index: int
    n_facets: int
    n_vertices: int | None
    empty: bool


@dataclass(frozen=True)
class ReachResult:
    """Reach-avoid tube RA_0 .. RA_t plus the disturbance set it was built for."""

    sets: tuple[HPolytope, ...]
    disturbance_set: Ellipsoid | VPolytope | None
    steps: tuple[StepInfo, ...]
    empty_step: int | None
    solve_seconds: float

    @property
    def final_set(self) -> HPolytope:
        return self.sets[-1]

    @property
    def horizon(self) -> int:
        return len(self.sets) - 1


def backward_reach(system: LinearSystem, input_set: VPolytope,
                   S: HPolytope) -> HPolytope:
    """One-step unperturbed backward reach set of S.

    States from which some admissible input maps into S:
    PreImage_A(S plus (-B U)), computed through the vertex representation.
    """
    if S.is_empty:
        return HPolytope.empty(S.dim)
    shifted = S.vertices().minkowski_sum(input_set.linear_image(-system.B))
    return shifted.facets().affine_preimage(system.A)


def _vertex_count(S: HPolytope) -> int | None:
    try:
        return S.vertices().n_vertices
    except NotFullDimensional:
        return None


def _radius(S: HPolytope) -> float:
    return S.chebyshev_center()[1] if not S._empty else -np.inf


def robust_reach_avoid(problem: ReachProblem, disturbance_set, t: int,
                       collect_vertex_counts: bool = True) -> ReachResult:
    """Run the backward recursion for t steps against a fixed bounded set.

    Flat intermediate sets are degenerate problem instances; they are
    reported with a warning and treated as empty, after which every later
    set is empty as well.
    """
    if t < 0 or t > problem.horizon:
        raise ValueError("recursion length must lie in [0, horizon]")
    start = time.perf_counter()
    safe, system = problem.safe_set, problem.system
    sets = [problem.target_set.reduce()]
    steps = [StepInfo(0, sets[0].n_facets,
                      _vertex_count(sets[0]) if collect_vertex_counts else None,
                      False)]
    empty_step = None

    for k in range(1, t + 1):
        shrunk = sets[k - 1].minkowski_diff(disturbance_set)
        current = None
        if _radius(shrunk) < EMPTY_TOL:
            if _radius(shrunk) >= -CONTAIN_TOL:
                warnings.warn(
                    f"flat intermediate set at step {k}; treating as empty",
                    RuntimeWarning, stacklevel=2)
            current = HPolytope.empty(system.n)
        else:
            current = safe.intersect(
                backward_reach(system, problem.input_set, shrunk))
            r = _radius(current)
            if r < EMPTY_TOL:
                if r >= -CONTAIN_TOL and not current._empty:
                    warnings.warn(
                        f"flat reach-avoid set at step {k}; treating as empty",
                        RuntimeWarning, stacklevel=2)
                current = HPolytope.empty(system.n)
        if current.is_empty and empty_step is None:
            empty_step = k
        sets.append(current)
        steps.append(StepInfo(
            k, current.n_facets,
            _vertex_count(current) if collect_vertex_counts and not current.is_empty
            else (0 if current.is_empty else None),
            current.is_empty))
        if current.is_empty:
            for j in range(k + 1, t + 1):
                sets.append(HPolytope.empty(system.n))
                steps.append(StepInfo(j, 0, 0, True))
            break

    return ReachResult(tuple(sets), disturbance_set, tuple(steps), empty_step,
                       time.perf_counter() - start)


def viability(problem: ReachProblem, t: int, **kwargs) -> ReachResult:
    """Finite-horizon viable sets: the recursion with target = safe set and
    the singleton zero disturbance."""
    modified = replace(problem, target_set=problem.safe_set)
    zero = VPolytope.point(np.zeros(problem.system.n))
    return robust_reach_avoid(modified, zero, t, **kwargs)


def underapproximate_level_set(problem: ReachProblem, **kwargs) -> ReachResult:
    """Underapproximate the horizon-N stochastic reach-avoid level set.

    Builds the disturbance ellipsoid of Gaussian mass beta**(1/N) and runs
    the robust recursion for N steps; the final set is guaranteed to lie
    inside the beta level set of the maximal reach-avoid probability.
    """
    beta, N = problem.beta, problem.horizon
    mass = beta ** (1.0 / N)
    E = disturbance_level_set(problem.system.disturbance, mass)
    return robust_reach_avoid(problem, E, N, **kwargs)
