"""Convex polytopes and ellipsoids with exact set operations.

Halfspace form ``{x : A x <= b}``, vertex form ``conv{v_i}`` and ellipsoids
``{x : (x-c)' S^-1 (x-c) <= r2}`` cover every set the reachability recursion
touches.  Conversions between the two polytope forms are qhull-backed
(scipy.spatial); a self-contained brute-force facet-subset enumeration
kernel serves as the fallback for inputs qhull rejects and as an
independent cross-check in the test suite.  Everything that needs an
optimum routes through the simplex solver in :mod:`reachset.lp`, so results
are deterministic.

All set objects are immutable after construction and safe to share across
threads; operations are pure functions of their inputs.
"""

from __future__ import annotations

import itertools

import numpy as np
from scipy.spatial import ConvexHull, HalfspaceIntersection, QhullError

from .lp import (
    INFEASIBLE,
    OPTIMAL,
    UNBOUNDED,
    LpProblem,
    feasible_combination,
    lp_solve,
)

EMPTY_TOL = 1e-10       # Chebyshev radius below this means empty (or flat)
CONTAIN_TOL = 1e-9      # membership / subset slack
VERTEX_FEAS_TOL = 1e-8  # feasibility slack when enumerating vertices
DEDUP_TOL = 1e-7        # vertices closer than this are merged
_MAX_ENUM_DIM = 6
_ENUM_CHUNK = 400_000


class GeometryError(Exception):
    """Base class for set-operation failures."""


class NotFullDimensional(GeometryError):
    """Raised when a V<->H conversion meets a flat (lower-dimensional) set."""


class UnboundedSet(GeometryError):
    """Raised when an operation requires a bounded polytope."""


def _as_matrix(A, name: str) -> np.ndarray:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if not np.isfinite(A).all():
        raise ValueError(f"{name} must be finite")
    return A


def _lexsort_rows(M: np.ndarray) -> np.ndarray:
    if M.shape[0] <= 1:
        return M
    order = np.lexsort(M.T[::-1])
    return M[order]


def _solve_batch(mats: np.ndarray, rhs: np.ndarray):
    """Solve a batch of small square systems by vectorized elimination.

    Returns (solutions, ok) where ok flags the nonsingular systems.  This is
    the hot kernel of vertex enumeration, so it avoids per-system LAPACK
    calls.
    """
    n, d = rhs.shape
    M = np.concatenate([mats, rhs[:, :, None]], axis=2).astype(float)
    scale = np.abs(mats).max(axis=(1, 2))
    scale[scale == 0.0] = 1.0
    ok = np.ones(n, dtype=bool)
    idx = np.arange(n)
    for k in range(d):
        piv = np.argmax(np.abs(M[:, k:, k]), axis=1) + k
        pivval = M[idx, piv, k]
        ok &= np.abs(pivval) > 1e-12 * scale
        swap = piv != k
        if swap.any():
            rows_k = M[idx[swap], k].copy()
            M[idx[swap], k] = M[idx[swap], piv[swap]]
            M[idx[swap], piv[swap]] = rows_k
        pivot = M[:, k, k].copy()
        pivot[~ok] = 1.0
        M[:, k, :] /= pivot[:, None]
        if k + 1 < d:
            factors = M[:, k + 1:, k].copy()
            M[:, k + 1:, :] -= factors[:, :, None] * M[:, None, k, :]
    x = np.zeros((n, d))
    for k in range(d - 1, -1, -1):
        x[:, k] = M[:, k, -1] - np.einsum("ij,ij->i", M[:, k, k + 1:d], x[:, k + 1:d])
    return x, ok


def _subset_table(m: int, k: int) -> np.ndarray:
    """All k-subsets of range(m), ascending within rows, as an int array."""
    if k == 0:
        return np.zeros((1, 0), dtype=np.intp)
    if k == 1:
        return np.arange(m, dtype=np.intp)[:, None]
    prev = _subset_table(m, k - 1)
    first = prev[:, 0]
    blocks = []
    for i in range(m - k + 1):
        tail = prev[first > i]
        if tail.shape[0]:
            lead = np.full((tail.shape[0], 1), i, dtype=np.intp)
            blocks.append(np.hstack([lead, tail]))
    return np.vstack(blocks) if blocks else np.zeros((0, k), dtype=np.intp)


def _combination_chunks(m: int, d: int, chunk: int):
    """Yield d-subsets of range(m) in lexicographic order as int arrays.

    Builds (d-1)-subsets once with numpy and streams by leading index, so
    no per-subset Python iteration happens even for tens of millions of
    combinations.  Falls back to itertools when the table would be huge.
    """
    import math
    if d == 0 or m < d:
        return
    table_size = math.comb(m, d - 1) if d >= 1 else 0
    if d > 1 and table_size <= 6_000_000:
        tails = _subset_table(m, d - 1)
        first = tails[:, 0] if d > 1 else None
        buffer: list[np.ndarray] = []
        buffered = 0
        for i in range(m - d + 1):
            tail = tails[first > i]
            if not tail.shape[0]:
                continue
            lead = np.full((tail.shape[0], 1), i, dtype=np.intp)
            buffer.append(np.hstack([lead, tail]))
            buffered += tail.shape[0]
            if buffered >= chunk:
                yield np.vstack(buffer)
                buffer, buffered = [], 0
        if buffer:
            yield np.vstack(buffer)
        return
    combos = itertools.combinations(range(m), d)
    while True:
        block = np.fromiter(
            itertools.chain.from_iterable(itertools.islice(combos, chunk)),
            dtype=np.intp,
        ).reshape(-1, d)
        if block.shape[0] == 0:
            return
        yield block


def _support_lp(A: np.ndarray, b: np.ndarray, a: np.ndarray):
    """sup{a.x : A x <= b} by constraint generation.

    Solves over a working subset of rows seeded with the halfspaces most
    aligned to the objective, adding violated (or, while the relaxation is
    unbounded, further aligned) rows until the subset optimum is feasible
    for every row.  Returns (value, x) with value +inf when genuinely
    unbounded and -inf when infeasible; x is None in both special cases.
    """
    m, dim = A.shape
    batch = max(48, 8 * (dim + 1))
    if m <= 2 * batch:
        res = lp_solve(LpProblem(a, A, b))
        if res.status == UNBOUNDED:
            return np.inf, None
        if res.status == INFEASIBLE:
            return -np.inf, None
        return res.value, res.x
    alignment = np.argsort(-(A @ a))
    work = np.unique(np.concatenate([
        alignment[:batch], np.linspace(0, m - 1, batch // 2).astype(int)]))
    grow = batch
    for _ in range(80):
        res = lp_solve(LpProblem(a, A[work], b[work]))
        if res.status == INFEASIBLE:
            return -np.inf, None  # a relaxation is infeasible, so is the set
        if res.status == UNBOUNDED:
            if work.size == m:
                return np.inf, None
            grown = np.union1d(work, alignment[:grow])
            grow = min(2 * grow, m)
            if grown.size == work.size:
                grown = np.arange(m)
            work = grown
            continue
        violation = A @ res.x - b
        if violation.max() <= CONTAIN_TOL:
            return res.value, res.x
        work = np.union1d(work, np.argsort(-violation)[:dim + 2])
    res = lp_solve(LpProblem(a, A, b))  # give up on generation, solve full
    if res.status == UNBOUNDED:
        return np.inf, None
    if res.status == INFEASIBLE:
        return -np.inf, None
    return res.value, res.x


def _merge_parallel_rows(H: "HPolytope", tol: float = 1e-8) -> "HPolytope":
    """Collapse rows whose unit normals agree within tol onto the tightest
    offset.  A convex set has at most one facet per outward normal, so this
    merges the simplicial duplicates qhull emits for one facet without
    touching genuinely distinct halfspaces."""
    if H.n_facets <= 1:
        return H
    A, b = H.A, H.b
    diff = np.abs(np.diff(A, axis=0)).max(axis=1)
    boundaries = np.nonzero(np.concatenate([[True], diff > tol]))[0]
    groups = np.split(np.arange(A.shape[0]), boundaries[1:])
    keep = [g[np.argmin(b[g])] for g in groups]
    return HPolytope(A[keep], b[keep], dim=H.dim)


def _dedup_points(points: np.ndarray, tol: float) -> np.ndarray:
    """Greedy merge of points closer than tol (keeps first occurrence).

    A coarse rounding pass first collapses exact pileups so the quadratic
    pass only sees a handful of survivors per true vertex.
    """
    if points.shape[0] <= 1:
        return points
    if points.shape[0] > 256:
        keys = np.round(points / (0.25 * tol))
        _, idx = np.unique(keys, axis=0, return_index=True)
        points = points[np.sort(idx)]
    n = points.shape[0]
    buf = np.empty_like(points)
    k = 0
    for p in points:
        if k == 0 or np.linalg.norm(buf[:k] - p, axis=1).min() > tol:
            buf[k] = p
            k += 1
    return buf[:k].copy()


class HPolytope:
    """Polytope in halfspace form {x : A x <= b}.

    Rows are unit-normalized and stored in lexicographic order on
    construction so equal sets built along different paths serialize
    identically.  A zero normal with a negative offset marks the set empty;
    zero normals with nonnegative offsets are vacuous and dropped.
    """

    __slots__ = ("dim", "A", "b", "_empty")

    def __init__(self, A, b, dim: int | None = None):
        A = np.asarray(A, dtype=float)
        b = np.asarray(b, dtype=float).ravel()
        if A.ndim == 1:
            A = np.atleast_2d(A) if A.size else A.reshape(0, -1)
        if A.ndim != 2:
            raise ValueError("A must be a matrix")
        if not np.isfinite(A).all():
            raise ValueError("A must be finite")
        if A.shape[0] == 0:
            if dim is None:
                raise ValueError("dimension required for a constraint-free polytope")
            A = A.reshape(0, dim)
        if not np.isfinite(b).all():
            raise ValueError("b must be finite")
        if A.shape[0] != b.shape[0]:
            raise ValueError("A and b row counts differ")
        self.dim = A.shape[1] if dim is None else int(dim)
        if A.shape[1] != self.dim:
            raise ValueError("A column count does not match dim")

        norms = np.linalg.norm(A, axis=1) if A.size else np.zeros(A.shape[0])
        zero = norms < 1e-14
        empty = bool(np.any(zero & (b < 0.0)))
        keep = ~zero
        A, b, norms = A[keep], b[keep], norms[keep]
        if A.shape[0]:
            A = A / norms[:, None]
            b = b / norms
            stacked = _lexsort_rows(np.column_stack([A, b]))
            # drop rows identical to their predecessor (same facet twice)
            if stacked.shape[0] > 1:
                diff = np.abs(np.diff(stacked, axis=0)).max(axis=1)
                keep = np.concatenate([[True], diff > 1e-12])
                stacked = stacked[keep]
            A, b = stacked[:, :-1], stacked[:, -1]
        if empty:
            A, b = np.zeros((0, self.dim)), np.zeros(0)
        self.A = A
        self.b = b
        self._empty = empty

    @classmethod
    def from_bounds(cls, lower, upper) -> "HPolytope":
        lower = np.asarray(lower, dtype=float).ravel()
        upper = np.asarray(upper, dtype=float).ravel()
        if lower.shape != upper.shape:
            raise ValueError("bound shapes differ")
        d = lower.size
        eye = np.eye(d)
        return cls(np.vstack([eye, -eye]), np.concatenate([upper, -lower]))

    @classmethod
    def empty(cls, dim: int) -> "HPolytope":
        p = cls(np.zeros((0, dim)), np.zeros(0), dim=dim)
        p._empty = True
        return p

    @property
    def n_facets(self) -> int:
        return self.A.shape[0]

    def __repr__(self):
        if self._empty:
            return f"HPolytope(empty, dim={self.dim})"
        return f"HPolytope({self.n_facets} halfspaces, dim={self.dim})"

    # -- queries ---------------------------------------------------------

    def contains(self, x, tol: float = CONTAIN_TOL) -> bool:
        if self._empty:
            return False
        x = np.asarray(x, dtype=float).ravel()
        return bool(np.all(self.A @ x <= self.b + tol))

    def contains_points(self, X, tol: float = CONTAIN_TOL) -> np.ndarray:
        """Vectorized membership for an (N, dim) array of points."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self._empty:
            return np.zeros(X.shape[0], dtype=bool)
        if self.n_facets == 0:
            return np.ones(X.shape[0], dtype=bool)
        return np.all(X @ self.A.T <= self.b + tol, axis=1)

    def support(self, a) -> float:
        """sup{a.x : x in self}; +inf if unbounded along a, -inf if empty."""
        a = np.asarray(a, dtype=float).ravel()
        if not np.any(a):
            raise ValueError("degenerate direction")
        if self._empty:
            return -np.inf
        return _support_lp(self.A, self.b, a)[0]

    def is_bounded(self) -> bool:
        """Exact boundedness test: the recession cone is trivial exactly
        when the facet normals positively span the space, i.e. the origin
        lies strictly inside their convex hull."""
        if self._empty:
            return True
        A = self.A
        if A.shape[0] <= self.dim:
            return False
        if self.dim == 1:
            return A.max() > 0.5 and A.min() < -0.5
        try:
            hull = ConvexHull(A)
        except QhullError:
            return False  # normals do not even span the space linearly
        return bool(np.all(hull.equations[:, -1] < -1e-10))

    def chebyshev_center(self, rows: np.ndarray | None = None):
        """Center and radius of the largest inscribed ball.

        Radius below zero certifies emptiness; +inf signals an unbounded
        polytope with interior.  Relies on unit-normalized rows.  Fat
        systems are solved by constraint generation: the LP runs on a
        working subset of rows and the most violated rows join until the
        subset's solution satisfies every row.
        """
        if self._empty:
            return np.full(self.dim, np.nan), -np.inf
        m = self.n_facets
        batch = max(48, 8 * (self.dim + 1))
        if rows is None and m > 2 * batch:
            work = np.unique(np.concatenate([
                np.linspace(0, m - 1, batch).astype(int),
                np.argmax(self.A, axis=0), np.argmin(self.A, axis=0)]))
            for _ in range(60):
                center, radius = self.chebyshev_center(rows=work)
                if not np.isfinite(radius) or radius < -CONTAIN_TOL:
                    break  # unbounded relaxation or certified empty
                slack = self.b - self.A @ center
                worst = slack - radius
                if worst.min() >= -CONTAIN_TOL:
                    return center, radius
                add = np.argsort(worst)[:self.dim + 2]
                grown = np.union1d(work, add)
                if grown.size == work.size:
                    break
                work = grown
        sub = slice(None) if rows is None else rows
        c = np.zeros(self.dim + 1)
        c[-1] = 1.0
        A = np.column_stack([self.A[sub], np.ones(np.size(self.b[sub]))])
        res = lp_solve(LpProblem(c, A, self.b[sub]))
        if res.status == UNBOUNDED:
            return np.full(self.dim, np.nan), np.inf
        if res.status == INFEASIBLE:  # cannot happen: r is free
            return np.full(self.dim, np.nan), -np.inf
        return res.x[:-1], float(res.x[-1])

    @property
    def is_empty(self) -> bool:
        if self._empty:
            return True
        if self.n_facets == 0:
            return False
        return self.chebyshev_center()[1] < EMPTY_TOL

    def subset_of(self, other: "HPolytope", tol: float = CONTAIN_TOL) -> bool:
        """self subseteq other, decided by one support LP per facet of other."""
        if other._empty:
            return self.is_empty
        if self._empty:
            return True
        for a, bi in zip(other.A, other.b):
            if self.support(a) > bi + tol:
                return False
        return True

    # -- constructive operations ----------------------------------------

    def reduce(self) -> "HPolytope":
        """Minimal halfspace representation (every remaining row is facial).

        Large bounded systems are pruned by vertex incidence: a row is a
        facet exactly when its active vertices span an affine (dim-1)-flat.
        Rows that test cannot certify, and every row of small or degenerate
        systems, get the exact LP redundancy test.
        """
        if self._empty or self.n_facets <= 1:
            return self
        if self.n_facets > 32 and 2 <= self.dim <= _MAX_ENUM_DIM:
            fast = self._reduce_by_incidence()
            if fast is not None:
                return fast
        return self._reduce_lp()

    def _reduce_by_incidence(self) -> "HPolytope | None":
        center, radius = self.chebyshev_center()
        if not np.isfinite(radius) or radius < EMPTY_TOL:
            return None
        try:
            hs = HalfspaceIntersection(np.column_stack([self.A, -self.b]),
                                       center)
            pts = hs.intersections
        except QhullError:
            return None
        pts = pts[np.isfinite(pts).all(axis=1)]
        pts = pts[np.all(pts @ self.A.T <= self.b + VERTEX_FEAS_TOL, axis=1)]
        V = _dedup_points(pts, DEDUP_TOL)
        if V.shape[0] < self.dim + 1:
            return None
        scale = max(1.0, np.abs(self.b).max())
        active = np.abs(self.A @ V.T - self.b[:, None]) <= 1e-7 * scale
        keep = np.zeros(self.n_facets, dtype=bool)
        suspects = []
        for i in range(self.n_facets):
            idx = np.nonzero(active[i])[0]
            if idx.size < self.dim:
                continue  # touches at most a low-dimensional face: redundant
            view = V[idx] - V[idx].mean(axis=0)
            sv = np.linalg.svd(view, compute_uv=False)
            if sv.size >= self.dim - 1 and sv[self.dim - 2] > 1e-7:
                keep[i] = True  # active set spans a facet
            else:
                suspects.append(i)
        for i in suspects:
            keep[i] = self._row_necessary(i, keep)
        return HPolytope(self.A[keep], self.b[keep], dim=self.dim)

    def _row_necessary(self, i: int, others: np.ndarray) -> bool:
        """Exact LP test: does dropping row i enlarge the set?"""
        rows = others.copy()
        rows[i] = False
        # keep row i with a relaxed offset so the LP stays bounded
        A_sub = np.vstack([self.A[rows], self.A[i:i + 1]])
        b_sub = np.concatenate([self.b[rows], [self.b[i] + 1.0]])
        value, _ = _support_lp(A_sub, b_sub, self.A[i])
        if value == -np.inf:
            return True  # empty feeds stay intact; callers test emptiness
        return value > self.b[i] + CONTAIN_TOL

    def _reduce_lp(self) -> "HPolytope":
        A, b = self.A, self.b
        keep = np.ones(A.shape[0], dtype=bool)
        for i in range(A.shape[0]):
            keep[i] = False
            rows = keep.copy()
            rows[i] = True  # keep row i with a relaxed offset to bound the LP
            b_relaxed = b[rows].copy()
            b_relaxed[np.searchsorted(np.nonzero(rows)[0], i)] += 1.0
            res = lp_solve(LpProblem(A[i], A[rows], b_relaxed))
            if res.status == INFEASIBLE:
                return HPolytope.empty(self.dim)
            if res.status == UNBOUNDED or res.value > b[i] + CONTAIN_TOL:
                keep[i] = True  # necessary
        return HPolytope(A[keep], b[keep], dim=self.dim)

    def intersect(self, other: "HPolytope") -> "HPolytope":
        if self.dim != other.dim:
            raise ValueError("dimension mismatch in intersection")
        if self._empty or other._empty:
            return HPolytope.empty(self.dim)
        return HPolytope(
            np.vstack([self.A, other.A]),
            np.concatenate([self.b, other.b]),
            dim=self.dim,
        ).reduce()

    def affine_preimage(self, M) -> "HPolytope":
        """{x : M x in self} for invertible M (exact, no enumeration)."""
        M = _as_matrix(M, "M")
        if M.shape != (self.dim, self.dim):
            raise ValueError("matrix shape does not match polytope dimension")
        if np.linalg.cond(M) > 1e12:
            raise GeometryError("system matrix singular")
        if self._empty:
            return HPolytope.empty(self.dim)
        return HPolytope(self.A @ M, self.b, dim=self.dim)

    def minkowski_diff(self, E) -> "HPolytope":
        """Pontryagin difference self minus E, exact via support functions."""
        if self._empty:
            return HPolytope.empty(self.dim)
        if E.dim != self.dim:
            raise ValueError("dimension mismatch in Minkowski difference")
        shift = np.array([E.support(a) for a in self.A])
        if np.any(~np.isfinite(shift)):
            raise GeometryError("Minkowski difference requires a bounded subtrahend")
        return HPolytope(self.A, self.b - shift, dim=self.dim).reduce()

    def slice(self, fixed: dict[int, float]) -> "HPolytope":
        """Cross-section with the coordinates in `fixed` pinned to values.

        Returns the polytope over the remaining coordinates, in their
        original order.  Fixing every coordinate yields a 0-dimensional
        carrier whose emptiness encodes the membership answer.
        """
        idx = sorted(fixed)
        if len(idx) != len(fixed) or any(i < 0 or i >= self.dim for i in idx):
            raise ValueError("fixed indices must be distinct and in range")
        free = [i for i in range(self.dim) if i not in fixed]
        if self._empty:
            return HPolytope.empty(len(free))
        vals = np.array([fixed[i] for i in idx], dtype=float)
        b_new = self.b - self.A[:, idx] @ vals
        return HPolytope(self.A[:, free], b_new, dim=len(free)).reduce()

    def _validate_for_enumeration(self):
        """Shared preconditions for vertex enumeration; returns the interior
        point, or None when the polytope is empty."""
        if self.dim > _MAX_ENUM_DIM:
            raise GeometryError("vertex enumeration limited to dimension <= 6")
        if self._empty:
            return None
        center, radius = self.chebyshev_center()
        if radius == np.inf:
            raise UnboundedSet("vertex enumeration requires bounded polytope")
        if radius < -CONTAIN_TOL:
            return None
        if radius < EMPTY_TOL:
            raise NotFullDimensional("not full-dimensional")
        if not self.is_bounded():
            raise UnboundedSet("vertex enumeration requires bounded polytope")
        return center

    def _enumerate_vertices(self) -> "VPolytope":
        """Brute-force vertex enumeration over facet subsets.

        Every feasible intersection of `dim` facets is a candidate; points
        feasible within 1e-8 are kept, merged at 1e-7, and pruned to the
        extreme set.  Exact but exponential in the facet count: used as the
        qhull fallback and as the reference oracle in tests.
        """
        m, d = self.n_facets, self.dim
        # a spread of rows used to reject most candidates before the full
        # feasibility check
        probe_rows = np.unique(np.linspace(0, m - 1, min(m, 24)).astype(int))
        A_probe, b_probe = self.A[probe_rows], self.b[probe_rows]
        points: list[np.ndarray] = []
        for chunk in _combination_chunks(m, d, _ENUM_CHUNK):
            sols, ok = _solve_batch(self.A[chunk], self.b[chunk])
            sols = sols[ok]
            if not sols.shape[0]:
                continue
            rough = np.all(sols @ A_probe.T <= b_probe + VERTEX_FEAS_TOL, axis=1)
            sols = sols[rough]
            if not sols.shape[0]:
                continue
            feas = np.all(sols @ self.A.T <= self.b + VERTEX_FEAS_TOL, axis=1)
            if feas.any():
                # collapse the per-vertex pileup early to bound memory
                sols = sols[feas]
                keys = np.round(sols / (0.25 * DEDUP_TOL))
                _, idx = np.unique(keys, axis=0, return_index=True)
                points.append(sols[np.sort(idx)])
        if not points:
            return VPolytope.empty(self.dim)
        cand = _dedup_points(np.vstack(points), DEDUP_TOL)
        return VPolytope(cand, dim=self.dim).reduce()

    def vertices(self) -> "VPolytope":
        """Exact extreme-point set of a bounded, full-dimensional polytope.

        Candidate points feasible within 1e-8 are merged at 1e-7.  The fast
        path intersects halfspaces through qhull around the Chebyshev
        center; inputs qhull rejects fall back to exhaustive facet-subset
        enumeration.
        """
        interior = self._validate_for_enumeration()
        if interior is None:
            return VPolytope.empty(self.dim)
        if self.dim == 1:
            lo, hi = -self.support([-1.0]), self.support([1.0])
            if hi - lo <= DEDUP_TOL:
                return VPolytope([[0.5 * (lo + hi)]])
            return VPolytope([[lo], [hi]])
        try:
            hs = HalfspaceIntersection(
                np.column_stack([self.A, -self.b]), interior)
            pts = hs.intersections
        except QhullError:
            return self._enumerate_vertices()
        pts = pts[np.isfinite(pts).all(axis=1)]
        pts = pts[np.all(pts @ self.A.T <= self.b + VERTEX_FEAS_TOL, axis=1)]
        if not pts.shape[0]:
            return self._enumerate_vertices()
        return VPolytope(_dedup_points(pts, DEDUP_TOL), dim=self.dim)


class VPolytope:
    """Polytope as the convex hull of stored points (rows of V)."""

    __slots__ = ("dim", "V")

    def __init__(self, V, dim: int | None = None):
        V = np.asarray(V, dtype=float)
        if V.size == 0:
            if dim is None:
                raise ValueError("dimension required for an empty vertex set")
            V = V.reshape(0, int(dim))
        V = np.atleast_2d(V)
        if not np.isfinite(V).all():
            raise ValueError("vertices must be finite")
        self.dim = V.shape[1] if dim is None else int(dim)
        if V.shape[1] != self.dim:
            raise ValueError("vertex width does not match dim")
        self.V = _lexsort_rows(V)

    @classmethod
    def empty(cls, dim: int) -> "VPolytope":
        return cls(np.zeros((0, dim)), dim=dim)

    @classmethod
    def point(cls, x) -> "VPolytope":
        return cls(np.atleast_2d(np.asarray(x, dtype=float)))

    @property
    def n_vertices(self) -> int:
        return self.V.shape[0]

    @property
    def is_empty(self) -> bool:
        return self.n_vertices == 0

    def __repr__(self):
        return f"VPolytope({self.n_vertices} vertices, dim={self.dim})"

    def support(self, a) -> float:
        a = np.asarray(a, dtype=float).ravel()
        if not np.any(a):
            raise ValueError("degenerate direction")
        if self.is_empty:
            return -np.inf
        return float(np.max(self.V @ a))

    def contains(self, x, tol: float = CONTAIN_TOL) -> bool:
        """Convex-combination membership, decided by a feasibility LP."""
        if self.is_empty:
            return False
        x = np.asarray(x, dtype=float).ravel()
        scale = max(1.0, np.abs(self.V).max())
        cols = np.vstack([self.V.T / scale, np.ones(self.n_vertices)])
        target = np.concatenate([x / scale, [1.0]])
        return feasible_combination(cols, target, tol) is not None

    def reduce(self) -> "VPolytope":
        """Keep exactly the extreme points of the hull.

        Full-dimensional point sets go through qhull; flat or tiny ones use
        convex-combination feasibility tests against all other points.
        """
        k = self.n_vertices
        if k <= 1:
            return self
        V = _dedup_points(self.V, DEDUP_TOL)
        k = V.shape[0]
        if k > self.dim + 1 and self.dim >= 2:
            sv = np.linalg.svd(V - V.mean(axis=0), compute_uv=False)
            if sv[-1] > 1e-9 * max(1.0, sv[0]):
                try:
                    hull = ConvexHull(V)
                    return VPolytope(V[np.sort(hull.vertices)], dim=self.dim)
                except QhullError:
                    pass
        return self._reduce_lp(V)

    def _reduce_lp(self, V: np.ndarray) -> "VPolytope":
        """LP-based extreme-point pruning; handles flat point sets.

        Points that uniquely maximize a probe direction are certified
        extreme without an LP; the rest get a convex-combination test
        against all other points.
        """
        k = V.shape[0]
        if k <= 1:
            return VPolytope(V, dim=self.dim)
        if k <= self.dim + 1:
            certain = np.zeros(k, dtype=bool)  # small sets: test everything
        else:
            rng = np.random.Generator(np.random.Philox(0x5E7D1CE))
            probes = rng.standard_normal((96, self.dim))
            probes = np.vstack([probes, np.eye(self.dim), -np.eye(self.dim)])
            scores = V @ probes.T
            top = scores.max(axis=0)
            margin = 1e-9 * max(1.0, np.abs(V).max())
            near = scores >= top - margin
            unique = near.sum(axis=0) == 1
            certain = np.any(near & unique, axis=1)
        keep = np.ones(k, dtype=bool)
        scale = max(1.0, np.abs(V).max())
        ones = np.ones(k)
        for i in range(k):
            if certain[i]:
                continue
            others = np.arange(k) != i
            cols = np.vstack([V[others].T / scale, ones[others]])
            target = np.concatenate([V[i] / scale, [1.0]])
            if feasible_combination(cols, target) is not None:
                keep[i] = False
        return VPolytope(V[keep], dim=self.dim)

    def minkowski_sum(self, other: "VPolytope") -> "VPolytope":
        if self.dim != other.dim:
            raise ValueError("dimension mismatch in Minkowski sum")
        if self.is_empty or other.is_empty:
            return VPolytope.empty(self.dim)
        sums = (self.V[:, None, :] + other.V[None, :, :]).reshape(-1, self.dim)
        return VPolytope(sums, dim=self.dim).reduce()

    def linear_image(self, M) -> "VPolytope":
        M = _as_matrix(M, "M")
        if self.is_empty:
            return VPolytope.empty(M.shape[0])
        return VPolytope(self.V @ M.T, dim=M.shape[0])

    def _check_full_dimensional(self, V: np.ndarray) -> None:
        sv = np.linalg.svd(V - V.mean(axis=0), compute_uv=False)
        if V.shape[0] < self.dim + 1 or sv.size < self.dim or (
                sv[-1] <= 1e-9 * max(1.0, sv[0])):
            raise NotFullDimensional("not full-dimensional")

    def facets(self) -> "HPolytope":
        """Minimal halfspace form of the hull.

        The fast path reads facet equations from qhull (simplicial rows of
        one facet collapse under row normalization and the final redundancy
        sweep).  Inputs qhull rejects fall back to polar duality: translate
        the vertex centroid to the origin, enumerate the polar dual's
        vertices with the H->V kernel, and map each dual vertex back to one
        primal facet.
        """
        if self.is_empty:
            return HPolytope.empty(self.dim)
        V = _dedup_points(self.V, DEDUP_TOL)
        self._check_full_dimensional(V)
        if self.dim == 1:
            return HPolytope([[1.0], [-1.0]],
                             [float(V.max()), float(-V.min())])
        try:
            hull = ConvexHull(V)
        except QhullError:
            return self._facets_polar(V)
        H = HPolytope(hull.equations[:, :-1], -hull.equations[:, -1],
                      dim=self.dim)
        return _merge_parallel_rows(H)

    def _facets_polar(self, V: np.ndarray) -> "HPolytope":
        V = self._reduce_lp(V).V  # keep the dual facet count minimal
        centroid = V.mean(axis=0)
        P = V - centroid
        dual = HPolytope(P, np.ones(P.shape[0]), dim=self.dim)
        Y = dual._enumerate_vertices().V
        return HPolytope(Y, 1.0 + Y @ centroid, dim=self.dim)


class Ellipsoid:
    """{x : (x - center)' shape^-1 (x - center) <= radius2}.

    radius2 == 0 denotes the singleton {center}.
    """

    __slots__ = ("dim", "center", "shape", "radius2", "_chol")

    def __init__(self, center, shape, radius2: float):
        center = np.asarray(center, dtype=float).ravel()
        shape = _as_matrix(shape, "shape")
        if shape.shape != (center.size, center.size):
            raise ValueError("shape matrix does not match center dimension")
        if np.abs(shape - shape.T).max() > 1e-10:
            raise ValueError("shape matrix must be symmetric within 1e-10")
        if not np.isfinite(center).all():
            raise ValueError("center must be finite")
        if radius2 < 0.0:
            raise ValueError("radius2 must be nonnegative")
        try:
            chol = np.linalg.cholesky(shape)
        except np.linalg.LinAlgError as exc:
            raise ValueError("shape matrix must be positive definite") from exc
        self.dim = center.size
        self.center = center
        self.shape = shape
        self.radius2 = float(radius2)
        self._chol = chol

    @classmethod
    def ball(cls, center, radius: float) -> "Ellipsoid":
        center = np.asarray(center, dtype=float).ravel()
        return cls(center, np.eye(center.size), radius ** 2)

    def __repr__(self):
        return f"Ellipsoid(dim={self.dim}, radius2={self.radius2:.6g})"

    def support(self, a) -> float:
        a = np.asarray(a, dtype=float).ravel()
        if not np.any(a):
            raise ValueError("degenerate direction")
        return float(a @ self.center
                     + np.sqrt(self.radius2) * np.linalg.norm(self._chol.T @ a))

    def contains(self, x, tol: float = CONTAIN_TOL) -> bool:
        x = np.asarray(x, dtype=float).ravel()
        z = np.linalg.solve(self._chol, x - self.center)
        return bool(z @ z <= self.radius2 + tol)

    def boundary_points(self, count: int) -> np.ndarray:
        """Evenly spread boundary samples (2-D only)."""
        if self.dim != 2:
            raise GeometryError("boundary sampling implemented for 2-D only")
        theta = np.linspace(0.0, 2.0 * np.pi, count, endpoint=False)
        circle = np.column_stack([np.cos(theta), np.sin(theta)])
        return self.center + np.sqrt(self.radius2) * circle @ self._chol.T
