"""Monte Carlo geometry of random cones.

Two exact routes decide the same predicates:

* :func:`covers_space`, :func:`separable` and :func:`is_face` pose small
  linear feasibility problems over the dyadic rationals read from the float
  bits of the sample and solve them with :mod:`randcone.feasibility`.
* :func:`facet_table` (and everything built on it: :func:`count_k_faces`,
  the estimators) enumerates candidate facets.  For points in general
  position with ``N >= d``, ``pos{x_i} != R^d`` iff some ``d - 1`` of the
  points span a hyperplane with all other points strictly on one side, and
  the k-faces are exactly the k-subsets of such facets.  Orientation signs are
  computed in float with a rigorous error bound; any sign the bound cannot
  certify is recomputed in exact rational arithmetic.

The first route is the reference; the second is what makes 10^5-trial runs
affordable.  Estimators audit a fixed fraction of trials against the first.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, permutations
from typing import Iterable, Sequence

import numpy as np

from randcone.bigcomb import ConeIndex, Model, binomial
from randcone.feasibility import solve_linear_feasibility

log = logging.getLogger(__name__)

SUBSET_CAP = 10**6
DISTRIBUTIONS = ("standard-gaussian",)
_UNIT_ROUNDOFF = 2.0**-53
_MAX_LEIBNIZ = 5
_CHUNK_ELEMENTS = 2_000_000


class DegenerateGeometryError(ArithmeticError):
    """A probability-zero configuration (points not in general position)."""


class SubsetCapExceeded(RuntimeError):
    """Subset enumeration would exceed :data:`SUBSET_CAP`."""


class LowAcceptanceError(RuntimeError):
    """CE rejection sampling accepted too few draws."""

    def __init__(self, message: str, estimate: "Estimate"):
        super().__init__(message)
        self.estimate = estimate


class GeometryAuditError(AssertionError):
    """The fast facet route disagreed with the linear-programming route."""


@dataclass(frozen=True, eq=False)
class VectorSample:
    """``N`` generators in ``R^d`` stored row-wise."""

    points: np.ndarray
    seed: int | None = None
    trial: int | None = None
    distribution: str = "standard-gaussian"

    def __post_init__(self) -> None:
        pts = np.array(self.points, dtype=np.float64)
        if pts.ndim != 2:
            raise ValueError(f"points must be an N x d array, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points must be finite")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def N(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def exact(self) -> list[list[Fraction]]:
        """Coordinates as exact dyadic rationals."""
        return [[Fraction(float(v)) for v in row] for row in self.points]


@dataclass(frozen=True)
class SimulationConfig:
    d: int
    N: int
    trials: int
    seed: int = 0
    k: int | None = None
    distribution: str = "standard-gaussian"
    threads: int = 1
    audit_fraction: float = 0.01
    min_acceptance: float = 0.01

    def __post_init__(self) -> None:
        if self.d < 1 or self.N < 1:
            raise ValueError(f"require d >= 1 and N >= 1, got d={self.d}, N={self.N}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.distribution not in DISTRIBUTIONS:
            raise ValueError(f"unsupported distribution {self.distribution!r}")
        if self.k is not None:
            ConeIndex(self.d, self.N, self.k)
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        if not 0.0 <= self.audit_fraction <= 1.0:
            raise ValueError("audit_fraction must lie in [0, 1]")

    @property
    def index(self) -> ConeIndex:
        if self.k is None:
            raise ValueError("face estimates need k")
        return ConeIndex(self.d, self.N, self.k)


@dataclass(frozen=True)
class Estimate:
    mean: float
    stderr: float
    trials: int
    rejected: int = 0
    degenerate: int = 0
    seed: int | None = None

    def zscore(self, exact: float) -> float:
        if self.stderr == 0.0:
            return 0.0 if self.mean == exact else math.copysign(math.inf, self.mean - exact)
        return (self.mean - exact) / self.stderr


@dataclass
class TrialBatch:
    """Per-trial outcomes of the fast route for trials ``start .. start+len-1``."""

    start: int
    covers: np.ndarray
    degenerate: np.ndarray
    counts: np.ndarray | None = None
    audited: int = 0
    meta: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# sampling

def sample_points(d: int, N: int, seed: int, trial: int | None = None) -> VectorSample:
    """N i.i.d. standard Gaussian vectors in R^d.

    With ``trial`` given the stream is keyed on ``(seed, trial)``, which is
    how the estimators draw, so any single trial can be replayed.
    """
    if d < 1 or N < 1:
        raise ValueError(f"require d >= 1 and N >= 1, got d={d}, N={N}")
    key = seed if trial is None else [seed, trial]
    rng = np.random.default_rng(key)
    return VectorSample(rng.standard_normal((N, d)), seed=seed, trial=trial)


def _draw_batch(d: int, N: int, seed: int, start: int, stop: int) -> np.ndarray:
    out = np.empty((stop - start, N, d))
    for b, t in enumerate(range(start, stop)):
        out[b] = np.random.default_rng([seed, t]).standard_normal((N, d))
    return out


# ---------------------------------------------------------------------------
# exact linear algebra helpers

def _exact_rank(rows: Sequence[Sequence[Fraction]]) -> int:
    mat = [list(r) for r in rows]
    if not mat:
        return 0
    rank, n_cols = 0, len(mat[0])
    for c in range(n_cols):
        pivot = next((r for r in range(rank, len(mat)) if mat[r][c] != 0), None)
        if pivot is None:
            continue
        mat[rank], mat[pivot] = mat[pivot], mat[rank]
        for r in range(rank + 1, len(mat)):
            if mat[r][c]:
                f = mat[r][c] / mat[rank][c]
                mat[r] = [a - f * b for a, b in zip(mat[r], mat[rank])]
        rank += 1
    return rank


def _exact_det(rows: Sequence[Sequence[Fraction]]) -> Fraction:
    mat = [list(r) for r in rows]
    n = len(mat)
    det = Fraction(1)
    for c in range(n):
        pivot = next((r for r in range(c, n) if mat[r][c] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != c:
            mat[c], mat[pivot] = mat[pivot], mat[c]
            det = -det
        det *= mat[c][c]
        for r in range(c + 1, n):
            if mat[r][c]:
                f = mat[r][c] / mat[c][c]
                mat[r] = [a - f * b for a, b in zip(mat[r], mat[c])]
    return det


# ---------------------------------------------------------------------------
# LP route

def covers_space(sample: VectorSample) -> bool:
    """True iff the origin lies in the convex hull of the points.

    Decided exactly; raises :class:`DegenerateGeometryError` when the
    points fail to span ``R^d`` or the origin sits on the hull boundary.
    """
    d, N = sample.d, sample.N
    if N < d:
        raise ValueError(f"covers_space needs N >= d, got N={N}, d={d}")
    pts = sample.exact()
    if _exact_rank(pts) < d:
        raise DegenerateGeometryError("points do not span R^d")
    rows = [[pts[i][r] for i in range(N)] for r in range(d)] + [[1] * N]
    in_hull = solve_linear_feasibility(rows, ["="] * (d + 1), [0] * d + [1], nonneg=True)
    if not in_hull:
        return False
    # o in conv; it is on the boundary iff some nonzero functional is >= 0 on all points.
    weak_rows = [list(p) for p in pts] + [[sum(p[j] for p in pts) for j in range(d)]]
    weak = solve_linear_feasibility(weak_rows, [">="] * N + ["="], [0] * N + [1])
    if weak:
        raise DegenerateGeometryError("origin lies on the boundary of the convex hull")
    return True


def separable(sample: VectorSample) -> bool:
    """True iff some functional u has <u, x_i> >= 1 for every point (dual of covering)."""
    pts = sample.exact()
    return bool(solve_linear_feasibility(pts, [">="] * sample.N, [1] * sample.N,
                                         n_vars=sample.d))


def is_face(sample: VectorSample, subset: Iterable[int]) -> bool:
    """True iff pos{x_j : j in subset} is a face of pos{x_1..x_N}.

    Decided by exact feasibility of ``<u, x_j> = 0`` on the subset and
    ``<u, x_i> <= -1`` off it.
    """
    subset = sorted(set(subset))
    d, N = sample.d, sample.N
    if not subset or any(not 0 <= j < N for j in subset):
        raise ValueError(f"subset {subset} is not a non-empty subset of range({N})")
    if len(subset) >= d:
        raise ValueError(f"face subsets need size < d, got {len(subset)}")
    pts = sample.exact()
    if _exact_rank([pts[j] for j in subset]) < len(subset):
        raise DegenerateGeometryError(f"generators {subset} are linearly dependent")
    inside = set(subset)
    relations = ["=" if i in inside else "<=" for i in range(N)]
    rhs = [0 if i in inside else -1 for i in range(N)]
    return bool(solve_linear_feasibility(pts, relations, rhs, n_vars=d))


def count_k_faces_bruteforce(sample: VectorSample, k: int) -> int:
    """Reference count: run :func:`is_face` on every k-subset."""
    if covers_space(sample):
        return 0
    return sum(is_face(sample, s) for s in combinations(range(sample.N), k))


# ---------------------------------------------------------------------------
# fast facet route

@lru_cache(maxsize=64)
def _subsets(n: int, r: int) -> np.ndarray:
    return np.array(list(combinations(range(n), r)), dtype=np.intp).reshape(math.comb(n, r), r)


@lru_cache(maxsize=16)
def _perm_table(m: int) -> tuple[np.ndarray, np.ndarray]:
    perms = list(permutations(range(m)))
    signs = []
    for p in perms:
        inv = sum(1 for i in range(m) for j in range(i + 1, m) if p[i] > p[j])
        signs.append(-1.0 if inv % 2 else 1.0)
    return np.array(perms, dtype=np.intp).reshape(-1, m), np.array(signs)


def _leibniz(mats: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Determinants of ``(..., m, m)`` matrices and the sum of |terms| (for error bounds)."""
    m = mats.shape[-1]
    if m == 0:
        shape = mats.shape[:-2]
        return np.ones(shape), np.ones(shape)
    perms, signs = _perm_table(m)
    det = np.zeros(mats.shape[:-2])
    mag = np.zeros(mats.shape[:-2])
    rows = np.arange(m)
    for p, s in zip(perms, signs):
        term = mats[..., 0, p[0]].copy()
        for i in rows[1:]:
            term *= mats[..., i, p[i]]
        det += s * term
        mag += np.abs(term)
    return det, mag


def _check_cap(N: int, r: int, what: str) -> None:
    if binomial(N, r) > SUBSET_CAP:
        raise SubsetCapExceeded(f"C({N},{r}) = {binomial(N, r)} {what} exceeds the cap {SUBSET_CAP}")


def facet_table(points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Facet flags for a batch of samples.

    ``points`` has shape ``(B, N, d)`` with ``N >= d``.  Returns
    ``(facets, degenerate)`` where ``facets[b, t]`` says whether the t-th
    ``(d-1)``-subset (lexicographic order) spans a facet of sample b, and
    ``degenerate[b]`` flags samples with ``d`` linearly dependent points.
    """
    B, N, d = points.shape
    if N < d:
        raise ValueError(f"facet_table needs N >= d, got N={N}, d={d}")
    _check_cap(N, d - 1, "facet candidates")
    T = _subsets(N, d - 1)
    nT = len(T)
    gathered = points[:, T, :]                        # (B, nT, d-1, d)
    normal = np.empty((B, nT, d))
    normal_err = np.empty((B, nT, d))
    m = d - 1
    if m <= _MAX_LEIBNIZ:
        gamma_minor = (max(m - 1, 0) + math.factorial(m) + 2) * _UNIT_ROUNDOFF
        cols = np.arange(d)
        for j in range(d):
            minor = gathered[..., cols != j]
            det, mag = _leibniz(minor)
            sign = 1.0 if (d - 1 + j) % 2 == 0 else -1.0
            normal[..., j] = sign * det
            normal_err[..., j] = gamma_minor * mag
    else:
        normal[:] = np.nan
        normal_err[:] = np.inf

    s = np.einsum("btj,bij->bti", normal, points)   # (B, nT, N)
    gamma_dot = (d + 2) * _UNIT_ROUNDOFF
    bound = np.einsum("btj,bij->bti", normal_err + gamma_dot * np.abs(normal), np.abs(points))
    bound *= 2.0
    member = np.zeros((nT, N), dtype=bool)
    member[np.arange(nT)[:, None], T] = True

    with np.errstate(invalid="ignore"):
        sign = np.where(s > bound, 1, np.where(s < -bound, -1, 0)).astype(np.int8)
    sign[:, member] = 0
    uncertain = (sign == 0) & ~member[None, :, :]
    degenerate = np.zeros(B, dtype=bool)
    if uncertain.any():
        exact_cache: dict[int, list[list[Fraction]]] = {}
        for b, t, i in zip(*np.nonzero(uncertain)):
            pts = exact_cache.get(b)
            if pts is None:
                pts = exact_cache[b] = [[Fraction(float(v)) for v in row] for row in points[b]]
            det = _exact_det([pts[r] for r in T[t]] + [pts[i]])
            if det == 0:
                degenerate[b] = True
            sign[b, t, i] = 1 if det > 0 else -1
    pos = ((sign > 0) | member[None]).all(axis=2)
    neg = ((sign < 0) | member[None]).all(axis=2)
    facets = (pos | neg) & ~degenerate[:, None]
    return facets, degenerate


def _face_counts_from_facets(facets: np.ndarray, N: int, d: int, k: int) -> np.ndarray:
    if k == d - 1:
        return facets.sum(axis=1)
    T = _subsets(N, d - 1)
    K = _subsets(N, k)
    if len(T) * len(K) <= 4_000_000:
        index = {tuple(s): i for i, s in enumerate(K)}
        inc = np.zeros((len(T), len(K)), dtype=np.int32)
        for t, tset in enumerate(T):
            for s in combinations(tset, k):
                inc[t, index[s]] = 1
        return ((facets.astype(np.int32) @ inc) > 0).sum(axis=1)
    counts = np.zeros(len(facets), dtype=np.int64)
    for b, row in enumerate(facets):
        faces = set()
        for t in np.nonzero(row)[0]:
            faces.update(combinations(T[t], k))
        counts[b] = len(faces)
    return counts


def fast_covers(sample: VectorSample) -> bool:
    """Facet-route answer to :func:`covers_space` for one sample."""
    if sample.N < sample.d:
        raise ValueError(f"needs N >= d, got N={sample.N}, d={sample.d}")
    facets, degenerate = facet_table(sample.points[None])
    if degenerate[0]:
        raise DegenerateGeometryError("points are not in general position")
    return not facets[0].any()


def count_k_faces(sample: VectorSample, k: int) -> int:
    """Number of k-faces of pos{x_1..x_N}; 0 when the cone is all of R^d."""
    d, N = sample.d, sample.N
    if not 1 <= k < d:
        raise ValueError(f"require 1 <= k < d, got k={k}, d={d}")
    _check_cap(N, k, "k-subsets")
    if N < d:
        if _exact_rank(sample.exact()) < N:
            raise DegenerateGeometryError("points are linearly dependent")
        return binomial(N, k)
    facets, degenerate = facet_table(sample.points[None])
    if degenerate[0]:
        raise DegenerateGeometryError("points are not in general position")
    return int(_face_counts_from_facets(facets, N, d, k)[0])


# ---------------------------------------------------------------------------
# estimators

def _chunk_size(N: int, d: int) -> int:
    per_trial = max(1, binomial(N, d - 1) * N * 4)
    return int(min(4096, max(1, _CHUNK_ELEMENTS // per_trial)))


def _is_audited(trial: int, fraction: float) -> bool:
    if fraction <= 0.0:
        return False
    period = max(1, round(1.0 / fraction))
    return trial % period == 0


def run_trials(cfg: SimulationConfig, start: int, stop: int, k: int | None = None) -> TrialBatch:
    """Fast-route outcomes for trials ``start..stop-1`` of ``cfg``."""
    d, N = cfg.d, cfg.N
    n = stop - start
    if N < d:
        covers = np.zeros(n, dtype=bool)
        counts = None if k is None else np.full(n, binomial(N, k), dtype=np.int64)
        return TrialBatch(start, covers, np.zeros(n, dtype=bool), counts)
    pts = _draw_batch(d, N, cfg.seed, start, stop)
    facets, degenerate = facet_table(pts)
    covers = ~facets.any(axis=1)
    counts = None
    if k is not None:
        counts = _face_counts_from_facets(facets, N, d, k).astype(np.int64)
        counts[degenerate] = 0
    audited = 0
    for b, t in enumerate(range(start, stop)):
        if degenerate[b] or not _is_audited(t, cfg.audit_fraction):
            continue
        sample = VectorSample(pts[b], seed=cfg.seed, trial=t)
        lp_covers = covers_space(sample)
        if lp_covers == separable(sample):
            raise GeometryAuditError(f"covering and separation agree at trial {t}: duality broken")
        if lp_covers != bool(covers[b]):
            raise GeometryAuditError(f"facet route disagrees with LP route at trial {t}")
        audited += 1
    return TrialBatch(start, covers, degenerate, counts, audited)


def _run_range(cfg: SimulationConfig, start: int, stop: int, k: int | None) -> list[TrialBatch]:
    size = _chunk_size(cfg.N, cfg.d)
    bounds = [(a, min(a + size, stop)) for a in range(start, stop, size)]
    if cfg.threads == 1 or len(bounds) == 1:
        return [run_trials(cfg, a, b, k) for a, b in bounds]
    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        return list(pool.map(lambda ab: run_trials(cfg, ab[0], ab[1], k), bounds))


def _summarise(values: np.ndarray, seed: int, rejected: int = 0, degenerate: int = 0) -> Estimate:
    n = int(values.size)
    if n == 0:
        return Estimate(math.nan, math.nan, 0, rejected, degenerate, seed)
    total = int(values.sum(dtype=np.int64))
    total_sq = int((values.astype(np.int64) ** 2).sum())
    mean = Fraction(total, n)
    if n > 1:
        var = (Fraction(total_sq) - n * mean * mean) / (n - 1)
        stderr = math.sqrt(var / n)
    else:
        stderr = 0.0
    return Estimate(float(mean), stderr, n, rejected, degenerate, seed)


def estimate_wendel(cfg: SimulationConfig) -> Estimate:
    """Fraction of trials whose positive hull is not all of R^d; targets P(d, N)."""
    batches = _run_range(cfg, 0, cfg.trials, None)
    covers = np.concatenate([b.covers for b in batches])
    degenerate = np.concatenate([b.degenerate for b in batches])
    pointed = (~covers[~degenerate]).astype(np.int64)
    return _summarise(pointed, cfg.seed, degenerate=int(degenerate.sum()))


def simulate_face_counts(cfg: SimulationConfig, model: Model) -> tuple[np.ndarray, int, int]:
    """Per-trial k-face counts used by :func:`estimate_faces`.

    Returns ``(counts, rejected, degenerate)``.  For ``"ce"`` the counts are
    those of the first ``cfg.trials`` non-covering draws.
    """
    k = cfg.index.k
    if model == "dt":
        batches = _run_range(cfg, 0, cfg.trials, k)
        counts = np.concatenate([b.counts for b in batches])
        degenerate = np.concatenate([b.degenerate for b in batches])
        return counts[~degenerate], 0, int(degenerate.sum())
    if model != "ce":
        raise ValueError(f"unknown model {model!r}")

    wave = max(_chunk_size(cfg.N, cfg.d) * cfg.threads, 1000)
    max_draws = math.ceil(cfg.trials / cfg.min_acceptance) if cfg.min_acceptance > 0 else None
    accepted: list[np.ndarray] = []
    n_accepted = n_rejected = n_degenerate = drawn = 0
    while n_accepted < cfg.trials:
        stop = drawn + wave if max_draws is None else min(drawn + wave, max_draws)
        if stop <= drawn:
            break
        for batch in _run_range(cfg, drawn, stop, k):
            for cov, deg, cnt in zip(batch.covers, batch.degenerate, batch.counts):
                if n_accepted == cfg.trials:
                    break
                if deg:
                    n_degenerate += 1
                elif cov:
                    n_rejected += 1
                else:
                    accepted.append(cnt)
                    n_accepted += 1
        drawn = stop
        used = n_accepted + n_rejected
        if (cfg.min_acceptance > 0 and n_accepted < cfg.trials
                and used >= 1000 and n_accepted < cfg.min_acceptance * used):
            break
    counts = np.array(accepted, dtype=np.int64)
    if n_accepted < cfg.trials:
        est = _summarise(counts, cfg.seed, n_rejected, n_degenerate)
        rate = n_accepted / max(1, n_accepted + n_rejected)
        raise LowAcceptanceError(
            f"acceptance rate {rate:.3g} below floor {cfg.min_acceptance} "
            f"({n_accepted} of {n_accepted + n_rejected} draws)", est)
    return counts, n_rejected, n_degenerate


def estimate_faces(cfg: SimulationConfig, model: Model) -> Estimate:
    """Mean k-face count of the DT cone, or of the CE cone by rejection sampling."""
    counts, rejected, degenerate = simulate_face_counts(cfg, model)
    return _summarise(counts, cfg.seed, rejected, degenerate)
