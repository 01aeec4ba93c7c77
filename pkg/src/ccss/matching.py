"""Target-to-model matching cost between two scale-space images.

Matching runs row by row over the shared smoothing schedule, separately
for the convexity (max) and concavity (min) families. A global horizontal
shift is estimated first from nearest-point associations and applied to
the target. Each row's points are then assigned injectively by exhaustive
search over a cost matrix mixing position and concavity differences, and
unmatched points pay a fixed cardinality penalty. The total cost is the
sum over both families; identical images cost exactly zero.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ScheduleMismatchError
from .scalespace import CCSSImage


@dataclass(frozen=True)
class MatchParams:
    """Cost weights.

    alpha mixes position against concavity differences per matched pair.
    Each unmatched point costs sigma_gain * penalty_unit; penalty_unit
    converts the gain (tuned on a percent-of-length scale) to the [0, 1]
    coordinate units used here.
    """

    alpha: float = 0.2
    sigma_gain: float = 14.0
    penalty_unit: float = 0.01

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must be in [0, 1]")
        if self.sigma_gain < 0:
            raise ValueError("sigma_gain must be >= 0")

    @property
    def point_penalty(self) -> float:
        return self.sigma_gain * self.penalty_unit


@dataclass
class MatchResult:
    model_id: str
    total_cost: float
    shift_applied: float
    mirrored: bool = False
    shift_divergence: float = 0.0


def _check_schedules(a: CCSSImage, b: CCSSImage) -> None:
    if a.sigmas != b.sigmas:
        raise ScheduleMismatchError(
            f"images built on different schedules ({len(a.sigmas)} vs {len(b.sigmas)} rows)"
        )


_ROW_STRIDE = 16.0  # spreads rows apart so one sorted array serves them all


def _nearest_mean(pools: tuple[np.ndarray, np.ndarray], offset: float) -> float | None:
    """Mean signed x difference from each (offset-corrected) target point
    to its nearest same-row model point; None with nothing to associate.
    On distance ties the lower model index (left point) wins."""
    tx, mx = pools
    if len(tx) == 0 or len(mx) == 0:
        return None
    x = tx + offset
    j = np.searchsorted(mx, x)
    left = mx.take(j - 1, mode="clip")
    right = mx.take(j, mode="clip")
    d_left = np.abs(left - x)
    d_right = np.abs(right - x)
    # rows are stride-separated and pooling keeps only rows populated on
    # both sides, so the nearest pooled point is always from the same row
    nearest = np.where(d_left <= d_right, left, right)
    return float((nearest - x).mean())


def _family_shift(
    target_rows: list[np.ndarray],
    model_rows: list[np.ndarray],
    offset: float = 0.0,
) -> float | None:
    return _nearest_mean(_pooled_pair(target_rows, model_rows), offset)


def _strided_x(img: CCSSImage) -> tuple[list, list]:
    """Per-row x arrays offset by row * stride, cached on the image."""
    cached = getattr(img, "_strided_cache", None)
    if cached is None:
        cached = (
            [row[:, 0] + r * _ROW_STRIDE if len(row) else None
             for r, row in enumerate(img.max_rows)],
            [row[:, 0] + r * _ROW_STRIDE if len(row) else None
             for r, row in enumerate(img.min_rows)],
        )
        img._strided_cache = cached
    return cached


def _pooled_pair(
    target_rows: list[np.ndarray], model_rows: list[np.ndarray]
) -> tuple[np.ndarray, np.ndarray]:
    """Pooled positions restricted to rows where both sides have points."""
    t_parts, m_parts = [], []
    for r, (t, m) in enumerate(zip(target_rows, model_rows)):
        if len(t) and len(m):
            t_parts.append(t[:, 0] + r * _ROW_STRIDE)
            m_parts.append(m[:, 0] + r * _ROW_STRIDE)
    if not t_parts:
        return np.empty(0), np.empty(0)
    return np.concatenate(t_parts), np.concatenate(m_parts)


def _pooled_pair_cached(target: CCSSImage, model: CCSSImage, fam: int) -> tuple[np.ndarray, np.ndarray]:
    ts = _strided_x(target)[fam]
    ms = _strided_x(model)[fam]
    t_parts = []
    m_parts = []
    for t, m in zip(ts, ms):
        if t is not None and m is not None:
            t_parts.append(t)
            m_parts.append(m)
    if not t_parts:
        return np.empty(0), np.empty(0)
    return np.concatenate(t_parts), np.concatenate(m_parts)


def _iterate_shift(
    pools_max: tuple[np.ndarray, np.ndarray],
    pools_min: tuple[np.ndarray, np.ndarray],
    max_iter: int,
) -> tuple[float, float]:
    """Fixpoint of associate-and-average; returns (offset, divergence)."""
    total = 0.0
    a = b = None
    for _ in range(max_iter):
        a = _nearest_mean(pools_max, total)
        b = _nearest_mean(pools_min, total)
        parts = [s for s in (a, b) if s is not None]
        if not parts:
            return 0.0, 0.0
        step = float(np.mean(parts))
        total += step
        if abs(step) < 1e-12:
            break
    divergence = abs(a - b) if a is not None and b is not None else 0.0
    return total, divergence


def shift_correction(target: CCSSImage, model: CCSSImage, max_iter: int = 10) -> float:
    """Signed deck offset aligning the target to the model.

    One round averages the nearest-point horizontal differences over the
    max family, then over the min family, and takes the mean of the two
    (a family with no associable points is excluded; 0.0 if both are).
    Rounds repeat on the corrected positions until the estimate is stable:
    re-association after the first correction makes the recovered offset
    exact for uniform translations even when some features sit closer
    together than the shift itself.
    """
    _check_schedules(target, model)
    offset, _ = _iterate_shift(
        _pooled_pair(target.max_rows, model.max_rows),
        _pooled_pair(target.min_rows, model.min_rows),
        max_iter,
    )
    return offset


def shift_divergence(target: CCSSImage, model: CCSSImage, offset: float = 0.0) -> float:
    """Spread between the per-family shift estimates at a given offset;
    large values flag non-corresponding image pairs whose average shift
    is meaningless."""
    a = _family_shift(target.max_rows, model.max_rows, offset)
    b = _family_shift(target.min_rows, model.min_rows, offset)
    if a is None or b is None:
        return 0.0
    return abs(a - b)


def rmm_matrix(side_a: np.ndarray, side_b: np.ndarray, alpha: float) -> np.ndarray:
    """Pairwise assignment costs between two rows of (x, c) points.

    Cell (i, j) is alpha * |x_i - x_j| + (1 - alpha) * |c_i - c_j|. The
    matrix is oriented so rows <= columns (sides are swapped when the
    first one is larger), which the exhaustive search requires.
    """
    a = np.asarray(side_a, dtype=float).reshape(-1, 2)
    b = np.asarray(side_b, dtype=float).reshape(-1, 2)
    if len(a) > len(b):
        a, b = b, a
    if len(a) == 0:
        return np.empty((0, len(b)))
    dx = np.abs(a[:, 0:1] - b[None, :, 0])
    dc = np.abs(a[:, 1:2] - b[None, :, 1])
    return alpha * dx + (1.0 - alpha) * dc


_ENUMERATION_LIMIT = 250_000


def rmm_optimal_cost(matrix: np.ndarray) -> float:
    """Minimum total cost over injective row-to-column assignments.

    Exhaustive depth-first recursion over columns, pruned against the best
    total found so far (pruning cannot change the minimum). A matrix with
    no rows costs 0. Thresholded rows stay small, keeping exact search
    cheap; for outsized matrices (raw, unthresholded descriptors) the same
    minimum is computed by a polynomial assignment solver instead, which
    returns the identical value.
    """
    mat = np.asarray(matrix, dtype=float)
    n_rows = mat.shape[0]
    if n_rows == 0:
        return 0.0
    n_cols = mat.shape[1]
    if n_rows > n_cols:
        raise ValueError("matrix must have rows <= columns")

    paths = 1
    for i in range(n_rows):
        paths *= n_cols - i
        if paths > _ENUMERATION_LIMIT:
            from scipy.optimize import linear_sum_assignment

            rows, cols = linear_sum_assignment(mat)
            return float(mat[rows, cols].sum())

    if n_rows == 1:
        return float(mat[0].min())
    if n_rows == 2:
        r1 = mat[1]
        order = np.argsort(r1, kind="stable")
        j1, j2 = int(order[0]), int(order[1])
        best = np.inf
        for j in range(n_cols):
            partner = r1[j2] if j == j1 else r1[j1]
            best = min(best, mat[0, j] + partner)
        return float(best)

    rows = [mat[i].tolist() for i in range(n_rows)]
    # candidate columns cheapest-first per row, and an admissible lower
    # bound (sum of remaining row minima) to prune without changing the
    # minimum
    orders = [sorted(range(n_cols), key=row.__getitem__) for row in rows]
    remaining = [0.0] * (n_rows + 1)
    for i in range(n_rows - 1, -1, -1):
        remaining[i] = remaining[i + 1] + rows[i][orders[i][0]]
    best = np.inf

    def descend(i: int, used: int, acc: float) -> None:
        nonlocal best
        if acc + remaining[i] >= best:
            return
        if i == n_rows:
            best = acc
            return
        row = rows[i]
        for j in orders[i]:
            if not used & (1 << j):
                descend(i + 1, used | (1 << j), acc + row[j])

    descend(0, 0, 0.0)
    return float(best)


def row_cost(side_a: np.ndarray, side_b: np.ndarray, params: MatchParams) -> float:
    """Optimal assignment cost of one row plus the cardinality penalty.

    Every point without a partner (the difference in point counts) adds
    params.point_penalty; two empty rows cost 0.
    """
    a = np.asarray(side_a, dtype=float).reshape(-1, 2)
    b = np.asarray(side_b, dtype=float).reshape(-1, 2)
    penalty = abs(len(a) - len(b)) * params.point_penalty
    if len(a) == 0 or len(b) == 0:
        return penalty
    return rmm_optimal_cost(rmm_matrix(a, b, params.alpha)) + penalty


def _shifted(rows: list[np.ndarray], dx: float) -> list[np.ndarray]:
    if dx == 0.0:
        return rows
    return [row + np.array([dx, 0.0]) if len(row) else row for row in rows]


def _row_counts(img: CCSSImage) -> tuple[np.ndarray, np.ndarray]:
    """Per-row point counts for both families, cached on the image."""
    cached = getattr(img, "_row_counts", None)
    if cached is None:
        cached = (
            np.array([len(r) for r in img.max_rows], dtype=np.int32),
            np.array([len(r) for r in img.min_rows], dtype=np.int32),
        )
        img._row_counts = cached
    return cached


def match_cost(
    target: CCSSImage,
    model: CCSSImage,
    params: MatchParams | None = None,
    model_id: str = "",
) -> MatchResult:
    """Global matching cost: shift-corrected row costs summed over both
    families. Requires both images on the same schedule."""
    if params is None:
        params = MatchParams()
    _check_schedules(target, model)
    offset, divergence = _iterate_shift(
        _pooled_pair_cached(target, model, 0),
        _pooled_pair_cached(target, model, 1),
        10,
    )

    tc = _row_counts(target)
    mc = _row_counts(model)
    total = 0.0
    alpha = params.alpha
    for fam in (0, 1):
        t_rows = target.max_rows if fam == 0 else target.min_rows
        m_rows = model.max_rows if fam == 0 else model.min_rows
        total += params.point_penalty * float(np.abs(tc[fam] - mc[fam]).sum())
        for r in np.nonzero((tc[fam] > 0) & (mc[fam] > 0))[0]:
            t = t_rows[r]
            m = m_rows[r]
            dx = np.abs((t[:, 0:1] + offset) - m[None, :, 0])
            dc = np.abs(t[:, 1:2] - m[None, :, 1])
            mat = alpha * dx + (1.0 - alpha) * dc
            if mat.shape[0] > mat.shape[1]:
                mat = mat.T
            total += rmm_optimal_cost(mat)
    return MatchResult(
        model_id=model_id,
        total_cost=float(total),
        shift_applied=float(offset),
        shift_divergence=float(divergence),
    )


def mirror_ccss(img: CCSSImage) -> CCSSImage:
    """Reflect an image horizontally: x -> 1 - x, concavities unchanged."""

    def flip(rows):
        out = []
        for row in rows:
            if len(row) == 0:
                out.append(row)
                continue
            r = row.copy()
            r[:, 0] = 1.0 - r[:, 0]
            out.append(r[np.argsort(r[:, 0], kind="stable")])
        return out

    return CCSSImage(sigmas=img.sigmas, max_rows=flip(img.max_rows), min_rows=flip(img.min_rows))


def translate_ccss(img: CCSSImage, dx: float) -> CCSSImage:
    """Shift every point's deck position by dx (test and diagnostics aid)."""
    return CCSSImage(
        sigmas=img.sigmas,
        max_rows=_shifted(img.max_rows, dx),
        min_rows=_shifted(img.min_rows, dx),
    )


def mirror_min(
    target: CCSSImage,
    target_mirrored: CCSSImage,
    model: CCSSImage,
    params: MatchParams | None = None,
    model_id: str = "",
) -> MatchResult:
    """Lower of the direct and horizontally mirrored matching costs.

    Bow/stern detection cannot tell which horizontal extreme is which, so
    both target orientations are tried and the cheaper one kept.
    """
    direct = match_cost(target, model, params, model_id)
    flipped = match_cost(target_mirrored, model, params, model_id)
    if flipped.total_cost < direct.total_cost:
        flipped.mirrored = True
        return flipped
    return direct
