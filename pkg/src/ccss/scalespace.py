"""Concavity-convexity scale space construction.

For each smoothing level the silhouette's curvature zero crossings are
located, and every arc between consecutive crossings (one concavity or
convexity) is reduced to a single point: the deck-projected position of
the arc sample farthest from the chord through the two crossings, valued
by that signed distance. Convexities (positive curvature) go into the
maximum family, concavities into the minimum family. Shallow lobes are
removed by thresholding the absolute distance.

A classic zero-crossing scale space builder is included for comparison
and rendering; retrieval uses only the concavity-convexity form.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .contour import Silhouette, curvature, project_x, smooth
from .errors import DegenerateSilhouetteError

# below this magnitude a curvature sample carries no sign information
SIGN_EPS = 1e-9


@dataclass(frozen=True)
class ScaleSchedule:
    """Strictly increasing Gaussian stds, in arc-length units."""

    sigmas: tuple[float, ...]

    def __post_init__(self):
        if len(self.sigmas) == 0:
            raise ValueError("schedule must have at least one level")
        if self.sigmas[0] <= 0:
            raise ValueError("first sigma must be positive")
        if any(b <= a for a, b in zip(self.sigmas, self.sigmas[1:])):
            raise ValueError("sigmas must be strictly increasing")

    def __len__(self) -> int:
        return len(self.sigmas)

    def __iter__(self):
        return iter(self.sigmas)


def make_schedule(n_rows: int, n_samples: int = 512) -> ScaleSchedule:
    """Uniform ladder: one inter-sample spacing (1/n_samples) per row."""
    return ScaleSchedule(tuple((i + 1) / n_samples for i in range(n_rows)))


@dataclass
class CCSSImage:
    """Per-row point families of a concavity-convexity scale space.

    max_rows[r] / min_rows[r] are (k, 2) float arrays of (x_deck, c)
    sorted by x_deck; c is positive in the max family and negative in the
    min family.
    """

    sigmas: tuple[float, ...]
    max_rows: list[np.ndarray]
    min_rows: list[np.ndarray]

    @property
    def n_rows(self) -> int:
        return len(self.sigmas)

    def point_count(self) -> int:
        return sum(len(r) for r in self.max_rows) + sum(len(r) for r in self.min_rows)


@dataclass
class CSSImage:
    """Zero-crossing traces: per row, normalized arc positions in [0, 1)."""

    sigmas: tuple[float, ...]
    rows: list[np.ndarray]


_EMPTY_ROW = np.empty((0, 2), dtype=float)


def _significant_signs(kappa: np.ndarray, eps: float = SIGN_EPS) -> np.ndarray:
    s = np.zeros(len(kappa), dtype=np.int8)
    s[kappa > eps] = 1
    s[kappa < -eps] = -1
    return s


def crossing_params(kappa: np.ndarray, eps: float = SIGN_EPS):
    """Locate sign changes of the curvature profile on the closed curve.

    Returns (params, signs): params[j] is the fractional sample position
    of crossing j (linearly interpolated between the last significant
    sample of one sign run and the first of the next), and signs[j] is the
    curvature sign of the run that follows. Samples with |kappa| <= eps
    carry no sign; runs of equal sign separated only by such samples are
    merged. Crossing counts are always even on a closed curve.
    """
    n = len(kappa)
    s = _significant_signs(kappa, eps)
    nz = np.nonzero(s)[0]
    if len(nz) == 0:
        return [], []
    sv = s[nz]
    starts = np.nonzero(sv != np.roll(sv, 1))[0]
    if len(starts) == 0:
        return [], []

    params = []
    signs = []
    for p in starts:
        a = int(nz[p - 1])  # last significant sample of the previous run
        b = int(nz[p])      # first significant sample of the next run
        b_eff = b if b > a else b + n
        ka = abs(float(kappa[a]))
        kb = abs(float(kappa[b]))
        t = ka / (ka + kb)
        params.append((a + t * (b_eff - a)) % n)
        signs.append(int(sv[p]))
    order = np.argsort(params)
    return [params[i] for i in order], [signs[i] for i in order]


def zero_crossings(kappa: np.ndarray, eps: float = SIGN_EPS) -> list[int]:
    """Sample indices where the curvature sign flips between significant
    values; the index marks the last sample before each crossing."""
    params, _ = crossing_params(kappa, eps)
    return [int(np.floor(p)) for p in params]


def _point_at(points: np.ndarray, p: float) -> np.ndarray:
    n = len(points)
    i = int(np.floor(p)) % n
    t = p - np.floor(p)
    return (1.0 - t) * points[i] + t * points[(i + 1) % n]


def _arc_indices(p0: float, p1: float, n: int) -> np.ndarray:
    """Whole sample indices strictly inside the cyclic interval (p0, p1)."""
    if p1 <= p0:
        p1 += n
    lo = int(np.floor(p0)) + 1
    hi = int(np.ceil(p1)) - 1
    if hi < lo:
        return np.empty(0, dtype=int)
    return np.arange(lo, hi + 1) % n


def lobe_concavity(
    sil: Silhouette,
    z0: float,
    z1: float,
    kappa: np.ndarray | None = None,
) -> tuple[int, float]:
    """Depth of the arc between two crossings, measured against its chord.

    The chord runs through the curve points at crossing positions z0 and
    z1 (fractional sample indices, arc taken cyclically from z0 to z1).
    Returns the index of the arc sample farthest from that chord and the
    perpendicular distance, signed by the arc's curvature sign.
    """
    pts = sil.points
    n = len(pts)
    a = _point_at(pts, float(z0) % n)
    b = _point_at(pts, float(z1) % n)
    chord = b - a
    clen = float(np.hypot(chord[0], chord[1]))
    if clen < 1e-15:
        raise DegenerateSilhouetteError("lobe chord is degenerate")

    idx = _arc_indices(float(z0) % n, float(z1) % n, n)
    if len(idx) == 0:
        raise DegenerateSilhouetteError("lobe contains no samples")
    rel = pts[idx] - a
    dist = np.abs(rel[:, 0] * chord[1] - rel[:, 1] * chord[0]) / clen
    k = int(np.argmax(dist))
    peak = int(idx[k])

    if kappa is None:
        kappa = curvature(sil)
    arc_k = kappa[idx]
    sign = 1.0 if arc_k[np.argmax(np.abs(arc_k))] >= 0 else -1.0
    return peak, sign * float(dist[k])


def _row_points(sil: Silhouette, sigma: float) -> tuple[np.ndarray, np.ndarray, int]:
    """One scale-space row: (max points, min points, crossing count)."""
    evolved = smooth(sil, sigma)
    kappa = curvature(evolved)
    params, signs = crossing_params(kappa)
    if not params:
        return _EMPTY_ROW, _EMPTY_ROW, 0
    maxs, mins = [], []
    m = len(params)
    for j in range(m):
        z0 = params[j]
        z1 = params[(j + 1) % m]
        sign = signs[j]
        try:
            peak, c = lobe_concavity(evolved, z0, z1, kappa)
        except DegenerateSilhouetteError:
            continue
        c = abs(c) * sign
        x = project_x(evolved, float(evolved.points[peak, 0]))
        (maxs if sign > 0 else mins).append((x, c))
    return _sorted_row(maxs), _sorted_row(mins), m


def build_ccss(sil: Silhouette, schedule: ScaleSchedule) -> CCSSImage:
    """Construct the scale-space point families for one silhouette.

    Each row smooths the original silhouette to that row's sigma, locates
    curvature zero crossings, and condenses every crossing-delimited arc
    into one (x_deck, c) point: deck-projected peak position and signed
    chord distance. Rows without crossings stay empty.
    """
    max_rows: list[np.ndarray] = []
    min_rows: list[np.ndarray] = []
    for sigma in schedule:
        maxs, mins, _ = _row_points(sil, sigma)
        max_rows.append(maxs)
        min_rows.append(mins)
    return CCSSImage(sigmas=tuple(schedule.sigmas), max_rows=max_rows, min_rows=min_rows)


def build_ccss_until_convex(sil: Silhouette, max_rows: int = 512) -> CCSSImage:
    """Build ladder rows (steps of one inter-sample spacing) until the
    silhouette has no curvature sign changes; the final empty row is
    included. Raises if the cap is reached first."""
    n = sil.n
    out_max: list[np.ndarray] = []
    out_min: list[np.ndarray] = []
    for r in range(max_rows):
        maxs, mins, crossings = _row_points(sil, (r + 1) / n)
        out_max.append(maxs)
        out_min.append(mins)
        if crossings == 0:
            sig = tuple((i + 1) / n for i in range(r + 1))
            return CCSSImage(sigmas=sig, max_rows=out_max, min_rows=out_min)
    raise ValueError(f"silhouette still has crossings after {max_rows} rows")


def extend_ccss(img: CCSSImage, sil: Silhouette, schedule: ScaleSchedule) -> CCSSImage:
    """Pad an image out to a longer schedule by computing the extra rows.

    The existing schedule must be a prefix of the new one; rows already
    built are reused unchanged, so the result is identical to building on
    the full schedule directly.
    """
    have = len(img.sigmas)
    if tuple(schedule.sigmas[:have]) != img.sigmas:
        raise ValueError("existing rows were built on a different schedule")
    max_rows = list(img.max_rows)
    min_rows = list(img.min_rows)
    for sigma in schedule.sigmas[have:]:
        maxs, mins, _ = _row_points(sil, sigma)
        max_rows.append(maxs)
        min_rows.append(mins)
    return CCSSImage(sigmas=tuple(schedule.sigmas), max_rows=max_rows, min_rows=min_rows)


def _sorted_row(pairs: list[tuple[float, float]]) -> np.ndarray:
    if not pairs:
        return _EMPTY_ROW
    arr = np.array(pairs, dtype=float)
    return arr[np.argsort(arr[:, 0], kind="stable")]


def threshold_shallow(img: CCSSImage, tau: float) -> CCSSImage:
    """Drop every point with |c| < tau. tau = 0 is the identity."""
    if tau < 0:
        raise ValueError("tau must be >= 0")

    def filt(rows):
        return [row[np.abs(row[:, 1]) >= tau] if len(row) else row for row in rows]

    return CCSSImage(
        sigmas=img.sigmas,
        max_rows=filt(img.max_rows),
        min_rows=filt(img.min_rows),
    )


def build_css(sil: Silhouette, schedule: ScaleSchedule) -> CSSImage:
    """Zero-crossing traces over the schedule, as normalized arc positions."""
    rows = []
    n = sil.n
    for sigma in schedule:
        evolved = smooth(sil, sigma)
        params, _ = crossing_params(curvature(evolved))
        rows.append(np.array(params, dtype=float) / n)
    return CSSImage(sigmas=tuple(schedule.sigmas), rows=rows)


def rows_until_convex(sil: Silhouette, max_rows: int = 512) -> int:
    """Number of ladder rows needed before the silhouette has no curvature
    sign changes. Raises if the cap is reached first."""
    n = sil.n
    for r in range(max_rows):
        evolved = smooth(sil, (r + 1) / n)
        if not crossing_params(curvature(evolved))[0]:
            return r + 1
    raise ValueError(f"silhouette still has crossings after {max_rows} rows")


def ccss_to_dict(img: CCSSImage) -> dict:
    """Versioned plain-data form: rows of [x_deck, c, kind] triples."""
    rows = []
    for mx, mn in zip(img.max_rows, img.min_rows):
        row = [[float(x), float(c), "max"] for x, c in mx]
        row += [[float(x), float(c), "min"] for x, c in mn]
        row.sort(key=lambda t: t[0])
        rows.append(row)
    return {"version": 1, "sigmas": list(img.sigmas), "rows": rows}


def ccss_from_dict(doc: dict) -> CCSSImage:
    if doc.get("version") != 1:
        raise ValueError(f"unsupported scale-space document version: {doc.get('version')!r}")
    sigmas = tuple(float(s) for s in doc["sigmas"])
    max_rows, min_rows = [], []
    for row in doc["rows"]:
        maxs = [(x, c) for x, c, kind in row if kind == "max"]
        mins = [(x, c) for x, c, kind in row if kind == "min"]
        max_rows.append(_sorted_row(maxs))
        min_rows.append(_sorted_row(mins))
    return CCSSImage(sigmas=sigmas, max_rows=max_rows, min_rows=min_rows)
