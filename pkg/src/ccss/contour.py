"""Closed-contour extraction and silhouette geometry.

A cleaned mask is traced into a closed pixel loop, resampled to a fixed
number of points uniform in arc length, scaled so the total perimeter is
1.0, and oriented counterclockwise with sample 0 at the stern (minimum-x
point). Curvature, Gaussian smoothing, and deck projection all operate on
that normalized silhouette.

Coordinates are (x, y) = (column, row). Counterclockwise means positive
shoelace area in that frame, which traverses the deck side first when
going from stern to bow and gives convex features positive curvature.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .errors import (
    DegenerateObjectError,
    DegenerateSilhouetteError,
    EmptyMaskError,
    SingularPointError,
)

# clockwise ring (screen orientation, y = row grows downward)
_RING = ((-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1))


def trace_boundary(mask: np.ndarray) -> np.ndarray:
    """Follow the outer boundary of the single object in the mask.

    Moore neighbor tracing with backtracking: from each boundary pixel the
    eight neighbors are scanned clockwise starting just past the background
    pixel we backtracked from, and the walk stops on re-entering the start
    pixel with the starting backtrack (so spurs are traversed both ways
    rather than truncating the loop). Every emitted pixel is an object
    pixel with a background 4-neighbor. Output is (n, 2) int columns
    (x, y), oriented counterclockwise (positive shoelace area).

    Raises DegenerateObjectError for objects with fewer than 8 boundary
    pixels.
    """
    mask = np.asarray(mask, dtype=bool)
    ys, xs = np.nonzero(mask)
    if len(ys) == 0:
        raise EmptyMaskError("mask contains no object pixels")

    y0 = ys.min()
    x0 = xs[ys == y0].min()
    start = (int(y0), int(x0))
    # the cycle re-enters the topmost-leftmost pixel coming up the left
    # side, i.e. with a west backtrack, so start from that state
    start_back = (start[0], start[1] - 1)

    h, w = mask.shape

    def ring_of(c):
        return [(c[0] + dy, c[1] + dx) for dy, dx in _RING]

    state = (start, start_back)
    seen = {state: 0}
    contour = [start]
    limit = 4 * len(ys) + 8
    for _ in range(limit):
        c, b = state
        ring = ring_of(c)
        i0 = ring.index(b)
        nxt = None
        for k in range(1, 9):
            p = ring[(i0 + k) % 8]
            if 0 <= p[0] < h and 0 <= p[1] < w and mask[p]:
                nxt = p
                nb = ring[(i0 + k - 1) % 8]
                break
        if nxt is None:
            raise DegenerateObjectError("object has no traceable boundary")
        state = (nxt, nb)
        if state in seen:
            contour = contour[seen[state]:]
            break
        seen[state] = len(contour)
        contour.append(nxt)
    else:
        raise DegenerateObjectError("boundary trace did not close")

    if len(contour) < 8:
        raise DegenerateObjectError(
            f"object boundary has only {len(contour)} pixels"
        )

    pts = np.array([(x, y) for y, x in contour], dtype=np.int64)
    if _shoelace(pts.astype(float)) < 0:
        pts = pts[::-1].copy()
    return pts


def _shoelace(points: np.ndarray) -> float:
    x, y = points[:, 0], points[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


@dataclass
class Silhouette:
    """Closed silhouette resampled uniformly in arc length.

    points: (n, 2) float array, perimeter scaled to 1.0, counterclockwise,
    sample 0 at the stern. deck_span is the (x_min, x_max) extent of the
    unsmoothed silhouette in the same normalized units; it is carried
    unchanged through smoothing so deck projection stays anchored to the
    original hull.
    """

    points: np.ndarray
    bow_index: int
    stern_index: int
    deck_span: tuple[float, float]

    @property
    def n(self) -> int:
        return len(self.points)


def resample(contour: np.ndarray, n: int = 512) -> Silhouette:
    """Resample a closed contour to n points uniform in arc length.

    The resampled polygon is rescaled so its own perimeter is exactly 1.0,
    made counterclockwise, and rotated so index 0 is the stern (minimum x,
    lowest index on ties).
    """
    if n < 32:
        raise ValueError("n must be >= 32")
    pts = np.asarray(contour, dtype=float)
    closed = np.vstack([pts, pts[:1]])
    seg = np.linalg.norm(np.diff(closed, axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    total = cum[-1]
    if total <= 0:
        raise DegenerateObjectError("contour has zero length")

    targets = np.arange(n) * (total / n)
    x = np.interp(targets, cum, closed[:, 0])
    y = np.interp(targets, cum, closed[:, 1])
    out = np.column_stack([x, y])

    if _shoelace(out) < 0:
        out = out[::-1].copy()

    perim = float(np.linalg.norm(np.diff(np.vstack([out, out[:1]]), axis=0), axis=1).sum())
    out /= perim

    bow, stern = _bow_stern_indices(out)
    out = np.roll(out, -stern, axis=0)
    bow = (bow - stern) % n
    span = (float(out[:, 0].min()), float(out[:, 0].max()))
    return Silhouette(points=out, bow_index=int(bow), stern_index=0, deck_span=span)


def _bow_stern_indices(points: np.ndarray) -> tuple[int, int]:
    x = points[:, 0]
    if float(x.max() - x.min()) < 1e-12:
        raise DegenerateSilhouetteError("silhouette has no horizontal extent")
    return int(np.argmax(x)), int(np.argmin(x))


def detect_bow_stern(sil: Silhouette) -> tuple[int, int]:
    """Locate bow (max x) and stern (min x) samples, lowest index on ties."""
    return _bow_stern_indices(sil.points)


@lru_cache(maxsize=None)
def _kernel_fft(n: int, sigma: float) -> np.ndarray:
    """rfft of the wrapped unit-mass Gaussian for n samples at spacing 1/n."""
    h = 1.0 / n
    half = int(np.ceil(4.0 * sigma / h))
    taps = np.exp(-0.5 * ((np.arange(-half, half + 1) * h) / sigma) ** 2)
    taps /= taps.sum()
    wrapped = np.zeros(n)
    np.add.at(wrapped, np.arange(-half, half + 1) % n, taps)
    return np.fft.rfft(wrapped)


def smooth(sil: Silhouette, sigma: float) -> Silhouette:
    """Circularly convolve x(u) and y(u) with a Gaussian of std sigma.

    sigma is in arc-length units (perimeter = 1). The kernel is truncated
    at +-4 sigma and renormalized to unit mass; sigma = 0 returns the
    silhouette unchanged. The evolved curve keeps its parameterization and
    its original deck_span.
    """
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    if sigma == 0:
        return sil
    kf = _kernel_fft(sil.n, float(sigma))
    x = np.fft.irfft(np.fft.rfft(sil.points[:, 0]) * kf, n=sil.n)
    y = np.fft.irfft(np.fft.rfft(sil.points[:, 1]) * kf, n=sil.n)
    return replace(sil, points=np.column_stack([x, y]))


def curvature(sil: Silhouette) -> np.ndarray:
    """Signed curvature at every sample by circular central differences.

    Positive where the counterclockwise curve is locally convex. Units are
    1 / normalized arc length. Raises SingularPointError if the
    parameterization speed collapses at any sample.
    """
    pts = sil.points
    if len(pts) < 32:
        raise ValueError("silhouette must have >= 32 samples")
    h = 1.0 / len(pts)
    fwd = np.roll(pts, -1, axis=0)
    bwd = np.roll(pts, 1, axis=0)
    d1 = (fwd - bwd) / (2.0 * h)
    d2 = (fwd - 2.0 * pts + bwd) / (h * h)
    speed_sq = d1[:, 0] ** 2 + d1[:, 1] ** 2
    if float(speed_sq.min()) < 1e-12:
        raise SingularPointError("parameterization speed collapsed")
    return (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]) / speed_sq ** 1.5


def project_x(sil: Silhouette, x: float) -> float:
    """Map a horizontal coordinate onto [0, 1] within the frozen deck span."""
    x_min, x_max = sil.deck_span
    width = x_max - x_min
    if width < 1e-12:
        raise DegenerateSilhouetteError("deck span has zero width")
    return (x - x_min) / width


def deck_project(sil: Silhouette, index: int) -> float:
    """Deck-projected position of one sample: its x relative to the span
    of the original unsmoothed silhouette. Stern maps to 0.0, bow to 1.0."""
    return project_x(sil, float(sil.points[index, 0]))


def mirror_mask(mask: np.ndarray) -> np.ndarray:
    """Horizontal mirror of a mask (bow and stern swap sides)."""
    return np.fliplr(np.asarray(mask, dtype=bool))


def mirror_silhouette(sil: Silhouette) -> Silhouette:
    """Horizontal mirror of a silhouette, re-oriented and re-anchored.

    x coordinates reflect within the deck span, the point order reverses
    to restore counterclockwise traversal, and index 0 moves to the new
    stern (the reflected bow).
    """
    a, b = sil.deck_span
    pts = sil.points.copy()
    pts[:, 0] = (a + b) - pts[:, 0]
    pts = pts[::-1].copy()
    bow, stern = _bow_stern_indices(pts)
    pts = np.roll(pts, -stern, axis=0)
    bow = (bow - stern) % len(pts)
    return Silhouette(points=pts, bow_index=int(bow), stern_index=0, deck_span=(a, b))
