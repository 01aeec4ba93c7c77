"""Procedural hull silhouette generator.

Builds randomized side-view vessel masks: a hull body with a curved,
slightly raked keel, a tapered bow, and a deck populated with
superstructure blocks, masts, funnels, small bumps, and notches. Used to
build evaluation corpora of any size and to derive perturbed query masks
(boundary noise, one deck feature added or removed).

All geometry is integer-raster and deterministic per seed. Features are
kept at least 7 px wide and 7 px apart so the radius-2 cleanup kernels
neither erase nor merge them.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy import ndimage

CANVAS_H = 320
CANVAS_W = 1024
DECK_Y = 190

MIN_FEATURE_W = 7
MIN_GAP = 7


@dataclass(frozen=True)
class Feature:
    kind: str        # block | mast | funnel | bump | notch
    x: int           # left edge, canvas pixels
    width: int
    height: int      # extent above the deck (below, for notches)
    level: int = 0   # 0 = on deck, 1 = on top of a block


@dataclass
class HullSpec:
    seed: int
    x0: int                  # stern x
    x1: int                  # bow tip x
    keel_depth: int          # deepest keel row offset below the deck
    keel_rake: int           # extra stern-to-bow keel tilt, pixels
    bow_taper: int           # horizontal run of the bow wedge
    features: tuple[Feature, ...] = field(default_factory=tuple)


def _feature_slots(rng: np.random.Generator, x_lo: int, x_hi: int, widths: list[int]) -> list[int]:
    """Left edges for the given widths inside [x_lo, x_hi], separated by
    at least MIN_GAP, in random order of placement."""
    placed: list[tuple[int, int]] = []
    out = []
    for w in widths:
        for _ in range(60):
            x = int(rng.integers(x_lo, x_hi - w))
            if all(x + w + MIN_GAP <= px or px + pw + MIN_GAP <= x for px, pw in placed):
                placed.append((x, w))
                out.append(x)
                break
        else:
            out.append(-1)  # no room; caller drops it
    return out


def generate_hull(seed: int) -> HullSpec:
    """Randomized hull layout, deterministic per seed."""
    rng = np.random.default_rng(seed)
    x0 = int(rng.integers(36, 60))
    x1 = int(rng.integers(950, 1000))
    spec = HullSpec(
        seed=seed,
        x0=x0,
        x1=x1,
        keel_depth=int(rng.integers(55, 85)),
        keel_rake=int(rng.integers(4, 14)),
        bow_taper=int(rng.integers(40, 90)),
    )

    feats: list[Feature] = []
    # keep a long bare working deck aft: superstructures sit forward
    aft_reserve = int(rng.integers(260, 340))
    deck_lo = x0 + 30 + aft_reserve
    deck_hi = x1 - spec.bow_taper - 30

    n_blocks = int(rng.integers(2, 5))
    widths = [int(rng.integers(70, 170)) for _ in range(n_blocks)]
    xs = _feature_slots(rng, deck_lo, deck_hi, widths)
    blocks = []
    for x, w in zip(xs, widths):
        if x < 0:
            continue
        h = int(rng.integers(26, 62))
        blocks.append(Feature("block", x, w, h))
        feats.append(blocks[-1])

    # masts and funnels sit on blocks or on open deck
    for _ in range(int(rng.integers(1, 4))):
        w = int(rng.integers(MIN_FEATURE_W, 12))
        h = int(rng.integers(45, 110))
        if blocks and rng.random() < 0.6:
            b = blocks[int(rng.integers(0, len(blocks)))]
            if b.width >= w + 2 * MIN_GAP:
                x = int(rng.integers(b.x + MIN_GAP, b.x + b.width - w - MIN_GAP))
                feats.append(Feature("mast", x, w, h, level=1))
                continue
        x = _feature_slots(rng, deck_lo, deck_hi, [w])[0]
        if x >= 0 and _clear_of(feats, x, w):
            feats.append(Feature("mast", x, w, h))

    for _ in range(int(rng.integers(1, 4))):
        w = int(rng.integers(14, 34))
        h = int(rng.integers(10, 22))
        x = _feature_slots(rng, deck_lo, deck_hi, [w])[0]
        if x >= 0 and _clear_of(feats, x, w):
            feats.append(Feature("bump", x, w, h))

    if rng.random() < 0.5:
        w = int(rng.integers(18, 40))
        d = int(rng.integers(8, 18))
        x = _feature_slots(rng, deck_lo, deck_hi, [w])[0]
        if x >= 0 and _clear_of(feats, x, w):
            feats.append(Feature("notch", x, w, d))

    return replace(spec, features=tuple(feats))


def _clear_of(feats: list[Feature], x: int, w: int) -> bool:
    return all(
        f.level != 0 or x + w + MIN_GAP <= f.x or f.x + f.width + MIN_GAP <= x
        for f in feats
    )


def render_mask(spec: HullSpec) -> np.ndarray:
    """Rasterize a hull layout to a binary mask."""
    m = np.zeros((CANVAS_H, CANVAS_W), dtype=bool)
    xs = np.arange(spec.x0, spec.x1 + 1)
    span = max(spec.x1 - spec.x0, 1)
    mid = spec.x0 + 0.45 * span
    curve = 1.0 - ((xs - mid) / (0.62 * span)) ** 2
    bottom = DECK_Y + (
        spec.keel_depth * np.clip(curve, 0.15, None)
        - spec.keel_rake * (xs - spec.x0) / span
    ).astype(int)

    # bow wedge: the bottom rises to meet the deck over the last bow_taper px
    wedge = xs > spec.x1 - spec.bow_taper
    rise = (xs[wedge] - (spec.x1 - spec.bow_taper)) / spec.bow_taper
    bottom[wedge] = np.minimum(
        bottom[wedge], (DECK_Y + 8 + (1.0 - rise) * (bottom[wedge] - DECK_Y - 8)).astype(int)
    )

    for x, b in zip(xs, bottom):
        m[DECK_Y:b, x] = True

    deck_top = np.full(CANVAS_W, DECK_Y, dtype=int)
    for f in sorted(spec.features, key=lambda f: f.level):
        sl = slice(f.x, f.x + f.width)
        if f.kind == "notch":
            m[DECK_Y:DECK_Y + f.height, sl] = False
            continue
        base = int(deck_top[sl].min()) if f.level else DECK_Y
        m[base - f.height:base, sl] = True
        deck_top[sl] = np.minimum(deck_top[sl], base - f.height)
    return m


def boundary_noise(mask: np.ndarray, rng: np.random.Generator, p: float = 0.5) -> np.ndarray:
    """Toggle boundary-band pixels with probability p (about +-1 px)."""
    mask = np.asarray(mask, dtype=bool)
    out = mask.copy()
    outer = ndimage.binary_dilation(mask) & ~mask
    inner = mask & ~ndimage.binary_erosion(mask)
    out[outer & (rng.random(mask.shape) < p)] = True
    out[inner & (rng.random(mask.shape) < p)] = False
    return out


def perturb_features(spec: HullSpec, rng: np.random.Generator) -> HullSpec:
    """Add or remove one small deck feature (bump or notch)."""
    small = [f for f in spec.features if f.kind in ("bump", "notch")]
    if small and rng.random() < 0.5:
        victim = small[int(rng.integers(0, len(small)))]
        return replace(spec, features=tuple(f for f in spec.features if f != victim))

    w = int(rng.integers(14, 30))
    h = int(rng.integers(10, 20))
    deck_lo = spec.x0 + 30
    deck_hi = spec.x1 - spec.bow_taper - 30
    for _ in range(80):
        x = int(rng.integers(deck_lo, deck_hi - w))
        if _clear_of(list(spec.features), x, w):
            kind = "bump" if rng.random() < 0.7 else "notch"
            return replace(spec, features=spec.features + (Feature(kind, x, w, h),))
    # no room to add: fall back to removing something if possible
    if small:
        victim = small[int(rng.integers(0, len(small)))]
        return replace(spec, features=tuple(f for f in spec.features if f != victim))
    return spec


def query_mask(spec: HullSpec, rng: np.random.Generator) -> np.ndarray:
    """Perturbed variant of a model's mask: one feature toggled plus
    boundary noise."""
    return boundary_noise(render_mask(perturb_features(spec, rng)), rng)


def sister_variant(base: HullSpec, k: int) -> HullSpec:
    """Same-class sibling: one feature moved along the deck.

    Deterministic per (base seed, k). Horizontal moves keep the perimeter
    unchanged, which is how sister ships differ: same hull, one structure
    relocated. Small features move farther than blocks so every sibling
    is clearly distinguishable. Falls back to a height tweak only when no
    move fits.
    """
    rng = np.random.default_rng(base.seed * 1009 + k)
    feats = list(base.features)
    deck_lo = base.x0 + 30
    deck_hi = base.x1 - base.bow_taper - 30
    order = list(rng.permutation(len(feats)))
    for idx in order:
        f = feats[idx]
        if f.level != 0:
            continue
        others = feats[:idx] + feats[idx + 1:]
        lo_d, hi_d = (14, 30) if f.kind == "block" else (25, 50)
        for _ in range(20):
            delta = int(rng.integers(lo_d, hi_d)) * (1 if rng.random() < 0.5 else -1)
            nx = f.x + delta
            if nx >= deck_lo and nx + f.width <= deck_hi and _clear_of(others, nx, f.width):
                feats[idx] = replace(f, x=nx)
                return replace(base, features=tuple(feats))
    for idx in order:
        f = feats[idx]
        delta = int(rng.integers(10, 24)) * (1 if rng.random() < 0.5 else -1)
        floor = 8 if f.kind != "notch" else 6
        ceiling = 20 if f.kind == "notch" else 130
        nh = max(floor, min(ceiling, f.height + delta))
        if nh != f.height:
            feats[idx] = replace(f, height=nh)
            return replace(base, features=tuple(feats))
    return replace(base, bow_taper=base.bow_taper + 12)


def make_family(seed: int, size: int) -> list[HullSpec]:
    """A base hull plus size-1 pairwise-distinct sister variants."""
    base = generate_hull(seed)
    members = [base]
    seen = {(base.features, base.bow_taper)}
    salt = 0
    k = 1
    while len(members) < size:
        cand = sister_variant(base, k * 101 + salt)
        key = (cand.features, cand.bow_taper)
        if key in seen:
            salt += 1
            if salt > 500:
                raise ValueError(f"cannot find {size} distinct variants of hull {seed}")
            continue
        seen.add(key)
        members.append(cand)
        k += 1
    return members


def class_name(spec: HullSpec) -> str:
    n_blocks = sum(f.kind == "block" for f in spec.features)
    n_masts = sum(f.kind == "mast" for f in spec.features)
    return f"type-{n_blocks}b{n_masts}m"
