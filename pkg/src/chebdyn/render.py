"""Tiled basin-of-attraction rendering, PNG encoding and symmetry checks."""

from __future__ import annotations

import cmath
import hashlib
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .chebyshev import RationalMap, build_chebyshev
from .config import DEFAULTS
from .dynamics import AttractorSet, KernelArgs, classify_points
from . import _kernel as K
from .poly import Polynomial

UNDECIDED = -1
PREIMAGE = -2
AT_INFINITY = -3
SENTINELS = {UNDECIDED: "undecided", PREIMAGE: "preimage-of-parabolic", AT_INFINITY: "landed-at-infinity"}


@dataclass(frozen=True)
class Viewport:
    center: complex
    width: float
    pixels_x: int
    pixels_y: int

    def __post_init__(self):
        if self.width <= 0 or self.pixels_x < 1 or self.pixels_y < 1:
            raise ValueError("viewport needs positive width and pixel counts")

    @property
    def height(self) -> float:
        return self.width * self.pixels_y / self.pixels_x

    @property
    def pixel_size(self) -> float:
        return self.width / self.pixels_x

    def pixel_centers(self, rows: slice = slice(None), cols: slice = slice(None)) -> np.ndarray:
        """Complex pixel centres; row 0 is the top edge."""
        h = self.pixel_size
        i = np.arange(self.pixels_y)[rows]
        j = np.arange(self.pixels_x)[cols]
        x = self.center.real - self.width / 2 + (j + 0.5) * h
        y = self.center.imag + self.height / 2 - (i + 0.5) * h
        return x[None, :] + 1j * y[:, None]

    @property
    def symmetric_about_real_axis(self) -> bool:
        return self.center.imag == 0

    def to_dict(self) -> dict:
        return {"center": [self.center.real, self.center.imag], "width": self.width,
                "pixels_x": self.pixels_x, "pixels_y": self.pixels_y}


@dataclass
class BasinGrid:
    ids: np.ndarray  # attractor id per pixel, or a negative sentinel
    iterations: np.ndarray
    viewport: Viewport
    attractors: AttractorSet
    budget: int
    parabolic_budget: int
    seconds: float = 0.0

    def legend(self) -> dict:
        out = {str(a.id): {"location": [a.location.real, a.location.imag], "kind": a.kind,
                           "extraneous": a.extraneous} for a in self.attractors}
        out.update({str(k): {"kind": v} for k, v in SENTINELS.items()})
        return out

    def counts(self) -> dict:
        vals, cnt = np.unique(self.ids, return_counts=True)
        return {int(v): int(c) for v, c in zip(vals, cnt)}


def _ids_from(code: np.ndarray, att: np.ndarray) -> np.ndarray:
    ids = att.astype(np.int16).copy()
    ids[code == K.UNDECIDED] = UNDECIDED
    ids[code == K.PREIMAGE] = PREIMAGE
    ids[code == K.INFINITY] = AT_INFINITY
    return ids


def _tiles(vp: Viewport, tile: int):
    for r0 in range(0, vp.pixels_y, tile):
        for c0 in range(0, vp.pixels_x, tile):
            yield slice(r0, min(r0 + tile, vp.pixels_y)), slice(c0, min(c0 + tile, vp.pixels_x))


def render_basins(p: Polynomial | RationalMap, viewport: Viewport, budget: int | None = None,
                  parabolic_budget: int | None = None, workers: int = 1, tile: int | None = None,
                  attractors: AttractorSet | None = None) -> BasinGrid:
    """Classify every pixel centre; tiles run on a thread pool and the result does not depend on ``workers``."""
    if isinstance(p, RationalMap):
        if attractors is None:
            raise ValueError("an attractor set is required when passing a rational map")
        R = p
    else:
        R = build_chebyshev(p)
        attractors = AttractorSet.for_polynomial(p) if attractors is None else attractors
    budget = DEFAULTS.budget if budget is None else budget
    parabolic_budget = DEFAULTS.parabolic_budget if parabolic_budget is None else parabolic_budget
    tile = DEFAULTS.tile if tile is None else tile
    args = KernelArgs.build(R, attractors, budget, parabolic_budget)
    ids = np.empty((viewport.pixels_y, viewport.pixels_x), dtype=np.int16)
    its = np.empty((viewport.pixels_y, viewport.pixels_x), dtype=np.int32)

    def work(rc) -> None:
        rows, cols = rc
        pts = np.ascontiguousarray(viewport.pixel_centers(rows, cols)).ravel()
        code = np.empty(pts.size, dtype=np.int8)
        att = np.empty(pts.size, dtype=np.int16)
        it = np.empty(pts.size, dtype=np.int32)
        K.orbit_block(pts, *args.tail(), code, att, it)
        shape = (rows.stop - rows.start, cols.stop - cols.start)
        ids[rows, cols] = _ids_from(code, att).reshape(shape)
        its[rows, cols] = it.reshape(shape)

    t0 = time.perf_counter()
    tiles = list(_tiles(viewport, tile))
    if workers <= 1:
        for rc in tiles:
            work(rc)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(work, tiles))
    return BasinGrid(ids, its, viewport, attractors, budget, parabolic_budget, time.perf_counter() - t0)


# --------------------------------------------------------------------------
# colours

ROOT_COLOURS = [(40, 90, 220), (40, 170, 70), (235, 120, 190), (240, 190, 40), (120, 60, 180), (30, 180, 190)]
EXTRANEOUS_COLOUR = (215, 35, 35)
SENTINEL_COLOURS = {UNDECIDED: (0, 0, 0), PREIMAGE: (255, 255, 255), AT_INFINITY: (255, 255, 0)}


def default_palette(attractors: AttractorSet) -> dict[int, tuple[int, int, int]]:
    """Roots of ``p`` get blue, green, pink, ...; extraneous attractors get red."""
    pal: dict[int, tuple[int, int, int]] = {}
    k = 0
    for a in attractors:
        if not a.extraneous:
            pal[a.id] = ROOT_COLOURS[k % len(ROOT_COLOURS)]
            k += 1
        else:
            pal[a.id] = EXTRANEOUS_COLOUR
    pal.update(SENTINEL_COLOURS)
    return pal


def shade_levels(iterations: np.ndarray, cap: int, shades: int) -> np.ndarray:
    """Quantised log-scaled iteration counts in ``0 .. shades-1``."""
    x = np.log1p(np.minimum(iterations, cap)) / math.log1p(cap)
    return np.minimum((x * shades).astype(np.int64), shades - 1)


def to_rgb(grid: BasinGrid, palette: dict | None = None, shades: int = 8) -> np.ndarray:
    palette = default_palette(grid.attractors) if palette is None else palette
    missing = set(np.unique(grid.ids).tolist()) - set(palette)
    if missing:
        raise ValueError(f"palette has no colour for ids {sorted(missing)}")
    rgb = np.zeros(grid.ids.shape + (3,), dtype=np.uint8)
    levels = shade_levels(grid.iterations, grid.parabolic_budget if grid.attractors.has_parabolic else grid.budget,
                          shades)
    factor = 1.0 - 0.6 * levels / max(shades - 1, 1)
    for key, colour in palette.items():
        mask = grid.ids == key
        if not mask.any():
            continue
        if key < 0:
            rgb[mask] = colour
        else:
            rgb[mask] = np.round(np.outer(factor[mask], colour)).astype(np.uint8)
    return rgb


def encode_image(grid: BasinGrid, path: str | Path, palette: dict | None = None, shades: int = 8) -> Path:
    """Write an 8-bit RGB PNG; brightness within a basin falls with the log of the iteration count."""
    path = Path(path)
    Image.fromarray(to_rgb(grid, palette, shades), mode="RGB").save(path, format="PNG", optimize=False)
    return path


def sha256(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_sidecar(grid: BasinGrid, image_path: str | Path, palette: dict | None = None, extra: dict | None = None) -> Path:
    image_path = Path(image_path)
    palette = default_palette(grid.attractors) if palette is None else palette
    data = {
        "image": image_path.name,
        "sha256": sha256(image_path),
        "viewport": grid.viewport.to_dict(),
        "budget": grid.budget,
        "parabolic_budget": grid.parabolic_budget,
        "palette": {str(k): list(v) for k, v in palette.items()},
        "legend": grid.legend(),
        "counts": {str(k): v for k, v in grid.counts().items()},
        "seconds": grid.seconds,
        "config": DEFAULTS.as_dict(),
    }
    if extra:
        data.update(extra)
    out = image_path.with_suffix(".json")
    out.write_text(json.dumps(data, indent=2) + "\n")
    return out


# --------------------------------------------------------------------------
# symmetry


def symmetry_check(grid: BasinGrid, threshold: float | None = None) -> dict:
    """Share of pixel pairs ``(z, conj z)`` whose basins correspond under conjugation."""
    threshold = DEFAULTS.symmetry_pass if threshold is None else threshold
    if not grid.viewport.symmetric_about_real_axis:
        raise ValueError("viewport is not symmetric about the real axis")
    conj = grid.attractors.conjugation_map()
    mapped = grid.ids.copy()
    for k, v in conj.items():
        mapped[grid.ids == k] = v
    agree = float(np.mean(mapped == grid.ids[::-1, :]))
    return {"agreement": agree, "threshold": threshold, "verdict": "PASS" if agree >= threshold else "FAIL"}


def rotation_check(p: Polynomial | RationalMap, grid: BasinGrid, turns: int = 3, threshold: float | None = None,
                   attractors: AttractorSet | None = None) -> dict:
    """Equivariance under rotation by ``2 pi / turns`` about the origin.

    The rotated pixel centres are classified directly, so the comparison is
    between matching sample points rather than a resampled image.
    """
    threshold = DEFAULTS.symmetry_pass if threshold is None else threshold
    R = p if isinstance(p, RationalMap) else build_chebyshev(p)
    A = grid.attractors if attractors is None else attractors
    w = cmath.exp(2j * math.pi / turns)
    pts = grid.viewport.pixel_centers().ravel() * w
    code, att, _ = classify_points(R, pts, A, grid.budget, grid.parabolic_budget)
    rotated = _ids_from(code, att).reshape(grid.ids.shape)
    expected = grid.ids.copy()
    for a in A:
        j = A.nearest(a.location * w)
        if j is None:
            raise ValueError("attractor set is not rotation invariant")
        expected[grid.ids == a.id] = j
    agree = float(np.mean(expected == rotated))
    return {"agreement": agree, "threshold": threshold, "verdict": "PASS" if agree >= threshold else "FAIL"}
