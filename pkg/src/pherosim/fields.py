"""Pheromone fields on the display grid.

Two field models coexist.  Grid fields evolve by explicit-Euler evaporation,
diffusion and injection; Gaussian fields are closed-form moving sources that
are re-evaluated onto the grid every step.  Either way a field is one
pheromone type normalised to [0, 1], and the screen image is a per-channel
weighted sum of fields clamped to [0, 1].

Grid layout: ``values[y, x]`` with cell (x, y) centred at
``((x + 0.5) * cell_size, (y + 0.5) * cell_size)`` in arena centimetres.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConfigurationError,
    NumericError,
    OutOfBoundsError,
    TemporalOrderError,
)

Array = np.ndarray

CHANNELS = ("r", "g", "b")
CHANNEL_INDEX = {"r": 0, "g": 1, "b": 2}

# A source is dropped once its peak amplitude decays below this.
SOURCE_EXPIRY_AMPLITUDE = 1e-4


@dataclass
class FieldGrid:
    """One pheromone type rasterised over the arena."""

    width_cells: int
    height_cells: int
    cell_size: float
    pheromone_id: str
    values: Array | None = None

    def __post_init__(self) -> None:
        if self.width_cells < 2 or self.height_cells < 2:
            raise ConfigurationError("grid needs width_cells >= 2 and height_cells >= 2")
        if self.cell_size <= 0:
            raise ConfigurationError("cell_size > 0 violated")
        if self.values is None:
            self.values = np.zeros((self.height_cells, self.width_cells))
        else:
            self.values = np.asarray(self.values, dtype=float)
            if self.values.shape != (self.height_cells, self.width_cells):
                raise ConfigurationError(
                    "values shape %r does not match (height_cells, width_cells)"
                    % (self.values.shape,)
                )

    @property
    def width_cm(self) -> float:
        return self.width_cells * self.cell_size

    @property
    def height_cm(self) -> float:
        return self.height_cells * self.cell_size

    def cell_centers(self) -> tuple[Array, Array]:
        """Cell-centre coordinates in cm: (xs of length W, ys of length H)."""
        xs = (np.arange(self.width_cells) + 0.5) * self.cell_size
        ys = (np.arange(self.height_cells) + 0.5) * self.cell_size
        return xs, ys

    def like(self, values: Array) -> "FieldGrid":
        """New grid with the same geometry and id but different values."""
        return FieldGrid(
            self.width_cells, self.height_cells, self.cell_size, self.pheromone_id, values
        )


@dataclass(frozen=True)
class PdeParams:
    """Evaporation/diffusion/injection stepping parameters.

    ``mode`` selects the diffusion stencil: "faithful" is the asymmetric
    half-difference of the left and upper neighbours only, "symmetric" is the
    zero-flux five-point Laplacian (conserves mass up to evaporation).
    """

    evaporation_e: float
    diffusion_d: float
    dt: float
    mode: str = "faithful"

    def __post_init__(self) -> None:
        if self.evaporation_e <= 0:
            raise ConfigurationError("evaporation_e > 0 violated")
        if self.diffusion_d < 0:
            raise ConfigurationError("diffusion_d >= 0 violated")
        if self.diffusion_d > 1:
            raise ConfigurationError("diffusion_d <= 1 violated (stencil stability)")
        if self.dt <= 0:
            raise ConfigurationError("dt > 0 violated")
        if self.dt > self.evaporation_e:
            raise ConfigurationError("dt <= evaporation_e violated")
        if self.mode not in ("faithful", "symmetric"):
            raise ConfigurationError("mode must be 'faithful' or 'symmetric'")


@dataclass
class InjectionMask:
    """Sparse per-cell injection rates (value/second), keyed by (x, y) cell."""

    rates: dict[tuple[int, int], float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for cell, rate in self.rates.items():
            if rate < 0:
                raise ConfigurationError("injection rate >= 0 violated at cell %r" % (cell,))
        self._dense: Array | None = None
        self._dense_shape: tuple[int, int] | None = None

    def as_array(self, width_cells: int, height_cells: int) -> Array:
        """Dense (H, W) rate array; cells outside the grid are an error."""
        shape = (height_cells, width_cells)
        if self._dense is not None and self._dense_shape == shape:
            return self._dense
        dense = np.zeros(shape)
        for (x, y), rate in self.rates.items():
            if not (0 <= x < width_cells and 0 <= y < height_cells):
                raise ConfigurationError(
                    "injection cell (%d, %d) outside %dx%d grid" % (x, y, width_cells, height_cells)
                )
            dense[y, x] = rate
        self._dense = dense
        self._dense_shape = shape
        return dense


def _diffusion_term(values: Array, mode: str) -> Array:
    v = values
    lap = np.zeros_like(v)
    if mode == "faithful":
        # Half-differences against the left and upper neighbours only; cells
        # on the x=0 / y=0 edges lack that neighbour and get no contribution.
        lap[:, 1:] += (v[:, :-1] - v[:, 1:]) * 0.5
        lap[1:, :] += (v[:-1, :] - v[1:, :]) * 0.5
    else:
        # Zero-flux five-point stencil: sum of (neighbour - centre) over the
        # neighbours that exist, so interior pair fluxes cancel exactly.
        lap[:, 1:] += v[:, :-1] - v[:, 1:]
        lap[:, :-1] += v[:, 1:] - v[:, :-1]
        lap[1:, :] += v[:-1, :] - v[1:, :]
        lap[:-1, :] += v[1:, :] - v[:-1, :]
    return lap


def step_pde(grid: FieldGrid, params: PdeParams, mask: InjectionMask | None = None) -> FieldGrid:
    """One explicit-Euler step: decay by 1/e, diffuse by d, inject by mask.

    Pure: returns a new grid, inputs untouched.  Result is clamped to [0, 1].
    """
    v = grid.values
    rate = -v / params.evaporation_e
    if params.diffusion_d != 0.0:
        rate = rate + params.diffusion_d * _diffusion_term(v, params.mode)
    if mask is not None and mask.rates:
        rate = rate + mask.as_array(grid.width_cells, grid.height_cells)
    new = v + params.dt * rate
    if not np.isfinite(new).all():
        bad = np.argwhere(~np.isfinite(new))[0]
        raise NumericError(
            "non-finite value at cell (%d, %d) of field %r" % (bad[1], bad[0], grid.pheromone_id)
        )
    np.clip(new, 0.0, 1.0, out=new)
    return grid.like(new)


@dataclass
class GaussianSource:
    """One closed-form source: a scaled bivariate normal decaying in time.

    Amplitude at the centre is ``scale_k / (2 pi sx sy sqrt(1 - rho^2))``
    times ``exp(-(now - birth_time) / evaporation_e)``.
    """

    center_x: float
    center_y: float
    sigma_x: float
    sigma_y: float
    rho: float = 0.0
    scale_k: float = 1.0
    evaporation_e: float = 1.0
    birth_time: float = 0.0

    def __post_init__(self) -> None:
        if self.sigma_x <= 0 or self.sigma_y <= 0:
            raise ConfigurationError("sigma_x, sigma_y > 0 violated")
        if not -1 < self.rho < 1:
            raise ConfigurationError("-1 < rho < 1 violated")
        if self.evaporation_e <= 0:
            raise ConfigurationError("evaporation_e > 0 violated")

    def peak_amplitude(self, now: float) -> float:
        """Centre value at time ``now``."""
        if now < self.birth_time:
            raise TemporalOrderError(
                "source evaluated at t=%g before birth_time=%g" % (now, self.birth_time)
            )
        base = self.scale_k / (
            2.0 * math.pi * self.sigma_x * self.sigma_y * math.sqrt(1.0 - self.rho**2)
        )
        return base * math.exp(-(now - self.birth_time) / self.evaporation_e)

    def expired(self, now: float) -> bool:
        return self.peak_amplitude(now) < SOURCE_EXPIRY_AMPLITUDE


def peak_scale_for(sigma_x: float, sigma_y: float, peak: float, rho: float = 0.0) -> float:
    """scale_k that puts a fresh source's centre amplitude at ``peak``."""
    return peak * 2.0 * math.pi * sigma_x * sigma_y * math.sqrt(1.0 - rho**2)


def eval_gaussian(source: GaussianSource, x: float, y: float, now: float) -> float:
    """Source strength at arena point (x, y) cm at time ``now``."""
    amp = source.peak_amplitude(now)
    dx = (x - source.center_x) / source.sigma_x
    dy = (y - source.center_y) / source.sigma_y
    q = (dx * dx + dy * dy - 2.0 * source.rho * dx * dy) / (2.0 * (1.0 - source.rho**2))
    return amp * math.exp(-q)


def accumulate_sources(
    sources: list[GaussianSource], grid: FieldGrid, now: float
) -> tuple[FieldGrid, list[int]]:
    """Re-evaluate ``sources`` onto the grid (cell centres), clamped to [0, 1].

    Replaces the grid contents; grid fields carry no other state.  Returns the
    new grid and the indices of sources that have decayed below the expiry
    amplitude so the caller can prune them.
    """
    xs, ys = grid.cell_centers()
    total = np.zeros((grid.height_cells, grid.width_cells))
    expired: list[int] = []
    for i, src in enumerate(sources):
        amp = src.peak_amplitude(now)
        if amp < SOURCE_EXPIRY_AMPLITUDE:
            expired.append(i)
            continue
        dx = (xs[None, :] - src.center_x) / src.sigma_x
        dy = (ys[:, None] - src.center_y) / src.sigma_y
        q = (dx * dx + dy * dy - 2.0 * src.rho * dx * dy) / (2.0 * (1.0 - src.rho**2))
        total += amp * np.exp(-q)
    np.clip(total, 0.0, 1.0, out=total)
    return grid.like(total), expired


@dataclass(frozen=True)
class ChannelBinding:
    """Route one pheromone into one colour channel with effect factor k."""

    pheromone_id: str
    channel: str
    factor: float

    def __post_init__(self) -> None:
        if self.channel not in CHANNELS:
            raise ConfigurationError("channel must be one of %r" % (CHANNELS,))
        if self.factor < 0:
            raise ConfigurationError("factor >= 0 violated")


@dataclass(frozen=True)
class ComposeSpec:
    """Set of channel bindings; at most one binding per (pheromone, channel)."""

    bindings: tuple[ChannelBinding, ...]

    def __post_init__(self) -> None:
        seen = set()
        for b in self.bindings:
            key = (b.pheromone_id, b.channel)
            if key in seen:
                raise ConfigurationError("duplicate binding for %r" % (key,))
            seen.add(key)

    def bound_ids(self) -> set[str]:
        return {b.pheromone_id for b in self.bindings}


@dataclass
class ColourImage:
    """Composited RGB view of the fields: ``pixels[y, x, channel]`` in [0, 1]."""

    width_cells: int
    height_cells: int
    cell_size: float
    pixels: Array

    @property
    def width_cm(self) -> float:
        return self.width_cells * self.cell_size

    @property
    def height_cm(self) -> float:
        return self.height_cells * self.cell_size


def compose_image(grids: list[FieldGrid], spec: ComposeSpec) -> ColourImage:
    """Weighted per-channel sum of fields, clamped to [0, 1].

    Every field must have at least one binding; unbound channels stay zero.
    """
    if not grids:
        raise ConfigurationError("compose_image needs at least one field")
    first = grids[0]
    by_id: dict[str, FieldGrid] = {}
    for g in grids:
        if (g.width_cells, g.height_cells) != (first.width_cells, first.height_cells):
            raise ConfigurationError("field grid dimensions disagree")
        if g.cell_size != first.cell_size:
            raise ConfigurationError("field cell sizes disagree")
        if g.pheromone_id in by_id:
            raise ConfigurationError("duplicate pheromone_id %r" % g.pheromone_id)
        by_id[g.pheromone_id] = g
    bound = spec.bound_ids()
    for pid in by_id:
        if pid not in bound:
            raise ConfigurationError("field %r has no channel binding" % pid)
    pixels = np.zeros((first.height_cells, first.width_cells, 3))
    for b in spec.bindings:
        if b.pheromone_id not in by_id:
            raise ConfigurationError("binding references unknown field %r" % b.pheromone_id)
        pixels[:, :, CHANNEL_INDEX[b.channel]] += b.factor * by_id[b.pheromone_id].values
    np.clip(pixels, 0.0, 1.0, out=pixels)
    return ColourImage(first.width_cells, first.height_cells, first.cell_size, pixels)


def sample_points(image: ColourImage, points: Array) -> Array:
    """Bilinear RGB samples at an (N, 2) array of arena (x, y) positions.

    Positions must lie inside the grid extent; samples beyond the outermost
    cell centres clamp to the edge value.
    """
    pts = np.asarray(points, dtype=float)
    xs = pts[:, 0]
    ys = pts[:, 1]
    if (xs < 0).any() or (xs > image.width_cm).any() or (ys < 0).any() or (ys > image.height_cm).any():
        raise OutOfBoundsError("sample position outside the arena extent")
    u = np.clip(xs / image.cell_size - 0.5, 0.0, image.width_cells - 1.0)
    v = np.clip(ys / image.cell_size - 0.5, 0.0, image.height_cells - 1.0)
    x0 = np.minimum(u.astype(int), image.width_cells - 2)
    y0 = np.minimum(v.astype(int), image.height_cells - 2)
    fx = (u - x0)[:, None]
    fy = (v - y0)[:, None]
    p = image.pixels
    top = p[y0, x0] * (1.0 - fx) + p[y0, x0 + 1] * fx
    bot = p[y0 + 1, x0] * (1.0 - fx) + p[y0 + 1, x0 + 1] * fx
    return top * (1.0 - fy) + bot * fy


def sample_bilinear(image: ColourImage, x: float, y: float) -> tuple[float, float, float]:
    """Bilinear RGB sample at one arena position (cm)."""
    rgb = sample_points(image, np.array([[x, y]]))[0]
    return (float(rgb[0]), float(rgb[1]), float(rgb[2]))


def to_u8(values: Array) -> Array:
    """[0, 1] floats to 8-bit with round-half-up (display quantisation)."""
    return np.floor(np.asarray(values) * 255.0 + 0.5).astype(np.uint8)


def image_to_ppm(image: ColourImage) -> bytes:
    """Binary P6 pixmap bytes for a composited image (8 bits per channel)."""
    header = b"P6\n%d %d\n255\n" % (image.width_cells, image.height_cells)
    return header + to_u8(image.pixels).tobytes()


def write_ppm(image: ColourImage, path) -> None:
    with open(path, "wb") as fh:
        fh.write(image_to_ppm(image))


def grid_to_text(grid: FieldGrid) -> str:
    """Plain-text matrix dump, row-major, one grid row per line."""
    lines = []
    for row in grid.values:
        lines.append(" ".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"
