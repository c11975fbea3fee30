"""Cross-coupled chaotic maps and duplicate-free pixel position selection.

Two copies of a one-parameter rational map are cross-coupled through a
public factor: each map's next input is the other map's previous output
scaled by the factor. The resulting orbit, converted to integer pixel
coordinates and deduplicated, is the shared secret ordering in which
payload bits are placed into an image.

All iteration happens in IEEE-754 binary64 with a fixed evaluation order
(no FMA, no extended precision), so two independent runs with the same
key material reproduce the exact same position stream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import islice
from typing import TYPE_CHECKING, Iterator, NamedTuple

from .errors import DomainError, InsufficientCapacity

if TYPE_CHECKING:
    from .keymat import PublicCoupling, SecretKeySet

#: Nudge applied to orbit values that hit the absorbing chain {0, 0.5, 1}
#: (0.5 -> 0 -> 1 -> 1 -> ...), which would otherwise freeze the stream.
EPSILON = 2.0 ** -40


class ImageDims(NamedTuple):
    """Grid size: ``rows`` x ``cols``."""

    rows: int
    cols: int


class PixelPosition(NamedTuple):
    """1-based pixel coordinate: ``col`` in [1, cols], ``row`` in [1, rows]."""

    col: int
    row: int


class ChaosState(NamedTuple):
    """Orbit point of the coupled system after ``n`` iterations."""

    x: float
    y: float
    n: int


@dataclass
class PositionStream:
    """Ordered, duplicate-free pixel positions for a given grid."""

    positions: list[PixelPosition] = field(default_factory=list)
    dims: ImageDims = ImageDims(1, 1)

    def __len__(self) -> int:
        return len(self.positions)

    def __iter__(self):
        return iter(self.positions)

    def __getitem__(self, index):
        return self.positions[index]


def _check_dims(dims: ImageDims) -> ImageDims:
    rows, cols = int(dims[0]), int(dims[1])
    if rows < 1 or cols < 1:
        raise DomainError("image dims must be at least 1x1")
    return ImageDims(rows, cols)


def map_step(x: float, alpha: float) -> float:
    """One iteration of the rational map on the open unit interval.

    Returns a**2 (2x-1)**2 / [4x(1-x) + a**2 (2x-1)**2].  The numerator is
    evaluated fully, then the denominator, then a single division; that
    fixed order keeps independent binary64 builds bit-for-bit identical.
    """
    if not (0.0 < x < 1.0):
        raise DomainError("map input must lie strictly between 0 and 1")
    if not (alpha > 0.5) or not math.isfinite(alpha):
        raise DomainError("map parameter must be finite and greater than 0.5")
    t = 2.0 * x - 1.0
    num = (alpha * alpha) * (t * t)
    den = (4.0 * x) * (1.0 - x) + num
    return num / den


def sanitize(u: float) -> float:
    """Pull an orbit value back into (0,1) away from the absorbing set.

    Values above 1 are wrapped to their fractional part first; exact hits
    on 0, 0.5 or 1 are shifted by 2**-40 so the orbit cannot die.
    """
    if u > 1.0:
        u = u - math.floor(u)
    if u == 0.0:
        return EPSILON
    if u == 1.0:
        return 1.0 - EPSILON
    if u == 0.5:
        return 0.5 + EPSILON
    return u


def initial_state(keys: SecretKeySet) -> ChaosState:
    """Uncoupled bootstrap: both maps advance once from their own seeds.

    Coupling applies from the second step on; the very first state is
    x1 = f1(x0), y1 = f2(y0), sanitized before storage.
    """
    x = sanitize(map_step(sanitize(keys.x0), keys.alpha1))
    y = sanitize(map_step(sanitize(keys.y0), keys.alpha2))
    return ChaosState(x, y, 1)


def coupled_step(state: ChaosState, alpha1: float, alpha2: float, r: float) -> ChaosState:
    """Advance the cross-coupled pair one step.

    Each map is fed the other map's previous output scaled by the public
    coupling factor; both outputs are sanitized before storage.
    """
    if not (0.0 < r <= 1.0):
        raise DomainError("coupling factor must satisfy 0 < R <= 1")
    x = sanitize(map_step(sanitize(r * state.y), alpha1))
    y = sanitize(map_step(sanitize(r * state.x), alpha2))
    return ChaosState(x, y, state.n + 1)


def to_pixel(x: float, y: float, dims: ImageDims) -> PixelPosition:
    """Convert an orbit point in [0,1]^2 to 1-based pixel coordinates.

    col = floor(x * cols) + 1 and row = floor(y * rows) + 1, clamped into
    range (x = 1 would otherwise index one past the last column).
    """
    rows, cols = _check_dims(dims)
    col = int(math.floor(x * cols)) + 1
    row = int(math.floor(y * rows)) + 1
    col = min(max(col, 1), cols)
    row = min(max(row, 1), rows)
    return PixelPosition(col, row)


def iteration_cap(dims: ImageDims) -> int:
    """Step budget for position generation: 20*M*N*max(1, ln(M*N))."""
    rows, cols = dims
    cells = rows * cols
    return int(20 * cells * max(1.0, math.log(cells)))


def iter_positions(keys: SecretKeySet, coupling: PublicCoupling, dims: ImageDims) -> Iterator[PixelPosition]:
    """Yield unique pixel positions in orbit order (first occurrence kept).

    The loop below inlines :func:`map_step`, :func:`sanitize` and
    :func:`to_pixel` for speed; it performs the exact same binary64
    operations in the same order, which the test suite cross-checks
    against the step-by-step functions.  Raises
    :class:`InsufficientCapacity` once the iteration cap is exhausted.
    """
    rows, cols = _check_dims(dims)
    r = coupling.value
    if not (0.0 < r <= 1.0) or not math.isfinite(r):
        raise DomainError("coupling factor must satisfy 0 < R <= 1")
    a1, a2 = keys.alpha1, keys.alpha2
    if not (a1 > 0.5) or not math.isfinite(a1) or not (a2 > 0.5) or not math.isfinite(a2):
        raise DomainError("map parameters must be finite and greater than 0.5")
    a1sq = a1 * a1
    a2sq = a2 * a2

    # Uncoupled bootstrap (n = 1).
    x = sanitize(keys.x0)
    y = sanitize(keys.y0)
    t = 2.0 * x - 1.0
    num = a1sq * (t * t)
    x_next = num / ((4.0 * x) * (1.0 - x) + num)
    t = 2.0 * y - 1.0
    num = a2sq * (t * t)
    y_next = num / ((4.0 * y) * (1.0 - y) + num)
    x = sanitize(x_next)
    y = sanitize(y_next)

    cap = iteration_cap(ImageDims(rows, cols))
    seen: set[int] = set()
    steps = 1
    while True:
        col = int(x * cols) + 1  # x in (0,1): int() is floor here
        row = int(y * rows) + 1
        if col > cols:
            col = cols
        if row > rows:
            row = rows
        key = col * (rows + 1) + row
        if key not in seen:
            seen.add(key)
            yield PixelPosition(col, row)
        if steps >= cap:
            raise InsufficientCapacity(
                "position generator exhausted its iteration cap "
                f"({cap} steps, {len(seen)} unique positions found)"
            )
        # Cross-coupled step, sanitized before storage.
        u = sanitize(r * y)
        t = 2.0 * u - 1.0
        num = a1sq * (t * t)
        x_next = num / ((4.0 * u) * (1.0 - u) + num)
        u = sanitize(r * x)
        t = 2.0 * u - 1.0
        num = a2sq * (t * t)
        y_next = num / ((4.0 * u) * (1.0 - u) + num)
        x = sanitize(x_next)
        y = sanitize(y_next)
        steps += 1


def select_positions(keys: SecretKeySet, coupling: PublicCoupling, dims: ImageDims, count: int) -> PositionStream:
    """Collect the first ``count`` unique positions of the keyed stream."""
    rows, cols = _check_dims(dims)
    if count < 0:
        raise DomainError("count must be non-negative")
    if count > rows * cols:
        raise InsufficientCapacity(
            f"requested {count} unique positions from a grid of {rows * cols} cells"
        )
    positions = list(islice(iter_positions(keys, coupling, dims), count))
    return PositionStream(positions, ImageDims(rows, cols))


def bifurcation_scan(
    alpha_min: float,
    alpha_max: float,
    alpha_steps: int,
    x0: float,
    transient: int,
    samples: int,
) -> list[tuple[float, list[float]]]:
    """Attractor samples across a uniform parameter grid.

    For each alpha the map is iterated ``transient`` times from ``x0``
    (discarded), then ``samples`` further iterates are recorded.
    """
    if not (0.5 < alpha_min < alpha_max) or not math.isfinite(alpha_max):
        raise DomainError("parameter grid must satisfy 0.5 < alpha_min < alpha_max")
    if alpha_steps < 1:
        raise DomainError("alpha_steps must be at least 1")
    if not (0.0 < x0 < 1.0) or x0 == 0.5:
        raise DomainError("x0 must lie in (0,1) excluding 0.5")
    if transient < 0 or samples < 0:
        raise DomainError("transient and samples must be non-negative")

    if alpha_steps == 1:
        grid = [alpha_min]
    else:
        step = (alpha_max - alpha_min) / (alpha_steps - 1)
        grid = [alpha_min + i * step for i in range(alpha_steps)]

    out: list[tuple[float, list[float]]] = []
    for alpha in grid:
        x = sanitize(x0)
        for _ in range(transient):
            x = sanitize(map_step(x, alpha))
        recorded: list[float] = []
        for _ in range(samples):
            x = sanitize(map_step(x, alpha))
            recorded.append(x)
        out.append((alpha, recorded))
    return out


_DIFF_H = 1e-7
_LYAPUNOV_TRANSIENT = 1000


def _numeric_slope(x: float, alpha: float) -> float:
    # Central difference; one-sided at the interval edges where a
    # symmetric stencil would leave (0,1).
    if x + _DIFF_H >= 1.0:
        return (map_step(x, alpha) - map_step(x - _DIFF_H, alpha)) / _DIFF_H
    if x - _DIFF_H <= 0.0:
        return (map_step(x + _DIFF_H, alpha) - map_step(x, alpha)) / _DIFF_H
    return (map_step(x + _DIFF_H, alpha) - map_step(x - _DIFF_H, alpha)) / (2.0 * _DIFF_H)


def lyapunov_estimate(alpha: float, x0: float, n_iters: int) -> float:
    """Average log-slope along the orbit, via finite differences.

    Positive values are evidence of chaos for the given parameter; the
    map family is only guaranteed interesting on part of its parameter
    range, so this is a diagnostic rather than a certificate.
    """
    if not (alpha > 0.5) or not math.isfinite(alpha):
        raise DomainError("map parameter must be finite and greater than 0.5")
    if not (0.0 < x0 < 1.0) or x0 == 0.5:
        raise DomainError("x0 must lie in (0,1) excluding 0.5")
    if n_iters < 10_000:
        raise DomainError("n_iters must be at least 10000")

    x = sanitize(x0)
    for _ in range(_LYAPUNOV_TRANSIENT):
        x = sanitize(map_step(x, alpha))
    total = 0.0
    for _ in range(n_iters):
        d = _numeric_slope(x, alpha)
        if d != 0.0:  # a zero slope sample would send the log to -inf
            total += math.log(abs(d))
        x = sanitize(map_step(x, alpha))
    return total / n_iters
