"""Synthetic signals and dataset generators used by the benchmarks."""

import math

import numpy as np

from ._streams import DATA, NOISE, stream_rng
from .core import grid_dataset, sphere_dataset
from .errors import UnknownSignalError


def fig5_signal(points):
    """2 tanh(x1) + cos(10 x2) + 2 x3 on the unit sphere."""
    points = np.atleast_2d(points)
    return 2.0 * np.tanh(points[:, 0]) + np.cos(10.0 * points[:, 1]) + 2.0 * points[:, 2]


def planes_signal(points):
    """Three banded great circles (one tilted), narrow plus diffuse bands."""
    points = np.atleast_2d(points)
    x1, x2, x3 = points[:, 0], points[:, 1], points[:, 2]
    tilt = (x1 * math.cos(math.radians(35.0))
            - x2 * math.sin(math.radians(35.0))
            + x3 * math.sin(math.radians(35.0))) ** 2
    out = np.zeros(points.shape[0])
    for band in (x3 ** 2, x2 ** 2, tilt):
        out += np.exp(-16.0 * band) + 1.5 * np.exp(-16.0 * band / 9.0)
    return out


def _irregular_signal(points):
    raise UnknownSignalError(
        "the 'irregular' benchmark has no closed form; supply a CSV of "
        "(x, y, z, value) samples and load it with load_sphere_csv instead"
    )


SIGNALS = {
    "fig5": fig5_signal,
    "planes": planes_signal,
    "irregular": _irregular_signal,
}

_SD_CACHE = {}
_SD_POINTS = 100_000


def get_signal(signal_id):
    try:
        return SIGNALS[signal_id]
    except KeyError:
        raise UnknownSignalError(
            f"unknown signal {signal_id!r}; choose from {sorted(SIGNALS)}"
        ) from None


def fibonacci_sphere(count):
    """Deterministic quasi-uniform spiral points on the unit sphere."""
    i = np.arange(count, dtype=np.float64)
    z = 1.0 - 2.0 * (i + 0.5) / count
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    golden = math.pi * (3.0 - math.sqrt(5.0))
    theta = golden * i
    return np.stack([r * np.cos(theta), r * np.sin(theta), z], axis=1)


def signal_sd(signal_id):
    """Standard deviation of a signal over a fixed quasi-random design."""
    if signal_id not in _SD_CACHE:
        values = get_signal(signal_id)(fibonacci_sphere(_SD_POINTS))
        _SD_CACHE[signal_id] = float(values.std())
    return _SD_CACHE[signal_id]


def uniform_sphere_points(n, rng):
    points = rng.standard_normal((n, 3))
    norms = np.linalg.norm(points, axis=1)
    while np.any(norms < 1e-12):
        bad = norms < 1e-12
        points[bad] = rng.standard_normal((int(bad.sum()), 3))
        norms = np.linalg.norm(points, axis=1)
    return points / norms[:, None]


def generate_sphere_synthetic(signal_id, n, noise_frac, seed):
    """Uniform sphere locations with noisy signal responses.

    Noise is Gaussian with standard deviation noise_frac * sd(signal),
    the sd estimated once per signal on a fixed quasi-random design.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    signal = get_signal(signal_id)
    points = uniform_sphere_points(n, stream_rng(seed, DATA, 0))
    clean = signal(points)
    scale = noise_frac * signal_sd(signal_id)
    noise = scale * stream_rng(seed, NOISE, 0).standard_normal(n) if scale > 0 else 0.0
    return sphere_dataset(points, clean + noise)


def sphere_test_grid(signal_id, n, seed):
    """Held-out uniform locations with clean signal values."""
    points = uniform_sphere_points(n, stream_rng(seed, DATA, 1))
    return points, get_signal(signal_id)(points)


# ---------------------------------------------------------------------------
# grid synthetics
# ---------------------------------------------------------------------------

def piecewise_image(size, n_blocks=6, seed=0, rng=None):
    """Piecewise-constant image: random rectangles on a flat background.

    Rectangle corners are drawn uniformly, so edges generally avoid the
    dyadic midlines a balanced tree would split at.
    """
    if rng is None:
        rng = stream_rng(seed, DATA, 2)
    img = np.zeros((size, size))
    for _ in range(n_blocks):
        r0, r1 = np.sort(rng.integers(0, size, size=2))
        c0, c1 = np.sort(rng.integers(0, size, size=2))
        img[r0:r1 + 1, c0:c1 + 1] += rng.uniform(-1.0, 1.0)
    return img


def diamond_image(size, radius=None, value=1.0):
    """Flat background with a filled diamond; edges known analytically."""
    if radius is None:
        radius = size // 3
    center = (size - 1) / 2.0
    rows, cols = np.indices((size, size))
    img = np.zeros((size, size))
    img[np.abs(rows - center) + np.abs(cols - center) <= radius] = value
    return img


def diamond_edge_band(size, radius=None, band=2):
    """Mask of pixels within `band` of the diamond boundary."""
    if radius is None:
        radius = size // 3
    center = (size - 1) / 2.0
    rows, cols = np.indices((size, size))
    dist = np.abs(np.abs(rows - center) + np.abs(cols - center) - radius)
    return dist <= band


def blocks_1d(n, levels=(0.0, 2.0, -1.0, 3.0)):
    """Step signal with len(levels) equal blocks on n points."""
    edges = np.linspace(0, n, len(levels) + 1).astype(int)
    out = np.empty(n)
    for value, lo, hi in zip(levels, edges[:-1], edges[1:]):
        out[lo:hi] = value
    return out


def image_dataset(img):
    """Lattice dataset from a 2-D (or d-D) array, row-major responses."""
    img = np.asarray(img, dtype=np.float64)
    coords = np.indices(img.shape).reshape(img.ndim, -1).T.astype(np.float64)
    return grid_dataset(coords, img.ravel(), axis_sizes=img.shape)
