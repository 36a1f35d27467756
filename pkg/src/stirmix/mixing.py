"""Frequency-map scans and the robust-fraction mixing measure.

Orbits of the Poincare map are cut into overlapping windows; NAFF gives one
fundamental frequency per window, and the spread of those frequencies is
turned into the indicator

    eps = -ln |2 (max nu - min nu) / (max nu + min nu)|,

large for orbits on invariant curves. The robust fraction ``m`` is the share
of initial points with ``eps > eps_thr``.

Scans are split into fixed-size chunks of points that are iterated together;
chunks are independent and may run in worker processes. Chunk boundaries do
not depend on the worker count, so results are bit-identical for any
number of workers.
"""
from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateMean, EmptyInput, FlatSpectrum
from .naff import Signal, _fundamental_batch, window_frequencies
from .vortex_core import TankConfig, iterate_orbits

EPS_CAP = 30.0
GRID_EXCLUSION = 1e-6
CHUNK = 128

FLAG_OK = ""
FLAG_VORTEX = "vortex"
FLAG_MEAN = "degenerate_mean"
FLAG_FLAT = "flat_spectrum"


@dataclass(frozen=True)
class Preset:
    name: str
    n_iter: int
    k1: int
    stride: int
    grid_spacing: float
    n_points: int


DESK = Preset("desk", n_iter=4096, k1=2048, stride=128, grid_spacing=0.05, n_points=200)
PAPER = Preset("paper", n_iter=100000, k1=50000, stride=50, grid_spacing=0.01, n_points=1000)
PRESETS = {"desk": DESK, "paper": PAPER}


@dataclass
class FrequencyScanRow:
    zeta0: complex
    nu: float
    window_nus: np.ndarray = field(repr=False)
    eps: float
    flag: str = FLAG_OK


@dataclass(frozen=True)
class RegimeReport:
    b: float
    T: float
    m: float
    label: str
    eps_thr: float
    grid_spacing: float


def diffusion_indicator(window_nus, cap: float = EPS_CAP) -> float:
    """Frequency-diffusion indicator of a set of window frequencies."""
    nus = np.asarray(window_nus, dtype=float)
    if nus.size < 2:
        raise ValueError("need at least two window frequencies")
    hi, lo = nus.max(), nus.min()
    if abs(hi + lo) < 1e-300:
        raise DegenerateMean("window frequencies are symmetric about zero")
    spread = abs(2.0 * (hi - lo) / (hi + lo))
    if spread == 0.0:
        return cap
    return min(-np.log(spread), cap)


def robust_fraction(data, eps_thr: float) -> float:
    """Share of entries with ``eps > eps_thr``; flagged entries never count.

    ``data`` is a sequence of rows with ``eps``/``flag`` attributes, or an
    array of indicator values where NaN marks a flagged point.
    """
    if len(data) == 0:
        raise EmptyInput("no points to measure")
    first = data[0]
    if hasattr(first, "eps"):
        good = [row.eps > eps_thr and not row.flag for row in data]
        return sum(good) / len(good)
    eps = np.asarray(data, dtype=float)
    with np.errstate(invalid="ignore"):
        return float(np.count_nonzero(eps > eps_thr)) / eps.size


def classify_regime(m: float) -> str:
    """I (integrable) above 0.6, T (transitional) above 0.3, else C (chaotic)."""
    if not 0.0 <= m <= 1.0:
        raise ValueError(f"m must lie in [0, 1], got {m}")
    if m > 0.6:
        return "I"
    if m > 0.3:
        return "T"
    return "C"


def analyze_orbit(samples, k1: int, stride: int, p: int = 1, cap: float = EPS_CAP):
    """``(nu, window_nus, eps, flag)`` for one orbit sampled once per period."""
    try:
        nu, _ = _fundamental_batch(np.asarray(samples)[None, :], 1.0, p)
        nus = window_frequencies(Signal(samples), k1, stride, p)
    except FlatSpectrum:
        return np.nan, np.array([]), np.nan, FLAG_FLAT
    try:
        eps = diffusion_indicator(nus, cap)
    except DegenerateMean:
        return float(nu[0]), nus, np.nan, FLAG_MEAN
    return float(nu[0]), nus, eps, FLAG_OK


def _scan_chunk(args):
    z0, cfg, n_iter, k1, stride, p, cap, first_sign = args
    orbits, failed_at = iterate_orbits(z0, cfg, n_iter, first_sign)
    out = []
    for j in range(z0.size):
        if failed_at[j] >= 0:
            out.append((np.nan, np.array([]), np.nan, FLAG_VORTEX))
        else:
            out.append(analyze_orbit(orbits[:, j], k1, stride, p, cap))
    return out


def scan_points(z0, cfg: TankConfig, n_iter: int, k1: int, stride: int, p: int = 1,
                cap: float = EPS_CAP, workers: int = 1, first_sign: int = 1):
    """Analyze the orbit of every initial point; results follow input order."""
    z0 = np.asarray(z0, dtype=complex).ravel()
    chunks = [
        (z0[i:i + CHUNK], cfg, n_iter, k1, stride, p, cap, first_sign)
        for i in range(0, z0.size, CHUNK)
    ]
    if workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_scan_chunk, chunks))
    else:
        parts = [_scan_chunk(c) for c in chunks]
    return list(itertools.chain.from_iterable(parts))


def frequency_map_scan(cfg: TankConfig, n_points: int = 1000, y_range=(0.0, None),
                       n_iter: int = 50000, p: int = 1, k1: int | None = None,
                       stride: int | None = None, workers: int = 1):
    """NAFF scan of initial points ``i*y`` equally spaced on a vertical segment.

    Defaults to ``k1 = n_iter // 2`` and ``stride = k1 // 16``. Points at a
    vortex are reported with a flag rather than dropped.
    """
    y_lo, y_hi = y_range
    y_hi = cfg.R if y_hi is None else y_hi
    if not 0 <= y_lo < y_hi <= cfg.R:
        raise ValueError(f"y_range must satisfy 0 <= y_lo < y_hi <= R, got {y_range}")
    if n_points < 1:
        raise ValueError("n_points must be >= 1")
    k1 = n_iter // 2 if k1 is None else k1
    stride = max(k1 // 16, 1) if stride is None else stride
    ys = np.linspace(y_lo, y_hi, n_points) if n_points > 1 else np.array([y_lo])
    z0 = 1j * ys
    res = scan_points(z0, cfg, n_iter, k1, stride, p, workers=workers)
    return [FrequencyScanRow(complex(z), *r) for z, r in zip(z0, res)]


def disk_grid(spacing: float, R: float = 1.0):
    """Points ``(i h, j h)`` strictly inside the disk of radius ``R``, row-major in y then x."""
    n = int(np.floor(R / spacing))
    k = np.arange(-n, n + 1) * spacing
    X, Y = np.meshgrid(k, k)
    x, y = X.ravel(), Y.ravel()
    inside = x * x + y * y < R * R * (1 - 1e-12)
    return x[inside] + 1j * y[inside]


@dataclass
class GridResult:
    zeta0: np.ndarray
    nu: np.ndarray
    eps: np.ndarray
    flag: list


def grid_scan(cfg: TankConfig, grid_spacing: float, n_iter: int, k1: int, stride: int,
              p: int = 1, workers: int = 1, exclusion: float = GRID_EXCLUSION) -> GridResult:
    """Indicator on the disk grid; points near a vortex are flagged, not iterated."""
    z0 = disk_grid(grid_spacing, cfg.R)
    near = (np.abs(z0 - cfg.b) < exclusion) | (np.abs(z0 + cfg.b) < exclusion)
    nu = np.full(z0.size, np.nan)
    eps = np.full(z0.size, np.nan)
    flags = [FLAG_VORTEX if bad else FLAG_OK for bad in near]
    idx = np.flatnonzero(~near)
    res = scan_points(z0[idx], cfg, n_iter, k1, stride, p, workers=workers)
    for i, (nu_i, _, eps_i, flag) in zip(idx, res):
        nu[i], eps[i], flags[i] = nu_i, eps_i, flag
    return GridResult(z0, nu, eps, flags)


def efficiency_scan(b_values, T_values, cfg_template: TankConfig, grid_spacing: float,
                    n_iter: int, k1: int, stride: int, eps_thr: float = 12.0,
                    p: int = 1, workers: int = 1, keep_grids: bool = False):
    """Robust fraction and regime label for every ``(b, T)`` pair, sorted by ``(b, T)``.

    With ``keep_grids`` the per-cell ``GridResult`` objects are returned too.
    """
    reports, grids = [], []
    for b, T in sorted(itertools.product(b_values, T_values)):
        cfg = TankConfig(R=cfg_template.R, gamma=cfg_template.gamma, b=b, T=T)
        grid = grid_scan(cfg, grid_spacing, n_iter, k1, stride, p, workers)
        eps = np.where([bool(f) for f in grid.flag], np.nan, grid.eps)
        m = robust_fraction(eps, eps_thr)
        reports.append(RegimeReport(b, T, m, classify_regime(m), eps_thr, grid_spacing))
        grids.append(grid)
    return (reports, grids) if keep_grids else reports
