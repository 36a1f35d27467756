"""Numerical Analysis of the Fundamental Frequency.

A complex signal ``f(t)`` sampled on a regular grid is approximated by
``sum_k a_k exp(i nu_k t)``. Each frequency maximises the modulus of the
Hanning-weighted correlation

    A(nu) = sum_k w_k chi_p(t_k) f_k exp(-i nu t_k) / sum_k w_k chi_p(t_k),

with ``chi_p(t) = (1 + cos(pi (t - t_mid) / K_half))^p`` and trapezoid
weights ``w_k``. The peak is bracketed on a 4x zero-padded FFT grid and then
polished by safeguarded Newton iterations on ``d|A|^2/dnu``, which is known
in closed form. Several windows of equal length are processed as one batch.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FlatSpectrum, WindowTooShort

MIN_SAMPLES = 32
PAD_FACTOR = 4
FLAT_TOL = 1e-14
NEWTON_MAX_ITER = 60
NU_RTOL = 1e-12


@dataclass(frozen=True)
class Signal:
    samples: np.ndarray
    dt: float = 1.0
    t0: float = 0.0

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=complex).ravel()
        if s.size < MIN_SAMPLES:
            raise WindowTooShort(f"signal needs at least {MIN_SAMPLES} samples, got {s.size}")
        if not np.all(np.isfinite(s)):
            raise ValueError("signal samples must be finite")
        if not self.dt > 0:
            raise ValueError("dt must be > 0")
        object.__setattr__(self, "samples", s)

    @property
    def times(self):
        return self.t0 + self.dt * np.arange(self.samples.size)

    @property
    def span(self):
        return self.dt * (self.samples.size - 1)


@dataclass(frozen=True)
class DecompositionTerm:
    freq: float
    amp: complex


def hanning_weights(n: int, p: int):
    """Trapezoid weights times ``(1 + cos)^p`` on ``n`` samples, normalised to sum 1."""
    if p < 0:
        raise ValueError("Hanning order must be >= 0")
    x = np.linspace(-1.0, 1.0, n)
    chi = (1.0 + np.cos(np.pi * x)) ** p
    w = np.ones(n)
    w[0] = w[-1] = 0.5
    g = w * chi
    return g / g.sum()


def _inner(weights, f, g):
    return np.sum(weights * f * np.conj(g), axis=-1)


def windowed_amplitude(sig: Signal, nu: float, p: int = 1) -> complex:
    """Hanning-weighted correlation of the signal with ``exp(i nu t)``."""
    g = hanning_weights(sig.samples.size, p)
    return complex(np.sum(g * sig.samples * np.exp(-1j * nu * sig.times)))


def _wrap(nu, dt):
    """Fold angular frequencies into ``(-pi/dt, pi/dt]``."""
    half = np.pi / dt
    return half - np.mod(half - nu, 2 * half)


def _fundamental_batch(windows, dt: float, p: int):
    """Fundamental frequency and amplitude of each row of ``windows``.

    Times inside a window are measured from its centre, so returned
    amplitudes refer to the window midpoint.
    """
    windows = np.atleast_2d(windows)
    L, N = windows.shape
    g = hanning_weights(N, p)
    G = windows * g
    tau = (np.arange(N) - 0.5 * (N - 1)) * dt

    spec = np.abs(np.fft.fft(G, n=PAD_FACTOR * N, axis=1))
    j = np.argmax(spec, axis=1)
    peak = spec[np.arange(L), j]
    rms = np.sqrt(np.mean(np.abs(windows) ** 2, axis=1))
    if np.any(peak <= FLAT_TOL * rms):
        raise FlatSpectrum("no spectral peak above the flatness threshold")
    # fft bin j sits at nu = 2 pi j / (PAD*N*dt), sampled with phase origin at
    # the first sample; moving the origin to the centre leaves |A| unchanged
    bin_width = 2 * np.pi / (PAD_FACTOR * N * dt)
    nu0 = j * bin_width

    tau2 = tau * tau

    def derivs(nu):
        Ge = G * np.exp(-1j * nu[:, None] * tau[None, :])
        S = Ge.sum(axis=1)
        S1 = -1j * (Ge @ tau)
        S2 = -(Ge @ tau2)
        D = np.real(np.conj(S) * S1)
        D1 = np.abs(S1) ** 2 + np.real(np.conj(S) * S2)
        return S, D, D1

    lo = nu0 - bin_width
    hi = nu0 + bin_width
    _, Dlo, _ = derivs(lo)
    _, Dhi, _ = derivs(hi)
    for _ in range(8):
        # widen until d|A|^2/dnu changes sign from + to - across the bracket
        fix_lo = Dlo <= 0
        fix_hi = Dhi >= 0
        if not (np.any(fix_lo) or np.any(fix_hi)):
            break
        lo = np.where(fix_lo, lo - bin_width, lo)
        hi = np.where(fix_hi, hi + bin_width, hi)
        _, Dlo, _ = derivs(lo)
        _, Dhi, _ = derivs(hi)
    bracketed = (Dlo > 0) & (Dhi < 0)

    nu = nu0.astype(float).copy()
    scale = np.maximum(np.abs(nu0), bin_width)
    done = ~bracketed
    for _ in range(NEWTON_MAX_ITER):
        S, D, D1 = derivs(nu)
        lo = np.where(D > 0, nu, lo)
        hi = np.where(D < 0, nu, hi)
        with np.errstate(divide="ignore", invalid="ignore"):
            new = nu - D / D1
        bad = ~((new >= lo) & (new <= hi)) | ~(D1 < 0)
        new = np.where(bad, 0.5 * (lo + hi), new)
        step = np.abs(new - nu)
        nu = np.where(done, nu, new)
        done |= (step <= NU_RTOL * scale) | (hi - lo <= 4e-16 * scale)
        if np.all(done):
            break
    S, _, _ = derivs(nu)
    return _wrap(nu, dt), S


def extract_fundamental(sig: Signal, p: int = 1) -> DecompositionTerm:
    """Frequency with the largest windowed amplitude, and that amplitude."""
    nu, _ = _fundamental_batch(sig.samples[None, :], sig.dt, p)
    nu = float(nu[0])
    return DecompositionTerm(freq=nu, amp=windowed_amplitude(sig, nu, p))


def decompose(sig: Signal, n_terms: int, p: int = 1) -> list[DecompositionTerm]:
    """Iterative quasi-periodic approximation with ``n_terms`` frequencies.

    Each new exponential is orthogonalised (modified Gram-Schmidt, weighted
    inner product) against those already found before its component is
    removed from the residual. Final amplitudes solve the weighted normal
    equations. Stops early if the residual spectrum goes flat.
    """
    if n_terms < 1:
        raise ValueError("n_terms must be >= 1")
    t = sig.times
    g = hanning_weights(sig.samples.size, p)
    residual = sig.samples.copy()
    freqs, basis = [], []
    for _ in range(n_terms):
        try:
            nu, _ = _fundamental_batch(residual[None, :], sig.dt, p)
        except FlatSpectrum:
            break
        nu = float(nu[0])
        e = np.exp(1j * nu * t)
        u = e.copy()
        for q in basis:
            u = u - _inner(g, u, q) * q
        norm = np.sqrt(np.real(_inner(g, u, u)))
        if norm < 1e-12:
            break
        u = u / norm
        residual = residual - _inner(g, residual, u) * u
        freqs.append(nu)
        basis.append(u)
    if not freqs:
        raise FlatSpectrum("signal has no extractable frequency")
    E = np.exp(1j * np.outer(freqs, t))
    gram = np.array([[_inner(g, ej, ei) for ej in E] for ei in E])
    rhs = np.array([_inner(g, sig.samples, ei) for ei in E])
    amps = np.linalg.solve(gram, rhs)
    terms = [DecompositionTerm(freq=f, amp=complex(a)) for f, a in zip(freqs, amps)]
    return sorted(terms, key=lambda term: -abs(term.amp))


def reconstruct(terms, times):
    times = np.asarray(times, dtype=float)
    out = np.zeros(times.shape, dtype=complex)
    for term in terms:
        out += term.amp * np.exp(1j * term.freq * times)
    return out


def _window_starts(n_samples, dt, k1, stride):
    n_win = int(round(k1 / dt))
    n_stride = int(round(stride / dt))
    if abs(n_win * dt - k1) > 1e-9 * k1 or abs(n_stride * dt - stride) > 1e-9 * stride:
        raise ValueError("window length and stride must be multiples of dt")
    if n_win + 1 < MIN_SAMPLES:
        raise WindowTooShort(f"window of {n_win + 1} samples is shorter than {MIN_SAMPLES}")
    if n_win + 1 > n_samples:
        raise ValueError("window is longer than the signal")
    return np.arange(0, n_samples - n_win, n_stride), n_win + 1


def window_frequencies(sig: Signal, k1: float, stride: float, p: int = 1):
    """Fundamental frequency on every full window ``[t_l, t_l + k1]``.

    ``t_l = t0 + stride * l``; windows hold ``k1/dt + 1`` samples.
    """
    if stride <= 0:
        raise ValueError("stride must be > 0")
    starts, width = _window_starts(sig.samples.size, sig.dt, k1, stride)
    view = np.lib.stride_tricks.sliding_window_view(sig.samples, width)[starts]
    nu, _ = _fundamental_batch(view, sig.dt, p)
    return nu
