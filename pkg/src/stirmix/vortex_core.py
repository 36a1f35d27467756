"""Exact Poincare map of the blinking-vortex stirrer.

The agitator sits at ``+b`` during the first half of each period and at
``-b`` during the second half. On each half period the flow is autonomous:
a fluid particle moves on a circle of the Apollonius family around the
active vortex, and its angular position on that circle obeys a Kepler
equation. The map is therefore evaluated in closed form up to one scalar
root solve per half step.

Points are complex numbers; every function accepts a scalar or a numpy
array of points and returns the same shape.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import jv

from .errors import (
    ConfigError,
    DegenerateArc,
    NoConvergence,
    PointAtVortex,
    SingularityApproach,
)

TWO_PI = 2.0 * np.pi

KEPLER_TOL = 1e-13
KEPLER_MAX_ITER = 64
BESSEL_TERMS = 10
EXCLUSION = 1e-12  # relative to R


@dataclass(frozen=True)
class TankConfig:
    """Tank radius ``R``, vortex strength ``gamma``, offset ``b``, period ``T``.

    ``T = 0`` is accepted and makes every map the identity.
    """

    R: float = 1.0
    gamma: float = TWO_PI
    b: float = 0.5
    T: float = 0.05

    def __post_init__(self):
        for name in ("R", "gamma", "b", "T"):
            if not np.isfinite(getattr(self, name)):
                raise ConfigError(name, "must be finite")
        if self.R <= 0:
            raise ConfigError("R", f"must be > 0, got {self.R}")
        if self.gamma == 0:
            raise ConfigError("gamma", "must be nonzero")
        if not 0 < self.b < self.R:
            raise ConfigError("b", f"must satisfy 0 < b < R={self.R}, got {self.b}")
        if self.T < 0:
            raise ConfigError("T", f"must be >= 0, got {self.T}")

    @property
    def exclusion_radius(self) -> float:
        return EXCLUSION * self.R


@dataclass(frozen=True)
class ArcParams:
    """Circular arc followed by a point while one vortex is active.

    ``lam`` is the conserved Mobius modulus, ``zeta_c + rho*exp(i*phi)`` the
    point, ``ecc`` and ``n`` the Kepler eccentricity and mean angular rate.
    Fields are floats or arrays matching the input points.
    """

    lam: np.ndarray
    rho: np.ndarray
    zeta_c: np.ndarray
    phi: np.ndarray
    ecc: np.ndarray
    n: np.ndarray

    def point(self):
        return self.zeta_c + self.rho * np.exp(1j * self.phi)


def _scalar_or_array(x, like):
    return x.item() if np.ndim(like) == 0 else x


def level_modulus(zeta, cfg: TankConfig, vortex_sign: int = 1):
    """``b |(z - b) / (b z - R^2)|`` for the vortex at ``vortex_sign * b``."""
    z = vortex_sign * np.asarray(zeta, dtype=complex)
    b, R = cfg.b, cfg.R
    lam = b * np.abs(z - b) / np.abs(b * z - R * R)
    return _scalar_or_array(lam, zeta)


def _arc(z, cfg: TankConfig):
    """Arc parameters for the ``+b`` vortex, no validation."""
    b, R = cfg.b, cfg.R
    lam = b * np.abs(z - b) / np.abs(b * z - R * R)
    lam2 = lam * lam
    rho = lam / (1.0 - lam2) * (R * R / b - b)
    zc = (b * b - lam2 * R * R) / (b * (1.0 - lam2))
    phi = np.angle(z - zc)
    ecc = 2.0 * lam / (1.0 + lam2)
    with np.errstate(divide="ignore"):
        n = cfg.gamma / (TWO_PI * rho * rho) * (1.0 - lam2) / (1.0 + lam2)
    return lam, rho, zc, phi, ecc, n


def _check_points(z, cfg: TankConfig, exclusion):
    excl = cfg.exclusion_radius if exclusion is None else exclusion
    bad = np.abs(z - cfg.b) < excl
    if np.any(bad):
        raise PointAtVortex(f"point within {excl:g} of the vortex at {cfg.b:g}")


def arc_parameters(zeta, cfg: TankConfig, vortex_sign: int = 1, exclusion=None) -> ArcParams:
    """Arc geometry of ``zeta`` under the vortex at ``vortex_sign * b``.

    For ``vortex_sign = -1`` the returned arc is mapped back through
    ``z -> -z``, so ``ArcParams.point()`` reproduces ``zeta`` either way.
    """
    if vortex_sign not in (1, -1):
        raise ValueError("vortex_sign must be +1 or -1")
    z = vortex_sign * np.asarray(zeta, dtype=complex)
    _check_points(z, cfg, exclusion)
    lam, rho, zc, phi, ecc, n = _arc(z, cfg)
    if np.any(lam >= 1.0 - 1e-14):
        raise DegenerateArc("level modulus reached 1; point is outside the tank")
    if vortex_sign == -1:
        zc = -zc
        phi = np.angle(np.exp(1j * (phi + np.pi)))
    zc = zc + 0.0j if np.ndim(zc) else complex(zc)
    return ArcParams(*(_scalar_or_array(np.asarray(v), zeta) for v in (lam, rho, zc, phi, ecc, n)))


def _bessel_start(M, e):
    """Truncated Bessel-series solution of Kepler's equation."""
    k = np.arange(1, BESSEL_TERMS + 1)[:, None]
    terms = (2.0 / k) * jv(k, k * e[None, :]) * np.sin(k * M[None, :])
    return M + terms.sum(axis=0)


def solve_kepler(mean_anomaly, ecc, tol: float = KEPLER_TOL, max_iter: int = KEPLER_MAX_ITER):
    """Solve ``phi - ecc*sin(phi) = mean_anomaly`` for ``phi``.

    The mean anomaly is reduced to ``[-pi, pi]`` first; the root is
    bracketed by ``M +- ecc`` and refined with a sixth-order Householder
    step, falling back to bisection whenever a step leaves the bracket.
    Starting points come from the Bessel series when ``ecc > 0.5``.
    """
    M, e = np.broadcast_arrays(np.asarray(mean_anomaly, dtype=float), np.asarray(ecc, dtype=float))
    shape = M.shape
    M = M.ravel()
    e = e.ravel()
    if np.any((e < 0) | (e >= 1)) or not np.all(np.isfinite(M)):
        raise ValueError("need 0 <= ecc < 1 and finite mean anomaly")
    turns = np.round(M / TWO_PI)
    Mr = M - TWO_PI * turns
    lo = Mr - e
    hi = Mr + e
    phi = Mr.copy()
    big = e > 0.5
    if np.any(big):
        phi[big] = np.clip(_bessel_start(Mr[big], e[big]), lo[big], hi[big])

    for _ in range(max_iter):
        s = np.sin(phi)
        c = np.cos(phi)
        f = phi - e * s - Mr
        active = np.abs(f) > tol
        if not np.any(active):
            break
        hi = np.where(f > 0, phi, hi)
        lo = np.where(f < 0, phi, lo)
        d1 = 1.0 - e * c
        d2 = e * s
        d3 = e * c
        d = -f / d1
        d = -f / (d1 + d * d2 / 2)
        d = -f / (d1 + d * d2 / 2 + d**2 * d3 / 6)
        d = -f / (d1 + d * d2 / 2 + d**2 * d3 / 6 - d**3 * d2 / 24)
        d = -f / (d1 + d * d2 / 2 + d**2 * d3 / 6 - d**3 * d2 / 24 - d**4 * d3 / 120)
        new = phi + d
        outside = ~((new > lo) & (new < hi))
        new = np.where(outside, 0.5 * (lo + hi), new)
        phi = np.where(active, new, phi)
    else:
        f = phi - e * np.sin(phi) - Mr
        if np.any(np.abs(f) > tol):
            raise NoConvergence(f"Kepler iteration exceeded {max_iter} steps")
    # one Newton polish pushes the residual down to rounding level
    f = phi - e * np.sin(phi) - Mr
    phi = np.clip(phi - f / (1.0 - e * np.cos(phi)), lo, hi)

    out = (phi + TWO_PI * turns).reshape(shape)
    return out.item() if out.ndim == 0 else out


def _half_step_plus(z, cfg: TankConfig, tau: float):
    """Advance ``z`` for time ``tau`` under the ``+b`` vortex, no validation."""
    lam, rho, zc, phi0, ecc, n = _arc(z, cfg)
    M1 = phi0 - ecc * np.sin(phi0) + n * tau
    phi1 = solve_kepler(M1, ecc)
    return zc + rho * np.exp(1j * np.asarray(phi1))


def half_period_map(zeta, cfg: TankConfig, vortex_sign: int = 1, exclusion=None, tau=None):
    """Flow ``zeta`` for half a period (or ``tau``) with one vortex active.

    The ``-b`` map is the ``+b`` map conjugated by ``z -> -z``.
    """
    if vortex_sign not in (1, -1):
        raise ValueError("vortex_sign must be +1 or -1")
    tau = 0.5 * cfg.T if tau is None else tau
    z = np.array(zeta, dtype=complex, ndmin=1)
    if tau == 0:
        return _scalar_or_array(z.copy(), zeta)
    w = vortex_sign * z
    _check_points(w, cfg, exclusion)
    out = vortex_sign * _half_step_plus(w, cfg, tau)
    return _scalar_or_array(out, zeta)


def poincare_map(zeta, cfg: TankConfig, first_sign: int = 1, exclusion=None):
    """One full protocol period.

    ``first_sign = -1`` starts with the vortex at ``-b`` (the protocol
    shifted by half a period).
    """
    z = half_period_map(zeta, cfg, first_sign, exclusion)
    return half_period_map(z, cfg, -first_sign, exclusion)


def iterate_orbits(z0, cfg: TankConfig, n_iter: int, first_sign: int = 1, exclusion=None):
    """Iterate many points at once without raising.

    Returns ``(orbits, failed_at)``: ``orbits`` has shape ``(n_iter+1, npts)``
    and holds NaN from the failing iterate on; ``failed_at[j]`` is the index
    of the first iterate that could not be computed, or -1.
    """
    z = np.array(z0, dtype=complex, ndmin=1).ravel()
    excl = cfg.exclusion_radius if exclusion is None else exclusion
    out = np.full((n_iter + 1, z.size), np.nan + 0j)
    out[0] = z
    failed_at = np.full(z.size, -1)
    tau = 0.5 * cfg.T
    alive = np.ones(z.size, dtype=bool)
    for k in range(1, n_iter + 1):
        if tau > 0:
            for sign in (first_sign, -first_sign):
                w = sign * z
                bad = alive & (np.abs(w - cfg.b) < excl)
                if np.any(bad):
                    failed_at[bad] = k
                    alive &= ~bad
                    z = np.where(bad, np.nan, z)
                idx = np.flatnonzero(alive)
                if idx.size:
                    z[idx] = sign * _half_step_plus(w[idx], cfg, tau)
        out[k] = z
    return out, failed_at


def orbit(zeta0, cfg: TankConfig, n_iter: int, first_sign: int = 1, exclusion=None):
    """Poincare iterates ``[z0, P(z0), ..., P^n_iter(z0)]``.

    For an array of initial points the result has shape ``(n_iter+1, npts)``.
    Raises ``PointAtVortex`` carrying the index of the failing iterate.
    """
    if n_iter < 0:
        raise ValueError("n_iter must be >= 0")
    out, failed_at = iterate_orbits(zeta0, cfg, n_iter, first_sign, exclusion)
    if np.any(failed_at >= 0):
        k = int(failed_at[failed_at >= 0].min())
        raise PointAtVortex("orbit reached a vortex", index=k)
    return out[:, 0] if np.ndim(zeta0) == 0 else out.reshape((n_iter + 1,) + np.shape(zeta0))


def vortex_velocity(zeta, cfg: TankConfig, position: float):
    """Velocity induced by the agitator at real ``position`` plus its image."""
    z = np.asarray(zeta, dtype=complex)
    R2 = cfg.R * cfg.R
    w = cfg.gamma / (TWO_PI * 1j) * (position * position - R2) / ((z - position) * (z * position - R2))
    return np.conj(w)


def rk4_step(f, z, h):
    k1 = f(z)
    k2 = f(z + 0.5 * h * k1)
    k3 = f(z + 0.5 * h * k2)
    k4 = f(z + h * k3)
    return z + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def reference_integrate(zeta0, cfg: TankConfig, t_final: float, step: float, exclusion=None):
    """Fixed-step RK4 integration of the stirring flow from ``t = 0``.

    ``step`` must divide ``T/2`` so protocol switches fall on step
    boundaries; ``t_final`` must be a multiple of ``step``.
    """
    z = np.array(zeta0, dtype=complex, ndmin=1)
    if t_final == 0:
        return _scalar_or_array(z.copy(), zeta0)
    if step <= 0:
        raise ConfigError("step", "must be > 0")
    per_half = cfg.T / (2 * step)
    k_half = int(round(per_half))
    if k_half < 1 or abs(per_half - k_half) > 1e-9 * max(1.0, per_half):
        raise ConfigError("step", f"must divide T/2={cfg.T / 2:g}")
    n_steps = int(round(t_final / step))
    if abs(n_steps * step - t_final) > 1e-9 * max(1.0, t_final):
        raise ConfigError("t_final", "must be a multiple of step")
    excl = cfg.exclusion_radius if exclusion is None else exclusion
    fields = {
        1: lambda w: vortex_velocity(w, cfg, cfg.b),
        -1: lambda w: vortex_velocity(w, cfg, -cfg.b),
    }
    for k in range(n_steps):
        sign = 1 if (k // k_half) % 2 == 0 else -1
        if np.any(np.abs(z - sign * cfg.b) < excl):
            raise SingularityApproach(f"trajectory entered the exclusion radius at step {k}")
        z = rk4_step(fields[sign], z, step)
    return _scalar_or_array(z, zeta0)
