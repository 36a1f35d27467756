"""Averaged (two fixed vortices) system: levels, action and twist.

Averaging the protocol over one period gives two half-strength vortices at
``+b`` and ``-b``. Outside the figure-eight homoclinic loop its level
curves are closed curves around the origin, indexed by the exponentiated
energy ``E = exp(4*pi*H/gamma)`` which runs from ``b^2/R^4`` on the loop to
``1/R^2`` on the tank wall. In symplectic polar coordinates
``zeta = sqrt(2r) exp(i psi)`` a level curve is ``r = r(psi, E)``, and the
action is the enclosed area over ``2*pi``.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .errors import NoConvergence, NoRealRoot, OutOfRange, SingularPoint, ZeroTwist
from .vortex_core import TankConfig, rk4_step, vortex_velocity

QUAD_ORDER = 64
QUAD_TOL = 1e-11
QUAD_MAX_ORDER = 1 << 15
D1_STEP = 1e-6
D2_STEP = 1e-4
RICHARDSON_TOL = 1e-5
TWIST_TOL = 1e-8


@dataclass(frozen=True)
class ActionValue:
    I: float
    E: float


def energy_bounds(cfg: TankConfig):
    """``(b^2/R^4, 1/R^2)``: homoclinic level and wall level."""
    return cfg.b**2 / cfg.R**4, 1.0 / cfg.R**2


def energy(zeta, cfg: TankConfig):
    """``|(z^2 - b^2) / (b^2 z^2 - R^4)|``, equal to ``1/R^2`` on the wall."""
    z2 = np.asarray(zeta, dtype=complex) ** 2
    b2, R4 = cfg.b**2, cfg.R**4
    num = np.abs(z2 - b2)
    den = np.abs(b2 * z2 - R4)
    if np.any(num == 0) or np.any(den == 0):
        raise SingularPoint("averaged Hamiltonian is singular at +-b and +-R^2/b")
    out = num / den
    return out.item() if np.ndim(zeta) == 0 else out


def averaged_hamiltonian(zeta, cfg: TankConfig):
    """Time average of the stirring Hamiltonian, ``gamma/(4 pi) ln E``."""
    return cfg.gamma / (4 * np.pi) * np.log(energy(zeta, cfg))


def homoclinic_radius(psi, cfg: TankConfig):
    """Symplectic radius of the homoclinic loop; 0 where ``cos 2psi < 0``."""
    c = np.cos(2 * np.asarray(psi, dtype=float))
    R4, b4 = cfg.R**4, cfg.b**4
    out = cfg.b**2 * R4 / (R4 + b4) * np.maximum(c, 0.0)
    return out.item() if np.ndim(psi) == 0 else out


def _check_level(E, cfg: TankConfig, closed_top=True):
    lo, hi = energy_bounds(cfg)
    E = np.asarray(E, dtype=float)
    ok = (E > lo) & ((E <= hi * (1 + 1e-14)) if closed_top else (E < hi))
    if not np.all(ok):
        raise OutOfRange(f"E must lie in ({lo:g}, {hi:g}], got {E}")


def level_radius(psi, E, cfg: TankConfig):
    """Exterior root ``r(psi, E)`` of the squared level condition.

    Squaring ``|z^2 - b^2| = E |b^2 z^2 - R^4|`` with ``z^2 = 2r exp(2i psi)``
    gives ``4(1-E^2 b^4) r^2 - 4 b^2 (1-E^2 R^4) cos(2psi) r + b^4 - E^2 R^8 = 0``.
    """
    _check_level(E, cfg)
    psi = np.asarray(psi, dtype=float)
    b2, R4 = cfg.b**2, cfg.R**4
    E2 = np.asarray(E, dtype=float) ** 2
    A = 4.0 * (1.0 - E2 * b2 * b2)
    B = -4.0 * b2 * (1.0 - E2 * R4) * np.cos(2 * psi)
    C = b2 * b2 - E2 * R4 * R4
    disc = B * B - 4 * A * C
    if np.any(disc < 0):
        raise NoRealRoot("no real level radius for this (psi, E)")
    sq = np.sqrt(disc)
    # cancellation-free larger root
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(B <= 0, (-B + sq) / (2 * A), 2 * C / (-B - sq))
    return r.item() if r.ndim == 0 else r


def level_point(psi, E, cfg: TankConfig):
    """Point ``sqrt(2r) exp(i psi)`` on the level curve ``E``."""
    return np.sqrt(2 * np.asarray(level_radius(psi, E, cfg))) * np.exp(1j * np.asarray(psi))


def _action_coeffs(E, cfg: TankConfig):
    b4, R4 = cfg.b**4, cfg.R**4
    E2 = E * E
    a = 1.0 / (1.0 - E2 * b4)
    bb = 4.0 * b4 * (1.0 - E2 * R4) ** 2
    c = 4.0 * (E2 * b4 - 1.0) * (b4 - E2 * R4 * R4)
    return a, bb, c


@functools.lru_cache(maxsize=32)
def _gauss_nodes(n):
    x, w = np.polynomial.legendre.leggauss(n)
    # composite rule on [0, pi/4] and [pi/4, pi/2]; the integrand's only
    # near-singularity sits at pi/4
    h = np.pi / 8
    nodes = np.concatenate([h * (x + 1), h * (x + 1) + np.pi / 4])
    weights = np.concatenate([h * w, h * w])
    return nodes, weights


def _integral(E, cfg: TankConfig, n):
    a, bb, c = _action_coeffs(E, cfg)
    psi, w = _gauss_nodes(n)
    integrand = np.sqrt(np.maximum(bb * np.cos(2 * psi) ** 2 + c, 0.0))
    return a / (2 * np.pi) * np.dot(w, integrand)


def _action_quadrature(E, cfg: TankConfig, n=None):
    """Return ``(I, order)``; doubles the Gauss order until converged.

    With ``order`` given the rule is applied once at that order, which keeps
    finite-difference stencils on a single quadrature rule. No range check:
    the formula continues analytically a little past ``1/R^2``.
    """
    if n is not None:
        return _integral(E, cfg, n), n
    n = QUAD_ORDER
    prev = _integral(E, cfg, n)
    while n < QUAD_MAX_ORDER:
        n *= 2
        cur = _integral(E, cfg, n)
        if abs(cur - prev) <= QUAD_TOL:
            return cur, n
        prev = cur
    raise NoConvergence(f"action quadrature did not converge at E={E!r}")


def action(E, cfg: TankConfig) -> ActionValue:
    """Action of the level curve ``E``: enclosed area over ``2 pi``."""
    _check_level(E, cfg)
    I, _ = _action_quadrature(float(E), cfg)
    return ActionValue(I=I, E=float(E))


def _central(E, cfg, n, h, second):
    f = lambda x: _action_quadrature(x, cfg, n)[0]
    if second:
        return (f(E + h) - 2 * f(E) + f(E - h)) / (h * h)
    return (f(E + h) - f(E - h)) / (2 * h)


def action_derivatives(E, cfg: TankConfig):
    """``(I'(E), I''(E))`` by central differences of the quadrature.

    Each derivative is also taken at half the step; the two must agree to
    ``RICHARDSON_TOL`` relative (to the larger of the value and ``I/E^k``),
    and the Richardson combination is returned.
    At the wall level the stencil reaches past ``1/R^2``, where the action
    formula is still smooth.
    """
    _check_level(E, cfg)
    E = float(E)
    I, n = _action_quadrature(E, cfg)
    n = min(2 * n, QUAD_MAX_ORDER)
    out = []
    for rel, second in ((D1_STEP, False), (D2_STEP, True)):
        h = rel * E
        coarse = _central(E, cfg, n, h, second)
        fine = _central(E, cfg, n, h / 2, second)
        # natural scale I/E^k keeps the check meaningful where I'' crosses 0
        scale = max(abs(fine), I / E ** (2 if second else 1))
        if abs(coarse - fine) > RICHARDSON_TOL * scale:
            raise NoConvergence(
                f"finite-difference {'I2' if second else 'I1'} unstable at E={E!r}: "
                f"{coarse!r} vs {fine!r}"
            )
        out.append((4 * fine - coarse) / 3)
    return out[0], out[1]


def twist_quantities(E, cfg: TankConfig):
    """``I'(E)`` and ``E I''(E) + I'(E)``, both scaled by ``E / I(E)``."""
    I = action(E, cfg).I
    d1, d2 = action_derivatives(E, cfg)
    scale = E / I
    return d1 * scale, (E * d2 + d1) * scale


def twist_check(E, cfg: TankConfig, tol: float = TWIST_TOL) -> bool:
    """True when ``E`` belongs to the twist set (both quantities nonzero)."""
    try:
        q1, q2 = twist_quantities(E, cfg)
    except NoConvergence:
        return False
    return abs(q1) > tol and abs(q2) > tol


@functools.lru_cache(maxsize=64)
def twist_set_infimum(cfg: TankConfig, n_levels: int = 100, bisections: int = 40) -> float:
    """Lower end of the interval of twist levels ending at ``1/R^2``.

    A level counts as inside when both twist quantities are nonzero and have
    the signs they have at the wall; a sign flip between two scan levels
    marks a zero even when no scan level hits it. The boundary of the
    trailing run is then located by bisection.
    """
    lo, hi = energy_bounds(cfg)
    ref = np.sign(twist_quantities(hi, cfg))
    if not twist_check(hi, cfg):
        raise ZeroTwist("wall level is not a twist level")

    def inside(E):
        try:
            q = np.asarray(twist_quantities(E, cfg))
        except NoConvergence:
            return False
        return bool(np.all(np.abs(q) > TWIST_TOL) and np.all(np.sign(q) == ref))

    levels = lo + (hi - lo) * np.arange(1, n_levels + 1) / n_levels
    k = n_levels - 1
    while k > 0 and inside(levels[k - 1]):
        k -= 1
    if k == 0:
        return lo
    bad, good = levels[k - 1], levels[k]
    for _ in range(bisections):
        mid = 0.5 * (bad + good)
        if inside(mid):
            good = mid
        else:
            bad = mid
    return good


def averaged_frequency(E, cfg: TankConfig) -> float:
    """Angular frequency ``dH/dI`` of the averaged motion on level ``E``."""
    d1, _ = action_derivatives(E, cfg)
    I = action(E, cfg).I
    if abs(d1) * E / I <= TWIST_TOL:
        raise ZeroTwist(f"I'(E) vanishes at E={E!r}")
    return cfg.gamma / (4 * np.pi * E) / d1


def annulus_bounds(E0, cfg: TankConfig):
    """Hamiltonian range ``(H_min, H_max)`` of the twist annulus from ``E0``."""
    lo, hi = energy_bounds(cfg)
    if not (E0 <= hi * (1 + 1e-14) and E0 > twist_set_infimum(cfg)):
        raise OutOfRange(f"E0 must lie in (inf twist set, {hi:g}], got {E0!r}")
    k = cfg.gamma / (4 * np.pi)
    return k * np.log(E0), k * np.log(hi)


def in_annulus(zeta, E0, cfg: TankConfig):
    h_min, h_max = annulus_bounds(E0, cfg)
    H = averaged_hamiltonian(zeta, cfg)
    slack = 1e-12 * abs(cfg.gamma)
    return (H >= h_min - slack) & (H <= h_max + slack)


def averaged_velocity(zeta, cfg: TankConfig):
    """Mean of the two half-period vector fields."""
    return 0.5 * (vortex_velocity(zeta, cfg, cfg.b) + vortex_velocity(zeta, cfg, -cfg.b))


def averaged_flow(zeta, cfg: TankConfig, t: float, n_steps: int = 1000):
    """RK4 flow of the averaged field for time ``t``."""
    z = np.array(zeta, dtype=complex, ndmin=1)
    h = t / n_steps
    f = lambda w: averaged_velocity(w, cfg)
    for _ in range(n_steps):
        z = rk4_step(f, z, h)
    return z.item() if np.ndim(zeta) == 0 else z
