"""Deformed-metric kinematics and the flowing propagator.

The Minkowski product is regulated by rotating the spatial part:
(p.q)_eps = p0 q0 - (1 - i eps)(pvec . qvec), with the squared mass deformed
the same way, m^2_eps = (1 - i eps) m^2.  For eps > 0 the combination
p^2_eps - m^2_eps has strictly positive imaginary part away from p = 0, so
exponentials exp(i a (p^2_eps - m^2_eps)) decay in every parameter and the
infinite-window propagator exists.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass


@dataclass(frozen=True)
class FourMomentum:
    e: float
    px: float = 0.0
    py: float = 0.0
    pz: float = 0.0

    def __add__(self, other):
        return FourMomentum(self.e + other.e, self.px + other.px,
                            self.py + other.py, self.pz + other.pz)

    def __sub__(self, other):
        return FourMomentum(self.e - other.e, self.px - other.px,
                            self.py - other.py, self.pz - other.pz)

    def __neg__(self):
        return FourMomentum(-self.e, -self.px, -self.py, -self.pz)

    def scale(self, c):
        return FourMomentum(c * self.e, c * self.px, c * self.py, c * self.pz)

    def spatial_sq(self):
        return self.px ** 2 + self.py ** 2 + self.pz ** 2


@dataclass(frozen=True)
class EpsMetricConfig:
    eps: float
    mass: float

    def __post_init__(self):
        # eps = 0 is the physical limit; anything needing absolute
        # convergence (unbounded windows, Gaussian loop integrals) checks
        # for strict positivity at the point of use
        if not self.eps >= 0:
            raise ValueError("metric deformation eps must not be negative")
        if not self.mass > 0:
            raise ValueError("mass must be positive")

    @property
    def mass2(self):
        return self.mass ** 2

    @property
    def mass2_eps(self):
        return (1 - 1j * self.eps) * self.mass ** 2


@dataclass(frozen=True)
class ScaleWindow:
    """Flow window [alpha0, alpha]; alpha may be math.inf.

    alpha0 = 0 is allowed for bare propagator evaluations; flow integrals
    always run from a positive lower edge.
    """

    alpha0: float
    alpha: float

    def __post_init__(self):
        if not 0 <= self.alpha0 <= self.alpha:
            raise ValueError("need 0 <= alpha0 <= alpha")
        if math.isinf(self.alpha0):
            raise ValueError("lower edge must be finite")

    @property
    def unbounded(self):
        return math.isinf(self.alpha)


def eps_dot(p, q, cfg):
    """Deformed Minkowski product (p.q)_eps."""
    return p.e * q.e - (1 - 1j * cfg.eps) * (
        p.px * q.px + p.py * q.py + p.pz * q.pz)


def p_sq_eps(p, cfg):
    return eps_dot(p, p, cfg)


def minkowski_dot(p, q):
    """Undeformed product, mostly-minus signature."""
    return p.e * q.e - (p.px * q.px + p.py * q.py + p.pz * q.pz)


def minkowski_sq(p):
    return minkowski_dot(p, p)


def renorm_point(mass):
    """Default momentum configuration for the four-point boundary values:
    two incoming and two outgoing particles at rest.  All four legs are on
    shell, the momenta sum to zero, the timelike channel sits exactly at
    threshold and the other two channels at zero."""
    at_rest = FourMomentum(mass, 0.0, 0.0, 0.0)
    return (at_rest, at_rest, -at_rest, -at_rest)


# below this, (e^{i a0 x} - e^{i a x})/x loses digits to cancellation;
# switch to the series in x*(a - a0)
_SERIES_CUT = 1e-4


def flowing_propagator(p, window, cfg):
    """Propagator with both cutoffs: i(e^{i alpha0 x} - e^{i alpha x})/x,
    x = p^2_eps - m^2_eps.

    Near x (alpha - alpha0) = 0 the difference is evaluated by its series;
    for an unbounded window the second exponential is dropped, which
    requires eps > 0 for convergence.
    """
    x = p_sq_eps(p, cfg) - cfg.mass2_eps
    if window.unbounded:
        if not cfg.eps > 0:
            raise ValueError("unbounded window needs a positive deformation")
        return 1j * cmath.exp(1j * window.alpha0 * x) / x
    da = window.alpha - window.alpha0
    z = x * da
    if abs(z) < _SERIES_CUT:
        # i(e^{i a0 x} - e^{i a x})/x = da * e^{i a0 x} * sum_k (iz)^k/(k+1)!
        s = 1.0 + 0j
        fac = 1.0
        zz = 1.0 + 0j
        for k in range(1, 6):
            zz *= 1j * z
            fac *= k + 1
            s += zz / fac
        return da * cmath.exp(1j * window.alpha0 * x) * s
    return 1j * (cmath.exp(1j * window.alpha0 * x)
                 - cmath.exp(1j * window.alpha * x)) / x


def propagator_derivative(p, alpha, cfg):
    """d/d alpha of the flowing propagator: e^{i alpha (p^2_eps - m^2_eps)}."""
    x = p_sq_eps(p, cfg) - cfg.mass2_eps
    return cmath.exp(1j * alpha * x)
