"""Closed-form dispersion-free Klein-Gordon packets and their differential identities.

Natural units (hbar = c = 1).  ``t`` and ``x`` broadcast: ``x`` carries a trailing
axis of length 3, ``t`` matches the remaining leading shape (or is a scalar).
"""

from dataclasses import dataclass, field

import numpy as np

from . import fd
from .errors import DomainError
from .kernel_math import (
    MAX_ORDER,
    harmonic_norm,
    j1_over_u,
    lorentz_gamma,
    sph_bessel_j,
    sph_hankel_scaled,
    sph_harmonic_ll,
)


@dataclass(frozen=True)
class PacketParams:
    mass: float
    velocity: tuple = (0.0, 0.0, 0.0)
    gamma: float = field(init=False)

    def __post_init__(self):
        v = tuple(float(c) for c in np.broadcast_to(np.asarray(self.velocity, float), (3,)))
        object.__setattr__(self, "velocity", v)
        if not self.mass > 0:
            raise DomainError("mass must be positive")
        object.__setattr__(self, "gamma", lorentz_gamma(np.sqrt(np.dot(v, v))))

    @property
    def v(self):
        return np.array(self.velocity)

    @property
    def speed(self):
        return float(np.sqrt(self.v @ self.v))

    @property
    def direction(self):
        if self.speed == 0.0:
            raise DomainError("direction undefined for a packet at rest")
        return self.v / self.speed

    @property
    def envelope_wavenumber(self):
        """m gamma |v|, the scale of the j_0 envelope."""
        return self.mass * self.gamma * self.speed


@dataclass(frozen=True)
class SpacetimePoint:
    t: float
    x: tuple

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(float(c) for c in self.x))
        if not (np.isfinite(self.t) and np.all(np.isfinite(self.x))):
            raise DomainError("spacetime point must be finite")


@dataclass(frozen=True)
class SpinPacketParams:
    base: PacketParams
    l: int

    def __post_init__(self):
        vx, vy, _ = self.base.velocity
        if vx != 0.0 or vy != 0.0:
            raise DomainError("spin packets require velocity along the z axis")
        if not (0 <= int(self.l) <= MAX_ORDER) or int(self.l) != self.l:
            raise DomainError(f"spin must be an integer in 0..{MAX_ORDER}")


def _split(params, t, x):
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    vhat = params.direction
    par = x @ vhat
    perp = x - par[..., None] * vhat
    s = par - params.speed * t
    return perp, s, vhat


def tilde_r(params, t, x):
    """Boosted distance from the packet centre, sqrt(x_perp^2 + gamma^2 (x_par - |v| t)^2)."""
    perp, s, _ = _split(params, t, x)
    g = params.gamma
    return np.sqrt(np.sum(perp * perp, axis=-1) + (g * s) ** 2)


def _phase(params, t, x):
    x = np.asarray(x, dtype=float)
    g2 = params.gamma**2
    return np.exp(-1j * params.mass * g2 * (np.asarray(t, float) - x @ params.v))


def eval_psi(params, t, x):
    """j0(m gamma |v| r~) exp[-i m gamma^2 (t - v.x)]; e^{-imt} at rest."""
    x = np.asarray(x, dtype=float)
    if params.speed == 0.0:
        shape = np.broadcast_shapes(np.shape(t), x.shape[:-1])
        return np.broadcast_to(np.exp(-1j * params.mass * np.asarray(t, float)), shape)[()]
    u = params.envelope_wavenumber * tilde_r(params, t, x)
    return sph_bessel_j(0, u) * _phase(params, t, x)


def eval_psi_stationary(mass, speed, t, x):
    """The spherical solution j0(m gamma |v| r) exp(-i m gamma t) that boosts into eval_psi."""
    g = lorentz_gamma(abs(speed))
    x = np.asarray(x, dtype=float)
    r = np.sqrt(np.sum(x * x, axis=-1))
    return sph_bessel_j(0, mass * g * abs(speed) * r) * np.exp(-1j * mass * g * np.asarray(t, float))


def spin_constant(sp):
    """C_l with (d_x + i d_y)^l eval_psi = C_l * eval_psi_spin."""
    a = sp.base.envelope_wavenumber
    return (-a) ** sp.l / harmonic_norm(sp.l)


def eval_psi_spin(sp, t, x):
    """j_l(m gamma |v| r~) Y_ll exp[...], angles taken in the coordinates (x, y, gamma(z - vt))."""
    p = sp.base
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    if sp.l == 0:
        return eval_psi(p, t, x)
    if p.speed == 0.0:
        return np.zeros(np.broadcast_shapes(t.shape, x.shape[:-1]), dtype=complex)[()]
    rt = np.broadcast_to(tilde_r(p, t, x), np.broadcast_shapes(t.shape, x.shape[:-1]))
    u = p.envelope_wavenumber * rt
    radial = sph_bessel_j(sp.l, u)
    safe = np.where(rt > 0, rt, 1.0)
    ang = np.where(rt > 0, sph_harmonic_ll(sp.l, x[..., 0], x[..., 1], safe), 0.0)
    return radial * ang * _phase(p, t, x)


def psi_derivatives(params, t, x):
    """Analytic (psi, d_t psi, grad psi) of the closed form."""
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    m = params.mass
    if params.speed == 0.0:
        psi = eval_psi(params, t, x)
        shape = np.shape(psi)
        return psi, -1j * m * psi, np.zeros(shape + (3,), dtype=complex)
    g2 = params.gamma**2
    a = params.envelope_wavenumber
    perp, s, vhat = _split(params, t, x)
    rt = np.sqrt(np.sum(perp * perp, axis=-1) + g2 * s * s)
    u = a * rt
    env = np.asarray(sph_bessel_j(0, u))
    jr = np.asarray(j1_over_u(u))
    ph = _phase(params, t, x)
    # d env / d x_i = -a^2 (j1(u)/u) (x_perp + gamma^2 s vhat)_i, same factor for d/dt
    denv_dx = -(a * a) * jr[..., None] * (perp + (g2 * s)[..., None] * vhat)
    denv_dt = (a * a) * jr * g2 * params.speed * s
    psi = env * ph
    dpsi_dt = (denv_dt - 1j * m * g2 * env) * ph
    grad = (denv_dx + 1j * m * g2 * env[..., None] * params.v) * ph[..., None]
    return psi, dpsi_dt, grad


def transport_residual(params, t, x):
    """i (d_t + v.grad) psi - m psi from analytic derivatives; zero up to round-off."""
    psi, dt, grad = psi_derivatives(params, t, x)
    return 1j * (dt + grad @ params.v) - params.mass * psi


def default_step(mass):
    return 1e-3 / mass


def kg_residual_fd(params, t, x, h=None):
    """(d_t^2 - lap + m^2) psi by 4th-order central differences.

    ``params`` may be a PacketParams or a SpinPacketParams.
    """
    if isinstance(params, SpinPacketParams):
        m = params.base.mass
        field_ = lambda tt, xx: eval_psi_spin(params, tt, xx)  # noqa: E731
    else:
        m = params.mass
        field_ = lambda tt, xx: eval_psi(params, tt, xx)  # noqa: E731
    h = default_step(m) if h is None else h
    if not h > 0:
        raise DomainError("finite-difference step must be positive")
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    d2t = fd.second_derivative(lambda tt: field_(tt, x), t, h)
    lap = 0.0
    for a in range(3):
        e = np.eye(3)[a]
        lap = lap + fd.second_derivative(lambda s: field_(t, x + np.asarray(s)[..., None] * e),
                                         np.zeros(x.shape[:-1]), h)
    return d2t - lap + m * m * field_(t, x)


def spin_ratio_fd(sp, x, h=1e-3, t=0.0):
    """Ratio of the l-fold finite-difference (d_x + i d_y) of eval_psi to eval_psi_spin.

    Nested 4th-order stencils; should be the point-independent constant C_l.
    """
    x = np.asarray(x, dtype=float)

    def raise_(f):
        def g(xx):
            dx = fd.derivative(f, xx, (1.0, 0.0, 0.0), h)
            dy = fd.derivative(f, xx, (0.0, 1.0, 0.0), h)
            return dx + 1j * dy
        return g

    f = lambda xx: eval_psi(sp.base, t, xx)  # noqa: E731
    for _ in range(sp.l):
        f = raise_(f)
    return f(x) / eval_psi_spin(sp, t, x)


def _ray_pieces_time_gradient(params, x):
    """Pieces of r^2 (i d_t - m) psi along the ray lambda*x at t = 0.

    Returns (exact, pieces): ``exact(lam)`` evaluates the integrand for real lam;
    ``pieces`` is a list of (callable, sense, rate) where each callable
    continues analytically to complex lam and decays like exp(-rate*s) along
    lam = 1 + sense*i*s.
    """
    m, g2 = params.mass, params.gamma**2
    a = params.envelope_wavenumber
    x = np.asarray(x, dtype=float)
    r2 = float(x @ x)
    b = a * float(tilde_r(params, 0.0, x))
    kappa = m * g2 * float(x @ params.v)
    p = float(x @ params.direction)
    # (i d_t - m) psi on the ray: [A j1(lam b) + B j0(lam b)] exp(i lam kappa)
    A = 1j * a * a * g2 * params.speed * p / b if b > 0 else 0.0
    B = m * (g2 - 1.0)

    def exact(lam):
        lam = np.asarray(lam, dtype=float)
        u = lam * b
        val = A * sph_bessel_j(1, u) + B * sph_bessel_j(0, u)
        return r2 * lam * lam * val * np.exp(1j * lam * kappa)

    def piece(kind):
        sgn = 1 if kind == 1 else -1

        def f(lam):
            z = lam * b
            val = A * sph_hankel_scaled(kind, 1, z) + B * sph_hankel_scaled(kind, 0, z)
            # one exponential, so decay is never split into overflow times underflow
            return 0.5 * r2 * lam * lam * val * np.exp(1j * lam * (kappa + sgn * b))
        return f

    pieces = [(piece(1), +1, kappa + b), (piece(2), -1, b - kappa)]
    return exact, pieces


def gradient_identity_sides(params, x, quad=None):
    """The three sides of (grad + v d_t) psi = i m x [r^-2 D^-1 r^2] (i d_t - m) psi at t = 0.

    Returns (lhs, rhs, closed) as complex 3-vectors: lhs from analytic
    derivatives, rhs from the configuration-space inverse dilation by ray
    quadrature, closed = -m gamma |v| (x/r~) j1(m gamma |v| r~) exp[...].
    """
    from .operator_kit import OscillatoryRayQuadrature, dilation_inverse_oscillatory

    x = np.asarray(x, dtype=float)
    if params.speed == 0.0:
        raise DomainError("velocity must be nonzero")
    psi, dt, grad = psi_derivatives(params, 0.0, x)
    lhs = grad + params.v * dt
    a = params.envelope_wavenumber
    u = a * tilde_r(params, 0.0, x)
    closed = -(a * a) * j1_over_u(u) * x * _phase(params, 0.0, x)
    r2 = float(x @ x)
    if r2 == 0.0:
        return lhs, np.zeros(3, dtype=complex), closed
    exact, pieces = _ray_pieces_time_gradient(params, x)
    dinv = dilation_inverse_oscillatory(exact, pieces, quad or OscillatoryRayQuadrature())
    rhs = 1j * params.mass * x * dinv / r2
    return lhs, rhs, closed
