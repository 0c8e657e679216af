"""Momentum-space picture of the packets: the ellipsoidal shell, quadrature
synthesis of the closed form, velocity-smeared packets and their weighted
inner products.

Every delta function is reduced analytically before any quadrature: against
|k| for synthesis, against v for smeared packets.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, QuadratureError, UnsupportedError
from .kernel_math import lorentz_gamma, sph_bessel_j, unit_vector
from .operator_kit import ScalarField3, omega
from .wavepacket import PacketParams, psi_derivatives


@dataclass(frozen=True)
class EllipsoidShell:
    center_k3: float
    semi_transverse: float
    semi_longitudinal: float
    k_max: float

    @property
    def k3_range(self):
        return (0.0, self.k_max)

    def residual(self, k, axis=(0.0, 0.0, 1.0)):
        """Left side minus right side of the ellipsoid equation at points k."""
        k = np.asarray(k, dtype=float)
        a = unit_vector(axis)
        k3 = k @ a
        perp2 = np.sum(k * k, axis=-1) - k3 * k3
        g2 = self.semi_longitudinal / self.semi_transverse
        return perp2 + (k3 - self.center_k3) ** 2 / g2**2 - self.semi_transverse**2


def shell_of(params):
    """Shell on which alpha_v lives: centre m v gamma^2, semi-axes m v gamma and m v gamma^2."""
    v = params.speed
    if v == 0.0:
        raise DomainError("degenerate shell (single point at origin)")
    m, g = params.mass, params.gamma
    return EllipsoidShell(m * v * g * g, m * v * g, m * v * g * g, 2 * m * v * g * g)


def v_star(k, m, axis=(0.0, 0.0, 1.0)):
    """(w - m)/(k.axis), the speed whose shell passes through k."""
    k = np.asarray(k, dtype=float)
    ka = k @ unit_vector(axis)
    if np.any(ka <= 0):
        raise DomainError("no positive-velocity shell through k")
    k2 = np.sum(k * k, axis=-1)
    # w - m written without cancellation
    return k2 / (omega(m, k) + m) / ka


@dataclass(frozen=True)
class ShellQuadrature:
    """Gauss-Legendre in cos(theta) times uniform azimuth.

    ``n_radial`` is used only by the smeared inner products, which integrate
    over a family of shells.
    """

    n_polar: int = 64
    n_azimuth: int = 64
    n_radial: int = 96

    def __post_init__(self):
        if self.n_polar < 8 or self.n_azimuth < 8:
            raise DomainError("shell quadrature needs at least 8 nodes per direction")

    def doubled(self):
        return ShellQuadrature(2 * self.n_polar, 2 * self.n_azimuth, 2 * self.n_radial)


def _frame(axis):
    a = unit_vector(axis)
    trial = np.array([1.0, 0.0, 0.0]) if abs(a[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = trial - (trial @ a) * a
    e1 /= np.sqrt(e1 @ e1)
    return e1, np.cross(a, e1), a


def shell_nodes(params, q=ShellQuadrature()):
    """Shell points k(c, phi) and the weights of the reduced synthesis integral.

    With c = cos(theta) about v-hat, the root is k* = 2 m v c/(1 - v^2 c^2) and
    the delta Jacobian |dg/dk| = v c (1 - v^2 c^2)/(1 + v^2 c^2).
    Returns (k points, omega, weights) where the weights already carry
    k*^2 / (omega |dg/dk|) and the azimuth/polar rule.
    """
    m, v = params.mass, params.speed
    if v == 0.0:
        raise DomainError("velocity must be nonzero")
    x, wx = np.polynomial.legendre.leggauss(q.n_polar)
    c = 0.5 * (x + 1)
    wc = 0.5 * wx
    phi = 2 * np.pi * np.arange(q.n_azimuth) / q.n_azimuth
    wphi = 2 * np.pi / q.n_azimuth
    vc2 = (v * c) ** 2
    ks = 2 * m * v * c / (1 - vc2)
    w = m * (1 + vc2) / (1 - vc2)
    dg = v * c * (1 - vc2) / (1 + vc2)
    e1, e2, e3 = _frame(params.direction)
    s = np.sqrt(1 - c * c)
    dirs = (s[:, None, None] * (np.cos(phi)[None, :, None] * e1 + np.sin(phi)[None, :, None] * e2)
            + c[:, None, None] * e3)
    pts = ks[:, None, None] * dirs
    weights = (wc * ks * ks / (w * dg))[:, None] * wphi * np.ones(q.n_azimuth)
    return pts.reshape(-1, 3), np.repeat(w, q.n_azimuth), weights.reshape(-1)


def synthesize_psi(params, t, x, q=ShellQuadrature(), tol=None):
    """Psi_v(t, x) from its momentum-shell density by surface quadrature.

    ``t`` and ``x`` broadcast like eval_psi.  With ``tol`` set, the result is
    compared against a run with doubled nodes and QuadratureError is raised
    when they differ by more than ``tol``.
    """
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    shape = np.broadcast_shapes(t.shape, x.shape[:-1])
    tb = np.broadcast_to(t, shape).reshape(-1)
    xb = np.broadcast_to(x, shape + (3,)).reshape(-1, 3)

    def run(quad):
        pts, w, weights = shell_nodes(params, quad)
        pref = 1.0 / (4 * np.pi * params.mass * params.gamma**2 * params.speed)
        out = np.empty(tb.size, dtype=complex)
        step = max(1, 2_000_000 // weights.size)
        for s in range(0, tb.size, step):
            ph = np.exp(1j * (xb[s:s + step] @ pts.T) - 1j * tb[s:s + step, None] * w[None, :])
            out[s:s + step] = ph @ weights
        return pref * out

    val = run(q)
    if tol is not None:
        fine = run(q.doubled())
        diff = float(np.max(np.abs(fine - val))) if val.size else 0.0
        if diff > tol:
            raise QuadratureError("synthesis did not converge", difference=diff, tol=tol)
        val = fine
    return val.reshape(shape)[()]


def fourier_shell_j0(R, r, n=64):
    """Transform of a unit-normalised spherical shell of radius R at distance r.

    The angular integral (1/2) int_{-1}^{1} exp(i R r c) dc is done with n
    Gauss-Legendre nodes; the exact value is j0(R r).
    """
    if not (R > 0 and r >= 0):
        raise DomainError("need R > 0 and r >= 0")
    c, w = np.polynomial.legendre.leggauss(n)
    return float(0.5 * np.sum(w * np.cos(R * r * c)))


def fourier_shell_j0_reduced(R, r):
    """The same transform from the radial formula, sin(R r)/(R r)."""
    return sph_bessel_j(0, R * r)


# ----------------------------------------------------------- smeared packets

@dataclass(frozen=True)
class VelocityProfile:
    """Velocity weight f(v) supported on [v_lo, v_hi] inside (0, 1), along ``axis``."""

    support: tuple
    weight: Callable
    axis: tuple = (0.0, 0.0, 1.0)
    note: str = ""

    def __post_init__(self):
        lo, hi = (float(s) for s in self.support)
        if not (0.0 < lo < hi < 1.0):
            raise DomainError("profile support must lie inside (0, 1)")
        object.__setattr__(self, "support", (lo, hi))
        object.__setattr__(self, "axis", tuple(float(a) for a in unit_vector(self.axis)))

    def __call__(self, v):
        v = np.asarray(v, dtype=float)
        lo, hi = self.support
        inside = (v > lo) & (v < hi)
        safe = np.where(inside, v, 0.5 * (lo + hi))
        return np.where(inside, self.weight(safe), 0.0)

    def scaled(self, c):
        return VelocityProfile(self.support, lambda v: c * self.weight(v), self.axis, self.note)


def bump_profile(center, half_width, amplitude=1.0, axis=(0.0, 0.0, 1.0)):
    """Smooth bump amplitude * exp(1 - 1/(1 - s^2)), s = (v - center)/half_width."""

    def f(v):
        s = (v - center) / half_width
        inside = np.abs(s) < 1
        s = np.where(inside, s, 0.0)
        return np.where(inside, amplitude * np.exp(1.0 - 1.0 / (1.0 - s * s)), 0.0)

    return VelocityProfile((center - half_width, center + half_width), f, axis, "C-infinity bump")


def shell_radius(m, v, c):
    """|k| on the shell of speed v in direction cos(theta) = c about the axis."""
    return 2 * m * v * c / (1 - (v * c) ** 2)


def alpha_smeared(profile, m, k):
    """int f(v) alpha_v(k) dv at t = 0, reduced against v analytically.

    sqrt(pi/2) f(v*) / (m gamma(v*)^2 v* w (k.axis)); zero off the support and
    for k.axis <= 0.
    """
    k = np.asarray(k, dtype=float)
    a = np.asarray(profile.axis)
    ka = k @ a
    pos = ka > 0
    safe_ka = np.where(pos, ka, 1.0)
    k2 = np.sum(k * k, axis=-1)
    w = omega(m, k)
    vs = k2 / (w + m) / safe_ka
    lo, hi = profile.support
    ok = pos & (vs > lo) & (vs < hi)
    vs_safe = np.where(ok, vs, 0.5 * (lo + hi))
    g2 = 1.0 / (1.0 - vs_safe**2)
    val = np.sqrt(np.pi / 2) * profile(vs_safe) / (m * g2 * vs_safe * w * safe_ka)
    return np.where(ok, val, 0.0) + 0j


def alpha_field(profile, m):
    """alpha_smeared as an operator_kit field with its ray support attached."""
    a = np.asarray(profile.axis)
    lo, hi = profile.support

    def support(k):
        kn = np.sqrt(np.sum(k * k, axis=-1))
        c = (k @ a) / kn
        pos = c > 0
        cc = np.where(pos, c, 0.5)
        lam_lo = np.where(pos, 0.98 * shell_radius(m, lo, cc) / kn, 1.0)
        lam_hi = np.where(pos, 1.02 * shell_radius(m, hi, cc) / kn, 1.0)
        return lam_lo, lam_hi

    return ScalarField3(lambda k: alpha_smeared(profile, m, k), "compact", support)


def alpha_field_t(profile, m, t):
    """The phase-evolved density exp(-i w t) alpha_f."""
    base = alpha_field(profile, m)
    return base.derived(lambda k: np.exp(-1j * omega(m, k) * t) * base(k))


def smeared_packet(profile, m, t, x, n_v=64):
    """(psi_f, d_t psi_f) with psi_f = int f(v) Psi_{v axis}(t, x) dv by Gauss-Legendre in v."""
    lo, hi = profile.support
    xv, wv = np.polynomial.legendre.leggauss(n_v)
    vs = 0.5 * (hi - lo) * xv + 0.5 * (hi + lo)
    wv = 0.5 * (hi - lo) * wv
    x = np.asarray(x, dtype=float)
    psi = 0.0
    dpsi = 0.0
    for v, w in zip(vs, wv):
        fw = w * profile(v)
        if fw == 0:
            continue
        p = PacketParams(m, tuple(v * np.asarray(profile.axis)))
        a, b, _ = psi_derivatives(p, t, x)
        psi = psi + fw * a
        dpsi = dpsi + fw * b
    return psi, dpsi


def _check_collinear(f, g):
    if not np.allclose(f.axis, g.axis, atol=1e-12):
        raise UnsupportedError("non-collinear velocity profiles are not supported")


def weighted_inner_smeared(f, g, m, q=ShellQuadrature()):
    """int (w - m) w conj(alpha_f) alpha_g d^3k over the region swept by the shells.

    Cylindrical symmetry gives the azimuth factor 2 pi.  For fixed |k| the
    polar variable is traded for v* (dc = (w - m)/(k v^2) dv) so that the
    profiles are integrated in their own variable.
    """
    _check_collinear(f, g)
    lo = max(f.support[0], g.support[0])
    hi = min(f.support[1], g.support[1])
    if lo >= hi:
        return 0j
    kx, kw = np.polynomial.legendre.leggauss(q.n_radial)
    vx, vw = np.polynomial.legendre.leggauss(q.n_polar)
    k_split = shell_radius(m, lo, 1.0)
    k_top = shell_radius(m, hi, 1.0)
    total = 0j
    for ka, kb in ((0.0, k_split), (k_split, k_top)):
        ks = 0.5 * (kb - ka) * kx + 0.5 * (kb + ka)
        wk = 0.5 * (kb - ka) * kw
        w = np.sqrt(m * m + ks * ks)
        wm = ks * ks / (w + m)
        v_min = np.maximum(lo, wm / ks)
        span = hi - v_min
        vs = 0.5 * span[:, None] * (vx[None, :] + 1) + v_min[:, None]
        wv = 0.5 * span[:, None] * vw[None, :]
        g2 = 1.0 / (1.0 - vs * vs)
        c = wm[:, None] / (ks[:, None] * vs)
        # alpha without the profile factor, evaluated on the node (k, v)
        base = np.sqrt(np.pi / 2) / (m * g2 * vs * w[:, None] * ks[:, None] * c)
        ww = wm * w
        dens = np.conj(f(vs)) * g(vs) * base * base
        jac = wm[:, None] / (ks[:, None] * vs * vs)
        inner = np.sum(wv * dens * jac, axis=1)
        total += 2 * np.pi * np.sum(wk * ks * ks * ww * inner)
    return complex(total)


def norm_coefficient(m, v):
    """2 pi^2 / (m gamma^2), the delta-normalisation coefficient of the shells."""
    if not (0.0 < v < 1.0):
        raise DomainError("speed must lie in (0, 1)")
    return 2 * np.pi**2 * (1 - v * v) / m


def density_prediction(f, g, m, n=128):
    """int conj(f) g 2 pi^2 / (m gamma(v)^2) dv by Gauss-Legendre."""
    _check_collinear(f, g)
    lo = max(f.support[0], g.support[0])
    hi = min(f.support[1], g.support[1])
    if lo >= hi:
        return 0j
    x, w = np.polynomial.legendre.leggauss(n)
    v = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
    w = 0.5 * (hi - lo) * w
    return complex(np.sum(w * np.conj(f(v)) * g(v) * 2 * np.pi**2 * (1 - v * v) / m))


def profile_norm2(f, n=128):
    lo, hi = f.support
    x, w = np.polynomial.legendre.leggauss(n)
    v = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
    return float(np.sum(0.5 * (hi - lo) * w * np.abs(f(v)) ** 2))


def norm_law_extrapolation(m, v0, widths=(0.05, 0.025, 0.0125), q=ShellQuadrature()):
    """Ratio <alpha_f, alpha_f>_w / int |f|^2 dv for bumps of shrinking width.

    Returns (ratios, extrapolated) where the extrapolation is Richardson in
    the width assuming an even error expansion (eps^2, eps^4).
    """
    ratios = []
    for eps in widths:
        f = bump_profile(v0, eps)
        ratios.append(weighted_inner_smeared(f, f, m, q).real / profile_norm2(f))
    r = np.array(ratios)
    if len(r) >= 3:
        # eliminate eps^2 then eps^4 for halving widths
        r1 = (4 * r[1:] - r[:-1]) / 3
        ext = (16 * r1[1:] - r1[:-1]) / 15
        return r, float(ext[-1])
    if len(r) == 2:
        return r, float((4 * r[1] - r[0]) / 3)
    return r, float(r[0])
