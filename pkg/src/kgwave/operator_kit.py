"""Dilation operator, its ray-integral inverse, and the nonlocal velocity operator.

Fields are callables over 3-vectors with a trailing axis of length 3; they
may return a trailing component axis as well.  All ray integrals run in the
log variable u = log(lambda) with composite Gauss-Legendre panels; the panel
edge at u = 0 keeps the split at lambda = 1 exact.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.special import erf

from . import fd
from .errors import DomainError, NonIntegrableError, QuadratureError

CHUNK = 400_000


@dataclass(frozen=True)
class ScalarField3:
    """A complex field over momentum 3-space.

    ``decay`` is one of "gaussian", "algebraic" or "compact".  For compact
    fields ``ray_support(k)`` returns (lam_lo, lam_hi) arrays bounding the
    support along each ray lambda*k.
    """

    func: Callable
    decay: str = "gaussian"
    ray_support: Optional[Callable] = None

    def __call__(self, k):
        return self.func(np.asarray(k, dtype=float))

    def derived(self, func, decay=None):
        return ScalarField3(func, decay or self.decay, self.ray_support)


@dataclass(frozen=True)
class RayQuadrature:
    u_max: float = 30.0
    n_nodes: int = 960
    panel_order: int = 8

    def __post_init__(self):
        if self.u_max < 20 or self.n_nodes < 64:
            raise DomainError("ray quadrature needs u_max >= 20 and n_nodes >= 64")
        if self.n_nodes % (2 * self.panel_order):
            raise DomainError("n_nodes must be a multiple of 2*panel_order")

    def reference(self):
        """Composite nodes/weights on [0, 1] for one half of the ray."""
        n_pan = self.n_nodes // (2 * self.panel_order)
        x, w = np.polynomial.legendre.leggauss(self.panel_order)
        edges = np.linspace(0.0, 1.0, n_pan + 1)
        a, b = edges[:-1, None], edges[1:, None]
        return ((b - a) / 2 * x + (b + a) / 2).ravel(), ((b - a) / 2 * w).ravel()


def gaussian_field(center=(0.0, 0.0, 0.0), width=1.0, amplitude=1.0, poly=None):
    """Gaussian test field amplitude * P(k) * exp(-|k - c|^2 / (2 w^2))."""
    c = np.asarray(center, dtype=float)

    def f(k):
        d = k - c
        g = amplitude * np.exp(-np.sum(d * d, axis=-1) / (2 * width * width))
        return g * poly(k) if poly is not None else g + 0j

    return ScalarField3(f, "gaussian")


def omega(m, k):
    k = np.asarray(k, dtype=float)
    return np.sqrt(m * m + np.sum(k * k, axis=-1))


def _norm(k):
    return np.sqrt(np.sum(np.asarray(k, float) ** 2, axis=-1))


def _u_ranges(field, k, q):
    """Per-point log(lambda) ranges: |lambda k| spans [e^-U, e^U] for open rays."""
    lead = k.shape[:-1]
    if field.ray_support is None:
        logk = np.log(_norm(k))
        lo = np.minimum(-q.u_max, logk - 5.0) - logk
        hi = np.maximum(q.u_max, logk + 5.0) - logk
        return lo, hi, True
    lam_lo, lam_hi = field.ray_support(k)
    lo = np.clip(np.log(np.maximum(lam_lo, 1e-300)), -q.u_max, q.u_max)
    hi = np.clip(np.log(np.maximum(lam_hi, 1e-300)), -q.u_max, q.u_max)
    hi = np.maximum(hi, lo)
    return np.broadcast_to(lo, lead), np.broadcast_to(hi, lead), False


def _bcast(a, like):
    return a.reshape(a.shape + (1,) * (np.ndim(like) - a.ndim))


def ray_integrals(field, k, q=RayQuadrature()):
    """(int_0^1 f(lam k) dlam, int_1^inf f(lam k) dlam) by composite GL in log(lam)."""
    k = np.asarray(k, dtype=float)
    if np.any(_norm(k) == 0):
        raise DomainError("ray integrals need k != 0")
    lo, hi, open_ends = _u_ranges(field, k, q)
    t, wt = q.reference()
    lead = k.shape[:-1]
    flat_k = k.reshape(-1, 3)
    lo, hi = lo.reshape(-1), hi.reshape(-1)
    out_in, out_out = [], []
    step = max(1, CHUNK // (2 * t.size))
    for s in range(0, flat_k.shape[0], step):
        kk, a, b = flat_k[s:s + step], lo[s:s + step], hi[s:s + step]
        ins = (np.minimum(a, 0.0), np.minimum(b, 0.0))
        outs = (np.maximum(a, 0.0), np.maximum(b, 0.0))
        res = []
        for ua, ub in (ins, outs):
            u = ua[:, None] + (ub - ua)[:, None] * t[None, :]
            w = (ub - ua)[:, None] * wt[None, :]
            lam = np.exp(u)
            vals = field(kk[:, None, :] * lam[..., None])
            wl = w * lam
            if vals.ndim == 3:
                wl = wl[..., None]
            res.append(np.sum(wl * vals, axis=1))
        if open_ends:
            lam0 = np.exp(a)
            res[0] = res[0] + _bcast(lam0, res[0]) * field(kk * lam0[:, None])
            lam1 = np.exp(b)
            end = np.abs(_bcast(lam1, res[1]) * field(kk * lam1[:, None]))
            scale = np.abs(res[0]) + np.abs(res[1])
            if np.any(end > 1e-9 * np.maximum(scale, 1e-300)):
                raise NonIntegrableError("non-integrable along ray: integrand does not decay",
                                         tail=float(np.max(end)), u_max=q.u_max)
        out_in.append(res[0])
        out_out.append(res[1])
    i_in = np.concatenate(out_in, axis=0)
    i_out = np.concatenate(out_out, axis=0)
    tail = i_in.shape[1:]
    return i_in.reshape(lead + tail), i_out.reshape(lead + tail)


def dilation_inverse_apply(field, k, q=RayQuadrature()):
    """D^-1 f(k) = (i/2)[int_0^1 f(lam k) dlam - int_1^inf f(lam k) dlam]."""
    i_in, i_out = ray_integrals(field, k, q)
    return 0.5j * (i_in - i_out)


def dilation_inverse_field(field, q=RayQuadrature()):
    """D^-1 applied to ``field`` as a new (algebraically decaying) field."""
    return ScalarField3(lambda p: dilation_inverse_apply(field, p, q), "algebraic",
                        field.ray_support)


def dilation_apply(field, k, h=1e-3):
    """D f(k) = -i (f + |k| d_|k| f), radial derivative by 4th-order differences."""
    k = np.asarray(k, dtype=float)
    r = _norm(k)
    if np.any(r == 0):
        raise DomainError("dilation needs k != 0")
    if not h > 0:
        raise DomainError("finite-difference step must be positive")
    khat = k / r[..., None]
    dr = _radial_derivative(field, k, khat, h)
    return -1j * (field(k) + r * dr)


def _radial_derivative(field, k, khat, h):
    acc = 0.0
    for w, s in zip(fd.D1_WEIGHTS, fd.OFFSETS):
        if w:
            acc = acc + w * field(k + s * h * khat)
    return acc / h


def _rel_gradient(f, p, h):
    """Gradient of f at p with the step scaled by |p| (components on the last axis)."""
    p = np.asarray(p, dtype=float)
    hp = h * np.maximum(_norm(p), 1e-300)
    comps = []
    for a in range(3):
        e = np.eye(3)[a]
        acc = 0.0
        for w, s in zip(fd.D1_WEIGHTS, fd.OFFSETS):
            if w:
                acc = acc + w * f(p + (s * hp)[..., None] * e)
        comps.append(acc / hp)
    return np.stack(comps, axis=-1)


def velocity_apply(field, m, k, q=RayQuadrature(), h=1e-3, ordering="right"):
    """v~_k f(k) = k/w f - (m/w) D^-1 (-i grad) ((w - m) f), a 3-vector per point.

    ``ordering="right"`` differentiates first and ray-integrates the gradient;
    ``"left"`` uses the equivalent (-i grad k) D^-1 (1/k) form.
    """
    k = np.asarray(k, dtype=float)
    w_k = omega(m, k)
    weighted = field.derived(lambda p: (omega(m, p) - m) * field(p))
    if ordering == "right":
        grad = field.derived(lambda p: -1j * _rel_gradient(weighted, p, h), "algebraic")
        nonlocal_ = dilation_inverse_apply(grad, k, q)
    elif ordering == "left":
        scaled = field.derived(lambda p: weighted(p) / _norm(p))
        psi = lambda p: _norm(p) * dilation_inverse_apply(scaled, p, q)  # noqa: E731
        nonlocal_ = -1j * _rel_gradient(psi, k, h)
    else:
        raise DomainError(f"unknown ordering {ordering!r}")
    return (k / w_k[..., None]) * field(k)[..., None] - (m / w_k)[..., None] * nonlocal_


def velocity_field(field, m, q=RayQuadrature(), h=1e-3, component=None):
    """v~ f as a field (all three components, or one when ``component`` is given)."""
    if component is None:
        func = lambda p: velocity_apply(field, m, p, q, h)  # noqa: E731
    else:
        func = lambda p: velocity_apply(field, m, p, q, h)[..., component]  # noqa: E731
    return ScalarField3(func, "algebraic", field.ray_support)


def velocity_apply_t(field, m, k, t, q=RayQuadrature(), h=1e-3):
    """v~_t = exp(-i w t) v~_0 exp(+i w t)."""
    k = np.asarray(k, dtype=float)
    rotated = field.derived(lambda p: np.exp(1j * omega(m, p) * t) * field(p))
    out = velocity_apply(rotated, m, k, q, h)
    return np.exp(-1j * omega(m, k) * t)[..., None] * out


# ---------------------------------------------------------------- inner products

@dataclass(frozen=True)
class SphericalQuadrature:
    """Radial Gauss-Legendre on [0, radius] x GL in cos(theta) x uniform azimuth."""

    n_radial: int = 32
    n_polar: int = 16
    n_azimuth: int = 16
    radius: float = 6.0
    center: tuple = (0.0, 0.0, 0.0)

    def nodes(self):
        xr, wr = np.polynomial.legendre.leggauss(self.n_radial)
        r = 0.5 * self.radius * (xr + 1)
        wr = 0.5 * self.radius * wr
        c, wc = np.polynomial.legendre.leggauss(self.n_polar)
        ph = 2 * np.pi * (np.arange(self.n_azimuth) + 0.5) / self.n_azimuth
        R, C, P = np.meshgrid(r, c, ph, indexing="ij")
        S = np.sqrt(1 - C * C)
        pts = np.stack([R * S * np.cos(P), R * S * np.sin(P), R * C], axis=-1)
        w = wr[:, None, None] * wc[None, :, None] * (2 * np.pi / self.n_azimuth) * R**2
        return pts.reshape(-1, 3) + np.asarray(self.center), w.reshape(-1)

    def doubled(self):
        return SphericalQuadrature(2 * self.n_radial, 2 * self.n_polar, 2 * self.n_azimuth,
                                   self.radius, self.center)


def weighted_inner_momentum(f1, f2, m, quad=SphericalQuadrature()):
    """<f1 | (w - m) w | f2> over R^3 by spherical product quadrature."""
    pts, w = quad.nodes()
    wt = w * (omega(m, pts) - m) * omega(m, pts)
    a = f1(pts) if callable(f1) else f1
    b = f2(pts) if callable(f2) else f2
    return complex(np.sum(wt * np.conj(a) * b))


def adjoint_residual(f1, f2, m, quad=SphericalQuadrature(), q=RayQuadrature(), h=1e-3):
    """<v~ f1, f2>_w - <f1, v~ f2>_w per component, with the comparison scale.

    Returns (lhs, rhs) complex 3-vectors.
    """
    pts, w = quad.nodes()
    wt = w * (omega(m, pts) - m) * omega(m, pts)
    a, b = f1(pts), f2(pts)
    va = velocity_apply(f1, m, pts, q, h)
    vb = velocity_apply(f2, m, pts, q, h)
    lhs = np.sum((wt * b)[:, None] * np.conj(va), axis=0)
    rhs = np.sum((wt * np.conj(a))[:, None] * vb, axis=0)
    return lhs, rhs


def dilation_inverse_adjoint_sides(f1, f2, quad=SphericalQuadrature(), q=RayQuadrature(),
                                   form="measure"):
    """Sides of <D^-1 f1, f2> = <f1, A f2> in the plain L^2(d^3k) product.

    ``form="measure"`` uses A = (1/k) D^-1 k, the adjoint that follows from the
    k^2 dk dOmega measure; ``form="radial"`` uses A = k D^-1 (1/k), which is the
    adjoint only for a one-dimensional dk measure.  Returns (lhs, rhs).
    """
    pts, w = quad.nodes()
    kn = _norm(pts)
    left = dilation_inverse_apply(f1, pts, q)
    if form == "measure":
        right = dilation_inverse_apply(f2.derived(lambda p: _norm(p) * f2(p)), pts, q) / kn
    elif form == "radial":
        right = kn * dilation_inverse_apply(f2.derived(lambda p: f2(p) / _norm(p)), pts, q)
    else:
        raise DomainError(f"unknown form {form!r}")
    lhs = complex(np.sum(w * np.conj(left) * f2(pts)))
    rhs = complex(np.sum(w * np.conj(f1(pts)) * right))
    return lhs, rhs


@dataclass(frozen=True)
class BallQuadrature:
    """Composite Gauss-Legendre radial panels x GL in cos(theta) x uniform azimuth.

    ``tail_model="inverse"`` assumes the truncation error falls off like
    1/R_cut and removes it by comparing the integrals over radius R_cut and
    R_cut/2; ``"none"`` returns the plain truncated integral.
    """

    r_cut: float = 40.0
    panel_width: float = 2.5
    panel_order: int = 16
    n_polar: int = 160
    n_azimuth: int = 1
    tail_model: str = "inverse"


def config_inner_parts(psi1, psi2, m, quad=BallQuadrature()):
    """(I(R_cut), I(R_cut/2)) for the configuration-space product at t = 0.

    ``psi1``/``psi2`` map points x (..., 3) to (psi, d_t psi).
    """
    n_pan = max(2, 2 * int(np.ceil(quad.r_cut / (2 * quad.panel_width))))
    edges = np.linspace(0.0, quad.r_cut, n_pan + 1)
    xr, wr = np.polynomial.legendre.leggauss(quad.panel_order)
    c, wc = np.polynomial.legendre.leggauss(quad.n_polar)
    ph = 2 * np.pi * (np.arange(quad.n_azimuth) + 0.5) / quad.n_azimuth
    half, full = 0j, 0j
    for i, (a, b) in enumerate(zip(edges[:-1], edges[1:])):
        r = 0.5 * (b - a) * (xr + 1) + a
        w = 0.5 * (b - a) * wr
        R, C, P = np.meshgrid(r, c, ph, indexing="ij")
        S = np.sqrt(1 - C * C)
        pts = np.stack([R * S * np.cos(P), R * S * np.sin(P), R * C], axis=-1)
        wt = w[:, None, None] * wc[None, :, None] * (2 * np.pi / quad.n_azimuth) * R**2
        p1, d1 = psi1(pts)
        p2, d2 = psi2(pts)
        dens = 0.5 * np.conj(d1) * (d2 + 1j * m * p2) + 0.5 * np.conj(d1 + 1j * m * p1) * d2
        full += np.sum(wt * dens)
        if i + 1 == n_pan // 2:
            half = full
    return complex(full), complex(half)


def config_inner(psi1, psi2, m, quad=BallQuadrature(), tol=None):
    """(1/2) int [d_t psi1]* [(d_t + i m) psi2] d^3x + symmetric conjugate, at t = 0.

    The tail beyond R_cut is estimated from the change between R_cut/2 and
    R_cut; when ``tol`` is given and the relative tail exceeds it a
    QuadratureError is raised.
    """
    full, half = config_inner_parts(psi1, psi2, m, quad)
    if quad.tail_model == "inverse":
        tail = full - half
    elif quad.tail_model == "none":
        tail = 0j
    else:
        raise DomainError(f"unknown tail model {quad.tail_model!r}")
    est = abs(full - half)
    if tol is not None and est > tol * max(abs(full), 1e-300):
        raise QuadratureError("increase R_cut", tail=est, value=full, r_cut=quad.r_cut)
    return full + tail


# ------------------------------------------------------------- appendix identities

@dataclass(frozen=True)
class IdentityResidual:
    lhs: complex
    rhs: complex

    @property
    def residual(self):
        return self.lhs - self.rhs

    @property
    def scale(self):
        return max(abs(self.lhs), abs(self.rhs))

    @property
    def relative(self):
        s = self.scale
        return abs(self.residual) / s if s > 0 else abs(self.residual)


def _d(f, p, axis, h):
    """Partial derivative along a coordinate axis with |p|-relative step."""
    return _rel_gradient(f, p, h)[..., axis]


def appendix_identity_residual(which, field, k, m=1.0, q=RayQuadrature(), h=1e-3):
    """LHS and RHS of the commutator identities A1..A5 applied to ``field`` at ``k``."""
    k = np.asarray(k, dtype=float)
    kn = _norm(k)
    dinv = lambda g, p: dilation_inverse_apply(g, p, q)  # noqa: E731
    if which == "A1":
        # [D^-1, k grad_1] = 0
        kd1 = field.derived(lambda p: _norm(p) * _d(field, p, 0, h))
        lhs = dinv(kd1, k)
        rhs = kn * _d(lambda p: dinv(field, p), k, 0, h)
    elif which == "A2":
        # grad_1 D^-1 = (1/k) D^-1 k grad_1
        kd1 = field.derived(lambda p: _norm(p) * _d(field, p, 0, h))
        lhs = _d(lambda p: dinv(field, p), k, 0, h)
        rhs = dinv(kd1, k) / kn
    elif which == "A3":
        # [D^-1, k1 grad_2 - k2 grad_1] = 0
        def rot(f):
            def g(p):
                gr = _rel_gradient(f, p, h)
                return p[..., 0] * gr[..., 1] - p[..., 1] * gr[..., 0]
            return g
        lhs = dinv(field.derived(rot(field)), k)
        rhs = rot(lambda p: dinv(field, p))(k)
    elif which == "A4":
        # [D, k/w] = -i m^2 k / w^3
        f = lambda p: _norm(p) / omega(m, p)  # noqa: E731
        lhs = dilation_apply(field.derived(lambda p: f(p) * field(p)), k, h * kn) \
            - f(k) * dilation_apply(field, k, h * kn)
        rhs = -1j * m * m * kn / omega(m, k) ** 3 * field(k)
    elif which == "A5":
        # [D^-1, k/w] = i D^-1 (m^2 k / w^3) D^-1
        f = lambda p: _norm(p) / omega(m, p)  # noqa: E731
        g = lambda p: m * m * _norm(p) / omega(m, p) ** 3  # noqa: E731
        lhs = dinv(field.derived(lambda p: f(p) * field(p)), k) - f(k) * dinv(field, k)
        inner = ScalarField3(lambda p: g(p) * dinv(field, p), "algebraic", field.ray_support)
        rhs = 1j * dinv(inner, k)
    else:
        raise DomainError(f"unknown identity {which!r}")
    return IdentityResidual(complex(lhs), complex(rhs))


def commutator12_apply(field, m, k, q_inner=RayQuadrature(), q_outer=RayQuadrature(n_nodes=480),
                       h=1e-3):
    """([v~_1, v~_2] f)(k) by composing velocity_apply in both orders.

    Returns (v1 v2 f, v2 v1 f); the commutator is their difference.
    """
    k = np.asarray(k, dtype=float)
    v2f = ScalarField3(lambda p: velocity_apply(field, m, p, q_inner, h)[..., 1], "algebraic")
    v1f = ScalarField3(lambda p: velocity_apply(field, m, p, q_inner, h)[..., 0], "algebraic")
    a = velocity_apply(v2f, m, k, q_outer, h)[..., 0]
    b = velocity_apply(v1f, m, k, q_outer, h)[..., 1]
    return complex(a), complex(b)


# ------------------------------------------------------ regularised step function

def _shell_function(params, k):
    k = np.asarray(k, dtype=float)
    w = omega(params.mass, k)
    return w - params.mass - k @ params.v, w


def grad_E_identity_residual(params, k, sigma, h):
    """grad_k E_s(g) - (k - w v) alpha_s, with g = w - m - v.k and Gaussian width s.

    E_s = erf(g / (sqrt(2) s)) / 2 and alpha_s = delta_s(g) / w, so that the
    pair reduces to the step/delta pair as s -> 0.
    """
    if not sigma > 0:
        raise DomainError("regularisation width must be positive")
    if h >= sigma / 4:
        raise DomainError("stencil wider than regularization")
    k = np.asarray(k, dtype=float)
    E = lambda p: 0.5 * erf(_shell_function(params, p)[0] / (np.sqrt(2) * sigma))  # noqa: E731
    grad = fd.gradient(E, k, h)
    g, w = _shell_function(params, k)
    alpha = np.exp(-0.5 * (g / sigma) ** 2) / (np.sqrt(2 * np.pi) * sigma) / w
    return grad - (k - w[..., None] * params.v) * alpha[..., None]


def regularized_alpha(params, k, sigma):
    g, w = _shell_function(params, k)
    return np.exp(-0.5 * (g / sigma) ** 2) / (np.sqrt(2 * np.pi) * sigma) / w


def dilation_E_identity_residual(params, k, sigma, h):
    """(k.grad) E_s - m (w - m) alpha_s; vanishes on the shell, O(sigma) relative nearby."""
    if h >= sigma / 4:
        raise DomainError("stencil wider than regularization")
    k = np.asarray(k, dtype=float)
    E = lambda p: 0.5 * erf(_shell_function(params, p)[0] / (np.sqrt(2) * sigma))  # noqa: E731
    kgrad = np.sum(k * fd.gradient(E, k, h), axis=-1)
    _, w = _shell_function(params, k)
    return kgrad - params.mass * (w - params.mass) * regularized_alpha(params, k, sigma)


# --------------------------------------------- configuration-space oscillatory rays

@dataclass(frozen=True)
class OscillatoryRayQuadrature:
    n_inner_panels: int = 8
    panel_order: int = 16
    decay_cut: float = 40.0
    min_rate: float = 1e-2


def dilation_inverse_oscillatory(exact, pieces, q=OscillatoryRayQuadrature()):
    """(i/2)[int_0^1 - int_1^inf] for an integrand that oscillates without decay.

    ``exact(lam)`` gives the integrand on real lam in [0, 1].  The tail is
    the Abel-summed value: each entry of ``pieces`` is (f, sense, rate) where f
    continues analytically and decays like exp(-rate*s) along lam = 1 + sense*i*s,
    so the tail integral becomes sense*i*int_0^inf f(1 + sense*i*s) ds.
    """
    x, w = np.polynomial.legendre.leggauss(q.panel_order)
    edges = np.linspace(0.0, 1.0, q.n_inner_panels + 1)
    a, b = edges[:-1, None], edges[1:, None]
    lam = ((b - a) / 2 * x + (b + a) / 2).ravel()
    wl = ((b - a) / 2 * w).ravel()
    i_in = np.sum(wl * exact(lam))
    i_out = 0.0
    for f, sense, rate in pieces:
        if rate < q.min_rate:
            raise NonIntegrableError("non-integrable along ray: oscillation without decay",
                                     rate=rate)
        s_max = q.decay_cut / rate
        width = min(1.0, 2.0 / rate)
        n_pan = int(np.ceil(s_max / width))
        edges = np.linspace(0.0, s_max, n_pan + 1)
        a, b = edges[:-1, None], edges[1:, None]
        s = ((b - a) / 2 * x + (b + a) / 2).ravel()
        ws = ((b - a) / 2 * w).ravel()
        i_out = i_out + sense * 1j * np.sum(ws * f(1.0 + sense * 1j * s))
    return 0.5j * (i_in - i_out)
