"""Classical phase space: the (x, k) -> (z, v) canonical transformation.

The maps are closed forms; brackets are checked with 4th-order finite
differences so that the verification does not reuse the algebra.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from . import fd
from .errors import DomainError, SingularLocusError

SINGULAR_GUARD = 1e-8


class ConditioningWarning(UserWarning):
    pass


@dataclass(frozen=True)
class PhasePoint:
    x: tuple
    k: tuple

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(float(c) for c in self.x))
        object.__setattr__(self, "k", tuple(float(c) for c in self.k))

    def array(self):
        return np.array(self.x + self.k)


@dataclass(frozen=True)
class CanonPoint:
    z: tuple
    v: tuple

    def __post_init__(self):
        object.__setattr__(self, "z", tuple(float(c) for c in self.z))
        object.__setattr__(self, "v", tuple(float(c) for c in self.v))

    def array(self):
        return np.array(self.z + self.v)


def _omega_minus_m(m, k2):
    return k2 / (np.sqrt(m * m + k2) + m)


def forward_arrays(x, k, m):
    """Vectorised forward map on arrays with a trailing axis of length 3."""
    x = np.asarray(x, dtype=float)
    k = np.asarray(k, dtype=float)
    k2 = np.sum(k * k, axis=-1)
    kx = np.sum(k * x, axis=-1)
    scale = np.sqrt(k2 * np.sum(x * x, axis=-1))
    if np.any(k2 == 0):
        raise SingularLocusError("k = 0 lies on the singular locus (w - m = 0)")
    if np.any(np.abs(kx) <= SINGULAR_GUARD * scale):
        raise SingularLocusError("k.x = 0 lies on the singular locus")
    w = np.sqrt(m * m + k2)
    wm = _omega_minus_m(m, k2)
    z = (w * kx / (m * wm))[..., None] * k
    v = k / w[..., None] - (m * wm / (w * kx))[..., None] * x
    return z, v


def inverse_arrays(z, v, m):
    """Vectorised inverse map."""
    z = np.asarray(z, dtype=float)
    v = np.asarray(v, dtype=float)
    zn = np.sqrt(np.sum(z * z, axis=-1))
    if np.any(zn == 0):
        raise SingularLocusError("z = 0 has no direction")
    s = np.sum(z * v, axis=-1) / zn
    if np.any(np.abs(s) >= 1):
        raise SingularLocusError("|z-hat . v| >= 1 is singular")
    if np.any(s == 0):
        raise SingularLocusError("z-hat . v = 0 gives k = 0")
    zv = np.sum(z * v, axis=-1)
    x = ((1 - s * s) / m)[..., None] * (z / (1 + s * s)[..., None]
                                        - (zn * zn / (2 * zv))[..., None] * v)
    k = (2 * m * s / (1 - s * s) / zn)[..., None] * z
    return x, k


def forward(p, m):
    z, v = forward_arrays(p.x, p.k, m)
    return CanonPoint(tuple(z), tuple(v))


def inverse(c, m):
    x, k = inverse_arrays(c.z, c.v, m)
    return PhasePoint(tuple(x), tuple(k))


def hamiltonian_zv(c, m):
    """m (1 + s^2)/(1 - s^2) with s = z-hat . v; equals sqrt(m^2 + k^2)."""
    z = np.asarray(c.z if isinstance(c, CanonPoint) else c[0], dtype=float)
    v = np.asarray(c.v if isinstance(c, CanonPoint) else c[1], dtype=float)
    zn = np.sqrt(np.sum(z * z, axis=-1))
    s = np.sum(z * v, axis=-1) / zn
    if np.any(np.abs(s) >= 1):
        raise SingularLocusError("|z-hat . v| >= 1 is singular")
    out = m * (1 + s * s) / (1 - s * s)
    return float(out) if np.ndim(out) == 0 else out


def admissible(x, k):
    """Round-trip domain: k.x > 0 away from the guard."""
    x = np.asarray(x, float)
    k = np.asarray(k, float)
    kx = np.sum(k * x, axis=-1)
    scale = np.sqrt(np.sum(k * k, axis=-1) * np.sum(x * x, axis=-1))
    return kx > SINGULAR_GUARD * scale


def poisson_bracket(f, g, p, h=1e-4):
    """{f, g} = df/dx . dg/dk - df/dk . dg/dx by 4th-order differences.

    ``f`` and ``g`` take a 6-vector (x, k) and return a scalar.
    """
    y = p.array() if isinstance(p, PhasePoint) else np.asarray(p, dtype=float)
    if not h > 0:
        raise DomainError("finite-difference step must be positive")
    gf = fd.gradient(f, y, h)
    gg = fd.gradient(g, y, h)
    return float(gf[:3] @ gg[3:] - gf[3:] @ gg[:3])


def _components(m):
    def z_a(a):
        return lambda y: forward_arrays(y[..., :3], y[..., 3:], m)[0][..., a]

    def v_a(a):
        return lambda y: forward_arrays(y[..., :3], y[..., 3:], m)[1][..., a]

    return z_a, v_a


def bracket_matrices(p, m, h=1e-4):
    """The three 3x3 bracket matrices {v_a, v_b}, {z_a, z_b}, {z_a, v_b} at p.

    Gradients of all six map components are taken once and contracted.
    """
    y = p.array()
    kx = float(np.dot(y[:3], y[3:]))
    scale = float(np.linalg.norm(y[:3]) * np.linalg.norm(y[3:]))
    if abs(kx) < 1e-3 * scale:
        warnings.warn(f"point is close to the singular locus (k.x = {kx:.3g})",
                      ConditioningWarning, stacklevel=2)
    comp = lambda yy: np.concatenate(  # noqa: E731
        forward_arrays(yy[..., :3], yy[..., 3:], m), axis=-1)
    # jac[i, c]: derivative of component c along phase-space coordinate i
    jac = np.stack([fd.derivative(comp, y, np.eye(6)[i], h) for i in range(6)])
    dx, dk = jac[:3], jac[3:]
    br = dx.T @ dk - dk.T @ dx
    return br[3:, 3:], br[:3, :3], br[:3, 3:]


@dataclass(frozen=True)
class BracketSummary:
    vv: float
    zz: float
    zv: float
    richardson: float

    @property
    def worst(self):
        return max(self.vv, self.zz, self.zv)


def bracket_table(p, m, h=1e-4):
    """Max residuals of {v,v}=0, {z,z}=0, {z,v}=delta at step h.

    ``richardson`` is the largest change between steps h and 2h, which
    bounds the truncation error of the step-h values.
    """
    vv, zz, zv = bracket_matrices(p, m, h)
    vv2, zz2, zv2 = bracket_matrices(p, m, 2 * h)
    change = max(np.max(np.abs(vv - vv2)), np.max(np.abs(zz - zz2)), np.max(np.abs(zv - zv2)))
    return BracketSummary(float(np.max(np.abs(vv))), float(np.max(np.abs(zz))),
                          float(np.max(np.abs(zv - np.eye(3)))), float(change))


def random_admissible(rng, n, scale=2.0):
    """n random (x, k) pairs with k.x > 0.1 |k||x|."""
    xs, ks = [], []
    while len(xs) < n:
        x = rng.normal(size=(2 * n, 3)) * scale
        k = rng.normal(size=(2 * n, 3)) * scale
        kx = np.sum(x * k, axis=-1)
        ok = kx > 0.1 * np.linalg.norm(x, axis=-1) * np.linalg.norm(k, axis=-1)
        xs.extend(x[ok])
        ks.extend(k[ok])
    return np.array(xs[:n]), np.array(ks[:n])
