"""Special functions and elementary relativistic kinematics.

Everything here is vectorised over numpy arrays and free of state.
"""

import math

import numpy as np

from .errors import DomainError

MAX_ORDER = 8

# Y_ll convention: orthonormal harmonics with the Condon-Shortley phase.
HARMONIC_CONVENTION = "orthonormal, Condon-Shortley phase"


def lorentz_gamma(speed):
    """(1 - v^2)^(-1/2) for 0 <= v < 1."""
    s = np.asarray(speed, dtype=float)
    if np.any(s >= 1.0):
        raise DomainError("superluminal velocity: speed must be < 1")
    if np.any(s < 0.0):
        raise DomainError("speed must be non-negative")
    g = 1.0 / np.sqrt((1.0 - s) * (1.0 + s))
    return float(g) if g.ndim == 0 else g


def speed_of(velocity):
    v = np.asarray(velocity, dtype=float)
    return float(np.sqrt(v @ v))


def unit_vector(vec, tol=1e-12):
    """Normalise a 3-vector; the result is checked against ``tol``."""
    v = np.asarray(vec, dtype=float)
    n = np.sqrt(v @ v)
    if n == 0.0:
        raise DomainError("zero vector has no direction")
    u = v / n
    assert abs(np.sqrt(u @ u) - 1.0) <= tol
    return u


def _double_factorial(n):
    return math.prod(range(n, 0, -2)) if n > 0 else 1


def _series_j(l, u, terms=16):
    # j_l(u) = u^l sum_n (-u^2/2)^n / (n! (2l+2n+1)!!)
    z = -0.5 * u * u
    term = np.ones_like(u) / _double_factorial(2 * l + 1)
    acc = term.copy()
    for n in range(1, terms):
        term = term * z / (n * (2 * l + 2 * n + 1))
        acc = acc + term
    return acc * u**l


def _j0_j1(u):
    s, c = np.sin(u), np.cos(u)
    return s / u, s / (u * u) - c / u


def _upward_j(l, u):
    j0, j1 = _j0_j1(u)
    if l == 0:
        return j0
    prev, cur = j0, j1
    for n in range(1, l):
        prev, cur = cur, (2 * n + 1) / u * cur - prev
    return cur


def _miller_j(l, u):
    # Downward recurrence from an order well above l, normalised with
    # sum_n (2n+1) j_n(u)^2 = 1; the overall sign is fixed against (j0, j1).
    top = l + 25 + int(np.ceil(np.max(u)))
    nxt = np.zeros_like(u)
    cur = np.full_like(u, 1e-30)
    norm = (2 * top + 1) * cur * cur
    keep = np.zeros_like(u)
    c1 = c0 = None
    for n in range(top, 0, -1):
        prev = (2 * n + 1) / u * cur - nxt
        nxt, cur = cur, prev
        norm = norm + (2 * n - 1) * cur * cur
        if n - 1 == l:
            keep = cur.copy()
        if n - 1 == 1:
            c1 = cur.copy()
        if n - 1 == 0:
            c0 = cur.copy()
    j0, j1 = _j0_j1(u)
    sign = np.sign(c0 * j0 + c1 * j1)
    return sign * keep / np.sqrt(norm)


def sph_bessel_j(l, u):
    """Spherical Bessel function j_l(u) for integer 0 <= l <= 8 and real u >= 0.

    Series below u = 0.1 (l + 1), Miller's downward recurrence for u < l,
    upward recurrence from the closed forms of j0 and j1 elsewhere.
    """
    if not (0 <= int(l) <= MAX_ORDER) or int(l) != l:
        raise DomainError(f"order must be an integer in 0..{MAX_ORDER}, got {l!r}")
    l = int(l)
    arr = np.asarray(u, dtype=float)
    scalar = arr.ndim == 0
    u = np.abs(np.atleast_1d(arr))
    out = np.empty_like(u)
    small = u < 0.1 * (l + 1)
    mid = ~small & (u < l)
    big = ~small & ~mid
    if small.any():
        out[small] = _series_j(l, u[small])
    if mid.any():
        out[mid] = _miller_j(l, u[mid])
    if big.any():
        out[big] = _upward_j(l, u[big])
    if l % 2 == 1:
        out = np.where(np.atleast_1d(arr) < 0, -out, out)
    return float(out[0]) if scalar else out.reshape(arr.shape)


def j1_over_u(u):
    """j_1(u)/u with the removable singularity at u = 0 (limit 1/3)."""
    arr = np.asarray(u, dtype=float)
    u = np.abs(np.atleast_1d(arr))
    out = np.empty_like(u)
    small = u < 0.2
    z = u[small] ** 2
    out[small] = 1 / 3 - z / 30 + z * z / 840 - z**3 / 45360 + z**4 / 3991680
    out[~small] = sph_bessel_j(1, u[~small]) / u[~small]
    return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)


def sph_hankel(kind, l, z):
    """Spherical Hankel function of the first (kind=1) or second kind, complex z.

    Closed form h_l(z) = (-/+i)^(l+1) e^(+/-iz)/z * sum_k (+/-i)^k (l+k)!/(k!(l-k)!(2z)^k).
    """
    z = np.asarray(z, dtype=complex)
    s = 1j if kind == 1 else -1j
    return sph_hankel_scaled(kind, l, z) * np.exp(s * z)


def sph_hankel_scaled(kind, l, z):
    """sph_hankel with its exponential removed: h_l(z) exp(-/+ i z)."""
    if kind not in (1, 2):
        raise DomainError("kind must be 1 or 2")
    z = np.asarray(z, dtype=complex)
    s = 1j if kind == 1 else -1j
    acc = np.zeros_like(z)
    for k in range(l + 1):
        c = math.factorial(l + k) / (math.factorial(k) * math.factorial(l - k))
        acc = acc + c * s**k / (2 * z) ** k
    return (-s) ** (l + 1) / z * acc


def harmonic_norm(l):
    """N_l with Y_ll = N_l ((x + i y)/r)^l, orthonormal with Condon-Shortley phase."""
    return (-1) ** l * math.sqrt(math.factorial(2 * l + 1) / (4 * math.pi)) / (
        2**l * math.factorial(l))


def sph_harmonic_ll(l, x, y, r):
    """Y_ll evaluated from Cartesian components: N_l ((x + i y)/r)^l."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r = np.asarray(r, dtype=float)
    n = harmonic_norm(l)
    if l == 0:
        return np.broadcast_to(complex(n), np.broadcast(x, y, r).shape)[()] + 0j
    if np.any(r <= 0):
        raise DomainError("direction undefined at r = 0")
    return n * ((x + 1j * y) / r) ** l


def step_E(chi):
    """Anti-derivative of the delta function: -1/2 below zero, +1/2 above, 0 at 0."""
    out = 0.5 * np.sign(np.asarray(chi, dtype=float))
    return float(out) if out.ndim == 0 else out
