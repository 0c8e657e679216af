"""Axial Lorentz boosts and the coordinate map that turns one packet into another."""

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .kernel_math import lorentz_gamma
from .wavepacket import PacketParams, SpinPacketParams, eval_psi, eval_psi_spin


@dataclass(frozen=True)
class BoostParams:
    """Boost with speed ``v`` along z."""

    v: float
    gamma: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "v", float(self.v))
        object.__setattr__(self, "gamma", lorentz_gamma(abs(self.v)))


def boost_event(t, x, b):
    """z -> gamma (z - v t), t -> gamma (t - v z); x, y unchanged.  Returns (t', x')."""
    x = np.array(x, dtype=float)
    t = np.asarray(t, dtype=float)
    g, v = b.gamma, b.v
    z = x[..., 2].copy()
    x[..., 2] = g * (z - v * t)
    return g * (t - v * z), x


def boost_momentum(k, m, b):
    """Boosted (k', w') with k3' = gamma (k3 - v w), w' = gamma (w - v k3)."""
    k = np.array(k, dtype=float)
    g, v = b.gamma, b.v
    w = np.sqrt(m * m + np.sum(k * k, axis=-1))
    k3 = k[..., 2].copy()
    k[..., 2] = g * (k3 - v * w)
    return k, g * (w - v * k3)


def boosted_stationary(mass, speed, t, x):
    """The spherical solution evaluated at boosted coordinates; equals eval_psi."""
    from .wavepacket import eval_psi_stationary
    tb, xb = boost_event(t, x, BoostParams(speed))
    return eval_psi_stationary(mass, speed, tb, xb)


@dataclass(frozen=True)
class PacketMapParams:
    """Source speed ``v`` and target speed ``v_prime``, both along z."""

    v: float
    v_prime: float

    def __post_init__(self):
        object.__setattr__(self, "v", float(self.v))
        object.__setattr__(self, "v_prime", float(self.v_prime))
        if self.v == 0.0:
            raise DomainError("source speed must be nonzero (1/v factor)")
        lorentz_gamma(abs(self.v))
        lorentz_gamma(abs(self.v_prime))

    @property
    def mixed_sign(self):
        return self.v * self.v_prime < 0


def packet_coord_map(t_p, x_p, pm):
    """Unprimed coordinates from primed ones; time is left unchanged.

    z = (g'^2 v' z' + (g^2 - g'^2) t') / (g^2 v), transverse scaled by g'|v'|/(g|v|).
    """
    x_p = np.asarray(x_p, dtype=float)
    t_p = np.asarray(t_p, dtype=float)
    g2 = lorentz_gamma(abs(pm.v)) ** 2
    gp2 = lorentz_gamma(abs(pm.v_prime)) ** 2
    scale = np.sqrt(gp2) * abs(pm.v_prime) / (np.sqrt(g2) * abs(pm.v))
    x = x_p * scale
    x[..., 2] = (gp2 * pm.v_prime * x_p[..., 2] + (g2 - gp2) * t_p) / (g2 * pm.v)
    return np.broadcast_to(t_p, x.shape[:-1]).copy()[()], x


def map_identities(t_p, x_p, pm):
    """Residuals of g^2 (t - v z) = g'^2 (t' - v' z') and g^2 v (z - v t) = g'^2 v' (z' - v' t')."""
    t, x = packet_coord_map(t_p, x_p, pm)
    g2 = lorentz_gamma(abs(pm.v)) ** 2
    gp2 = lorentz_gamma(abs(pm.v_prime)) ** 2
    z, zp = x[..., 2], np.asarray(x_p, float)[..., 2]
    r1 = g2 * (t - pm.v * z) - gp2 * (t_p - pm.v_prime * zp)
    r2 = g2 * pm.v * (z - pm.v * t) - gp2 * pm.v_prime * (zp - pm.v_prime * t_p)
    return r1, r2


def packet_map_residual(pm, t_p, x_p, mass=1.0, l=0):
    """Psi_v(map(t', x')) - Psi_v'(t', x'); spin packets for l > 0."""
    t, x = packet_coord_map(t_p, x_p, pm)
    src = PacketParams(mass, (0.0, 0.0, pm.v))
    dst = PacketParams(mass, (0.0, 0.0, pm.v_prime))
    if l == 0:
        return eval_psi(src, t, x) - eval_psi(dst, t_p, x_p)
    return (eval_psi_spin(SpinPacketParams(src, l), t, x)
            - eval_psi_spin(SpinPacketParams(dst, l), t_p, x_p))


def compose_residual(v, v1, v2, t_p, x_p):
    """map(v -> v1) after map(v1 -> v2) minus map(v -> v2), as coordinate differences."""
    t_a, x_a = packet_coord_map(t_p, x_p, PacketMapParams(v1, v2))
    t_b, x_b = packet_coord_map(t_a, x_a, PacketMapParams(v, v1))
    t_c, x_c = packet_coord_map(t_p, x_p, PacketMapParams(v, v2))
    return np.maximum(np.abs(t_b - t_c), np.max(np.abs(x_b - x_c), axis=-1))


def pair_specificity(pm, v_other, t_p, x_p, candidates, mass=1.0):
    """min over v''' of sup |Psi_v''(map(t', x')) - Psi_v'''(t', x')| over the sample.

    The map is built for (v, v'); applied to a packet of another speed v'' it
    should not reproduce any packet of the family.
    """
    t, x = packet_coord_map(t_p, x_p, pm)
    mapped = eval_psi(PacketParams(mass, (0.0, 0.0, v_other)), t, x)
    best = np.inf
    for c in candidates:
        ref = eval_psi(PacketParams(mass, (0.0, 0.0, c)), t_p, x_p)
        best = min(best, float(np.max(np.abs(mapped - ref))))
    return best
