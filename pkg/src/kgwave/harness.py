"""Registry and runner for the identity checks, with deterministic reports.

Each check draws its samples from its own counter-based generator (Philox,
keyed by the seed, with the CRC32 of the check id in the counter), so the
points a check sees depend only on (seed, id).
"""

import csv
import io
import json
import os
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import canonical_maps as cm
from . import frame_maps as fm
from . import momentum_rep as mr
from . import operator_kit as ok
from . import wavepacket as wp
from .errors import DomainError

SCHEMA = "kgwave-report/1"
FIELDS = ("id", "params", "residual", "tolerance", "pass", "resolution", "runtime_ms", "notes")
SUITES = ("all", "pde", "operator", "canonical", "frames", "appendix", "sec5")
EPS = np.finfo(float).eps


class ConfigError(ValueError):
    pass


@dataclass
class Outcome:
    residual: float
    resolution: dict = field(default_factory=dict)
    notes: str = ""


@dataclass(frozen=True)
class CheckSpec:
    id: str
    suite: str
    tolerance: float
    func: Callable
    defaults: dict = field(default_factory=dict)
    anchor: str = ""

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ConfigError(f"{self.id}: tolerance must be positive")


@dataclass
class CheckReport:
    id: str
    params: dict
    residual: float
    tolerance: float
    passed: bool
    resolution: dict
    runtime_ms: object
    notes: str

    def as_dict(self):
        res = self.residual if np.isfinite(self.residual) else None
        return {"id": self.id, "params": self.params, "residual": res,
                "tolerance": self.tolerance, "pass": self.passed,
                "resolution": self.resolution, "runtime_ms": self.runtime_ms,
                "notes": self.notes}


def rng_for(seed, check_id):
    """Philox generator: key = seed, counter = (0, 0, crc32(id), 0)."""
    ctr = np.array([0, 0, zlib.crc32(check_id.encode()), 0], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=int(seed), counter=ctr))


def _rel(res, scale):
    return float(np.max(np.abs(res)) / max(float(np.max(np.abs(scale))), 1e-300))


def _axial(m, v):
    return wp.PacketParams(m, (0.0, 0.0, v))


def _points(rng, n, radius):
    return rng.uniform(-radius, radius, (n, 3)), rng.uniform(-radius / 2, radius / 2, n)


# ----------------------------------------------------------------- pde checks

MASSES = (1.0, 2.0)
SPEEDS = (0.3, 0.6, 0.9)


def check_kg_residual(rng, p):
    worst = 0.0
    for m in MASSES:
        for v in SPEEDS:
            x, t = _points(rng, p["samples"], 6.0 / m)
            params = _axial(m, v)
            res = wp.kg_residual_fd(params, t, x)
            scale = m * m * np.max(np.abs(wp.eval_psi(params, t, x)))
            worst = max(worst, float(np.max(np.abs(res)) / scale))
    return Outcome(worst, {"h": "1e-3/m", "points": p["samples"]},
                   "max over m in {1,2}, |v| in {0.3,0.6,0.9}")


def roundoff_floor(psi_rms, h):
    """Round-off level of the 4th-order residual: 4 second differences of eps-accurate values."""
    return 4 * (64 / 12) * EPS * psi_rms / h**2


def convergence_orders(steps=(1e-2, 5e-3, 2.5e-3), samples=200, rng=None, margin=30.0):
    """Observed orders per (m, |v|) from rms residuals at successive steps.

    A pair of steps is used only if both residuals exceed ``margin`` times the
    round-off floor; otherwise the pair is reported as round-off limited.
    Returns a list of (m, v, order or None, note).
    """
    rng = rng or np.random.default_rng(0)
    out = []
    for m in MASSES:
        for v in SPEEDS:
            x, t = _points(rng, samples, 6.0 / m)
            params = _axial(m, v)
            psi_rms = float(np.sqrt(np.mean(np.abs(wp.eval_psi(params, t, x)) ** 2)))
            rms = [float(np.sqrt(np.mean(np.abs(wp.kg_residual_fd(params, t, x, h)) ** 2)))
                   for h in steps]
            for i in range(len(steps) - 1):
                h0, h1 = steps[i], steps[i + 1]
                usable = rms[i + 1] > margin * roundoff_floor(psi_rms, h1)
                order = float(np.log(rms[i] / rms[i + 1]) / np.log(h0 / h1)) if usable else None
                out.append((m, v, h0, h1, order))
    return out


def check_kg_order(rng, p):
    rows = convergence_orders(samples=p["samples"], rng=rng)
    used = [r for r in rows if r[4] is not None]
    if not used:
        return Outcome(float("inf"), {}, "all step pairs round-off limited")
    dev = max(abs(r[4] - 4.0) for r in used)
    lo = min(r[4] for r in used)
    hi = max(r[4] for r in used)
    return Outcome(dev, {"steps": [1e-2, 5e-3, 2.5e-3], "pairs_used": len(used),
                         "pairs_total": len(rows)},
                   f"|order - 4|; observed orders {lo:.3f}..{hi:.3f} on truncation-dominated pairs")


def check_closed_form(rng, p):
    # envelope against the angular quadrature of a spherical shell
    params = _axial(1.0, 0.6)
    x, t = _points(rng, 20, 8.0)
    psi = wp.eval_psi(params, t, x)
    rt = wp.tilde_r(params, t, x)
    env = np.array([mr.fourier_shell_j0(params.envelope_wavenumber, r, 128) for r in rt])
    phase = np.exp(-1j * params.mass * params.gamma**2 * (t - x @ params.v))
    return Outcome(_rel(psi - env * phase, psi), {"angular_nodes": 128})


def check_spin_proportionality(rng, p):
    # three nested stencils at h = 1e-3 sit at the eps/h^3 round-off level, so l <= 2
    worst = 0.0
    for l in (1, 2):
        sp = wp.SpinPacketParams(_axial(1.0, 0.6), l)
        x = rng.uniform(0.3, 2.0, (5, 3))
        ratios = np.array([wp.spin_ratio_fd(sp, xi, 1e-3) for xi in x])
        c = wp.spin_constant(sp)
        worst = max(worst, float(np.max(np.abs(ratios - c)) / abs(c)))
    return Outcome(worst, {"h": 1e-3, "orders": [1, 2]}, "nested raising stencils")


def check_spin_kg(rng, p):
    worst = 0.0
    for l in (1, 2, 3):
        sp = wp.SpinPacketParams(_axial(1.0, 0.6), l)
        x, t = _points(rng, 200, 5.0)
        res = wp.kg_residual_fd(sp, t, x)
        worst = max(worst, float(np.max(np.abs(res))))
    # spin packets are bounded by |N_l| < 1; the scale is m^2 = 1
    return Outcome(worst, {"h": 1e-3, "orders": [1, 2, 3]})


def check_transport(rng, p):
    worst = 0.0
    for m in MASSES:
        for v in SPEEDS:
            x, t = _points(rng, p["samples"], 6.0)
            params = _axial(m, v)
            worst = max(worst, _rel(wp.transport_residual(params, t, x), m))
    return Outcome(worst, {"points": p["samples"]}, "relative to m")


def _j1_points(rng, n):
    # keep away from the packet axis, where the ray integrand stops decaying
    rho = rng.uniform(0.5, 3.0, n)
    ph = rng.uniform(0, 2 * np.pi, n)
    z = rng.uniform(-3.0, 3.0, n)
    return np.stack([rho * np.cos(ph), rho * np.sin(ph), z], axis=-1)


def _j1_sides(rng, n):
    params = _axial(1.0, 0.6)
    x = _j1_points(rng, n)
    sides = [wp.gradient_identity_sides(params, xi) for xi in x]
    scale = max(float(np.max(np.abs(s[2]))) for s in sides)
    return sides, scale


def check_j1_lhs(rng, p):
    sides, scale = _j1_sides(rng, p["samples"])
    return Outcome(max(float(np.max(np.abs(a - c))) for a, _, c in sides) / scale,
                   {"points": p["samples"]}, "analytic derivatives")


def check_j1_rhs(rng, p):
    sides, scale = _j1_sides(rng, p["samples"])
    return Outcome(max(float(np.max(np.abs(b - c))) for _, b, c in sides) / scale,
                   {"points": p["samples"]}, "contour-rotated ray quadrature (Abel-summed tail)")


# -------------------------------------------------------------- frame checks

def check_boost_stationary(rng, p):
    worst = 0.0
    for v in SPEEDS:
        x, t = _points(rng, 200, 6.0)
        a = fm.boosted_stationary(1.0, v, t, x)
        worst = max(worst, _rel(a - wp.eval_psi(_axial(1.0, v), t, x), 1.0))
    return Outcome(worst, {"points": 200})


def check_mass_shell(rng, p):
    k = rng.normal(size=(500, 3)) * 2
    worst = 0.0
    for v in (-0.9, -0.3, 0.6):
        kb, wb = fm.boost_momentum(k, 1.0, fm.BoostParams(v))
        worst = max(worst, _rel(wb - np.sqrt(1 + np.sum(kb * kb, -1)), wb))
    return Outcome(worst, {"points": 500})


def check_shell_map(rng, p):
    worst = 0.0
    for v in SPEEDS:
        params = _axial(1.0, v)
        sh = mr.shell_of(params)
        u = rng.normal(size=(200, 3))
        rest = u / np.linalg.norm(u, axis=-1)[:, None] * (params.envelope_wavenumber)
        kb, _ = fm.boost_momentum(rest, 1.0, fm.BoostParams(-v))
        worst = max(worst, _rel(sh.residual(kb), sh.semi_transverse**2))
    return Outcome(worst, {"points": 200}, "rest sphere boosted with -|v| lands on the shell")


def check_packet_map(rng, p):
    worst = 0.0
    for v, vp in ((0.6, 0.8), (0.3, 0.6)):
        x, t = _points(rng, 100, 5.0)
        worst = max(worst, _rel(fm.packet_map_residual(fm.PacketMapParams(v, vp), t, x), 1.0))
    return Outcome(worst, {"points": 100})


def check_map_identities(rng, p):
    worst = 0.0
    for v, vp in ((0.6, 0.8), (0.3, 0.6)):
        x, t = _points(rng, 1000, 5.0)
        r1, r2 = fm.map_identities(t, x, fm.PacketMapParams(v, vp))
        scale = 1 + np.max(np.abs(x))
        worst = max(worst, _rel(r1, scale), _rel(r2, scale))
    return Outcome(worst, {"points": 1000})


def check_pair_specific(rng, p):
    x, t = _points(rng, 400, 5.0)
    best = fm.pair_specificity(fm.PacketMapParams(0.6, 0.8), 0.4, t, x,
                               np.linspace(0.01, 0.99, 99))
    return Outcome(0.1 / best, {"candidates": 99, "points": 400},
                   f"min sup-distance to the family {best:.4f}; residual = 0.1/distance")


def check_composition(rng, p):
    x, t = _points(rng, 200, 5.0)
    res = fm.compose_residual(0.3, 0.6, 0.8, t, x)
    return Outcome(_rel(res, 1 + np.max(np.abs(x))), {"points": 200},
                   "composition law of the packet map (holds analytically)")


def check_spin_map(rng, p):
    worst = 0.0
    for l in (1, 2, 3):
        x, t = _points(rng, 100, 5.0)
        worst = max(worst, _rel(fm.packet_map_residual(fm.PacketMapParams(0.6, 0.8), t, x,
                                                       l=l), 1.0))
    return Outcome(worst, {"orders": [1, 2, 3]}, "spin packets under the same map")


# ------------------------------------------------------------ canonical checks

def check_roundtrip(rng, p):
    x, k = cm.random_admissible(rng, 1000)
    z, v = cm.forward_arrays(x, k, 1.0)
    x2, k2 = cm.inverse_arrays(z, v, 1.0)
    r1 = max(_rel(x2 - x, np.abs(x).max()), _rel(k2 - k, np.abs(k).max()))
    x3, k3 = cm.inverse_arrays(z, v, 1.0)
    z2, v2 = cm.forward_arrays(x3, k3, 1.0)
    r2 = max(_rel(z2 - z, np.abs(z).max()), _rel(v2 - v, np.abs(v).max()))
    return Outcome(max(r1, r2), {"points": 1000})


def check_brackets(rng, p):
    x, k = cm.random_admissible(rng, p["samples"])
    worst, rich = 0.0, 0.0
    for xi, ki in zip(x, k):
        s = cm.bracket_table(cm.PhasePoint(xi, ki), 1.0, 1e-4)
        worst, rich = max(worst, s.worst), max(rich, s.richardson)
    return Outcome(worst, {"h": 1e-4, "richardson_2h_change": rich, "points": p["samples"]})


def check_hamiltonian(rng, p):
    x, k = cm.random_admissible(rng, 1000)
    z, v = cm.forward_arrays(x, k, 1.0)
    w = np.sqrt(1 + np.sum(k * k, -1))
    return Outcome(_rel(cm.hamiltonian_zv((z, v), 1.0) - w, w), {"points": 1000})


# ------------------------------------------------------------- operator checks

def _gaussian(rng, width_lo=0.5, width_hi=0.9):
    c = rng.uniform(-0.5, 0.5, 3)
    return ok.gaussian_field(tuple(c), float(rng.uniform(width_lo, width_hi)))


def _kpoints(rng, n, lo=0.3, hi=2.0):
    u = rng.normal(size=(n, 3))
    return u / np.linalg.norm(u, axis=-1)[:, None] * rng.uniform(lo, hi, n)[:, None]


def check_grad_E(rng, p):
    params = _axial(1.0, 0.6)
    sigma, h = 1e-2, 1e-4
    k = _near_shell(rng, params, 200, sigma)
    res = ok.grad_E_identity_residual(params, k, sigma, h)
    scale = np.abs(k - ok.omega(1.0, k)[:, None] * params.v) * ok.regularized_alpha(
        params, k, sigma)[:, None]
    return Outcome(_rel(res, scale), {"sigma": sigma, "h": h})


def _near_shell(rng, params, n, sigma):
    c = rng.uniform(0.1, 1.0, n)
    ph = rng.uniform(0, 2 * np.pi, n)
    r = mr.shell_radius(params.mass, params.speed, c) * (1 + rng.uniform(-3, 3, n) * sigma)
    s = np.sqrt(1 - c * c)
    return np.stack([r * s * np.cos(ph), r * s * np.sin(ph), r * c], axis=-1)


def check_dilation_E(rng, p):
    params = _axial(1.0, 0.6)
    sigma = p["sigma"]
    k = _near_shell(rng, params, 200, sigma)
    res = ok.dilation_E_identity_residual(params, k, sigma, sigma / 100)
    w = ok.omega(1.0, k)
    scale = (w - 1.0) * ok.regularized_alpha(params, k, sigma)
    return Outcome(_rel(res, scale), {"sigma": sigma, "h": sigma / 100},
                   "distributional identity; residual is O(sigma)")


def _eigen_points(rng, n, m, f):
    lo, hi = f.support
    v = rng.uniform(lo + 0.02, hi - 0.02, n)
    c = rng.uniform(0.1, 1.0, n)
    ph = rng.uniform(0, 2 * np.pi, n)
    r = mr.shell_radius(m, v, c)
    s = np.sqrt(1 - c * c)
    return np.stack([r * s * np.cos(ph), r * s * np.sin(ph), r * c], axis=-1)


def eigen_residual(rng, n=40, m=1.0, t=0.0, ray_nodes=480):
    f = mr.bump_profile(0.6, 0.15)
    k = _eigen_points(rng, n, m, f)
    field_ = mr.alpha_field(f, m) if t == 0 else mr.alpha_field_t(f, m, t)
    va = ok.velocity_apply(field_, m, k, ok.RayQuadrature(n_nodes=ray_nodes))
    a = field_(k)
    expect = mr.v_star(k, m)[:, None] * np.asarray(f.axis) * a[:, None]
    mask = np.abs(a) > 0.01 * np.max(np.abs(a))
    return float(np.max(np.abs(va - expect)[mask] / np.abs(a[mask])[:, None]))


def check_eigen(rng, p):
    return Outcome(eigen_residual(rng, p["samples"]), {"ray_nodes": 480, "h": 1e-3},
                   "pointwise relative error where |alpha| > 1% of max")


def check_dilation_inverse(rng, p):
    worst = 0.0
    for _ in range(3):
        f = _gaussian(rng)
        k = _kpoints(rng, 20)
        dinv = ok.dilation_inverse_field(f)
        a = ok.dilation_apply(dinv, k, 1e-3)
        b = ok.dilation_inverse_apply(f.derived(lambda q: ok.dilation_apply(f, q, 1e-3)), k)
        worst = max(worst, _rel(a - f(k), f(k)), _rel(b - f(k), f(k)))
    return Outcome(worst, {"ray_nodes": 960, "h": 1e-3}, "D D^-1 and D^-1 D on Gaussians")


ADJOINT_QUAD = ok.SphericalQuadrature(16, 8, 8, 6.0)


def adjoint_relative(f1, f2, quad=ADJOINT_QUAD, ray_nodes=480):
    lhs, rhs = ok.adjoint_residual(f1, f2, 1.0, quad, ok.RayQuadrature(n_nodes=ray_nodes))
    return float(np.max(np.abs(lhs - rhs)) / max(np.max(np.abs(lhs)), np.max(np.abs(rhs))))


def check_adjoint(rng, p):
    worst = 0.0
    for _ in range(p["samples"]):
        worst = max(worst, adjoint_relative(_gaussian(rng), _gaussian(rng)))
    return Outcome(worst, {"radial": 16, "polar": 8, "azimuth": 8, "ray_nodes": 480},
                   "v~ is not symmetric in the 3-D weighted product; see README")


def check_weighted_hermitian(rng, p):
    worst = 0.0
    q = ok.SphericalQuadrature(24, 12, 12, 6.0)
    for _ in range(5):
        f, g = _gaussian(rng), _gaussian(rng)
        a = ok.weighted_inner_momentum(f, g, 1.0, q)
        b = ok.weighted_inner_momentum(g, f, 1.0, q)
        n = ok.weighted_inner_momentum(f, f, 1.0, q)
        worst = max(worst, abs(a - np.conj(b)) / abs(a), 0.0 if n.real > 0 else 1.0)
    f, g = mr.bump_profile(0.6, 0.05), mr.bump_profile(0.55, 0.08)
    a = mr.weighted_inner_smeared(f, g, 1.0)
    b = mr.weighted_inner_smeared(g, f, 1.0)
    worst = max(worst, abs(a - np.conj(b)) / abs(a))
    return Outcome(worst, {"radial": 24}, "Hermitian symmetry and positivity")


def config_inner_pair(m=1.0, center=0.6, half_width=0.25, r_cut=40.0, n_v=160, n_polar=160):
    f = mr.bump_profile(center, half_width)
    field_ = lambda x: mr.smeared_packet(f, m, 0.0, x, n_v)  # noqa: E731
    val = ok.config_inner(field_, field_, m, ok.BallQuadrature(r_cut, n_polar=n_polar))
    pred = mr.weighted_inner_smeared(f, f, m)
    return val, pred


def check_config_inner(rng, p):
    val, pred = config_inner_pair()
    return Outcome(abs(val - pred) / abs(pred),
                   {"r_cut": 40.0, "panel_width": 2.5, "polar": 160, "v_nodes": 160},
                   "smeared packets against the momentum-space product; 1/R tail removed")


# ------------------------------------------------------------- appendix checks

def _appendix(which):
    def run(rng, p):
        worst = 0.0
        for _ in range(3):
            f = _gaussian(rng)
            for k in _kpoints(rng, 3):
                worst = max(worst, ok.appendix_identity_residual(which, f, k, 1.0).relative)
        return Outcome(worst, {"ray_nodes": 960, "h": 1e-3, "points": 9})
    return run


def commutator_relative(f, k, ray_nodes=320):
    q = ok.RayQuadrature(n_nodes=ray_nodes)
    a, b = ok.commutator12_apply(f, 1.0, k, q, q)
    return abs(a - b) / abs(a)


def check_commutator(rng, p):
    worst = 0.0
    f = _gaussian(rng)
    for k in _kpoints(rng, p["samples"]):
        worst = max(worst, commutator_relative(f, k))
    return Outcome(worst, {"ray_nodes": 320, "h": 1e-3},
                   "[v~1, v~2] relative to |v~1 v~2 f| on off-centre Gaussians")


# ---------------------------------------------------------------- sec5 checks

def check_synthesis(rng, p):
    params = _axial(1.0, 0.6)
    ax = np.linspace(-10 / np.sqrt(3), 10 / np.sqrt(3), 3)
    g = np.stack(np.meshgrid(ax, ax, ax, indexing="ij"), -1).reshape(-1, 3)
    n = p["nodes"]
    worst = 0.0
    for t in (0.0, 1.5):
        val = mr.synthesize_psi(params, t, g, mr.ShellQuadrature(n, n))
        worst = max(worst, _rel(val - wp.eval_psi(params, t, g), 1.0))
    return Outcome(worst, {"polar": n, "azimuth": n, "points": 27})


def check_norm(rng, p):
    ratios, ext = mr.norm_law_extrapolation(1.0, p["v0"])
    pred = mr.norm_coefficient(1.0, p["v0"])
    return Outcome(abs(ext - pred) / pred, {"widths": [0.05, 0.025, 0.0125]},
                   "ratios " + ", ".join(f"{r:.8f}" for r in ratios))


def check_coefficient(rng, p):
    return Outcome(abs(mr.norm_coefficient(1.0, 0.6) - 12.633094) / 12.633094, {},
                   "2 pi^2/(m gamma^2) at m=1, v=0.6 against 12.633094")


REGISTRY = {}


def register(spec):
    if spec.id in REGISTRY:
        raise ConfigError(f"duplicate check id {spec.id}")
    REGISTRY[spec.id] = spec


for _spec in (
    CheckSpec("eq01.kg_residual", "pde", 1e-8, check_kg_residual, {"samples": 1000}),
    CheckSpec("eq01.kg_order", "pde", 0.3, check_kg_order, {"samples": 200}),
    CheckSpec("eq06.closed_form", "pde", 1e-12, check_closed_form),
    CheckSpec("eq05.spin_proportionality", "pde", 1e-5, check_spin_proportionality),
    CheckSpec("eq05.spin_kg", "pde", 1e-8, check_spin_kg),
    CheckSpec("eq07.transport", "pde", 1e-12, check_transport, {"samples": 1000}),
    CheckSpec("eq22.j1_lhs", "pde", 1e-12, check_j1_lhs, {"samples": 10}),
    CheckSpec("eq22.j1_rhs", "pde", 1e-7, check_j1_rhs, {"samples": 10}),
    CheckSpec("eq03.boost_stationary", "frames", 1e-12, check_boost_stationary),
    CheckSpec("eq09.mass_shell", "frames", 1e-12, check_mass_shell),
    CheckSpec("eq09.shell_map", "frames", 1e-12, check_shell_map),
    CheckSpec("eq25.packet_map", "frames", 1e-12, check_packet_map),
    CheckSpec("eq25.identities", "frames", 1e-12, check_map_identities),
    CheckSpec("eq25.pair_specific", "frames", 1.0, check_pair_specific),
    CheckSpec("eq25.composition", "frames", 1e-12, check_composition),
    CheckSpec("eq25.spin", "frames", 1e-12, check_spin_map),
    CheckSpec("eq23.roundtrip", "canonical", 1e-12, check_roundtrip),
    CheckSpec("eq23.brackets", "canonical", 1e-6, check_brackets, {"samples": 20}),
    CheckSpec("eq23.hamiltonian", "canonical", 1e-12, check_hamiltonian),
    CheckSpec("eq13.grad_E", "operator", 1e-6, check_grad_E),
    CheckSpec("eq14.dilation_E", "operator", 1e-2, check_dilation_E, {"sigma": 1e-3}),
    CheckSpec("eq15.eigen", "operator", 1e-4, check_eigen, {"samples": 40}),
    CheckSpec("eq17.dilation_inverse", "operator", 1e-7, check_dilation_inverse),
    CheckSpec("eq18.adjoint", "operator", 1e-5, check_adjoint, {"samples": 3}),
    CheckSpec("eq19.weighted_hermitian", "operator", 1e-10, check_weighted_hermitian),
    CheckSpec("eq21.config_inner", "operator", 2e-2, check_config_inner),
    CheckSpec("app.A1", "appendix", 1e-6, _appendix("A1")),
    CheckSpec("app.A2", "appendix", 1e-6, _appendix("A2")),
    CheckSpec("app.A3", "appendix", 1e-6, _appendix("A3")),
    CheckSpec("app.A4", "appendix", 1e-6, _appendix("A4")),
    CheckSpec("app.A5", "appendix", 1e-6, _appendix("A5")),
    CheckSpec("app.A6A7", "appendix", 1e-4, check_commutator, {"samples": 3}),
    CheckSpec("eq10.synthesis", "sec5", 1e-6, check_synthesis, {"nodes": 128}),
    CheckSpec("sec5.norm", "sec5", 1e-2, check_norm, {"v0": 0.6}),
    CheckSpec("sec5.coefficient", "sec5", 1e-7, check_coefficient),
):
    register(_spec)


def suite_specs(name):
    if name not in SUITES:
        raise ConfigError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    ids = sorted(i for i, s in REGISTRY.items() if name == "all" or s.suite == name)
    return [REGISTRY[i] for i in ids]


def worker_count():
    env = os.environ.get("KGWAVE_THREADS")
    if env is None:
        return 1
    try:
        return max(1, int(env))
    except ValueError as exc:
        raise ConfigError("KGWAVE_THREADS must be an integer") from exc


def run_check(spec, seed, tolerance=None, overrides=None, timings=False):
    params = dict(spec.defaults)
    for key, val in (overrides or {}).items():
        params[key] = val
    rng = rng_for(seed, spec.id)
    tol = spec.tolerance if tolerance is None else float(tolerance)
    start = time.perf_counter()
    try:
        out = spec.func(rng, params)
    except (ArithmeticError, DomainError, ValueError) as exc:
        out = Outcome(float("inf"), {}, f"error: {exc}")
    elapsed = round((time.perf_counter() - start) * 1000, 1) if timings else None
    residual = float(out.residual)
    passed = bool(np.isfinite(residual) and residual <= tol)
    return CheckReport(spec.id, {"seed": int(seed), **params}, residual, tol, passed,
                       out.resolution, elapsed, out.notes)


def run_suite(specs, seed, tolerance=None, timings=False, workers=None):
    """Run checks (concurrently if allowed) and return reports in id order."""
    for s in specs:
        if s.id not in REGISTRY:
            raise ConfigError(f"unknown check id {s.id!r}")
    workers = workers or worker_count()
    if workers > 1 and len(specs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(lambda s: run_check(s, seed, tolerance, None, timings),
                                    specs))
    else:
        reports = [run_check(s, seed, tolerance, None, timings) for s in specs]
    return sorted(reports, key=lambda r: r.id)


def _cell(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    if value is None:
        return ""
    if isinstance(value, dict):
        return json.dumps(value, separators=(",", ":"))
    return str(value)


def emit_report(reports, fmt="json"):
    """Serialise reports; returns bytes."""
    if fmt == "json":
        doc = {"schema": SCHEMA, "checks": [r.as_dict() for r in reports]}
        return json.dumps(doc, separators=(",", ":")).encode()
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(FIELDS)
        for r in reports:
            d = r.as_dict()
            w.writerow([_cell(d[f]) for f in FIELDS])
        return buf.getvalue().encode()
    if fmt == "text":
        lines = []
        for r in reports:
            status = "PASS" if r.passed else "FAIL"
            res = format(r.residual, ".3e") if np.isfinite(r.residual) else "inf"
            lines.append(f"{status}  {r.id:<28} residual={res}  tol={r.tolerance:.1e}"
                         + (f"  ({r.notes})" if r.notes else ""))
        n_pass = sum(r.passed for r in reports)
        lines.append(f"{n_pass} passed, {len(reports) - n_pass} failed")
        return ("\n".join(lines) + "\n").encode()
    raise ConfigError(f"unknown format {fmt!r}")
