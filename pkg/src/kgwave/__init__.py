"""Dispersion-free Klein-Gordon wavepackets: closed forms, momentum-shell
synthesis, the nonlocal velocity operator and a verification harness."""

from .errors import (
    DomainError,
    NonIntegrableError,
    QuadratureError,
    SingularLocusError,
    UnsupportedError,
)
from .kernel_math import lorentz_gamma, sph_bessel_j
from .wavepacket import (
    PacketParams,
    SpacetimePoint,
    SpinPacketParams,
    eval_psi,
    eval_psi_spin,
    kg_residual_fd,
    transport_residual,
)

__version__ = "0.1.0"

__all__ = [
    "DomainError",
    "NonIntegrableError",
    "PacketParams",
    "QuadratureError",
    "SingularLocusError",
    "SpacetimePoint",
    "SpinPacketParams",
    "UnsupportedError",
    "eval_psi",
    "eval_psi_spin",
    "kg_residual_fd",
    "lorentz_gamma",
    "sph_bessel_j",
    "transport_residual",
]
