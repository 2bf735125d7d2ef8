"""Time-domain photon-packet numerics for a one-dimensional waveguide."""

__version__ = "0.1.0"

from .transforms import (  # noqa: E402
    PhysConsts,
    Signal,
    Spectrum,
    TimeGrid,
    forward_fourier,
    half_order_convolve,
    hilbert_paper,
    inverse_fourier,
)
from .oracle import pv_quadrature_oracle  # noqa: E402
from .packet import (  # noqa: E402
    ExponentialDecay,
    Gaussian,
    Custom,
    PhotonPacket,
    chi_closed_form_exponential,
    chi_exponential_exact,
    compute_chi,
    compute_psi,
    make_packet,
    positive_frequency_weight,
)
from .kernels import BACKEND  # noqa: E402

__all__ = [
    "__version__",
    "BACKEND",
    "PhysConsts",
    "Signal",
    "Spectrum",
    "TimeGrid",
    "forward_fourier",
    "inverse_fourier",
    "hilbert_paper",
    "half_order_convolve",
    "pv_quadrature_oracle",
    "ExponentialDecay",
    "Gaussian",
    "Custom",
    "PhotonPacket",
    "make_packet",
    "positive_frequency_weight",
    "compute_chi",
    "compute_psi",
    "chi_closed_form_exponential",
    "chi_exponential_exact",
]
