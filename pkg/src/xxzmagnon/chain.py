"""Physical parameters, momentum grid, and closed-form magnon amplitudes.

The model is a periodic spin-1/2 Heisenberg XXZ chain with an odd number of
sites, quenched at t=0 by a single spin flip on site 0.  In the one-magnon
sector the plane-wave modes K = 2*pi*m/N diagonalize the Hamiltonian with
dispersion E(K) = J*(Delta - cos K), which makes the site amplitudes

    c_q(t) = (1/N) * sum_m exp(-i E(K_m) t / hbar) * exp(i K_m q)

available in closed form.  Everything downstream (oracles, pole spectra,
transient analytics) consumes this module.

Units: time in hbar/J, frequency in J/hbar, lattice spacing 1 site.  Site and
mode indices are centered, -(N-1)/2 ... (N-1)/2, so q=0 is the quenched spin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import InvariantViolationError, ValidationError

__all__ = [
    "ChainParams",
    "MomentumMode",
    "AmplitudeVector",
    "momenta",
    "amplitude",
    "amplitude_vector",
    "group_velocity",
]


@dataclass(frozen=True)
class ChainParams:
    """Chain configuration: site count, couplings, and Planck constant."""

    n_sites: int
    coupling_j: float = 1.0
    anisotropy_delta: float = 0.0
    hbar: float = 1.0

    def __post_init__(self):
        if not isinstance(self.n_sites, int) or isinstance(self.n_sites, bool):
            raise ValidationError(f"n_sites must be an integer, got {self.n_sites!r}")
        if self.n_sites < 3 or self.n_sites % 2 == 0:
            raise ValidationError(f"n_sites must be odd and >= 3, got {self.n_sites}")
        if not (self.coupling_j > 0):
            raise ValidationError(f"coupling_j must be > 0, got {self.coupling_j}")
        if not (self.hbar > 0):
            raise ValidationError(f"hbar must be > 0, got {self.hbar}")
        if not math.isfinite(self.anisotropy_delta):
            raise ValidationError(f"anisotropy_delta must be finite, got {self.anisotropy_delta}")

    @property
    def half_span(self) -> int:
        """Largest site (and mode) index; sites run -half_span ... +half_span."""
        return (self.n_sites - 1) // 2

    @property
    def group_velocity(self) -> float:
        """Maximal quasi-particle group velocity J/hbar, in sites per (hbar/J)."""
        return self.coupling_j / self.hbar

    def sites(self) -> range:
        return range(-self.half_span, self.half_span + 1)

    def validate_site(self, q: int) -> int:
        if not isinstance(q, (int, np.integer)) or isinstance(q, bool):
            raise ValidationError(f"site index must be an integer, got {q!r}")
        if abs(int(q)) > self.half_span:
            raise ValidationError(
                f"site index {q} outside [-{self.half_span}, {self.half_span}] for N={self.n_sites}"
            )
        return int(q)


@dataclass(frozen=True)
class MomentumMode:
    """One plane-wave mode: integer label m, momentum 2*pi*m/N, energy E(K)."""

    m: int
    momentum_k: float
    energy: float


@dataclass(frozen=True)
class AmplitudeVector:
    """Magnon amplitudes c_p over all sites at one instant.

    ``entries[i]`` is the amplitude on site p = i - (N-1)/2.  The vector of a
    pure one-magnon state is unit-norm; construction enforces this to 1e-12.
    """

    time: float
    entries: np.ndarray
    unitarity_tol: float = field(default=1e-12, repr=False)

    def __post_init__(self):
        ent = np.asarray(self.entries, dtype=complex)
        object.__setattr__(self, "entries", ent)
        norm_sq = float(np.sum(np.abs(ent) ** 2))
        if abs(norm_sq - 1.0) > self.unitarity_tol:
            raise InvariantViolationError(
                f"amplitude vector norm^2 = {norm_sq!r} deviates from 1 beyond {self.unitarity_tol}"
            )

    @property
    def n_sites(self) -> int:
        return len(self.entries)

    def site(self, p: int) -> complex:
        half = (self.n_sites - 1) // 2
        if abs(p) > half:
            raise ValidationError(f"site index {p} outside [-{half}, {half}]")
        return complex(self.entries[p + half])


@lru_cache(maxsize=128)
def _mode_tables(n_sites: int) -> tuple[np.ndarray, np.ndarray]:
    """Centered mode labels and their cosines, mirrored off |m| so that
    cos(K_m) == cos(K_-m) holds bitwise (parity identities rely on it)."""
    half = (n_sites - 1) // 2
    m = np.arange(-half, half + 1)
    cos_abs = np.cos(2.0 * np.pi * np.arange(half + 1) / n_sites)
    return m, cos_abs[np.abs(m)]


def momenta(params: ChainParams) -> list[MomentumMode]:
    """All N momentum modes, ordered by m ascending."""
    m, cos_k = _mode_tables(params.n_sites)
    j, delta = params.coupling_j, params.anisotropy_delta
    return [
        MomentumMode(int(mi), 2.0 * math.pi * int(mi) / params.n_sites, j * (delta - ci))
        for mi, ci in zip(m, cos_k)
    ]


def group_velocity(params: ChainParams) -> float:
    """Quasi-particle group velocity J/hbar (lattice spacing 1)."""
    return params.group_velocity


def _phase_angles(params: ChainParams, q: int, t: float) -> np.ndarray:
    """Angles of the N plane-wave terms of c_q(t): -E(K_m) t/hbar + K_m q."""
    m, cos_k = _mode_tables(params.n_sites)
    tau = params.coupling_j * t / params.hbar
    # -E t/hbar = -J*Delta*t/hbar + J*cos(K) t/hbar
    return cos_k * tau - params.anisotropy_delta * tau + (2.0 * math.pi * q / params.n_sites) * m


def amplitude(params: ChainParams, q: int, t: float) -> complex:
    """Closed-form amplitude c_q(t) on site q.

    Real and imaginary parts are each accumulated with math.fsum, i.e. the
    exactly rounded sum of the N plane-wave terms; this keeps |c_q| usable
    down to ~1e-13 where transient fits operate.
    """
    q = params.validate_site(q)
    if t < 0:
        raise ValidationError(f"time must be >= 0, got {t}")
    ang = _phase_angles(params, q, t)
    return complex(math.fsum(np.cos(ang)), math.fsum(np.sin(ang))) / params.n_sites


def amplitude_vector(params: ChainParams, t: float) -> AmplitudeVector:
    """Amplitudes on every site at time t (canonical initial state)."""
    if t < 0:
        raise ValidationError(f"time must be >= 0, got {t}")
    n = params.n_sites
    out = np.empty(n, dtype=complex)
    for i, q in enumerate(params.sites()):
        ang = _phase_angles(params, q, t)
        out[i] = complex(math.fsum(np.cos(ang)), math.fsum(np.sin(ang))) / n
    return AmplitudeVector(time=t, entries=out)
