"""Frequency-domain form of the entanglement measure: pole enumeration.

The measure of spin q is an even trigonometric polynomial

    Q_q(t) = sum_j I_{q,j} cos(omega_j t),

whose frequencies are four-cosine combinations over the momentum grid,

    omega = (J/hbar) * (cos K_2 - cos K_1 - cos K_4 + cos K_3),

one per mode four-tuple (m1, m2, m3, m4).  Each tuple carries the complex
weight  N^-4 * [N delta_{m2,m4} e^{i th q (m1-m3)} - e^{i th q (m1-m3+m4-m2)}],
th = 2*pi/N; summing every weight against exp at its frequency reproduces
|c_q|^2 (1-|c_q|^2) identically.

Tuples with m2 = m4 contribute O(N^-3) each and pile up on the two-cosine
frequencies |omega| <= 2J/hbar (dominant class); all remaining tuples carry
O(N^-4) and fill the band up to 4J/hbar (suppressed class).  The two classes
are merged into separate Pole records so that class structure (equal-intensity
dominant lines at q=0, the near-cutoff string, moment identities) stays exact
instead of being contaminated by the opposite class at shared frequencies.

Merging buckets frequencies on a 1e-9 J/hbar quantized key; a pole's reported
frequency is the mean of its members' raw values, so reconstruction error
stays at round-off for desk-size chains rather than at the bucket width.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .chain import ChainParams, _mode_tables
from .errors import (
    CapabilityError,
    InvariantViolationError,
    NotFoundError,
    ValidationError,
)

__all__ = [
    "Pole",
    "Spectrum",
    "StringPole",
    "enumerate_poles",
    "reconstruct",
    "classify",
    "string_poles",
    "first_zero_crossing",
    "suppressed_band_weight",
    "MERGE_TOL",
    "FULL_MODE_MAX_SITES",
]

MERGE_TOL = 1e-9  # frequency bucket width, J/hbar units
FULL_MODE_MAX_SITES = 65  # ~1.8e7 tuples; beyond this use dominant_only
_IMAG_RESIDUAL_BOUND = 1e-10  # x total |I|; imaginary parts must cancel
_ZERO_SUM_TOL = 1e-9

DOMINANT = "dominant"
SUPPRESSED = "suppressed"
MODE_FULL = "full"
MODE_DOMINANT = "dominant_only"


@dataclass(frozen=True)
class Pole:
    """One merged frequency: intensity, bookkeeping, and class label."""

    omega: float
    intensity: float
    raw_complex_residual: float  # |imaginary part| discarded at merge
    tuple_count: int
    pole_class: str


@dataclass(frozen=True)
class Spectrum:
    """Merged pole list of one spin, sorted by frequency ascending."""

    q: int
    params: ChainParams
    mode: str
    poles: tuple[Pole, ...]

    @property
    def omegas(self) -> np.ndarray:
        return np.array([p.omega for p in self.poles])

    @property
    def intensities(self) -> np.ndarray:
        return np.array([p.intensity for p in self.poles])

    @property
    def abs_intensity_sum(self) -> float:
        return math.fsum(abs(p.intensity) for p in self.poles)


@dataclass(frozen=True)
class StringPole:
    """Near-cutoff dominant pole in the (epsilon, delta) parametrization.

    omega is computed from the stored integers via
    2J/hbar * cos(pi*epsilon/N) * cos(pi*delta/N).
    """

    epsilon: int
    delta: int
    omega: float
    intensity: float


def _round_half_up(x: float) -> int:
    # Bankers' rounding would collapse consecutive half-integers; the family
    # labels are half-integers for odd N, so round halves consistently up.
    return int(math.floor(x + 0.5))


class _KeyAccumulator:
    """Per-frequency-bucket sums with vectorized Neumaier compensation.

    Chunks are folded in a fixed order, so the result is bitwise reproducible
    for any worker count.
    """

    def __init__(self, keys: np.ndarray):
        self.keys = keys  # sorted unique int64 buckets
        n = len(keys)
        self.re = np.zeros(n)
        self.im = np.zeros(n)
        self.om = np.zeros(n)
        self._c_re = np.zeros(n)
        self._c_im = np.zeros(n)
        self._c_om = np.zeros(n)
        self.count = np.zeros(n, dtype=np.int64)

    def _comp_add(self, total, comp, pos, x):
        t = total[pos] + x
        big = np.abs(total[pos]) >= np.abs(x)
        comp[pos] += np.where(big, (total[pos] - t) + x, (x - t) + total[pos])
        total[pos] = t

    def add_chunk(self, keys, re, im, om, count):
        pos = np.searchsorted(self.keys, keys)
        self._comp_add(self.re, self._c_re, pos, re)
        self._comp_add(self.im, self._c_im, pos, im)
        self._comp_add(self.om, self._c_om, pos, om)
        np.add.at(self.count, pos, count)

    def totals(self):
        return self.re + self._c_re, self.im + self._c_im, self.om + self._c_om, self.count


def _suppressed_chunk(i1: int, cos_k: np.ndarray, phase: np.ndarray, n: int, freq_scale: float,
                      off_diag: np.ndarray):
    """Reduce all m2 != m4 tuples with fixed m1 to per-bucket partial sums."""
    om = (cos_k[:, None, None] + cos_k[None, :, None] - cos_k[None, None, :] - cos_k[i1]) * freq_scale
    # e^{i th q (m1 - m3 + m4 - m2)} over axes (m2, m3, m4)
    w = (phase[i1] * np.conj(phase))[None, :, None] * (phase[None, None, :] * np.conj(phase)[:, None, None])
    om = om.reshape(-1)[off_diag]
    w = (-(n ** -4.0)) * w.reshape(-1)[off_diag]
    keys = np.rint(om / MERGE_TOL).astype(np.int64)
    uk, inv = np.unique(keys, return_inverse=True)
    return (
        uk,
        np.bincount(inv, weights=w.real),
        np.bincount(inv, weights=w.imag),
        np.bincount(inv, weights=om),
        np.bincount(inv).astype(np.int64),
    )


def _dominant_chunk(i1: int, cos_k: np.ndarray, phase: np.ndarray, n: int, freq_scale: float):
    """Reduce the m2 = m4 tuples with fixed m1: frequency depends on (m1, m3)
    only, so the N values of m2 collapse to a count multiplier."""
    om = (cos_k - cos_k[i1]) * freq_scale  # over m3
    w = (n ** -3.0 - n ** -4.0) * n * (phase[i1] * np.conj(phase))  # N tuples per (m1, m3)
    keys = np.rint(om / MERGE_TOL).astype(np.int64)
    uk, inv = np.unique(keys, return_inverse=True)
    return (
        uk,
        np.bincount(inv, weights=w.real),
        np.bincount(inv, weights=w.imag),
        np.bincount(inv, weights=n * om),  # raw omega per tuple, N tuples each
        (n * np.bincount(inv)).astype(np.int64),
    )


def _fold_chunks(chunks) -> _KeyAccumulator:
    all_keys = np.unique(np.concatenate([c[0] for c in chunks]))
    acc = _KeyAccumulator(all_keys)
    for keys, re, im, om, count in chunks:  # fixed ascending-m1 order
        acc.add_chunk(keys, re, im, om, count)
    return acc


def _poles_from_accumulator(acc: _KeyAccumulator, pole_class: str) -> list[Pole]:
    re, im, om, count = acc.totals()
    return [
        Pole(
            omega=float(o / c),
            intensity=float(r),
            raw_complex_residual=float(abs(i)),
            tuple_count=int(c),
            pole_class=pole_class,
        )
        for r, i, o, c in zip(re, im, om, count)
    ]


def _validate_spectrum(poles: list[Pole], params: ChainParams, mode: str) -> None:
    bound = 4.0 * params.coupling_j / params.hbar
    total_abs = math.fsum(abs(p.intensity) for p in poles)
    for p in poles:
        if not abs(p.omega) < bound:
            raise InvariantViolationError(
                f"pole at omega={p.omega!r} reaches the 4J/hbar bound {bound!r}"
            )
        if p.raw_complex_residual > _IMAG_RESIDUAL_BOUND * total_abs:
            raise InvariantViolationError(
                f"imaginary residual {p.raw_complex_residual:.3e} at omega={p.omega!r} "
                f"exceeds {_IMAG_RESIDUAL_BOUND:g} x sum|I| = {_IMAG_RESIDUAL_BOUND * total_abs:.3e}"
            )
    if mode == MODE_FULL:
        # Q_q(0) = 0 forces the complete intensity list to cancel; a
        # dominant_only spectrum legitimately misses the suppressed share.
        total = math.fsum(p.intensity for p in poles)
        if abs(total) > _ZERO_SUM_TOL:
            raise InvariantViolationError(f"intensities sum to {total!r}, not 0 (Q(0) must vanish)")


def enumerate_poles(params: ChainParams, q: int, mode: str = MODE_FULL, workers: int = 1) -> Spectrum:
    """Enumerate and merge the pole spectrum of spin q.

    mode='full' walks all N^4 four-tuples (N <= 65) and yields both classes;
    mode='dominant_only' keeps the m2 = m4 family, which costs O(N^2) after
    the inner m2 sum collapses to the exact (N^-3 - N^-4) per-tuple weight,
    and is available for any N.

    Enumeration is split over m1; chunk results are folded in ascending m1
    order with compensated summation, so spectra are bitwise identical for
    any `workers`.
    """
    q = params.validate_site(q)
    if mode not in (MODE_FULL, MODE_DOMINANT):
        raise ValidationError(f"unknown mode {mode!r}")
    if workers < 1:
        raise ValidationError(f"workers must be >= 1, got {workers}")
    n = params.n_sites
    if mode == MODE_FULL and n > FULL_MODE_MAX_SITES:
        raise CapabilityError(
            f"full enumeration is capped at N={FULL_MODE_MAX_SITES} "
            f"(~{FULL_MODE_MAX_SITES ** 4:.1e} tuples); N={n} requires mode='dominant_only'"
        )
    m, cos_k = _mode_tables(n)
    phase = np.exp(2j * np.pi * q * m / n)
    freq_scale = params.coupling_j / params.hbar

    dom_chunks = [_dominant_chunk(i1, cos_k, phase, n, freq_scale) for i1 in range(n)]
    poles = _poles_from_accumulator(_fold_chunks(dom_chunks), DOMINANT)

    if mode == MODE_FULL:
        # (m2, m3, m4) layout: drop the m2 == m4 diagonal
        off_diag = np.broadcast_to(~np.eye(n, dtype=bool)[:, None, :], (n, n, n)).reshape(-1)
        args = [(i1, cos_k, phase, n, freq_scale, off_diag) for i1 in range(n)]
        if workers == 1:
            sup_chunks = [_suppressed_chunk(*a) for a in args]
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                sup_chunks = list(pool.map(lambda a: _suppressed_chunk(*a), args))
        poles += _poles_from_accumulator(_fold_chunks(sup_chunks), SUPPRESSED)

    poles.sort(key=lambda p: (p.omega, p.pole_class))
    _validate_spectrum(poles, params, mode)
    return Spectrum(q=q, params=params, mode=mode, poles=tuple(poles))


def _folded_arrays(spectrum: Spectrum) -> tuple[np.ndarray, np.ndarray]:
    """One representative per +-omega pair with doubled intensity (omega = 0
    kept once); cached on the spectrum object."""
    cached = getattr(spectrum, "_folded", None)
    if cached is None:
        om, w = [], []
        for p in spectrum.poles:
            if p.omega > 0.5 * MERGE_TOL:
                om.append(p.omega)
                w.append(2.0 * p.intensity)
            elif abs(p.omega) <= 0.5 * MERGE_TOL:
                om.append(p.omega)
                w.append(p.intensity)
        cached = (np.array(om), np.array(w))
        object.__setattr__(spectrum, "_folded", cached)
    return cached


def reconstruct(spectrum: Spectrum, t: float) -> float:
    """Time-domain value sum_j I_j cos(omega_j t) from a full spectrum.

    Folds each +-omega pair onto one representative with doubled intensity
    (omega = 0 counted once); the sum is exactly rounded.
    """
    if spectrum.mode != MODE_FULL:
        raise CapabilityError(
            "reconstruction needs mode='full'; a dominant_only spectrum omits the suppressed poles"
        )
    om, w = _folded_arrays(spectrum)
    return math.fsum(w * np.cos(om * t))


def classify(spectrum: Spectrum) -> Spectrum:
    """Validate and return the dominant/suppressed partition of a full spectrum.

    Labels are assigned at merge time from tuple provenance (any m2 = m4
    weight -> dominant; purely m2 != m4 -> suppressed).  This checks that the
    partition is exhaustive and exclusive and that every dominant frequency is
    a two-cosine difference, then returns the spectrum with labels intact.
    """
    if spectrum.mode != MODE_FULL:
        raise CapabilityError("classification applies to full-mode spectra")
    for p in spectrum.poles:
        if p.pole_class not in (DOMINANT, SUPPRESSED):
            raise InvariantViolationError(f"pole at omega={p.omega!r} has no class label")
    n = spectrum.params.n_sites
    _, cos_k = _mode_tables(n)
    scale = spectrum.params.coupling_j / spectrum.params.hbar
    candidates = np.unique((cos_k[:, None] - cos_k[None, :]).reshape(-1) * scale)
    for p in spectrum.poles:
        if p.pole_class == DOMINANT:
            i = np.searchsorted(candidates, p.omega)
            near = [candidates[j] for j in (i - 1, i) if 0 <= j < len(candidates)]
            if not any(abs(p.omega - c) <= MERGE_TOL for c in near):
                raise InvariantViolationError(
                    f"dominant pole at omega={p.omega!r} is not a two-cosine difference"
                )
    return spectrum


def string_poles(params: ChainParams, q: int) -> list[StringPole]:
    """Dominant poles near the 2J/hbar cutoff, ordered by frequency descending.

    The family collects |m1| = a near (N-1)/2 and |m3| = b small, labeled by
    the integers epsilon ~ a - b - N/2 and delta ~ a + b - N/2 (odd N makes
    the raw combinations half-integers; they are rounded half-up).  Intensity
    is the exactly merged m2 = m4 weight of the underlying pole, not the
    proportional closed form, whose constant is left free.
    """
    q = params.validate_site(q)
    if q == 0:
        raise CapabilityError("the near-cutoff string is defined for propagating spins (q >= 1)")
    n = params.n_sites
    half = params.half_span
    _, cos_k = _mode_tables(n)
    cos_abs = cos_k[half:]  # cos(2 pi a / N) for a = 0 ... half
    scale = params.coupling_j / params.hbar
    unit = n ** -2.0 - n ** -3.0  # merged m2-sum weight per (m1, m3) pair
    theta_q = 2.0 * math.pi * q / n

    cap = min(half - 1, int(math.ceil(n / (2.0 * q))) + 2)
    merged: dict[int, list] = {}
    for a in range(half - cap, half + 1):
        for b in range(0, cap + 1):
            if b >= a:
                continue
            omega_exact = (cos_abs[b] - cos_abs[a]) * scale
            key = round(omega_exact / MERGE_TOL)
            if b > 0:
                w = 2.0 * unit * (math.cos(theta_q * (a - b)) + math.cos(theta_q * (a + b)))
            else:
                w = 2.0 * unit * math.cos(theta_q * a)
            slot = merged.get(key)
            if slot is None:
                merged[key] = [w, a, b]
            else:
                slot[0] += w  # accidental degeneracy: same frequency bucket
    out = []
    for _key, (w, a, b) in merged.items():
        eps = _round_half_up(a - b - n / 2.0)
        dlt = _round_half_up(a + b - n / 2.0)
        omega = 2.0 * scale * math.cos(math.pi * eps / n) * math.cos(math.pi * dlt / n)
        out.append(StringPole(epsilon=eps, delta=dlt, omega=omega, intensity=w))
    out.sort(key=lambda p: -p.omega)
    return out


def first_zero_crossing(params: ChainParams, q: int) -> float:
    """Frequency where the near-cutoff string first flips intensity sign.

    Walks the string from the cutoff downward and returns the midpoint of the
    first adjacent pair with opposite-sign intensities.
    """
    q = params.validate_site(q)
    if q < 2:
        raise ValidationError(f"zero-crossing search needs q >= 2, got q={q}")
    if params.n_sites < 8 * q:
        raise ValidationError(
            f"N={params.n_sites} < 8q = {8 * q}: the string cannot resolve the crossing"
        )
    poles = string_poles(params, q)
    for hi, lo in zip(poles, poles[1:]):
        if hi.intensity * lo.intensity < 0.0:
            return 0.5 * (hi.omega + lo.omega)
    raise NotFoundError(
        f"no intensity sign change along the string for q={q}, N={params.n_sites}",
        diagnostics={
            "n_poles": len(poles),
            "omega_range": (poles[-1].omega, poles[0].omega) if poles else None,
            "signs": "".join("+" if p.intensity >= 0 else "-" for p in poles[:64]),
        },
    )


def suppressed_band_weight(params: ChainParams, q: int, omega_min: float | None = None) -> float:
    """Sum of |intensity| over suppressed poles with |omega| > omega_min.

    Poles above 2J/hbar are built purely from m2 != m4 tuples, so this band
    sum is well defined for any N without materializing the full spectrum.
    For q = 0 every tuple weighs exactly -N^-4 and the sum reduces to a pair
    count over the two-cosine sums; general q streams the band tuples in m1
    chunks and merges them like `enumerate_poles` does.
    """
    q = params.validate_site(q)
    n = params.n_sites
    scale = params.coupling_j / params.hbar
    if omega_min is None:
        omega_min = 2.0 * scale
    if omega_min < 2.0 * scale:
        raise CapabilityError(
            f"band sum is defined above the dominant cutoff 2J/hbar = {2.0 * scale!r}; "
            f"got omega_min={omega_min!r}"
        )
    _, cos_k = _mode_tables(n)
    if q == 0:
        # count ordered pairs of pair-sums differing by more than omega_min
        pair_sums = np.sort((cos_k[:, None] + cos_k[None, :]).reshape(-1))
        below = np.searchsorted(pair_sums, pair_sums - omega_min / scale, side="left")
        return float(2 * int(below.sum())) * n ** -4.0
    phase = np.exp(2j * np.pi * q * np.arange(-params.half_span, params.half_span + 1) / n)
    acc: dict[int, float] = {}
    for i1 in range(n):
        om = (cos_k[:, None, None] + cos_k[None, :, None] - cos_k[None, None, :] - cos_k[i1]) * scale
        w = (phase[i1] * np.conj(phase))[None, :, None] * (
            phase[None, None, :] * np.conj(phase)[:, None, None]
        )
        sel = np.abs(om.reshape(-1)) > omega_min
        om = om.reshape(-1)[sel]
        wr = (-(n ** -4.0)) * w.reshape(-1)[sel].real
        keys = np.rint(om / MERGE_TOL).astype(np.int64)
        uk, inv = np.unique(keys, return_inverse=True)
        sums = np.bincount(inv, weights=wr)
        for k, s in zip(uk, sums):
            acc[int(k)] = acc.get(int(k), 0.0) + float(s)
    return math.fsum(abs(v) for _k, v in sorted(acc.items()))
