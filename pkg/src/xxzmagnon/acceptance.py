"""Executable acceptance suite.

Each criterion is a self-contained check with its thresholds written out
literally; `run_all` executes them in order and reports one pass/fail line
per criterion.  The CLI `verify` subcommand and the test suite both run
exactly this code, so the release gate and the developer gate cannot drift
apart.

Heavy intermediates (pole spectra, long oracle series) are cached per
process in a Workspace so criteria can share them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import analytics, oracle, spectrum
from .chain import ChainParams, amplitude, amplitude_vector
from .oracle import entanglement_from_amplitude, evolve_closed_form

__all__ = ["CriterionResult", "Workspace", "run_all", "CRITERIA", "format_report"]


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    details: list[str] = field(default_factory=list)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.number}: {self.title}"


class _Check:
    """Collects sub-assertions with measured values for the report."""

    def __init__(self):
        self.ok = True
        self.details: list[str] = []

    def expect(self, condition: bool, message: str):
        self.ok &= bool(condition)
        self.details.append(("ok  " if condition else "BAD ") + message)


@dataclass
class Workspace:
    """Memoized expensive artifacts shared between criteria."""

    _spectra: dict = field(default_factory=dict)
    _series: dict = field(default_factory=dict)

    def spec(self, n: int, q: int) -> spectrum.Spectrum:
        key = (n, q)
        if key not in self._spectra:
            self._spectra[key] = spectrum.enumerate_poles(ChainParams(n), q, mode="full")
        return self._spectra[key]

    def series(self, n: int, q: int, t_max: float, steps: int) -> oracle.TimeSeries:
        key = (n, q, t_max, steps)
        if key not in self._series:
            grid = np.linspace(0.0, t_max, steps)
            self._series[key] = evolve_closed_form(ChainParams(n), q, grid)
        return self._series[key]


def criterion_1(ws: Workspace) -> CriterionResult:
    """Spectral reconstruction equals the closed-form oracle pointwise."""
    c = _Check()
    times = np.linspace(0.0, 20.0, 200)
    for n in (9, 33):
        params = ChainParams(n)
        for q in range(0, 5):
            spec = ws.spec(n, q)
            worst = max(
                abs(spectrum.reconstruct(spec, t)
                    - entanglement_from_amplitude(amplitude(params, q, t)))
                for t in times
            )
            c.expect(worst <= 1e-9, f"N={n} q={q}: max |reconstruct - oracle| = {worst:.3e} <= 1e-9")
    return CriterionResult(1, "spectral-oracle equivalence (N in {9,33}, q 0..4, 200 pts)", c.ok, c.details)


def criterion_2(ws: Workspace) -> CriterionResult:
    """Dense integrator matches plane-wave amplitudes entrywise."""
    c = _Check()
    params = ChainParams(33)
    for t in (1.0, 5.0, 20.0):
        dense = oracle.evolve_dense(params, t).entries
        closed = amplitude_vector(params, t).entries
        dev = float(np.max(np.abs(dense - closed)))
        c.expect(dev <= 1e-8, f"N=33 t={t}: max entrywise deviation = {dev:.3e} <= 1e-8")
    return CriterionResult(2, "oracle independence (dense integrator vs closed form)", c.ok, c.details)


def criterion_3(ws: Workspace) -> CriterionResult:
    """Full 2^N evolution: superselection and anisotropy independence."""
    c = _Check()
    times = np.linspace(0.1, 3.0, 10)
    dets_by_delta = {}
    for delta in (0.0, 0.5, 1.0):
        params = ChainParams(7, anisotropy_delta=delta)
        dets = np.empty((len(times), 7))
        worst_off = 0.0
        worst_det = 0.0
        for i, t in enumerate(times):
            rhos = oracle.full_hilbert_check(params, t)
            for s, rho in enumerate(rhos):
                worst_off = max(worst_off, abs(rho[0, 1]), abs(rho[1, 0]))
                det = float(np.linalg.det(rho).real)
                dets[i, s] = det
                site = s - 3
                ref = entanglement_from_amplitude(amplitude(params, site, t))
                worst_det = max(worst_det, abs(det - ref))
        dets_by_delta[delta] = dets
        c.expect(worst_off <= 1e-10, f"delta={delta}: max off-diagonal = {worst_off:.3e} <= 1e-10")
        c.expect(worst_det <= 1e-8, f"delta={delta}: max |det rho - |c|^2(1-|c|^2)| = {worst_det:.3e} <= 1e-8")
    spread = max(
        float(np.max(np.abs(dets_by_delta[a] - dets_by_delta[b])))
        for a, b in ((0.0, 0.5), (0.0, 1.0))
    )
    c.expect(spread <= 1e-9, f"Q identical across delta in {{0, 0.5, 1}}: spread = {spread:.3e} <= 1e-9")
    return CriterionResult(3, "full-Hilbert check (N=7, 10 sampled t)", c.ok, c.details)


def criterion_4(ws: Workspace) -> CriterionResult:
    """Moment null space: sum I omega^(2r) vanishes for r < q."""
    c = _Check()
    for q in range(1, 6):
        spec = ws.spec(33, q)
        scale = spec.abs_intensity_sum
        for r in range(0, q):
            mom = analytics.moments(spec, r)
            bound = 1e-9 * scale * 4.0 ** (2 * r)
            c.expect(abs(mom) <= bound, f"q={q} r={r}: |sum I w^2r| = {abs(mom):.3e} <= {bound:.3e}")
    return CriterionResult(4, "moment null space (N=33, q 1..5, r < q)", c.ok, c.details)


def criterion_5(ws: Workspace) -> CriterionResult:
    """Closed-form derivatives match moment-derived derivatives, kbar < q."""
    c = _Check()
    params = ChainParams(33)
    for q in range(1, 6):
        spec = ws.spec(33, q)
        for kbar in range(0, q):
            exact = analytics.derivative_exact(params, q, kbar).exact_value
            momval = analytics.moment_derivative(spec, q, kbar)
            rel = abs(momval - exact) / abs(exact)
            c.expect(rel <= 1e-6, f"q={q} kbar={kbar}: relative deviation = {rel:.3e} <= 1e-6")
    return CriterionResult(5, "derivative closed form vs moments (N=33, kbar < q)", c.ok, c.details)


def _transient_window_fit(params: ChainParams, q: int) -> tuple[float, float]:
    """Power-law fit over Q in [1e-12, 1e-8] with bisected window edges."""
    def q_of(t: float) -> float:
        return entanglement_from_amplitude(amplitude(params, q, t))

    def crossing(level: float, lo: float, hi: float) -> float:
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if q_of(mid) < level:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    # bracket inside the monotone transient rise: the upper end stays a factor
    # ~1.6 above the leading-term estimate of the Q = 1e-8 time, well below
    # the first quasi-particle peak near t ~ q
    hi = 1.6 * 2.0 * (1e-8 * math.factorial(q) ** 2) ** (1.0 / (2 * q))
    t1 = crossing(1e-12, 1e-3, hi)
    t2 = crossing(1e-8, t1, hi)
    grid = np.geomspace(t1 * (1 + 1e-9), t2 * (1 - 1e-9), 120)
    series = evolve_closed_form(params, q, grid)
    return oracle.leading_exponent_fit(series)


def criterion_6(ws: Workspace) -> CriterionResult:
    """Transient power law: slope 2q within 1%, q=2 prefactor within 2%."""
    c = _Check()
    params = ChainParams(201)
    for q in (2, 5, 10):
        slope, prefactor = _transient_window_fit(params, q)
        rel = abs(slope - 2 * q) / (2 * q)
        c.expect(rel <= 0.01, f"q={q}: log-log slope = {slope:.4f}, |dev| = {rel:.2%} <= 1%")
        if q == 2:
            target = (1.0 / math.factorial(q) ** 2) * 0.5 ** (2 * q)
            prel = abs(prefactor - target) / target
            c.expect(prel <= 0.02, f"q=2: prefactor = {prefactor:.6e} vs {target:.6e}, |dev| = {prel:.2%} <= 2%")
    return CriterionResult(6, "transient exponent (N=201, q in {2,5,10}, window [1e-12, 1e-8])", c.ok, c.details)


def criterion_7(ws: Workspace) -> CriterionResult:
    """Squared-Bessel transient approximates the oracle at t = hbar/J."""
    c = _Check()
    params = ChainParams(201)
    for q in range(2, 7):
        approx = analytics.transient(params, q, 1.0)
        exact = entanglement_from_amplitude(amplitude(params, q, 1.0))
        dev = abs(approx / exact - 1.0)
        c.expect(dev <= 0.05, f"q={q}: |alpha_q J_2q(2)/Q_q(1) - 1| = {dev:.3f} <= 0.05")
    return CriterionResult(7, "Bessel transient accuracy (N=201, t=hbar/J, q 2..6)", c.ok, c.details)


def criterion_8(ws: Workspace) -> CriterionResult:
    """Edge velocity: synthetic recovery exact, oracle fit near e J / 2 hbar."""
    c = _Check()
    target = math.e / 2.0

    # synthetic series built from the leading-transient power law
    params_s = ChainParams(201)
    grid = np.arange(0.0, 1.3 * 2 * 24 / math.e + 0.05, 2e-4)
    synth = {}
    for q in range(10, 25):
        tau_q = 2.0 * q / math.e
        vals = np.minimum((1.0 / (2 * math.pi * q)) * (grid / tau_q) ** (2 * q), 0.25)
        synth[q] = oracle.TimeSeries(q=q, params=params_s, times=grid, values=vals)
    est_synth = analytics.edge_fit(synth, params_s)
    dev_synth = abs(est_synth.fitted_velocity - target) / target
    c.expect(dev_synth <= 1e-6,
             f"synthetic input: v = {est_synth.fitted_velocity:.8f} vs e/2, |dev| = {dev_synth:.2e} <= 1e-6")

    # oracle series
    params = ChainParams(201)
    t_max = 1.3 * 2 * 24 / math.e + 0.25
    series = {q: ws.series(201, q, t_max, 4000) for q in range(10, 25)}
    est = analytics.edge_fit(series, params)
    dev = abs(est.fitted_velocity - target) / target
    c.expect(dev <= 0.07,
             f"oracle N=201 q 10..24: v = {est.fitted_velocity:.4f} vs e/2 = {target:.4f}, "
             f"|dev| = {dev:.2%} <= 7%")
    return CriterionResult(8, "edge velocity (threshold 1/(2 pi q), synthetic + oracle)", c.ok, c.details)


def criterion_9(ws: Workspace) -> CriterionResult:
    """Spectrum structure: bounds, class cutoff, band scaling, intensity quanta."""
    c = _Check()
    spec33 = ws.spec(33, 0)
    max_abs = max(abs(p.omega) for p in spec33.poles)
    c.expect(max_abs < 4.0, f"all |omega| < 4 J/hbar: max = {max_abs:.6f}")
    max_dom = max(abs(p.omega) for p in spec33.poles if p.pole_class == spectrum.DOMINANT)
    c.expect(max_dom <= 2.0 + 1e-12, f"dominant |omega| <= 2 J/hbar: max = {max_dom:.6f}")

    band33 = spectrum.suppressed_band_weight(ChainParams(33), 0)
    band99 = spectrum.suppressed_band_weight(ChainParams(99), 0)
    ratio = band33 / band99
    c.expect(ratio >= 2.5,
             f"suppressed sum|I| above 2J/hbar, N=33 -> N=99: {band33:.6f} -> {band99:.6f}, "
             f"drop factor = {ratio:.3f} >= 2.5")

    u = 33.0 ** -3 - 33.0 ** -4
    worst = max(
        abs(p.intensity / u - round(p.intensity / u))
        for p in spec33.poles
        if p.pole_class == spectrum.DOMINANT
    )
    c.expect(worst <= 1e-12, f"q=0 dominant intensities are integer multiples of u: max dev = {worst:.3e} u")
    return CriterionResult(9, "spectrum structure (bounds, cutoff, N-scaling, intensity quanta)", c.ok, c.details)


def criterion_10(ws: Workspace) -> CriterionResult:
    """First intensity zero crossing sits at 2 J cos^2(pi/4q) / hbar."""
    c = _Check()
    params = ChainParams(201)
    for q in range(3, 9):
        found = spectrum.first_zero_crossing(params, q)
        predicted = 2.0 * math.cos(math.pi / (4 * q)) ** 2
        rel = abs(found - predicted) / predicted
        c.expect(rel <= 0.03, f"q={q}: crossing {found:.4f} vs {predicted:.4f}, |dev| = {rel:.2%} <= 3%")
    return CriterionResult(10, "string zero crossing (N=201, q 3..8)", c.ok, c.details)


def criterion_11(ws: Workspace) -> CriterionResult:
    """Taylor partial sums reproduce the squared Bessel function."""
    c = _Check()
    params = ChainParams(9)  # series is N-independent; params carry J, hbar
    worst = 0.0
    for q in range(0, 7):
        for t in np.linspace(0.0, 2.0, 21):
            lhs = analytics.taylor_series(params, q, float(t), 30).value
            rhs = analytics.bessel_j(q, params.coupling_j * float(t) / params.hbar) ** 2
            worst = max(worst, abs(lhs - rhs))
    c.expect(worst <= 1e-10, f"max |taylor(q,t,30) - J_q(t)^2| over q <= 6, t <= 2 = {worst:.3e} <= 1e-10")
    return CriterionResult(11, "series identity: Taylor sum = squared Bessel", c.ok, c.details)


CRITERIA = [
    criterion_1,
    criterion_2,
    criterion_3,
    criterion_4,
    criterion_5,
    criterion_6,
    criterion_7,
    criterion_8,
    criterion_9,
    criterion_10,
    criterion_11,
]

_QUICK = {1, 2, 3, 4, 5, 9, 11}  # criteria that avoid the long N=201 runs


def run_all(level: str = "desk", workspace: Workspace | None = None) -> list[CriterionResult]:
    if level not in ("desk", "quick"):
        raise ValueError(f"unknown verification level {level!r}")
    ws = workspace or Workspace()
    results = []
    for number, fn in enumerate(CRITERIA, start=1):
        if level == "quick" and number not in _QUICK:
            continue
        results.append(fn(ws))
    return results


def format_report(results: list[CriterionResult], verbose: bool = False) -> str:
    lines = []
    for r in results:
        lines.append(r.line())
        if verbose or not r.passed:
            lines.extend("    " + d for d in r.details if verbose or d.startswith("BAD"))
    n_fail = sum(not r.passed for r in results)
    lines.append(f"{len(results) - n_fail}/{len(results)} criteria passed")
    return "\n".join(lines)
