"""Stochastic outcome models for the two-region EPR experiment.

Three models run behind one seeded-runner interface:

``rgrwf``
    The relativistic flash-collapse process.  Flashes form a Poisson
    pattern in each region; channels are drawn in the *requested frame's*
    temporal order, the first overall from the Born marginal, each later
    one from the state collapsed by everything drawn before it.

``preferred_frame``
    Same flash pattern and same quantum conditioning, but the channel
    decisions are always made in the lab frame's (rapidity 0) temporal
    order, whatever frame is requested.  The flash list is still reported
    in the requested frame's order.  The influence direction is therefore
    fixed once and for all instead of tracking the frame.

``local_hv``
    A local hidden-variable contrast model: both channels are computed
    from the shared per-run randomness and the local setting only, via a
    built-in anticorrelated strategy mixture.  No cross-region
    conditioning of any kind.

Every run is a pure function of (settings, frame, seed, params).  All
randomness is consumed as uniforms in a documented order (region A count,
times, positions; region B likewise; then channel decisions in processing
order), which is what makes seed-paired counterfactual comparisons and
bit-string realizations of the same law possible.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from .minkowski import Event, Frame, Region, boost_time, regions_spacelike
from .quantum import Outcome, PureState, SettingPair, singlet
from .randomness import GeneratorSource, mix_seed

DEFAULT_FLASH_RATE = 5.0
DEFAULT_REGION_A = Region("A", 0.0, 1.0, -11.0, -10.0)
DEFAULT_REGION_B = Region("B", 0.0, 1.0, 10.0, 11.0)


class ModelId(str, Enum):
    RGRWF = "rgrwf"
    PREFERRED_FRAME = "preferred_frame"
    LOCAL_HV = "local_hv"


class InconclusiveRunError(RuntimeError):
    """A region produced zero flashes, so the run defines no outcome.

    Carries the flashes that were drawn (with channels, where assigned)
    so callers can account for the run instead of silently resampling.
    """

    def __init__(self, empty_labels: tuple[str, ...], flashes: tuple["Flash", ...]):
        self.empty_labels = empty_labels
        self.flashes = flashes
        super().__init__(
            f"inconclusive run: no flash in region(s) {', '.join(empty_labels)}"
        )


@dataclass(frozen=True)
class Flash:
    """One flash: a space-time event tagged with region and channel."""

    event: Event
    region: str
    channel: int
    index: int  # ordinal within its region, lab-time order, 0-based


@dataclass(frozen=True)
class ModelParams:
    """Physical configuration shared by all models."""

    state: PureState = field(default_factory=singlet)
    flash_rate: float = DEFAULT_FLASH_RATE
    epsilon: float = 0.0
    regions: tuple[Region, Region] = (DEFAULT_REGION_A, DEFAULT_REGION_B)

    def __post_init__(self):
        if not self.flash_rate > 0.0:
            raise ValueError(f"flash_rate must be positive, got {self.flash_rate}")
        if not 0.0 <= self.epsilon <= 0.1:
            raise ValueError(f"epsilon must lie in [0, 0.1], got {self.epsilon}")
        ra, rb = self.regions
        if (ra.label, rb.label) != ("A", "B"):
            raise ValueError("regions must be given as (A-region, B-region)")
        if not regions_spacelike(ra, rb):
            raise ValueError("regions must be spacelike separated")


@dataclass(frozen=True)
class ExperimentRun:
    """Record of one run: flashes in frame-time order, outcome, state history."""

    settings: SettingPair
    frame: Frame
    seed: int | None
    flashes: tuple[Flash, ...]
    outcome: Outcome
    state_trace: tuple[PureState, ...]


@dataclass(frozen=True)
class OutcomeDistribution:
    """Empirical outcome frequencies over the conclusive runs."""

    counts: dict[tuple[int, int], int]
    n_total: int
    n_inconclusive: int

    @property
    def n_conclusive(self) -> int:
        return self.n_total - self.n_inconclusive

    @property
    def frequencies(self) -> dict[tuple[int, int], float]:
        n = self.n_conclusive
        return {k: v / n for k, v in self.counts.items()}

    def correlator(self) -> float:
        n = self.n_conclusive
        return sum(a * b * c for (a, b), c in self.counts.items()) / n


def _poisson_inverse(u: float, mean: float) -> int:
    """Poisson sample by CDF inversion of a single uniform."""
    k = 0
    p = math.exp(-mean)
    cdf = p
    while u >= cdf:
        k += 1
        p *= mean / k
        cdf += p
        if p < 1e-18 and cdf >= 1.0 - 1e-15:
            break
    return k


def _lhv_channel(theta: float, lam: float, mechanism: int) -> int:
    # built-in anticorrelated strategy tables: mechanism 0 responds to the
    # angle itself, mechanism 1 to the doubled angle; B is always -A
    if mechanism == 0:
        return 1 if math.cos(theta - lam) >= 0.0 else -1
    return 1 if math.cos(2.0 * (theta - lam)) >= 0.0 else -1


def lhv_correlator(a: float, b: float) -> float:
    """Analytic E(a, b) of the built-in local model (equal-weight mixture
    of the two sign strategies); used as an oracle in tests."""

    def sawtooth(delta: float, period: float) -> float:
        # autocorrelation of a +-1 square wave of the given period
        d = abs(delta) % period
        d = min(d, period - d)
        return 1.0 - 4.0 * d / period

    return -0.5 * (sawtooth(a - b, 2.0 * math.pi) + sawtooth(a - b, math.pi))


def _simulate_run(
    source,
    settings: SettingPair,
    params: ModelParams,
    processing_rapidity: float,
    report_frame: Frame,
    seed: int | None,
    local_channels: bool,
    record_trace: bool,
) -> ExperimentRun:
    """Shared engine: Poisson flash pattern, then channel decisions.

    The pattern draws form a settings-independent prefix of the uniform
    stream; channel decisions consume uniforms strictly in the processing
    order (frame-time ascending, ties broken A < B then by index).
    """
    uniform = source.uniform
    rate = params.flash_rate

    # pattern: (region_rank, index, t_lab, x_lab), regions in A, B order
    pattern: list[tuple[int, int, float, float]] = []
    counts = [0, 0]
    for rank, region in enumerate(params.regions):
        label = region.label
        t_span = region.t_max - region.t_min
        x_span = region.x_max - region.x_min
        n = _poisson_inverse(uniform(f"count_{label}"), rate * t_span)
        counts[rank] = n
        times = sorted(region.t_min + t_span * uniform(f"time_{label}") for _ in range(n))
        for idx, t in enumerate(times):
            x = region.x_min + x_span * uniform(f"x_{label}")
            pattern.append((rank, idx, t, x))

    ch = math.cosh(processing_rapidity)
    sh = math.sinh(processing_rapidity)
    order = sorted(pattern, key=lambda p: (p[2] * ch - p[3] * sh, p[0], p[1]))

    angles = (settings.a.angle, settings.b.angle)
    channels: dict[tuple[int, int], int] = {}
    trace: list[PureState] = []

    if local_channels:
        lam = 2.0 * math.pi * uniform("hv_lambda")
        mech = 0 if uniform("hv_mechanism") < 0.5 else 1
        per_region = (
            _lhv_channel(angles[0], lam, mech),
            -_lhv_channel(angles[1], lam, mech),
        )
        for rank, idx, _, _ in order:
            channels[(rank, idx)] = per_region[rank]
    else:
        # scalar 2x2 amplitude matrix m[a_bit][b_bit]; kept as four complex
        # scalars because this loop dominates the cost of large ensembles
        eps = params.epsilon
        amps = params.state.amplitudes
        m00, m01, m10, m11 = complex(amps[0]), complex(amps[1]), complex(amps[2]), complex(amps[3])
        for rank, idx, _, _ in order:
            half = 0.5 * angles[rank]
            c, s = math.cos(half), math.sin(half)
            if rank == 0:  # side A: contract rows
                f0 = c * m00 + s * m10
                f1 = c * m01 + s * m11
            else:  # side B: contract columns
                f0 = m00 * c + m01 * s
                f1 = m10 * c + m11 * s
            p_plus = (f0.real * f0.real + f0.imag * f0.imag) + (
                f1.real * f1.real + f1.imag * f1.imag
            )
            label = "AB"[rank]
            if uniform(f"channel_{label}{idx}") < p_plus:
                value = 1
                v0, v1 = c, s
                g0, g1 = f0, f1
            else:
                value = -1
                v0, v1 = -s, c
                if rank == 0:
                    g0 = v0 * m00 + v1 * m10
                    g1 = v0 * m01 + v1 * m11
                else:
                    g0 = m00 * v0 + m01 * v1
                    g1 = m10 * v0 + m11 * v1
            channels[(rank, idx)] = value
            if rank == 0:
                p00, p01, p10, p11 = v0 * g0, v0 * g1, v1 * g0, v1 * g1
            else:
                p00, p01, p10, p11 = g0 * v0, g0 * v1, g1 * v0, g1 * v1
            if eps:
                p00 += eps * (m00 - p00)
                p01 += eps * (m01 - p01)
                p10 += eps * (m10 - p10)
                p11 += eps * (m11 - p11)
            norm = math.sqrt(
                p00.real * p00.real + p00.imag * p00.imag
                + p01.real * p01.real + p01.imag * p01.imag
                + p10.real * p10.real + p10.imag * p10.imag
                + p11.real * p11.real + p11.imag * p11.imag
            )
            m00, m01, m10, m11 = p00 / norm, p01 / norm, p10 / norm, p11 / norm
            if record_trace:
                trace.append(PureState(np.array([m00, m01, m10, m11])))

    rep_ch = math.cosh(report_frame.rapidity)
    rep_sh = math.sinh(report_frame.rapidity)
    report = sorted(pattern, key=lambda p: (p[2] * rep_ch - p[3] * rep_sh, p[0], p[1]))
    labels = (params.regions[0].label, params.regions[1].label)
    flashes = tuple(
        Flash(Event(t, x), labels[rank], channels[(rank, idx)], idx)
        for rank, idx, t, x in report
    )

    if counts[0] == 0 or counts[1] == 0:
        empty = tuple(labels[r] for r in (0, 1) if counts[r] == 0)
        raise InconclusiveRunError(empty, flashes)

    first = {}
    for rank, idx, _, _ in order:
        if rank not in first:
            first[rank] = channels[(rank, idx)]
    outcome = Outcome(alpha=first[0], beta=first[1])
    return ExperimentRun(settings, report_frame, seed, flashes, outcome, tuple(trace))


def _coerce_pair(settings) -> SettingPair:
    if isinstance(settings, SettingPair):
        return settings
    a, b = settings
    return SettingPair(a, b)


def run_rgrwf(
    settings,
    frame: Frame,
    seed: int,
    params: ModelParams | None = None,
    record_trace: bool = True,
) -> ExperimentRun:
    """One flash-collapse run, conditioning in the requested frame's order.

    The first flash overall draws its channel from the Born marginal of
    the initial state; every later flash draws from the marginal of the
    state collapsed by all earlier decisions, so a region's later flashes
    repeat its first channel (at epsilon = 0) and the other region's first
    flash follows the quantum conditional.  Identical arguments give a
    bit-identical run.
    """
    params = params if params is not None else ModelParams()
    return _simulate_run(
        GeneratorSource(seed),
        _coerce_pair(settings),
        params,
        frame.rapidity,
        frame,
        seed,
        local_channels=False,
        record_trace=record_trace,
    )


def run_preferred_frame(
    settings,
    frame: Frame,
    seed: int,
    params: ModelParams | None = None,
    record_trace: bool = True,
) -> ExperimentRun:
    """Flash-collapse run whose decisions always follow lab-frame order.

    The requested frame only affects how the flash list is reported.  The
    outcome statistics match the quantum formalism exactly, but the
    direction of conditioning is pinned to the rapidity-0 frame.
    """
    params = params if params is not None else ModelParams()
    return _simulate_run(
        GeneratorSource(seed),
        _coerce_pair(settings),
        params,
        0.0,
        frame,
        seed,
        local_channels=False,
        record_trace=record_trace,
    )


def run_local_hv(
    settings,
    frame: Frame,
    seed: int,
    params: ModelParams | None = None,
    record_trace: bool = True,
) -> ExperimentRun:
    """Local hidden-variable run: channels from shared randomness only.

    The hidden variables are a phase lambda and a mechanism bit drawn from
    the run's seed; side A outputs the strategy table at its own setting
    and side B outputs the negation at its own setting, so equal settings
    are perfectly anticorrelated and nothing ever crosses between regions.
    """
    params = params if params is not None else ModelParams()
    return _simulate_run(
        GeneratorSource(seed),
        _coerce_pair(settings),
        params,
        frame.rapidity,
        frame,
        seed,
        local_channels=True,
        record_trace=record_trace,
    )


_RUNNERS: dict[ModelId, Callable] = {
    ModelId.RGRWF: run_rgrwf,
    ModelId.PREFERRED_FRAME: run_preferred_frame,
    ModelId.LOCAL_HV: run_local_hv,
}


def get_runner(model) -> Callable:
    """Resolve a ModelId (or its string value, or a custom runner callable)
    to a runner with signature (settings, frame, seed, params, record_trace)."""
    if callable(model) and not isinstance(model, ModelId):
        return model
    return _RUNNERS[ModelId(model)]


def outcome_distribution(
    model,
    settings,
    frame: Frame,
    params: ModelParams | None = None,
    n: int = 10_000,
    master_seed: int = 0,
) -> OutcomeDistribution:
    """Empirical joint outcome frequencies over n seeded runs.

    Per-run seeds are mix_seed(master_seed, i) for i in range(n), so the
    result is reproducible and independent of evaluation order.
    Inconclusive (zero-flash) runs are excluded from the frequencies and
    counted separately.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    params = params if params is not None else ModelParams()
    runner = get_runner(model)
    pair = _coerce_pair(settings)
    counts = {(1, 1): 0, (1, -1): 0, (-1, 1): 0, (-1, -1): 0}
    inconclusive = 0
    for i in range(n):
        try:
            run = runner(pair, frame, mix_seed(master_seed, i), params, record_trace=False)
        except InconclusiveRunError:
            inconclusive += 1
            continue
        counts[(run.outcome.alpha, run.outcome.beta)] += 1
    if inconclusive == n:
        raise RuntimeError("all runs were inconclusive; no outcome distribution")
    return OutcomeDistribution(counts, n, inconclusive)


def write_flash_csv(path, runs) -> int:
    """Dump per-run flashes to CSV.

    ``runs`` yields (run_id, ExperimentRun) pairs; one row per flash with
    columns run_id, region, t_lab, x_lab, t_frame, channel, index.
    Returns the number of rows written.
    """
    rows = 0
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["run_id", "region", "t_lab", "x_lab", "t_frame", "channel", "index"])
        for run_id, run in runs:
            chi = run.frame.rapidity
            for flash in run.flashes:
                writer.writerow(
                    [
                        run_id,
                        flash.region,
                        repr(flash.event.t),
                        repr(flash.event.x),
                        repr(boost_time(flash.event.t, flash.event.x, chi)),
                        flash.channel,
                        flash.index,
                    ]
                )
                rows += 1
    return rows
