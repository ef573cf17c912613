"""Statistical classification of outcome models.

Five verdicts per model: agreement with the quantum formalism,
no-signalling, locality, effective locality, and effective causality.

The first three are distributional: chi-square goodness of fit against
the Born law, marginal homogeneity across distant settings, and a CHSH
estimate against the local bound 2.

The two "effective" properties cannot be distributional: every model here
that matches the quantum formalism produces the same outcome law, so no
test on outcome frequencies alone can tell a frame-adapted conditioning
structure from a preferred-frame one.  They are therefore tested through
the models' seed interface: the run seed is the model's entire hidden
randomness, so re-running with the seed held fixed and only the distant
setting changed asks directly whether the model's outcome *function*
transmits the distant setting into the frame-earlier region.  A model is
transmission-free in a frame exactly when the paired flip count is zero.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

from .minkowski import Frame, order_flip_rapidity, region_frame_order
from .models import InconclusiveRunError, ModelParams, get_runner
from .quantum import SettingPair, born_joint
from .randomness import mix_seed
from .stats import bonferroni, chi2_gof, chi2_homogeneity

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"

OUTCOME_CELLS = ((1, 1), (1, -1), (-1, 1), (-1, -1))

TEST_NAMES = (
    "qf_agreement",
    "no_signalling",
    "locality",
    "effective_locality",
    "effective_causality",
)

_MAX_INCONCLUSIVE_FRACTION = 0.05


@dataclass(frozen=True)
class TestResult:
    """One verdict: statistic against threshold, with a p-value bound.

    The comparison direction is per test and documented on the test
    function; ``details`` carries auxiliary numbers (standard errors,
    per-frame counts) and is not serialized.
    """

    name: str
    statistic: float
    threshold: float
    p_bound: float
    verdict: str
    details: dict = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class SampleSet:
    """Outcome records for one (model, settings, frame) cell."""

    records: tuple  # (settings, frame, outcome-or-None, conclusive) per run
    provenance: dict

    @property
    def n(self) -> int:
        return len(self.records)

    @property
    def n_inconclusive(self) -> int:
        return sum(1 for r in self.records if not r[3])

    def counts(self) -> list[int]:
        tally = dict.fromkeys(OUTCOME_CELLS, 0)
        for _, _, outcome, ok in self.records:
            if ok:
                tally[(outcome.alpha, outcome.beta)] += 1
        return [tally[c] for c in OUTCOME_CELLS]


@dataclass(frozen=True)
class ClassificationReport:
    model: str
    results: dict[str, TestResult]
    sample_sizes: dict[str, int]
    seeds: dict[str, int]
    params_digest: str

    def __post_init__(self):
        missing = [n for n in TEST_NAMES if n not in self.results]
        if missing:
            raise ValueError(f"report is missing tests: {missing}")

    def verdicts(self) -> dict[str, str]:
        return {name: self.results[name].verdict for name in TEST_NAMES}

    def to_json_dict(self) -> dict:
        return {
            "model": self.model,
            "params_digest": self.params_digest,
            "tests": [
                {
                    "name": r.name,
                    "statistic": r.statistic,
                    "threshold": r.threshold,
                    "p_bound": r.p_bound,
                    "verdict": r.verdict,
                }
                for r in (self.results[n] for n in TEST_NAMES)
            ],
            "seeds": self.seeds,
            "n": self.sample_sizes,
        }


_QUARTER = math.pi / 4


@dataclass(frozen=True)
class ClassifyConfig:
    """Sample sizes and probe geometry for one classification report.

    Defaults are sized so that each verdict is wrong with probability
    well below 1e-2 per report: the chi-square tests run at significance
    1e-3 (Bonferroni-corrected), the CHSH verdict uses 5-standard-error
    decision bands around 2, and the flip tests are noise-free.
    """

    master_seed: int = 1
    qf_grid: tuple = tuple(
        (a, b) for a in (0.0, _QUARTER, 2 * _QUARTER) for b in (0.0, _QUARTER, 2 * _QUARTER)
    )
    chsh_angles: tuple = (0.0, math.pi / 2, _QUARTER, 3 * _QUARTER)
    n_qf: int = 2500
    n_nosig: int = 3000
    n_locality: int = 3000
    n_eff: int = 1500
    alpha: float = 1e-3
    frames_probe: tuple | None = None  # default built from the region geometry
    probe_settings: tuple = (0.0, math.pi / 2)  # the two frame-later settings
    probe_fixed: float = 0.0  # the frame-earlier region's own setting


def default_frames_probe(params: ModelParams) -> tuple[Frame, ...]:
    """Rapidities -1, -0.5, 0, 0.5, 1 plus the order-flip frame of the
    region centers, guaranteeing both temporal orderings appear."""
    ra, rb = params.regions
    flip = order_flip_rapidity(ra.center(), rb.center())
    return (Frame(-1.0), Frame(-0.5), Frame(0.0), Frame(0.5), Frame(1.0), flip)


def params_digest(params: ModelParams) -> str:
    state = ",".join(repr(complex(z)) for z in params.state.amplitudes)
    ra, rb = params.regions
    blob = "|".join(
        [
            state,
            repr(params.flash_rate),
            repr(params.epsilon),
            f"{ra.label}:{ra.t_min},{ra.t_max},{ra.x_min},{ra.x_max}",
            f"{rb.label}:{rb.t_min},{rb.t_max},{rb.x_min},{rb.x_max}",
        ]
    )
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def collect_samples(
    model, params: ModelParams, settings, frame: Frame, n: int, master_seed: int
) -> SampleSet:
    """Run the model n times with counter-derived seeds."""
    runner = get_runner(model)
    pair = settings if isinstance(settings, SettingPair) else SettingPair(*settings)
    records = []
    for i in range(n):
        seed = mix_seed(master_seed, i)
        try:
            run = runner(pair, frame, seed, params, record_trace=False)
            records.append((pair, frame, run.outcome, True))
        except InconclusiveRunError:
            records.append((pair, frame, None, False))
    provenance = {
        "model": getattr(model, "value", str(model)),
        "master_seed": master_seed,
        "n": n,
        "params_digest": params_digest(params),
    }
    return SampleSet(tuple(records), provenance)


def _too_many_inconclusive(sample_sets) -> bool:
    total = sum(s.n for s in sample_sets)
    bad = sum(s.n_inconclusive for s in sample_sets)
    return bad > _MAX_INCONCLUSIVE_FRACTION * total


def test_qf(
    model,
    params: ModelParams,
    settings_grid,
    n: int,
    master_seed: int,
    alpha: float = 1e-3,
) -> TestResult:
    """Goodness of fit against the Born joint law over a settings grid.

    statistic = smallest Bonferroni-adjusted p-value across grid cells;
    pass iff statistic >= alpha.
    """
    grid = list(settings_grid)
    if not grid:
        raise ValueError("settings grid must be nonempty")
    sets, p_values = [], []
    for idx, cell in enumerate(grid):
        pair = cell if isinstance(cell, SettingPair) else SettingPair(*cell)
        sample = collect_samples(model, params, pair, Frame(0.0), n, mix_seed(master_seed, idx))
        sets.append(sample)
        expected = born_joint(params.state, pair)
        res = chi2_gof(sample.counts(), [expected[c] for c in OUTCOME_CELLS])
        p_values.append(res.p_value)
    p_adj = bonferroni(p_values)
    if _too_many_inconclusive(sets):
        verdict = INCONCLUSIVE
    else:
        verdict = PASS if p_adj >= alpha else FAIL
    return TestResult(
        "qf_agreement",
        statistic=p_adj,
        threshold=alpha,
        p_bound=p_adj,
        verdict=verdict,
        details={"cells": len(grid), "p_values": p_values},
    )


def test_no_signalling(
    model,
    params: ModelParams,
    n: int,
    master_seed: int,
    angles: tuple = (0.0, math.pi / 2, _QUARTER, 3 * _QUARTER),
    alpha: float = 1e-3,
) -> TestResult:
    """Marginal homogeneity across distant settings.

    Side A's outcome counts are compared across b vs b' (a fixed), side
    B's across a vs a' (b fixed), each with a two-sample chi-square.
    statistic = smallest p-value; pass iff statistic >= alpha.
    """
    a, a_p, b, b_p = angles
    cells = {
        "ab": (a, b),
        "ab'": (a, b_p),
        "a'b": (a_p, b),
    }
    sets = {
        key: collect_samples(model, params, pair, Frame(0.0), n, mix_seed(master_seed, i))
        for i, (key, pair) in enumerate(cells.items())
    }

    def marginal(counts, side):
        if side == "A":
            return [counts[0] + counts[1], counts[2] + counts[3]]
        return [counts[0] + counts[2], counts[1] + counts[3]]

    comparisons = {
        "alpha_across_b": chi2_homogeneity(
            marginal(sets["ab"].counts(), "A"), marginal(sets["ab'"].counts(), "A")
        ),
        "beta_across_a": chi2_homogeneity(
            marginal(sets["ab"].counts(), "B"), marginal(sets["a'b"].counts(), "B")
        ),
    }
    p_min = min(r.p_value for r in comparisons.values())
    if _too_many_inconclusive(sets.values()):
        verdict = INCONCLUSIVE
    else:
        verdict = PASS if p_min >= alpha else FAIL
    discrepancy = {}
    for key, res in comparisons.items():
        discrepancy[key] = res.statistic
    return TestResult(
        "no_signalling",
        statistic=p_min,
        threshold=alpha,
        p_bound=p_min,
        verdict=verdict,
        details={"comparisons": discrepancy},
    )


def chsh_estimate(
    model,
    params: ModelParams,
    angles: tuple,
    n: int,
    master_seed: int,
    frame: Frame = Frame(0.0),
) -> tuple[float, float]:
    """(S_hat, standard error) of E(a,b) - E(a,b') + E(a',b) + E(a',b')."""
    a, a_p, b, b_p = angles
    signs_pairs = [(+1, (a, b)), (-1, (a, b_p)), (+1, (a_p, b)), (+1, (a_p, b_p))]
    s_hat = 0.0
    var = 0.0
    for i, (sign, pair) in enumerate(signs_pairs):
        sample = collect_samples(model, params, pair, frame, n, mix_seed(master_seed, i))
        counts = sample.counts()
        m = sum(counts)
        if m == 0:
            raise RuntimeError("no conclusive runs for CHSH estimation")
        e = (counts[0] + counts[3] - counts[1] - counts[2]) / m
        s_hat += sign * e
        var += (1.0 - e * e) / m  # products are +-1, so Var(E_hat) = (1-E^2)/m
    return s_hat, math.sqrt(var)


def test_locality(
    model,
    params: ModelParams,
    n: int,
    master_seed: int,
    angles: tuple = (0.0, math.pi / 2, _QUARTER, 3 * _QUARTER),
) -> TestResult:
    """CHSH against the local bound with 5-sigma decision bands.

    statistic = |S_hat|, threshold = 2.  fail (not local) iff
    |S_hat| > 2 + 5 se; pass iff |S_hat| < 2 - 5 se; inconclusive between.
    """
    s_hat, se = chsh_estimate(model, params, angles, n, master_seed)
    stat = abs(s_hat)
    if stat > 2.0 + 5.0 * se:
        verdict = FAIL
    elif stat < 2.0 - 5.0 * se:
        verdict = PASS
    else:
        verdict = INCONCLUSIVE
    margin = abs(stat - 2.0) / se if se > 0 else math.inf
    # Gaussian tail bound on the observed deviation from the bound
    p_bound = min(1.0, math.erfc(margin / math.sqrt(2.0)))
    return TestResult(
        "locality",
        statistic=stat,
        threshold=2.0,
        p_bound=p_bound,
        verdict=verdict,
        details={"S": s_hat, "se": se},
    )


def paired_flip_fraction(
    model,
    params: ModelParams,
    frame: Frame,
    earlier: str,
    later_settings: tuple[float, float],
    fixed_setting: float,
    n: int,
    master_seed: int,
) -> dict:
    """Seed-paired dependence probe for one frame and one direction.

    Runs the model twice per seed, changing only the frame-later region's
    setting, and counts how often the frame-earlier region's outcome
    differs.  A model whose outcome function does not read the distant
    setting gives exactly zero flips.
    """
    runner = get_runner(model)
    flips = pairs = dropped = 0
    for i in range(n):
        seed = mix_seed(master_seed, i)
        if earlier == "B":
            s1 = SettingPair(later_settings[0], fixed_setting)
            s2 = SettingPair(later_settings[1], fixed_setting)
        else:
            s1 = SettingPair(fixed_setting, later_settings[0])
            s2 = SettingPair(fixed_setting, later_settings[1])
        try:
            r1 = runner(s1, frame, seed, params, record_trace=False)
            r2 = runner(s2, frame, seed, params, record_trace=False)
        except InconclusiveRunError:
            dropped += 1
            continue
        o1 = r1.outcome.beta if earlier == "B" else r1.outcome.alpha
        o2 = r2.outcome.beta if earlier == "B" else r2.outcome.alpha
        pairs += 1
        flips += o1 != o2
    return {
        "frame": frame,
        "earlier": earlier,
        "flips": flips,
        "pairs": pairs,
        "dropped": dropped,
        "fraction": flips / pairs if pairs else math.nan,
    }


def _ordered_probes(params: ModelParams, frames_probe) -> list[tuple[Frame, str]]:
    ra, rb = params.regions
    out = []
    for frame in frames_probe:
        earlier = region_frame_order(ra, rb, frame)
        if earlier is not None:
            out.append((frame, earlier))
    return out


def test_effective_locality(
    model,
    params: ModelParams,
    frames_probe,
    n: int,
    master_seed: int,
    probe_settings: tuple[float, float] = (0.0, math.pi / 2),
    probe_fixed: float = 0.0,
) -> TestResult:
    """No *effective* transmission between the regions.

    For each transmission direction (setting of one region into the
    outcome of the other), the probe set must contain a frame in which the
    receiving region is frame-earlier and its outcome shows zero
    seed-paired dependence on the distant setting.  statistic = the worse
    direction's best flip fraction, threshold = 0; pass iff statistic = 0
    for both directions.
    """
    probes = _ordered_probes(params, frames_probe)
    have = {earlier for _, earlier in probes}
    if have != {"A", "B"}:
        raise ValueError(
            "frames_probe must order the regions both ways; "
            f"got earlier-region set {sorted(have)}"
        )
    per_direction = {}
    detail = []
    for direction, receiver in (("A->B", "B"), ("B->A", "A")):
        best = math.inf
        for k, (frame, earlier) in enumerate(probes):
            if earlier != receiver:
                continue
            probe = paired_flip_fraction(
                model, params, frame, earlier, probe_settings, probe_fixed,
                n, mix_seed(master_seed, k),
            )
            detail.append({"direction": direction, **probe})
            best = min(best, probe["fraction"])
        per_direction[direction] = best
    stat = max(per_direction.values())
    dropped = sum(d["dropped"] for d in detail)
    total = sum(d["pairs"] + d["dropped"] for d in detail)
    if total == 0 or dropped > _MAX_INCONCLUSIVE_FRACTION * total:
        verdict = INCONCLUSIVE
    else:
        verdict = PASS if stat == 0.0 else FAIL
    return TestResult(
        "effective_locality",
        statistic=stat,
        threshold=0.0,
        p_bound=1.0 if stat == 0.0 else 0.0,
        verdict=verdict,
        details={"directions": per_direction, "probes": detail},
    )


def test_effective_causality(
    model,
    params: ModelParams,
    frames_probe,
    n: int,
    master_seed: int,
    probe_settings: tuple[float, float] = (0.0, math.pi / 2),
    probe_fixed: float = 0.0,
) -> TestResult:
    """The frame-earlier region never depends on the frame-later setting.

    Probes every frame in the set that orders the region boxes (frames
    that leave them overlapping in frame time identify no earlier region
    and are skipped).  statistic = worst flip fraction over probed frames,
    threshold = 0; pass iff zero flips everywhere.
    """
    probes = _ordered_probes(params, frames_probe)
    have = {earlier for _, earlier in probes}
    if have != {"A", "B"}:
        raise ValueError(
            "frames_probe must order the regions both ways; "
            f"got earlier-region set {sorted(have)}"
        )
    detail = []
    worst = 0.0
    for k, (frame, earlier) in enumerate(probes):
        probe = paired_flip_fraction(
            model, params, frame, earlier, probe_settings, probe_fixed,
            n, mix_seed(master_seed, 1000 + k),
        )
        detail.append(probe)
        if not math.isnan(probe["fraction"]):
            worst = max(worst, probe["fraction"])
    dropped = sum(d["dropped"] for d in detail)
    total = sum(d["pairs"] + d["dropped"] for d in detail)
    if total == 0 or dropped > _MAX_INCONCLUSIVE_FRACTION * total:
        verdict = INCONCLUSIVE
    else:
        verdict = PASS if worst == 0.0 else FAIL
    return TestResult(
        "effective_causality",
        statistic=worst,
        threshold=0.0,
        p_bound=1.0 if worst == 0.0 else 0.0,
        verdict=verdict,
        details={"probes": detail},
    )


def classify(
    model,
    params: ModelParams | None = None,
    config: ClassifyConfig | None = None,
) -> ClassificationReport:
    """Run the full five-test battery with independent derived seeds."""
    params = params if params is not None else ModelParams()
    config = config if config is not None else ClassifyConfig()
    frames = (
        config.frames_probe
        if config.frames_probe is not None
        else default_frames_probe(params)
    )
    seeds = {name: mix_seed(config.master_seed, 101 + i) for i, name in enumerate(TEST_NAMES)}
    results = {
        "qf_agreement": test_qf(
            model, params, config.qf_grid, config.n_qf, seeds["qf_agreement"], config.alpha
        ),
        "no_signalling": test_no_signalling(
            model, params, config.n_nosig, seeds["no_signalling"],
            config.chsh_angles, config.alpha,
        ),
        "locality": test_locality(
            model, params, config.n_locality, seeds["locality"], config.chsh_angles
        ),
        "effective_locality": test_effective_locality(
            model, params, frames, config.n_eff, seeds["effective_locality"],
            config.probe_settings, config.probe_fixed,
        ),
        "effective_causality": test_effective_causality(
            model, params, frames, config.n_eff, seeds["effective_causality"],
            config.probe_settings, config.probe_fixed,
        ),
    }
    sample_sizes = {
        "qf_agreement": config.n_qf,
        "no_signalling": config.n_nosig,
        "locality": config.n_locality,
        "effective_locality": config.n_eff,
        "effective_causality": config.n_eff,
    }
    name = getattr(model, "value", None) or str(model)
    return ClassificationReport(
        model=name,
        results=results,
        sample_sizes=sample_sizes,
        seeds=seeds,
        params_digest=params_digest(params),
    )
