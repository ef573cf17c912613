"""Deterministic strategies, the local CHSH bound, and Janus realizations.

Two complementary halves:

* Exhaustive enumeration of deterministic local strategies whose outputs
  are functions of the local setting and a pre-given bit string, with the
  CHSH bound, the perfect-anticorrelation (EPR) filter, and the Wigner
  inequality over the filtered set.  This is the "randomness given in
  advance" class: no member reaches the quantum CHSH value.

* The Janus construction: the flash-collapse law re-expressed as a total
  deterministic function of (settings, bit string), with every random
  decision made by inverse-CDF consumption of the bits in one fixed
  frame's temporal order.  It reproduces the stochastic law exactly when
  the bits are uniform, is transmission-free in its native frame, and
  demonstrably reads the frame-later setting when examined from a frame
  that reverses the regions' order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .minkowski import Frame, SimultaneityTie, boost_time, order_flip_rapidity, precedes
from .models import ExperimentRun, InconclusiveRunError, ModelParams, _simulate_run
from .quantum import SettingPair
from .randomness import BitSource, mix_seed, random_bits

_TWO_PI = 2.0 * math.pi
_ANGLE_TOL = 1e-12

MAX_K_BITS = 10
MAX_SIDE_EXPONENT = 20  # per-side table entries, i.e. strategies per side <= 2^20
MAX_TOTAL_STRATEGIES = 1 << 20

CHSH_ANGLES = (0.0, math.pi / 2, math.pi / 4, 3 * math.pi / 4)

DEFAULT_BIT_BUDGET = 8192
MIN_BIT_BUDGET = 1024


@dataclass(frozen=True, eq=False)
class DeterministicStrategy:
    """Lookup tables alpha(a_index, bits) and beta(b_index, bits), +-1 valued."""

    settings_a: tuple[float, ...]
    settings_b: tuple[float, ...]
    k_bits: int
    table_a: np.ndarray  # shape (len(settings_a), 2**k_bits)
    table_b: np.ndarray

    def __post_init__(self):
        if not 0 <= self.k_bits <= MAX_K_BITS:
            raise ValueError(f"k_bits must lie in [0, {MAX_K_BITS}]")
        width = 1 << self.k_bits
        for name, table, settings in (
            ("table_a", self.table_a, self.settings_a),
            ("table_b", self.table_b, self.settings_b),
        ):
            if table.shape != (len(settings), width):
                raise ValueError(f"{name} must have shape ({len(settings)}, {width})")

    def alpha(self, a_index: int, bits_index: int) -> int:
        return int(self.table_a[a_index, bits_index])

    def beta(self, b_index: int, bits_index: int) -> int:
        return int(self.table_b[b_index, bits_index])


@dataclass(frozen=True, eq=False)
class StrategyMixture:
    """Convex mixture of strategies over shared settings."""

    strategies: tuple[DeterministicStrategy, ...]
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (len(self.strategies),) or len(self.strategies) == 0:
            raise ValueError("need one weight per strategy")
        if np.any(w < 0) or abs(float(w.sum()) - 1.0) > 1e-12:
            raise ValueError("weights must be nonnegative and sum to 1")
        object.__setattr__(self, "weights", w)


def _norm_angle(theta: float) -> float:
    return float(theta) % _TWO_PI


def _default_settings(n: int, offset: float) -> tuple[float, ...]:
    return tuple(_norm_angle(offset + i * math.pi / 2) for i in range(n))


def _side_tables(n_settings: int, k_bits: int) -> np.ndarray:
    """All +-1 tables of shape (n_settings, 2**k_bits), enumeration order:
    table index i sets entry (s, m) from bit s * 2**k_bits + m of i."""
    entries = n_settings << k_bits
    count = 1 << entries
    idx = np.arange(count, dtype=np.uint32)
    bits = (idx[:, None] >> np.arange(entries, dtype=np.uint32)[None, :]) & 1
    tables = (2 * bits.astype(np.int8) - 1).reshape(count, n_settings, 1 << k_bits)
    return tables


def enumerate_strategies(
    n_a: int,
    n_b: int,
    k_bits: int,
    settings_a: tuple[float, ...] | None = None,
    settings_b: tuple[float, ...] | None = None,
) -> list[DeterministicStrategy]:
    """All deterministic strategies on n_a x n_b settings with k shared bits.

    The count is 2**(n_a 2**k) * 2**(n_b 2**k), in a fixed order (side B
    tables vary fastest).  Default settings are 0, pi/2, ... on side A and
    pi/4, 3pi/4, ... on side B, so (2, 2) lands on the CHSH angles.
    """
    if n_a < 1 or n_b < 1:
        raise ValueError("need at least one setting per side")
    if not 0 <= k_bits <= MAX_K_BITS:
        raise ValueError(f"k_bits must lie in [0, {MAX_K_BITS}]")
    exp_a, exp_b = n_a << k_bits, n_b << k_bits
    total = 1 << (exp_a + exp_b)
    if exp_a > MAX_SIDE_EXPONENT or exp_b > MAX_SIDE_EXPONENT:
        raise ValueError(
            f"enumeration guard: per-side table sizes {exp_a}, {exp_b} "
            f"exceed {MAX_SIDE_EXPONENT} ({total} strategies would be required)"
        )
    if total > MAX_TOTAL_STRATEGIES:
        raise ValueError(
            f"enumeration guard: would require {total} strategies "
            f"(limit {MAX_TOTAL_STRATEGIES})"
        )
    sa = tuple(_norm_angle(t) for t in settings_a) if settings_a else _default_settings(n_a, 0.0)
    sb = tuple(_norm_angle(t) for t in settings_b) if settings_b else _default_settings(n_b, math.pi / 4)
    if len(sa) != n_a or len(sb) != n_b:
        raise ValueError("settings lists must match n_a, n_b")
    tables_a = _side_tables(n_a, k_bits)
    tables_b = _side_tables(n_b, k_bits)
    out = []
    for ta in tables_a:
        for tb in tables_b:
            out.append(DeterministicStrategy(sa, sb, k_bits, ta, tb))
    return out


def _match_setting(settings: tuple[float, ...], theta: float) -> int:
    target = _norm_angle(theta)
    for i, s in enumerate(settings):
        delta = abs(s - target)
        if min(delta, _TWO_PI - delta) <= _ANGLE_TOL:
            return i
    raise ValueError(f"strategy does not use setting {theta!r}; has {settings}")


def _strategy_correlator(strategy: DeterministicStrategy, ia: int, ib: int) -> float:
    row_a = strategy.table_a[ia].astype(np.float64)
    row_b = strategy.table_b[ib].astype(np.float64)
    return float(row_a @ row_b) / row_a.size


def chsh_of(strategy_or_mixture, angles: tuple = CHSH_ANGLES) -> float:
    """CHSH value E(a,b) - E(a,b') + E(a',b) + E(a',b') of a deterministic
    strategy or mixture, averaging products over the uniform bit string.

    The strategy must use exactly the two given settings per side.
    """
    a, a_p, b, b_p = angles
    if isinstance(strategy_or_mixture, StrategyMixture):
        return float(
            sum(
                w * chsh_of(s, angles)
                for w, s in zip(strategy_or_mixture.weights, strategy_or_mixture.strategies)
            )
        )
    strategy = strategy_or_mixture
    if len(strategy.settings_a) != 2 or len(strategy.settings_b) != 2:
        raise ValueError("CHSH needs exactly 2 settings per side")
    ia, ia_p = _match_setting(strategy.settings_a, a), _match_setting(strategy.settings_a, a_p)
    ib, ib_p = _match_setting(strategy.settings_b, b), _match_setting(strategy.settings_b, b_p)
    e = lambda i, j: _strategy_correlator(strategy, i, j)
    return e(ia, ib) - e(ia, ib_p) + e(ia_p, ib) + e(ia_p, ib_p)


def epr_filter(
    strategies, common_settings: tuple[float, ...]
) -> list[DeterministicStrategy]:
    """Keep the strategies that are perfectly anticorrelated at every
    common setting: beta(theta, bits) = -alpha(theta, bits) pointwise."""
    kept = []
    for s in strategies:
        ok = True
        for theta in common_settings:
            ia = _match_setting(s.settings_a, theta)
            ib = _match_setting(s.settings_b, theta)
            if not np.array_equal(s.table_b[ib], -s.table_a[ia]):
                ok = False
                break
        if ok:
            kept.append(s)
    return kept


@dataclass(frozen=True)
class WignerReport:
    """Wigner inequality P++(0, 2t) <= P++(0, t) + P++(t, 2t) over the
    anticorrelated strategies, with the quantum values for contrast."""

    theta: float
    lhs: float
    rhs: float
    quantum_lhs: float
    quantum_rhs: float
    all_satisfied: bool
    worst_margin: float  # max over strategies of lhs - rhs (<= 0 when satisfied)


def _p_plus_plus(strategy: DeterministicStrategy, ia: int, ib: int) -> float:
    hits = (strategy.table_a[ia] == 1) & (strategy.table_b[ib] == 1)
    return float(np.count_nonzero(hits)) / strategy.table_a.shape[1]


def wigner_check(filtered, theta: float) -> WignerReport:
    """Check the Wigner inequality for every filtered strategy.

    Mixtures satisfy it automatically because both sides are linear in
    the strategy.  The quantum singlet values are (1/2) sin^2(theta) on
    the left against sin^2(theta/2) on the right, which violate the
    inequality for 0 < theta < pi/2.
    """
    filtered = list(filtered)
    if not filtered:
        raise ValueError("no strategies to check")
    worst = -math.inf
    worst_pair = (0.0, 0.0)
    for s in filtered:
        i0 = _match_setting(s.settings_a, 0.0)
        i1 = _match_setting(s.settings_a, theta)
        j1 = _match_setting(s.settings_b, theta)
        j2 = _match_setting(s.settings_b, 2.0 * theta)
        lhs = _p_plus_plus(s, i0, j2)
        rhs = _p_plus_plus(s, i0, j1) + _p_plus_plus(s, i1, j2)
        if lhs - rhs > worst:
            worst = lhs - rhs
            worst_pair = (lhs, rhs)
    return WignerReport(
        theta=theta,
        lhs=worst_pair[0],
        rhs=worst_pair[1],
        quantum_lhs=0.5 * math.sin(theta) ** 2,
        quantum_rhs=math.sin(theta / 2.0) ** 2,
        all_satisfied=worst <= 1e-12,
        worst_margin=worst,
    )


@dataclass(frozen=True)
class JanusRealization:
    """The flash-collapse law as a deterministic function of pre-given bits.

    Bits are consumed 32 per uniform, pattern draws first (a
    settings-independent prefix), then channel decisions in the native
    frame's temporal order.
    """

    native_frame: Frame
    params: ModelParams = field(default_factory=ModelParams)
    bit_budget: int = DEFAULT_BIT_BUDGET
    channel_law: str = "quantum"  # or "local_hv": wrap the local model instead

    def __post_init__(self):
        if self.bit_budget < MIN_BIT_BUDGET or self.bit_budget % 32:
            raise ValueError(
                f"bit_budget must be a multiple of 32 and >= {MIN_BIT_BUDGET}"
            )
        if self.channel_law not in ("quantum", "local_hv"):
            raise ValueError(f"unknown channel law {self.channel_law!r}")


def janus_run(
    j: JanusRealization,
    settings,
    bits: np.ndarray,
    record_trace: bool = True,
) -> ExperimentRun:
    """One deterministic run: same law as the flash-collapse model, with
    every draw inverted from the fixed bit string."""
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.shape != (j.bit_budget,):
        raise ValueError(f"bits must have length {j.bit_budget}, got {bits.shape}")
    pair = settings if isinstance(settings, SettingPair) else SettingPair(*settings)
    return _simulate_run(
        BitSource(bits),
        pair,
        j.params,
        j.native_frame.rapidity,
        j.native_frame,
        None,
        local_channels=(j.channel_law == "local_hv"),
        record_trace=record_trace,
    )


@dataclass(frozen=True, eq=False)
class InfluenceEvidence:
    """A witness bit string for which changing only the frame-later
    setting changes the frame-earlier region's outcome."""

    frame: Frame
    region: str
    witness_bits: np.ndarray
    setting_pairs: tuple[SettingPair, SettingPair]
    outcomes: tuple[int, int]

    def __post_init__(self):
        if self.outcomes[0] == self.outcomes[1]:
            raise ValueError("witness outcomes must differ")
        own = (
            (self.setting_pairs[0].b, self.setting_pairs[1].b)
            if self.region == "B"
            else (self.setting_pairs[0].a, self.setting_pairs[1].a)
        )
        if own[0] != own[1]:
            raise ValueError("witness must hold the region's own setting fixed")

    def to_json_dict(self) -> dict:
        return {
            "frame_rapidity": self.frame.rapidity,
            "region": self.region,
            "n_bits": int(self.witness_bits.size),
            "witness_bits_hex": np.packbits(self.witness_bits).tobytes().hex(),
            "setting_pairs": [
                [sp.a.angle, sp.b.angle] for sp in self.setting_pairs
            ],
            "outcomes": list(self.outcomes),
        }


def _first_region_in_frame(run: ExperimentRun, frame: Frame) -> str:
    chi = frame.rapidity
    best = min(
        run.flashes,
        key=lambda f: (boost_time(f.event.t, f.event.x, chi), f.region, f.index),
    )
    return best.region


def _center_order(params: ModelParams, frame: Frame) -> str:
    ra, rb = params.regions
    try:
        return "A" if precedes(ra.center(), rb.center(), frame) else "B"
    except SimultaneityTie:
        return "A"


def influence_witness_search(
    j: JanusRealization,
    probe_frame: Frame,
    n_samples: int,
    master_seed: int = 0,
    later_settings: tuple[float, float] = (0.0, math.pi / 2),
    fixed_setting: float = 0.0,
) -> InfluenceEvidence | None:
    """Search sampled bit strings for a past-influence witness in
    ``probe_frame``.

    Per sample: identify the region whose first flash is earliest in the
    probe frame (identical across arms, since the flash pattern does not
    read the settings), hold its own setting fixed, switch the other
    region's setting, and compare its outcome.  Returns the first witness
    found, or None.
    """
    rng = np.random.Generator(np.random.PCG64(mix_seed(master_seed, 0)))
    for _ in range(n_samples):
        bits = random_bits(rng, j.bit_budget)
        try:
            base = janus_run(j, (later_settings[0], fixed_setting), bits, record_trace=False)
        except InconclusiveRunError:
            continue
        earlier = _first_region_in_frame(base, probe_frame)
        if earlier == "B":
            pairs = (
                SettingPair(later_settings[0], fixed_setting),
                SettingPair(later_settings[1], fixed_setting),
            )
        else:
            pairs = (
                SettingPair(fixed_setting, later_settings[0]),
                SettingPair(fixed_setting, later_settings[1]),
            )
        try:
            run1 = base if earlier == "B" else janus_run(j, pairs[0], bits, record_trace=False)
            run2 = janus_run(j, pairs[1], bits, record_trace=False)
        except InconclusiveRunError:
            continue
        o1 = run1.outcome.beta if earlier == "B" else run1.outcome.alpha
        o2 = run2.outcome.beta if earlier == "B" else run2.outcome.alpha
        if o1 != o2:
            return InfluenceEvidence(probe_frame, earlier, bits, pairs, (o1, o2))
    return None


def past_influence_probe(
    j: JanusRealization,
    other_frame: Frame,
    n_bits_samples: int,
    master_seed: int = 0,
    later_settings: tuple[float, float] = (0.0, math.pi / 2),
    fixed_setting: float = 0.0,
) -> InfluenceEvidence | None:
    """Witness search in a frame that reverses the regions' temporal order.

    For a realization native to an A-first frame probed in a B-first
    frame, B's channel was decided from the conditional given A's, so a
    witness exists and is typically found within tens of samples.
    """
    if _center_order(j.params, other_frame) == _center_order(j.params, j.native_frame):
        raise ValueError(
            "other_frame must reverse the regions' temporal order "
            "relative to the native frame"
        )
    return influence_witness_search(
        j, other_frame, n_bits_samples, master_seed, later_settings, fixed_setting
    )


@dataclass(frozen=True)
class CertifyConfig:
    params: ModelParams = field(default_factory=ModelParams)
    k_max: int = 2
    chsh_angles: tuple = CHSH_ANGLES
    theta: float = math.pi / 3
    witness_samples: int = 1000
    master_seed: int = 1
    bit_budget: int = DEFAULT_BIT_BUDGET


@dataclass(frozen=True)
class Certificate:
    """Machine-readable bundle: exhaustive local bound + Janus witness."""

    enumeration: tuple[dict, ...]
    epr_filter: dict
    wigner: WignerReport
    janus_witness: InfluenceEvidence

    def to_json_dict(self) -> dict:
        return {
            "enumeration": list(self.enumeration),
            "epr_filter": dict(self.epr_filter),
            "wigner": {
                "theta": self.wigner.theta,
                "lhs": self.wigner.lhs,
                "rhs": self.wigner.rhs,
                "quantum_lhs": self.wigner.quantum_lhs,
                "quantum_rhs": self.wigner.quantum_rhs,
            },
            "janus_witness": self.janus_witness.to_json_dict(),
        }


def no_effectively_causal_nonlocal_determinism_check(
    config: CertifyConfig | None = None,
) -> Certificate:
    """Desk-scale certificate that determinism cannot be both effectively
    causal and adequate to the quantum statistics.

    (i) Every deterministic strategy of the pre-given-bits class has a
    frame-independent dependence pattern (each output reads only its own
    setting and the bits), so for this class effective causality in every
    frame is the same thing as locality; the exhaustive CHSH maximum over
    the class is exactly 2, short of the quantum 2 sqrt(2).
    (ii) The perfect-anticorrelation survivors all satisfy the Wigner
    inequality that the quantum values violate.
    (iii) The bit-consuming realization that *is* adequate (the Janus
    realization of the flash process) carries a past-influence witness in
    any order-reversing frame.
    """
    config = config if config is not None else CertifyConfig()
    entries = []
    for k in range(config.k_max + 1):
        strategies = enumerate_strategies(2, 2, k)
        max_chsh = max(chsh_of(s, config.chsh_angles) for s in strategies)
        entries.append(
            {
                "n_a": 2,
                "n_b": 2,
                "k": k,
                "count": len(strategies),
                "max_chsh": max_chsh,
            }
        )

    theta = config.theta
    common = (0.0, theta, 2.0 * theta)
    filtered = epr_filter(
        enumerate_strategies(3, 3, 0, settings_a=common, settings_b=common), common
    )
    wigner = wigner_check(filtered, theta)

    j = JanusRealization(Frame(0.0), config.params, config.bit_budget)
    ra, rb = config.params.regions
    flip_frame = order_flip_rapidity(ra.center(), rb.center())
    witness = past_influence_probe(
        j, flip_frame, config.witness_samples, config.master_seed
    )
    if witness is None:
        raise RuntimeError(
            f"no past-influence witness found in {config.witness_samples} samples; "
            "the Janus construction should yield one"
        )
    return Certificate(
        enumeration=tuple(entries),
        epr_filter={"survivor_count": len(filtered)},
        wigner=wigner,
        janus_witness=witness,
    )
