"""Batch front-end: seeded runs, classification reports, certificates.

Configuration comes from an INI-style file (sections of key = value
pairs) with every value overridable by a command-line flag; all
randomness flows from one master seed (flag, config, or the
FLASHLAB_SEED environment variable), so a rerun with the same inputs is
byte-identical.  Output files are written atomically
(write-temp-then-rename) under the output directory.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from pathlib import Path

from .classify import ClassifyConfig, classify, params_digest
from .determinism import CertifyConfig, no_effectively_causal_nonlocal_determinism_check
from .minkowski import Frame, Region
from .models import (
    InconclusiveRunError,
    ModelId,
    ModelParams,
    get_runner,
    outcome_distribution,
    write_flash_csv,
)
from .quantum import PureState, SettingPair, born_joint, chsh_value, singlet
from .randomness import mix_seed

import numpy as np

OUTCOME_KEYS = {(1, 1): "++", (1, -1): "+-", (-1, 1): "-+", (-1, -1): "--"}
SEED_ENV_VAR = "FLASHLAB_SEED"

_KNOWN_KEYS = {
    "experiment": {
        "model", "state", "a", "b", "frame", "n", "master_seed",
        "flash_rate", "epsilon",
    },
    "regions": {"a_box", "b_box"},
    "classify": {
        "n_qf", "n_nosig", "n_locality", "n_eff", "frames_probe",
        "a_grid", "b_grid",
    },
    "certify": {"k_max", "theta", "witness_samples"},
    "output": {"out_dir", "csv"},
}


class ConfigError(Exception):
    """Invalid configuration; message is anchored to file and line."""


def parse_config_file(path: str) -> dict:
    """Parse sectioned key = value text; reject unknown sections/keys.

    Returns {(section, key): (raw_value, line_number)}.
    """
    entries: dict = {}
    section = None
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc}") from exc
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split(";")[0].split("#")[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip().lower()
            if section not in _KNOWN_KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown section [{section}]")
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        if section is None:
            raise ConfigError(f"{path}:{lineno}: key outside of any section")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.lower()
        if key not in _KNOWN_KEYS[section]:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r} in section [{section}]")
        entries[(section, key)] = (value, lineno)
    return entries


class RunConfig:
    """Validated configuration assembled from file + flag overrides."""

    def __init__(self, args):
        self.path = args.config
        self.entries = parse_config_file(args.config) if args.config else {}
        self.model = self._resolve_model(args)
        self.state = self._resolve_state()
        self.a = self._resolve_float(args.a, "experiment", "a", 0.0)
        self.b = self._resolve_float(args.b, "experiment", "b", 0.0)
        self.frame = Frame(self._resolve_float(args.frame, "experiment", "frame", 0.0))
        self.n = self._resolve_int(args.n, "experiment", "n", 10_000)
        self.master_seed = self._resolve_seed(args)
        self.flash_rate = self._resolve_float(None, "experiment", "flash_rate", 5.0)
        self.epsilon = self._resolve_float(None, "experiment", "epsilon", 0.0)
        self.out_dir = Path(args.out or self._raw("output", "out_dir", "results"))
        self.csv = bool(args.csv) or self._resolve_bool("output", "csv", False)
        regions = (
            self._resolve_region("a_box", ModelParams().regions[0]),
            self._resolve_region("b_box", ModelParams().regions[1]),
        )
        try:
            self.params = ModelParams(
                state=self.state,
                flash_rate=self.flash_rate,
                epsilon=self.epsilon,
                regions=regions,
            )
        except ValueError as exc:
            raise ConfigError(f"{self.path or '<flags>'}: invalid parameters: {exc}") from exc

    # --- raw access helpers -------------------------------------------------
    def _raw(self, section, key, default=None):
        if (section, key) in self.entries:
            return self.entries[(section, key)][0]
        return default

    def _anchor(self, section, key) -> str:
        lineno = self.entries[(section, key)][1]
        return f"{self.path}:{lineno}"

    def _resolve_float(self, flag_value, section, key, default) -> float:
        if flag_value is not None:
            return float(flag_value)
        raw = self._raw(section, key)
        if raw is None:
            return default
        try:
            return float(raw)
        except ValueError as exc:
            raise ConfigError(f"{self._anchor(section, key)}: {key} must be a number") from exc

    def _resolve_int(self, flag_value, section, key, default) -> int:
        if flag_value is not None:
            return int(flag_value)
        raw = self._raw(section, key)
        if raw is None:
            return default
        try:
            return int(raw)
        except ValueError as exc:
            raise ConfigError(f"{self._anchor(section, key)}: {key} must be an integer") from exc

    def _resolve_bool(self, section, key, default) -> bool:
        raw = self._raw(section, key)
        if raw is None:
            return default
        lowered = raw.lower()
        if lowered in ("true", "yes", "1", "on"):
            return True
        if lowered in ("false", "no", "0", "off"):
            return False
        raise ConfigError(f"{self._anchor(section, key)}: {key} must be a boolean")

    def _resolve_seed(self, args) -> int:
        if args.seed is not None:
            return int(args.seed)
        raw = self._raw("experiment", "master_seed")
        if raw is not None:
            try:
                return int(raw)
            except ValueError as exc:
                raise ConfigError(
                    f"{self._anchor('experiment', 'master_seed')}: master_seed must be an integer"
                ) from exc
        env = os.environ.get(SEED_ENV_VAR)
        if env is not None:
            try:
                return int(env)
            except ValueError as exc:
                raise ConfigError(f"{SEED_ENV_VAR} must be an integer, got {env!r}") from exc
        return 1

    def _resolve_model(self, args):
        raw = args.model or self._raw("experiment", "model", "rgrwf")
        try:
            return ModelId(raw)
        except ValueError as exc:
            anchor = (
                self._anchor("experiment", "model")
                if ("experiment", "model") in self.entries and not args.model
                else "--model"
            )
            valid = ", ".join(m.value for m in ModelId)
            raise ConfigError(f"{anchor}: unknown model {raw!r} (valid: {valid})") from exc

    def _resolve_state(self) -> PureState:
        raw = self._raw("experiment", "state", "singlet")
        if raw == "singlet":
            return singlet()
        parts = raw.split()
        if len(parts) != 4:
            raise ConfigError(
                f"{self._anchor('experiment', 'state')}: state must be 'singlet' "
                "or four 're,im' amplitude pairs"
            )
        try:
            amps = [complex(*(float(x) for x in p.split(","))) for p in parts]
            return PureState(np.array(amps))
        except ValueError as exc:
            raise ConfigError(f"{self._anchor('experiment', 'state')}: bad state: {exc}") from exc

    def _resolve_region(self, key, default) -> Region:
        raw = self._raw("regions", key)
        if raw is None:
            return default
        parts = raw.split()
        if len(parts) != 4:
            raise ConfigError(
                f"{self._anchor('regions', key)}: {key} needs 4 numbers "
                "(t_min t_max x_min x_max)"
            )
        label = "A" if key == "a_box" else "B"
        try:
            return Region(label, *(float(p) for p in parts))
        except ValueError as exc:
            raise ConfigError(f"{self._anchor('regions', key)}: {exc}") from exc

    def _float_list(self, section, key, default):
        raw = self._raw(section, key)
        if raw is None:
            return default
        try:
            return tuple(float(p) for p in raw.split())
        except ValueError as exc:
            raise ConfigError(f"{self._anchor(section, key)}: {key} must be numbers") from exc

    def classify_config(self) -> ClassifyConfig:
        kwargs = {"master_seed": self.master_seed}
        for key in ("n_qf", "n_nosig", "n_locality", "n_eff"):
            raw = self._raw("classify", key)
            if raw is not None:
                kwargs[key] = self._resolve_int(None, "classify", key, None)
        frames = self._float_list("classify", "frames_probe", None)
        if frames is not None:
            kwargs["frames_probe"] = tuple(Frame(chi) for chi in frames)
        a_grid = self._float_list("classify", "a_grid", None)
        b_grid = self._float_list("classify", "b_grid", None)
        if a_grid is not None and b_grid is not None:
            kwargs["qf_grid"] = tuple((a, b) for a in a_grid for b in b_grid)
        return ClassifyConfig(**kwargs)

    def certify_config(self) -> CertifyConfig:
        return CertifyConfig(
            params=self.params,
            k_max=self._resolve_int(None, "certify", "k_max", 2),
            theta=self._resolve_float(None, "certify", "theta", math.pi / 3),
            witness_samples=self._resolve_int(None, "certify", "witness_samples", 1000),
            master_seed=self.master_seed,
        )


def _atomic_write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_json(path: Path, payload: dict) -> None:
    _atomic_write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _sig6(x: float) -> str:
    return f"{x:.6g}"


def cmd_run(cfg: RunConfig) -> int:
    pair = SettingPair(cfg.a, cfg.b)
    oracle = born_joint(cfg.params.state, pair)
    csv_path = cfg.out_dir / f"flashes_{cfg.model.value}.csv" if cfg.csv else None

    if csv_path is None:
        dist = outcome_distribution(
            cfg.model, pair, cfg.frame, cfg.params, cfg.n, cfg.master_seed
        )
        counts, inconclusive = dist.counts, dist.n_inconclusive
    else:
        # same seeds and counting as outcome_distribution, streaming flashes
        runner = get_runner(cfg.model)
        counts = {c: 0 for c in OUTCOME_KEYS}
        inconclusive = 0

        def runs():
            nonlocal inconclusive
            for i in range(cfg.n):
                try:
                    run = runner(pair, cfg.frame, mix_seed(cfg.master_seed, i),
                                 cfg.params, record_trace=False)
                except InconclusiveRunError as exc:
                    inconclusive += 1
                    continue
                counts[(run.outcome.alpha, run.outcome.beta)] += 1
                yield i, run

        write_flash_csv(csv_path, runs())

    conclusive = cfg.n - inconclusive
    if conclusive == 0:
        print("error: all runs were inconclusive", file=sys.stderr)
        return 1

    lines = [
        f"model {cfg.model.value}  a={_sig6(cfg.a)}  b={_sig6(cfg.b)}  "
        f"frame chi={_sig6(cfg.frame.rapidity)}  n={cfg.n}  seed={cfg.master_seed}",
        f"{'outcome':<9}{'empirical':>12}{'std.err':>12}{'born':>12}",
    ]
    freq_json = {}
    for cell, key in OUTCOME_KEYS.items():
        f = counts[cell] / conclusive
        se = math.sqrt(f * (1.0 - f) / conclusive)
        lines.append(f"{key:<9}{_sig6(f):>12}{_sig6(se):>12}{_sig6(oracle[cell]):>12}")
        freq_json[key] = f
    lines.append(f"inconclusive runs: {inconclusive} of {cfg.n}")
    print("\n".join(lines))

    payload = {
        "command": "run",
        "model": cfg.model.value,
        "a": cfg.a,
        "b": cfg.b,
        "frame_rapidity": cfg.frame.rapidity,
        "n": cfg.n,
        "master_seed": cfg.master_seed,
        "params_digest": params_digest(cfg.params),
        "counts": {OUTCOME_KEYS[c]: counts[c] for c in OUTCOME_KEYS},
        "frequencies": freq_json,
        "oracle": {OUTCOME_KEYS[c]: oracle[c] for c in OUTCOME_KEYS},
        "inconclusive": inconclusive,
    }
    _write_json(cfg.out_dir / f"run_{cfg.model.value}.json", payload)
    return 0


_VERDICT_MARK = {"pass": "✓", "fail": "✗", "inconclusive": "?"}
_ROW_LABELS = (
    ("qf_agreement", "qf"),
    ("no_signalling", "nosig"),
    ("locality", "local"),
    ("effective_locality", "eff-local"),
    ("effective_causality", "eff-causal"),
)


def _verdict_row(model: str, verdicts: dict) -> str:
    cells = " | ".join(f"{label} {_VERDICT_MARK[verdicts[name]]}" for name, label in _ROW_LABELS)
    return f"{model}: {cells}"


def cmd_classify(cfg: RunConfig) -> int:
    report = classify(cfg.model, cfg.params, cfg.classify_config())
    print(_verdict_row(report.model, report.verdicts()))
    _write_json(cfg.out_dir / f"classify_{cfg.model.value}.json", report.to_json_dict())
    return 0


def cmd_certify(cfg: RunConfig) -> int:
    cert_cfg = cfg.certify_config()
    certificate = no_effectively_causal_nonlocal_determinism_check(cert_cfg)
    local_max = max(entry["max_chsh"] for entry in certificate.enumeration)
    quantum = abs(chsh_value(cfg.params.state, *cert_cfg.chsh_angles))
    print(f"local max {_sig6(local_max)} < quantum {_sig6(quantum)}")
    w = certificate.wigner
    print(
        f"wigner theta={_sig6(w.theta)}: strategies lhs {_sig6(w.lhs)} <= rhs {_sig6(w.rhs)}; "
        f"quantum {_sig6(w.quantum_lhs)} > {_sig6(w.quantum_rhs)}"
    )
    jw = certificate.janus_witness
    print(
        f"janus witness: region {jw.region} flips "
        f"{jw.outcomes[0]:+d} -> {jw.outcomes[1]:+d} in frame chi="
        f"{_sig6(jw.frame.rapidity)} when the later setting moves "
        f"{_sig6(jw.setting_pairs[0].a.angle if jw.region == 'B' else jw.setting_pairs[0].b.angle)} -> "
        f"{_sig6(jw.setting_pairs[1].a.angle if jw.region == 'B' else jw.setting_pairs[1].b.angle)}"
    )
    _write_json(cfg.out_dir / "certificate.json", certificate.to_json_dict())
    return 0


def cmd_report(path: str) -> int:
    try:
        payload = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read report {path}: {exc}", file=sys.stderr)
        return 1
    if payload.get("command") == "run":
        print(
            f"model {payload['model']}  a={_sig6(payload['a'])}  b={_sig6(payload['b'])}  "
            f"frame chi={_sig6(payload['frame_rapidity'])}  n={payload['n']}  "
            f"seed={payload['master_seed']}"
        )
        print(f"{'outcome':<9}{'empirical':>12}{'born':>12}")
        for key in ("++", "+-", "-+", "--"):
            print(
                f"{key:<9}{_sig6(payload['frequencies'][key]):>12}"
                f"{_sig6(payload['oracle'][key]):>12}"
            )
        print(f"inconclusive runs: {payload['inconclusive']} of {payload['n']}")
    elif "tests" in payload:
        verdicts = {t["name"]: t["verdict"] for t in payload["tests"]}
        print(_verdict_row(payload["model"], verdicts))
        for t in payload["tests"]:
            print(
                f"  {t['name']:<22} statistic {_sig6(t['statistic'])}  "
                f"threshold {_sig6(t['threshold'])}  p {_sig6(t['p_bound'])}  {t['verdict']}"
            )
    elif "enumeration" in payload:
        for entry in payload["enumeration"]:
            print(
                f"k={entry['k']}: {entry['count']} strategies, "
                f"max CHSH {_sig6(entry['max_chsh'])}"
            )
        print(f"EPR survivors: {payload['epr_filter']['survivor_count']}")
        w = payload["wigner"]
        print(
            f"wigner: lhs {_sig6(w['lhs'])} <= rhs {_sig6(w['rhs'])}; "
            f"quantum {_sig6(w['quantum_lhs'])} > {_sig6(w['quantum_rhs'])}"
        )
        jw = payload["janus_witness"]
        print(f"janus witness in frame chi={_sig6(jw['frame_rapidity'])}, region {jw['region']}")
    else:
        print(f"error: unrecognized report shape in {path}", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flashlab",
        description="EPR flash-model simulations, classification, and certificates",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="INI-style config file")
        p.add_argument("--model", help="rgrwf | preferred_frame | local_hv")
        p.add_argument("--n", type=int, help="number of runs")
        p.add_argument("--seed", type=int, help=f"master seed (or ${SEED_ENV_VAR})")
        p.add_argument("--frame", type=float, help="frame rapidity chi")
        p.add_argument("--a", type=float, help="side A setting angle (radians)")
        p.add_argument("--b", type=float, help="side B setting angle (radians)")
        p.add_argument("--out", help="output directory")
        p.add_argument("--csv", action="store_true", help="also dump per-run flashes to CSV")

    for name in ("run", "classify", "certify"):
        add_common(sub.add_parser(name))
    rep = sub.add_parser("report", help="re-render a previously written JSON report")
    rep.add_argument("path")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "report":
        return cmd_report(args.path)
    try:
        cfg = RunConfig(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        if args.command == "run":
            return cmd_run(cfg)
        if args.command == "classify":
            return cmd_classify(cfg)
        return cmd_certify(cfg)
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
