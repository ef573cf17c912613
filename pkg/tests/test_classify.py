"""Classifier tests: the verdict table, each test's failure modes, report
shape, and estimator behavior."""

import dataclasses
import math

import pytest

from flashlab.classify import (
    ClassifyConfig,
    chsh_estimate,
    classify,
    default_frames_probe,
    test_effective_causality as eff_causality_test,
    test_effective_locality as eff_locality_test,
    test_locality as locality_test,
    test_no_signalling as no_signalling_test,
    test_qf as qf_test,
)
from flashlab.minkowski import Frame
from flashlab.models import ModelId, ModelParams, run_local_hv
from flashlab.quantum import Outcome

FAST = ClassifyConfig(master_seed=97, n_qf=1200, n_nosig=2000, n_locality=2000, n_eff=800)

EXPECTED_ROWS = {
    ModelId.RGRWF: {
        "qf_agreement": "pass",
        "no_signalling": "pass",
        "locality": "fail",
        "effective_locality": "pass",
        "effective_causality": "pass",
    },
    ModelId.PREFERRED_FRAME: {
        "qf_agreement": "pass",
        "no_signalling": "pass",
        "locality": "fail",
        "effective_locality": "fail",
        "effective_causality": "fail",
    },
    ModelId.LOCAL_HV: {
        "qf_agreement": "fail",
        "no_signalling": "pass",
        "locality": "pass",
        "effective_locality": "pass",
        "effective_causality": "pass",
    },
}


@pytest.fixture(scope="module")
def reports():
    return {model: classify(model, config=FAST) for model in EXPECTED_ROWS}


def test_classification_rows(reports):
    for model, expected in EXPECTED_ROWS.items():
        assert reports[model].verdicts() == expected, model


def test_locality_pass_implies_effective_locality_pass(reports):
    for report in reports.values():
        verdicts = report.verdicts()
        if verdicts["locality"] == "pass":
            assert verdicts["effective_locality"] == "pass"


def test_report_json_shape(reports):
    payload = reports[ModelId.RGRWF].to_json_dict()
    assert set(payload) == {"model", "params_digest", "tests", "seeds", "n"}
    assert payload["model"] == "rgrwf"
    assert len(payload["tests"]) == 5
    for entry in payload["tests"]:
        assert set(entry) == {"name", "statistic", "threshold", "p_bound", "verdict"}


def test_classify_deterministic():
    cfg = ClassifyConfig(master_seed=5, n_qf=400, n_nosig=500, n_locality=500, n_eff=300)
    r1 = classify(ModelId.LOCAL_HV, config=cfg)
    r2 = classify(ModelId.LOCAL_HV, config=cfg)
    assert r1.to_json_dict() == r2.to_json_dict()


def _signalling_toy(settings, frame, seed, params=None, record_trace=True):
    """Deliberately signalling model: alpha is set by B's field direction."""
    run = run_local_hv(settings, frame, seed, params, record_trace)
    alpha = 1 if settings.b.angle > math.pi / 2 else -1
    return dataclasses.replace(run, outcome=Outcome(alpha, run.outcome.beta))


def test_no_signalling_catches_toy_model():
    params = ModelParams()
    result = no_signalling_test(_signalling_toy, params, n=800, master_seed=13)
    assert result.verdict == "fail"
    honest = no_signalling_test(ModelId.RGRWF, params, n=800, master_seed=13)
    assert honest.verdict == "pass"


def test_qf_fails_local_model_on_tsirelson_grid():
    params = ModelParams()
    a, a_p, b, b_p = 0.0, math.pi / 2, math.pi / 4, 3 * math.pi / 4
    grid = [(a, b), (a, b_p), (a_p, b), (a_p, b_p)]
    result = qf_test(ModelId.LOCAL_HV, params, grid, n=1500, master_seed=29)
    assert result.verdict == "fail"


def test_locality_verdicts():
    params = ModelParams()
    res = locality_test(ModelId.RGRWF, params, n=2000, master_seed=31)
    assert res.verdict == "fail"
    assert res.statistic == pytest.approx(2 * math.sqrt(2), abs=0.15)
    res = locality_test(ModelId.LOCAL_HV, params, n=2000, master_seed=31)
    assert res.verdict == "pass"
    assert res.statistic == pytest.approx(1.0, abs=0.15)


def test_effective_tests_need_both_orderings():
    params = ModelParams()
    one_sided = (Frame(0.5), Frame(1.0))  # B-first only
    with pytest.raises(ValueError, match="both ways"):
        eff_locality_test(ModelId.RGRWF, params, one_sided, n=50, master_seed=1)
    with pytest.raises(ValueError, match="both ways"):
        eff_causality_test(ModelId.RGRWF, params, one_sided, n=50, master_seed=1)


def test_default_frames_probe_orders_both_ways():
    params = ModelParams()
    frames = default_frames_probe(params)
    from flashlab.minkowski import region_frame_order

    orders = {region_frame_order(*params.regions, f) for f in frames}
    assert {"A", "B"} <= orders


def test_preferred_frame_flips_in_reversed_frames():
    params = ModelParams()
    frames = default_frames_probe(params)
    res = eff_causality_test(ModelId.PREFERRED_FRAME, params, frames, n=400, master_seed=41)
    assert res.verdict == "fail"
    assert res.statistic > 0.05  # a sizeable flip fraction, not a fluke
    res = eff_causality_test(ModelId.RGRWF, params, frames, n=400, master_seed=41)
    assert res.verdict == "pass"
    assert res.statistic == 0.0


def test_chsh_standard_error_scaling():
    # the standard error of the CHSH estimator scales as n^(-1/2)
    params = ModelParams()
    angles = (0.0, math.pi / 2, math.pi / 4, 3 * math.pi / 4)
    ses = {}
    for n in (1_000, 10_000, 100_000):
        _, se = chsh_estimate(ModelId.RGRWF, params, angles, n, master_seed=59)
        ses[n] = se
    for n_small, n_big in ((1_000, 10_000), (10_000, 100_000)):
        ratio = ses[n_small] / ses[n_big]
        expected = math.sqrt(n_big / n_small)
        assert expected / 2 < ratio < expected * 2
