import math

import pytest

import moneystat as ms


def test_table_temperatures():
    assert ms.temperature_closed_form(ms.ModelSpec.cash_only(100), 1000) == 10
    assert ms.temperature_closed_form(ms.ModelSpec.combined(100, 10), 1000) == 10
    assert ms.temperature_closed_form(ms.ModelSpec.multi_asset(10, 4), 80) == 2


def test_thermo_state_cash_only():
    s = ms.thermo_state(ms.ModelSpec.cash_only(100, 50), 10)
    assert s["mean_money"] == pytest.approx(1000)
    assert s["pressure"] == pytest.approx(1000 / 50)
    assert s["free_energy"] + 10 * s["entropy"] == pytest.approx(s["mean_money"])


def test_restricted_inverse_round_trip():
    spec = ms.ModelSpec.restricted(1, 1.0)
    m = ms.mean_money_restricted(spec, 1.0)
    assert ms.invert_temperature_restricted(spec, m) == pytest.approx(1.0, rel=1e-8)


def test_chain_fit_and_conservation():
    spec = ms.ModelSpec.cash_only(200)
    run = ms.run_chain(spec, total=2000, steps=400_000, seed=5, thin=2000)
    x = run.coordinate("x")
    assert len(x) == run.rows()
    assert sum(run.snapshot(0, "x")) == pytest.approx(2000, rel=1e-12)
    assert run.max_relative_drift < 1e-12
    fit = ms.fit_shifted_exponential(x, 0.0)
    assert fit["t_hat"] == pytest.approx(10.0, rel=0.03)


def test_carnot_reference_cycle():
    c = ms.carnot_cycle(ms.ModelSpec.credit_market(1, 1.0), 4, 2, 1, math.e)
    assert c["eta"] == pytest.approx(0.5, abs=1e-9)
    assert c["work_l"] == pytest.approx(2.0, abs=1e-9)


def test_pareto_analytics_and_sampler():
    spec = ms.ParetoSpec(1, 1.0, 2.0, 1.0)
    assert ms.pareto_entropy(spec, 1.0) == pytest.approx(2.0)
    assert ms.pareto_entropy_response(spec, 1.0) == pytest.approx(4.0)
    with pytest.raises(ms.ModelError):
        ms.pareto_log_partition(spec, 2.0)
    draws = ms.pareto_direct_sample(ms.ParetoSpec(1, 1.0, 3.0, 1.0), 1.0, 50_000, seed=2)
    assert ms.hill_tail_index(draws, 1000) == pytest.approx(2.0, rel=0.1)


def test_build_report_and_config_error(tmp_path):
    cfg = {"pipeline": "transform", "model": {"kind": "CreditMarket", "n_agents": 1, "monetary_base": 1}}
    report = ms.build_report(cfg)
    assert report["carnot"]["verified"] is True
    manifest = ms.run_experiment(cfg, tmp_path / "out")
    assert {f["name"] for f in manifest["files"]} >= {"report.json", "carnot_path.tsv"}
    with pytest.raises(ms.ConfigError):
        ms.build_report({"pipeline": "simulate"})
