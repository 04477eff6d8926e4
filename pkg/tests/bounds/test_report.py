import csv
import json
import math

import numpy as np
import pytest

from flockdelay import integrator, signals
from flockdelay.bounds import THEORY_CHECKS, CheckSettings, build_report, flocking_verdict
from flockdelay.exceptions import ConfigError
from flockdelay.schedules import BlackoutList, WeightSchedule

PE = WeightSchedule(window=1.0, alpha_tilde=1.0)


@pytest.fixture
def aligned_report(two_agents):
    cfg = two_agents(t_end=14.0, h_step=0.01, schedule=PE)
    return cfg, build_report(cfg, integrator.run(cfg))


def test_zero_delay_run_passes_every_check(aligned_report):
    _, report = aligned_report
    assert report.failed == []
    assert report.verdict.position_bounded
    assert report.verdict.velocity_aligned
    assert report.model == "pointwise"


def test_constants_of_the_constant_psi_run(aligned_report):
    _, report = aligned_report
    constants = report.constants
    assert constants["d0"] == pytest.approx(1.0)
    assert constants["velocity_bound"] == pytest.approx(0.5)
    assert constants["phi_hat"] == pytest.approx(1.0)
    assert constants["c_hat"] == pytest.approx(math.exp(-2))
    assert constants["mu"] == pytest.approx(-math.log1p(-math.exp(-2)) / 3)
    assert constants["empirical_rate"] == pytest.approx(2.0, rel=1e-3)
    assert math.isfinite(constants["position_bound"])
    assert constants["mu_rigorous"] == pytest.approx(constants["mu"])


def test_diameter_sequence_matches_the_exact_solution(aligned_report):
    _, report = aligned_report
    diameters = report.sequences["diameters"]
    assert len(diameters) == 15
    assert diameters[:6] == pytest.approx(np.exp(-2 * np.arange(6)), rel=1e-6)
    assert not report.resolution["flagged"]


def test_lyapunov_functional_is_evaluated(aligned_report):
    _, report = aligned_report
    assert report.lyapunov is not None
    assert report.lyapunov.times[-1] == pytest.approx(4.0)
    assert report.check("lyapunov_monotone").passed


def test_tiny_envelope_scale_fails_decay_envelope(two_agents):
    cfg = two_agents(t_end=4.0, h_step=0.01, schedule=PE)
    report = build_report(cfg, integrator.run(cfg), CheckSettings(envelope_scale=1e-3))
    assert report.failed == ["decay_envelope"]
    assert report.check("decay_envelope").first_violation == 0.0


def test_theory_checks_need_a_persistence_declaration(two_agents):
    cfg = two_agents(t_end=2.0, h_step=0.01)
    report = build_report(cfg, integrator.run(cfg))
    assert sorted(report.failed) == sorted(THEORY_CHECKS)
    assert all(not report.check(name).available for name in THEORY_CHECKS)
    assert "mu" not in report.constants
    assert report.sequences == {}


def test_weights_switched_off_do_not_align(two_agents):
    cfg = two_agents(t_end=8.0, h_step=0.01, schedule=WeightSchedule(BlackoutList(((1.0, math.inf),))))
    report = build_report(cfg, integrator.run(cfg), CheckSettings(enabled=("velocity_bound", "diameter_growth")))
    assert report.passed
    assert not report.verdict.velocity_aligned
    assert report.series.d_v[-1] == pytest.approx(math.exp(-2), rel=1e-6)


def test_enabled_checks_are_respected(two_agents):
    cfg = two_agents(t_end=2.0, h_step=0.01, schedule=PE)
    report = build_report(cfg, integrator.run(cfg), CheckSettings(enabled=("velocity_bound", "rate_floor")))
    assert [result.name for result in report.checks] == ["velocity_bound", "rate_floor"]
    with pytest.raises(KeyError):
        report.check("decay_envelope")


def test_post_report_signal(two_agents, mocker):
    receiver = mocker.Mock()
    signals.post_report.connect(receiver, weak=False)
    try:
        cfg = two_agents(t_end=1.0, h_step=0.01)
        report = build_report(cfg, integrator.run(cfg), CheckSettings(enabled=("velocity_bound",)))
    finally:
        signals.post_report.disconnect(receiver)
    receiver.assert_called_once_with(cfg, report=report)


def test_flocking_verdict_with_zero_initial_diameter(series_factory):
    times = np.linspace(0.0, 1.0, 11)
    series = series_factory(times, np.zeros((11, 2, 1)), np.ones((11, 2, 1)))
    assert flocking_verdict(series, 0.0) == (True, True)
    assert not flocking_verdict(series, 0.0, max_diameter=-1.0).position_bounded


def test_write_json_and_series_csv(aligned_report, tmp_path):
    _, report = aligned_report
    report.write_json(tmp_path / "diagnostics.json")
    report.write_series_csv(tmp_path / "series.csv")
    data = json.loads((tmp_path / "diagnostics.json").read_text())
    assert set(data["checks"]) == {result.name for result in report.checks}
    assert data["verdict"] == {"position_bounded": True, "velocity_aligned": True}
    assert data["t_end"] == pytest.approx(14.0)
    with (tmp_path / "series.csv").open() as fp:
        rows = list(csv.reader(fp))
    assert rows[0] == ["t", "d_x", "d_v", "energy", "functional"]
    assert len(rows) == len(report.series.times) + 1
    assert rows[-1][4] == "nan"
    report.write_json(tmp_path / "again.json")
    assert (tmp_path / "again.json").read_text() == (tmp_path / "diagnostics.json").read_text()


@pytest.mark.parametrize(
    "kwargs",
    [{"enabled": ("velocity_bound", "nope")}, {"envelope_scale": 0.0}, {"align_tolerance": -1.0}],
)
def test_invalid_check_settings(kwargs):
    with pytest.raises(ConfigError):
        CheckSettings(**kwargs)


def test_check_settings_to_dict():
    assert CheckSettings().to_dict() == {"enabled": "all", "envelope_scale": 1.0}
    settings = CheckSettings(enabled=("velocity_bound",), align_tolerance=1e-3)
    assert settings.to_dict() == {"enabled": ["velocity_bound"], "envelope_scale": 1.0, "align_tolerance": 1e-3}
