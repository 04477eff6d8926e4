import pytest

from flockdelay import integrator
from flockdelay.bounds import build_report
from flockdelay.scenario import load_scenario
from tests import FIXTURES


@pytest.mark.slow
@pytest.mark.parametrize("name", ["stress", "stress-distributed"])
def test_stress_scenario_passes_every_check(name):
    scenario = load_scenario(FIXTURES / "scenarios" / f"{name}.toml")
    report = build_report(scenario.system, integrator.run(scenario.system), scenario.checks)
    assert report.failed == []
    assert report.constants["mu"] > 0


@pytest.mark.parametrize("name", ["stress", "stress-distributed"])
def test_stress_scenarios_parse(name):
    scenario = load_scenario(FIXTURES / "scenarios" / f"{name}.toml")
    cfg = scenario.system
    assert (cfg.n_agents, cfg.dim) == (32, 3)
    assert cfg.tau_bar == 0.5
    assert cfg.schedule.window == 2.0
    assert cfg.h_step == pytest.approx(0.01)
