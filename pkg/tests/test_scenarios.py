"""
End-to-end scenarios: duty-cycle budget, constant-harvest curves, scheduler
dominance, CS safety and confirmed traffic.
"""
import pytest

from app.models.lorawan import TrafficType
from app.models.schemas import EventKind, ScenarioConfig
from app.models.scheduling import SchedulerPolicy
from app.models.traces import TRACE_PRESETS, TraceSource
from app.services.simulation_service import run_scenario, sweep

FULL_DAY_S = 32400.0
POWERS_MW = (1.0, 2.0, 5.0, 10.0, 20.0, 50.0)
SCHEDULERS = ("us", "os", "fs", "cs", "as:5", "mins:5", "aves:0.1")


def _config(scheduler, trace, capacitance_mf, horizon_s, **fields):
    return ScenarioConfig(
        scheduler=SchedulerPolicy.parse(scheduler),
        trace=trace,
        capacitance_f=capacitance_mf * 1e-3,
        horizon_s=horizon_s,
        **fields,
    )


@pytest.fixture(scope="module")
def constant_grid():
    """packets[(scheduler, power_mw)] at 20 mF over 30 minutes."""
    keys = [(name, p) for name in SCHEDULERS for p in POWERS_MW]
    configs = [_config(name, TraceSource.constant(p), 20.0, 1800.0) for name, p in keys]
    results = sweep(configs)
    assert all(r.ok for r in results)
    return {key: r.report for key, r in zip(keys, results)}


@pytest.mark.parametrize("payload,cap", [(5, 6296), (50, 2745)])
def test_duty_cycle_budget_with_unlimited_power(payload, cap):
    trace = TraceSource.constant(1000.0)
    _, optimal = run_scenario(_config("os", trace, 20.0, FULL_DAY_S, payload_bytes=payload))
    _, unaware = run_scenario(_config("us", trace, 20.0, FULL_DAY_S, payload_bytes=payload))

    assert optimal.p_max == cap
    assert optimal.packets_sent <= cap
    assert optimal.packets_sent >= cap - 10
    assert unaware.packets_sent <= cap
    assert optimal.efficiency_pct <= 100.0


def test_conservative_policy_refuses_small_capacitor():
    log, report = run_scenario(_config("cs", TraceSource.constant(10.0), 2.0, 3600.0))
    assert report.packets_sent == 0
    assert not log.of_kind(EventKind.SEND)
    assert report.on_fraction > 0.5


@pytest.mark.parametrize("scheduler", SCHEDULERS)
def test_packets_grow_with_constant_harvest(constant_grid, scheduler):
    counts = [constant_grid[(scheduler, p)].packets_sent for p in POWERS_MW]
    assert all(b >= a for a, b in zip(counts, counts[1:])), counts
    assert counts[-1] > 0


def test_optimal_beats_unaware_on_constant_harvest(constant_grid):
    gaps = [
        constant_grid[("os", p)].packets_sent - constant_grid[("us", p)].packets_sent
        for p in POWERS_MW
    ]
    assert min(gaps) >= 0
    assert max(gaps[:3]) > 0


def test_optimal_saturates_at_the_duty_cycle_cap(constant_grid):
    report = constant_grid[("os", 50.0)]
    assert report.packets_sent >= report.p_max - 5


@pytest.mark.parametrize("power_mw", [2.0, 5.0, 20.0])
def test_optimal_dominates_every_policy(constant_grid, power_mw):
    best = constant_grid[("os", power_mw)].packets_sent
    for name in SCHEDULERS:
        assert constant_grid[(name, power_mw)].packets_sent <= best, name


def test_conservative_policy_never_switches_off():
    configs = []
    for k, capacitance_mf in enumerate((20.0, 40.0, 100.0)):
        for seed in range(7):
            mean_mw = 1.0 + 29.0 * (seed + k / 3.0) / 7.0
            trace = TraceSource.synthetic(mean_mw, 0.2 * mean_mw, 30.0, seed=100 * k + seed)
            configs.append(_config("cs", trace, capacitance_mf, 3600.0))

    results = sweep(configs)
    assert len(results) == 21
    for result in results:
        assert result.ok, result.error
        assert result.report.switch_offs == 0, result.config.trace.describe()
    assert sum(r.report.packets_sent for r in results) > 0


@pytest.mark.parametrize("preset", sorted(TRACE_PRESETS))
def test_conservative_policy_never_switches_off_on_preset_traces(preset):
    mean_mw, std_mw = TRACE_PRESETS[preset]
    configs = [
        _config("cs", TraceSource.synthetic(mean_mw, std_mw, 30.0, seed=seed), capacitance_mf, 3600.0)
        for capacitance_mf in (20.0, 40.0, 100.0)
        for seed in (1, 2)
    ]

    results = sweep(configs)
    assert len(results) == 6
    for result in results:
        assert result.ok, result.error
        assert result.report.switch_offs == 0, (result.config.capacitance_mf, result.config.trace.describe())
        assert result.report.packets_sent > 0


@pytest.fixture(scope="module")
def energy_limited_trace():
    return TraceSource.synthetic(1.5, 0.75, 30.0, seed=7)


@pytest.mark.parametrize("scheduler", ["us", "cs"])
def test_confirmed_traffic_sends_at_least_as_much(energy_limited_trace, scheduler):
    def run(traffic):
        _, report = run_scenario(_config(scheduler, energy_limited_trace, 40.0, 7200.0, traffic=traffic))
        return report.packets_sent

    assert run(TrafficType.CONFIRMED) >= run(TrafficType.UNCONFIRMED)


def test_fast_rx2_matches_confirmed_traffic(energy_limited_trace):
    _, confirmed = run_scenario(_config(
        "cs", energy_limited_trace, 40.0, 7200.0, traffic=TrafficType.CONFIRMED
    ))
    _, fast_rx2 = run_scenario(_config(
        "cs", energy_limited_trace, 40.0, 7200.0, rx2_spreading_factor=7
    ))
    assert confirmed.packets_sent > 0
    assert fast_rx2.packets_sent == pytest.approx(confirmed.packets_sent, rel=0.02)
