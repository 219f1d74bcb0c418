import pytest

from app.models.energy import EnergyModel
from app.models.lorawan import TxCycleSpec
from app.models.scheduling import CyclePlan, SchedulerPolicy
from app.models.schemas import ScenarioConfig
from app.models.traces import TraceSource
from app.services.lorawan_mac import build_cycle_timeline, time_on_air


@pytest.fixture
def circuit():
    """Default loads and thresholds with a 20 mF capacitor."""
    return EnergyModel(capacitance_f=0.02).circuit()


@pytest.fixture
def unconfirmed_plan():
    """SF7, 5 B unconfirmed cycle: both receive windows time out."""
    spec = TxCycleSpec()
    return CyclePlan.from_timeline(build_cycle_timeline(spec, time_on_air(spec.radio, 5)))


@pytest.fixture
def make_scenario():
    def factory(scheduler="cs", power_mw=5.0, **fields):
        fields.setdefault("trace", TraceSource.constant(power_mw))
        fields.setdefault("capacitance_f", 0.02)
        fields.setdefault("horizon_s", 1200.0)
        return ScenarioConfig(scheduler=SchedulerPolicy.parse(scheduler), **fields)
    return factory
