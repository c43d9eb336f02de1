"""
Unit tests for the shared engine base class
"""

import pytest

# Import project modules
import sys
import os
sys.path.append(os.path.join(os.path.dirname(__file__), '../..'))

from src.config import LabSettings
from src.engines.base_engine import BaseEngine, EngineCapability, EngineStatus


class EchoEngine(BaseEngine):
    """Minimal engine used to exercise the base class"""

    def __init__(self, settings: LabSettings):
        super().__init__(engine_id="echo", name="EchoEngine", description="echo", settings=settings)

    def _define_capabilities(self):
        return [EngineCapability(capability_name="echo", description="returns its input")]

    def echo(self, value):
        with self.track("echo"):
            if value is None:
                raise ValueError("nothing to echo")
            return value


@pytest.fixture
def engine():
    return EchoEngine(LabSettings(workers=3))


class TestBaseEngine:
    """Test tracking, status and parallel execution"""

    def test_initial_state(self, engine):
        assert engine.status == EngineStatus.IDLE
        assert engine.has_capability("echo")
        assert not engine.has_capability("search")

    def test_track_records_metrics(self, engine):
        engine.echo(1)
        engine.echo(2)
        assert engine.metrics.evaluations == 2
        assert engine.metrics.per_capability == {"echo": 2}
        assert engine.metrics.last_activity is not None
        assert engine.status == EngineStatus.IDLE

    def test_track_records_errors(self, engine):
        with pytest.raises(ValueError):
            engine.echo(None)
        assert engine.metrics.errors_count == 1
        assert engine.metrics.evaluations == 1
        assert engine.status == EngineStatus.ERROR

    def test_parallel_map_keeps_order(self, engine):
        assert engine.parallel_map(lambda x: x * x, range(20)) == [x * x for x in range(20)]

    def test_parallel_map_serial(self, engine):
        assert engine.parallel_map(engine.echo, [3, 1, 2], workers=1) == [3, 1, 2]
        assert engine.metrics.per_capability["echo"] == 3

    def test_status_info(self, engine):
        engine.echo("x")
        info = engine.get_status_info()
        assert info["engine_id"] == "echo"
        assert info["capabilities"] == ["echo"]
        assert info["metrics"]["per_capability"] == {"echo": 1}
