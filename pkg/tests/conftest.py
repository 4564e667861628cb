"""
Pytest configuration and shared fixtures.
Provides the sample fleet/schedule/cost tables, generated instances and toy factories.
"""

import pytest

from src.models.data_models import AnnealConfig, GeneratorConfig
from src.services.instance_handler import InstanceHandler, generate_instance, ladder_configs, save_instance
from tests.fixtures.factories import make_instance, random_toy


# Test configuration
pytest_plugins = ["pytest_mock"]


SAMPLE_FLEET_CSV = """fleet,capacity,available
A330,159,10
A220,192,15
B737,142,15
B717,165,8
"""

SAMPLE_SCHEDULE_CSV = """flight,origin,departure,destination,arrival,passengers,day
11111,SYD,6:15:00,MEL,7:20:00,157,1
11112,HBA,7:00:00,MEL,8:50:00,207,1
11113,SYD,7:30:00,MEL,8:35:00,147,1
11114,MEL,7:35:00,OOL,9:10:00,113,2
11115,DRW,8:25:00,MEL,9:40:00,190,2
11116,MEL,8:30:00,ADA,10:00:00,141,2
11117,SYD,9:00:00,MEL,10:05:00,157,3
11118,MEL,9:00:00,SYD,10:05:00,145,3
11119,SYD,10:00:00,MEL,11:05:00,159,3
"""

# A330 totals as published; the other fleets are offset from them
SAMPLE_A330_COSTS = {
    11111: ("SYD", "MEL", "4690.40"),
    11112: ("HBA", "MEL", "5740.80"),
    11113: ("SYD", "MEL", "6266.00"),
    11114: ("MEL", "OOL", "5740.80"),
    11115: ("DRW", "MEL", "5215.60"),
    11116: ("MEL", "ADA", "5740.80"),
    11117: ("SYD", "MEL", "5215.60"),
    11118: ("MEL", "SYD", "4690.40"),
    11119: ("SYD", "MEL", "5215.60"),
}
SAMPLE_FLEET_OFFSETS = {"A330": 0, "A220": 25000, "B737": -15000, "B717": 10000}


def sample_cost_csv() -> str:
    lines = ["flight,from,to,fleet,total_cost"]
    for flight_id, (origin, destination, total) in SAMPLE_A330_COSTS.items():
        base = int(total.replace(".", ""))
        for fleet, offset in SAMPLE_FLEET_OFFSETS.items():
            cents = base + offset
            lines.append(f"{flight_id},{origin},{destination},{fleet},{cents // 100}.{cents % 100:02d}")
    return "\n".join(lines) + "\n"


@pytest.fixture
def sample_files(tmp_path):
    """The nine-flight sample tables written as fleet/schedule/cost CSVs."""
    paths = {
        "fleet": tmp_path / "fleet.csv",
        "schedule": tmp_path / "schedule.csv",
        "cost": tmp_path / "cost.csv",
    }
    paths["fleet"].write_text(SAMPLE_FLEET_CSV)
    paths["schedule"].write_text(SAMPLE_SCHEDULE_CSV)
    paths["cost"].write_text(sample_cost_csv())
    return paths


@pytest.fixture
def sample_instance(sample_files):
    """Sample instance loaded with lambda = 1."""
    return InstanceHandler().load_instance(
        sample_files["fleet"], sample_files["schedule"], sample_files["cost"], penalty_weight=1.0
    )


@pytest.fixture(scope="session")
def generated_week():
    """(46, 4, 7) generated instance."""
    return generate_instance(GeneratorConfig(flights_per_day=46, days=7, seed=0))


@pytest.fixture(scope="session")
def generated_day():
    """(46, 4, 1) generated instance with availability scaled to cover the day."""
    return generate_instance(ladder_configs([46], days=1, seed=3)[0])


@pytest.fixture
def small_instance_dir(tmp_path):
    """Saved 10-flights-per-day, 2-day instance directory."""
    instance = generate_instance(ladder_configs([10], days=2, seed=7)[0])
    directory = tmp_path / "instance"
    save_instance(instance, directory, flights_per_day=10)
    return directory


@pytest.fixture
def two_flight_toy():
    """Two flights, two fleets, ec = [[1, 5], [1, 5]] (currency), N = (1, 2)."""
    return make_instance([[100, 500], [100, 500]], [(150, 1), (150, 2)])


@pytest.fixture
def toy_factory():
    return random_toy


@pytest.fixture
def fast_anneal():
    """Short schedule for unit-level anneal runs."""
    return AnnealConfig(sweeps=300, restarts=8, seed=11)
