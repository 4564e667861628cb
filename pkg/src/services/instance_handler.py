"""
Instance ingest, serialization and synthetic generation.

Reads and writes the three tabular files (fleet, schedule, cost) plus a JSON
manifest, and generates seeded instances for the benchmark ladders.
"""

import json
import logging
import re
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np
import pandas as pd

from ..models.data_models import (
    CostMatrix, FleetType, Flight, GeneratorConfig, Instance, format_cents, to_cents,
)
from ..utils.config import Config
from ..utils.error_handler import ErrorHandler, IngestError, InstanceValidationError
from ..utils.run_logging import get_run_logger

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

FLEET_COLUMNS = ["fleet", "capacity", "available"]
SCHEDULE_COLUMNS = ["flight", "origin", "departure", "destination", "arrival", "passengers", "day"]
COST_COLUMNS = ["flight", "from", "to", "fleet", "total_cost"]
TIME_FORMAT_COLUMN = "time_format"

FLEET_FILE = "fleet.csv"
SCHEDULE_FILE = "schedule.csv"
COST_FILE = "cost.csv"
MANIFEST_FILE = "manifest.json"

# the afternoon shorthand ("1:00:00" for 13:00) only ever shows up before this hour
_AFTERNOON_SHIFT_BEFORE = 6
_TIME_PATTERN = re.compile(r"^(\d{1,2}):(\d{2})(?::(\d{2}))?$")


def parse_time(text: str, shift_afternoon: bool = True) -> int:
    """Parse "HH:MM[:SS]" into minutes since midnight."""
    match = _TIME_PATTERN.match(str(text).strip())
    if not match:
        raise IngestError(f"unreadable time {text!r}; expected HH:MM:SS")
    hours, minutes = int(match.group(1)), int(match.group(2))
    if hours > 23 or minutes > 59:
        raise IngestError(f"time {text!r} is out of range")
    if shift_afternoon and hours < _AFTERNOON_SHIFT_BEFORE:
        hours += 12
    return hours * 60 + minutes


def format_time(minutes: int) -> str:
    return f"{minutes // 60:02d}:{minutes % 60:02d}:00"


def _read_table(path: PathLike, columns: List[str]) -> pd.DataFrame:
    frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    frame.columns = [str(c).strip() for c in frame.columns]
    missing = [c for c in columns if c not in frame.columns]
    if missing:
        raise IngestError(f"{Path(path).name}: missing columns {missing}")
    return frame


def _to_int(value: str, what: str) -> int:
    try:
        return int(str(value).strip())
    except ValueError:
        raise IngestError(f"{what}: expected an integer, got {value!r}")


class InstanceHandler:
    """Loads and saves instances in the fleet/schedule/cost CSV layout."""

    def __init__(self):
        self.logger = get_run_logger()
        self.error_handler = ErrorHandler()

    def load_instance(self, fleet_file: PathLike, schedule_file: PathLike, cost_file: PathLike,
                      penalty_weight: Optional[float] = None, seed: Optional[int] = None,
                      days=()) -> Instance:
        """
        Load an instance from the three CSV files.

        Args:
            fleet_file: `fleet,capacity,available`
            schedule_file: `flight,origin,departure,destination,arrival,passengers,day`
                with an optional `time_format` column (`24h` disables the
                afternoon shift of hours before 06)
            cost_file: `flight,from,to,fleet,total_cost`
            penalty_weight: lambda; Config.DEFAULT_LAMBDA when None
            seed: generator seed recorded on the instance
            days: extra day indices (days without flights)

        Returns:
            Validated Instance
        """
        fleets = self._read_fleets(fleet_file)
        flights = self._read_schedule(schedule_file)
        costs = self._read_costs(cost_file, fleets, flights)
        weight = Config.DEFAULT_LAMBDA if penalty_weight is None else float(penalty_weight)

        instance = Instance(fleets, flights, costs, days=frozenset(days), penalty_weight=weight, seed=seed)
        self.logger.log_file_operation("load_instance", str(schedule_file), True)
        return instance

    def _read_fleets(self, path: PathLike) -> List[FleetType]:
        frame = _read_table(path, FLEET_COLUMNS)
        fleets = []
        names = set()
        for index, row in enumerate(frame.itertuples(index=False)):
            name = row.fleet.strip()
            if name in names:
                raise IngestError(f"{Path(path).name}: fleet {name} listed twice")
            names.add(name)
            fleets.append(FleetType(
                id=index,
                name=name,
                capacity=_to_int(row.capacity, f"fleet {name} capacity"),
                available=_to_int(row.available, f"fleet {name} available"),
            ))
        return fleets

    def _read_schedule(self, path: PathLike) -> List[Flight]:
        frame = _read_table(path, SCHEDULE_COLUMNS)
        has_marker = TIME_FORMAT_COLUMN in frame.columns
        flights = []
        seen: Dict[tuple, bool] = {}
        for record in frame.to_dict("records"):
            flight_id = _to_int(record["flight"], "flight id")
            day = _to_int(record["day"], f"flight {flight_id} day")
            if (flight_id, day) in seen:
                raise IngestError(f"duplicate flight id {flight_id} on day {day}")
            seen[(flight_id, day)] = True
            shift = not (has_marker and str(record[TIME_FORMAT_COLUMN]).strip().lower() == "24h")
            flights.append(Flight(
                id=flight_id,
                origin=record["origin"].strip(),
                destination=record["destination"].strip(),
                departure=parse_time(record["departure"], shift),
                arrival=parse_time(record["arrival"], shift),
                demand=_to_int(record["passengers"], f"flight {flight_id} passengers"),
                day=day,
            ))
        return flights

    def _read_costs(self, path: PathLike, fleets: List[FleetType], flights: List[Flight]) -> CostMatrix:
        frame = _read_table(path, COST_COLUMNS)
        fleet_ids = {fleet.name: fleet.id for fleet in fleets}
        by_id = {flight.id: flight for flight in flights}
        table: Dict[tuple, int] = {}
        for record in frame.to_dict("records"):
            flight_id = _to_int(record["flight"], "cost row flight id")
            name = record["fleet"].strip()
            if name not in fleet_ids:
                raise IngestError(f"cost row for flight {flight_id} names unknown fleet {name}")
            flight = by_id.get(flight_id)
            if flight is None:
                logger.warning("cost row for flight %d has no schedule entry; ignored", flight_id)
                continue
            if (record["from"].strip(), record["to"].strip()) != (flight.origin, flight.destination):
                logger.warning("cost row for flight %d lists %s->%s, schedule has %s->%s",
                               flight_id, record["from"], record["to"], flight.origin, flight.destination)
            try:
                table[(flight_id, fleet_ids[name])] = to_cents(record["total_cost"].strip())
            except ArithmeticError:
                raise IngestError(f"flight {flight_id}, fleet {name}: unreadable cost {record['total_cost']!r}")

        rows = []
        for flight in flights:
            row = []
            for fleet in fleets:
                if (flight.id, fleet.id) not in table:
                    raise IngestError(f"missing cost for flight {flight.id} on fleet {fleet.name}")
                row.append(table[(flight.id, fleet.id)])
            rows.append(tuple(row))
        return CostMatrix(tuple(rows))

    def load_instance_dir(self, directory: PathLike) -> Instance:
        """Load a directory written by save_instance; the manifest supplies lambda, seed and days."""
        directory = Path(directory)
        manifest = {}
        manifest_path = directory / MANIFEST_FILE
        if manifest_path.exists():
            try:
                manifest = json.loads(manifest_path.read_text())
            except json.JSONDecodeError as e:
                raise IngestError(f"{manifest_path}: invalid JSON ({e})")
        return self.load_instance(
            directory / FLEET_FILE,
            directory / SCHEDULE_FILE,
            directory / COST_FILE,
            penalty_weight=manifest.get("lambda"),
            seed=manifest.get("seed"),
            days=manifest.get("day_indices", ()),
        )

    def save_instance(self, instance: Instance, directory: PathLike,
                      flights_per_day: Optional[int] = None) -> Dict[str, Path]:
        """
        Write the three CSV files and manifest.json into ``directory``.

        Returns:
            Mapping of file role to written path
        """
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        paths = {
            "fleet": directory / FLEET_FILE,
            "schedule": directory / SCHEDULE_FILE,
            "cost": directory / COST_FILE,
            "manifest": directory / MANIFEST_FILE,
        }

        fleet_frame = pd.DataFrame(
            [[f.name, f.capacity, f.available] for f in instance.fleets], columns=FLEET_COLUMNS
        )

        needs_marker = any(min(f.departure, f.arrival) < _AFTERNOON_SHIFT_BEFORE * 60 for f in instance.flights)
        schedule_rows = [
            [f.id, f.origin, format_time(f.departure), f.destination, format_time(f.arrival), f.demand, f.day]
            for f in instance.flights
        ]
        schedule_frame = pd.DataFrame(schedule_rows, columns=SCHEDULE_COLUMNS)
        if needs_marker:
            schedule_frame[TIME_FORMAT_COLUMN] = "24h"

        cost_rows = [
            [flight.id, flight.origin, flight.destination, fleet.name, format_cents(instance.costs.cents[pos][fleet.id])]
            for pos, flight in enumerate(instance.flights)
            for fleet in instance.fleets
        ]
        cost_frame = pd.DataFrame(cost_rows, columns=COST_COLUMNS)

        per_day = [len(instance.flights_on(d)) for d in instance.sorted_days]
        manifest = {
            "lambda": instance.penalty_weight,
            "seed": instance.seed,
            "flights_per_day": flights_per_day if flights_per_day is not None else max(per_day, default=0),
            "days": len(instance.days),
            "fleet_count": instance.fleet_count,
            "day_indices": list(instance.sorted_days),
            "flight_count": len(instance.flights),
        }

        def write_all():
            fleet_frame.to_csv(paths["fleet"], index=False, lineterminator="\n")
            schedule_frame.to_csv(paths["schedule"], index=False, lineterminator="\n")
            cost_frame.to_csv(paths["cost"], index=False, lineterminator="\n")
            paths["manifest"].write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")

        try:
            self.error_handler.with_retry(write_all, f"save_instance:{directory}")
        except OSError:
            self.logger.log_file_operation("save_instance", str(directory), False)
            raise
        self.logger.log_file_operation("save_instance", str(directory), True)
        return paths


class InstanceGenerator:
    """
    Seeded synthetic instances.

    Per flight: origin uniform over the airports, destination uniform over
    the others, block time on a 5-minute grid in [60, 230], departure on a
    5-minute grid from 06:00 to min(22:00, 23:55 - block), demand uniform in
    demand_range, and an independent uniform cost per fleet in integer cents.
    """

    FIRST_DEPARTURE = 360
    LAST_DEPARTURE = 1320
    LAST_ARRIVAL = 1435
    BLOCK_RANGE = (60, 230)
    GRID = 5

    def __init__(self, config: GeneratorConfig):
        if len(config.airports) < 2:
            raise InstanceValidationError("the generator needs at least 2 airports")
        self.config = config

    def generate(self) -> Instance:
        config = self.config
        rng = np.random.default_rng(config.seed)
        fleets = [FleetType(j, name, capacity, available)
                  for j, (name, capacity, available) in enumerate(config.fleet_spec)]
        airports = config.airports
        eta = len(fleets)
        cost_low, cost_high = (to_cents(v) for v in config.cost_range)
        demand_low, demand_high = config.demand_range

        flights: List[Flight] = []
        cost_rows = []
        n = config.flights_per_day
        for day in range(1, config.days + 1):
            origin = rng.integers(0, len(airports), n)
            destination = (origin + rng.integers(1, len(airports), n)) % len(airports)
            low_block, high_block = self.BLOCK_RANGE
            block = low_block + self.GRID * rng.integers(0, (high_block - low_block) // self.GRID + 1, n)
            latest = np.minimum(self.LAST_DEPARTURE, self.LAST_ARRIVAL - block)
            slots = (latest - self.FIRST_DEPARTURE) // self.GRID + 1
            departure = self.FIRST_DEPARTURE + self.GRID * rng.integers(0, slots)
            demand = rng.integers(demand_low, demand_high + 1, n)
            costs = rng.integers(cost_low, cost_high + 1, (n, eta))

            for k in range(n):
                flights.append(Flight(
                    id=len(flights) + 1,
                    origin=airports[origin[k]],
                    destination=airports[destination[k]],
                    departure=int(departure[k]),
                    arrival=int(departure[k] + block[k]),
                    demand=int(demand[k]),
                    day=day,
                ))
                cost_rows.append(tuple(int(c) for c in costs[k]))

        return Instance(
            fleets=fleets,
            flights=flights,
            costs=CostMatrix(tuple(cost_rows)),
            days=frozenset(range(1, config.days + 1)),
            penalty_weight=config.penalty_weight,
            seed=config.seed,
        )


def ladder_configs(flight_counts, days: int, seed: int = 0, penalty_weight: float = 1.0) -> List[GeneratorConfig]:
    """Generator configs for a size ladder, availability scaled to cover each day."""
    return [
        GeneratorConfig(
            flights_per_day=n,
            days=days,
            fleet_spec=tuple(Config.scaled_fleet_spec(n)),
            airports=tuple(Config.DEFAULT_AIRPORTS),
            demand_range=Config.DEMAND_RANGE,
            cost_range=Config.COST_RANGE,
            seed=seed + index,
            penalty_weight=penalty_weight,
        )
        for index, n in enumerate(flight_counts)
    ]


_handler: Optional[InstanceHandler] = None


def get_instance_handler() -> InstanceHandler:
    global _handler
    if _handler is None:
        _handler = InstanceHandler()
    return _handler


def load_instance(fleet_file: PathLike, schedule_file: PathLike, cost_file: PathLike,
                  penalty_weight: Optional[float] = None) -> Instance:
    return get_instance_handler().load_instance(fleet_file, schedule_file, cost_file, penalty_weight)


def load_instance_dir(directory: PathLike) -> Instance:
    return get_instance_handler().load_instance_dir(directory)


def save_instance(instance: Instance, directory: PathLike, flights_per_day: Optional[int] = None) -> Dict[str, Path]:
    return get_instance_handler().save_instance(instance, directory, flights_per_day)


def generate_instance(config: GeneratorConfig) -> Instance:
    return InstanceGenerator(config).generate()
