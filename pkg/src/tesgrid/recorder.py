"""Time-series input (players, weather) and result serialization.

Player files are `time,value` CSVs; weather files add an irradiance
column.  All lookups are step-hold: the value at t is the last sample at
or before t, and querying before the first sample is an error.

Output CSVs print numbers with six significant digits so reruns are
byte-identical across platforms.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from datetime import datetime

from .errors import IoFailure, MalformedRow, MissingPlayerData, NonMonotonicTime
from .model import TIME_FORMAT


def format_number(x) -> str:
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, str):
        return x
    if isinstance(x, int):
        return str(x)
    return f"{x:.6g}"


@dataclass
class TimeSeries:
    name: str
    rows: list[tuple[datetime, float]]  # strictly increasing timestamps

    def sample(self, t: datetime) -> float:
        """Step-hold value at t; MissingPlayerData before the first row."""
        if not self.rows or t < self.rows[0][0]:
            raise MissingPlayerData(f"{self.name}: no sample at or before {t.strftime(TIME_FORMAT)}")
        # linear scan from a cursor would be faster; bisect keeps it simple
        lo, hi = 0, len(self.rows)
        while lo + 1 < hi:
            mid = (lo + hi) // 2
            if self.rows[mid][0] <= t:
                lo = mid
            else:
                hi = mid
        return self.rows[lo][1]


def _parse_rows(path: str, expected_fields: int, name: str) -> list[list[str]]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    rows = []
    for lineno, line in enumerate(lines, start=1):
        if lineno == 1 or not line.strip():
            continue  # header
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != expected_fields:
            raise MalformedRow(f"{name} line {lineno}: expected {expected_fields} fields")
        rows.append(parts)
    return rows


def _parse_time(text: str, name: str, lineno_hint: str) -> datetime:
    try:
        return datetime.strptime(text, TIME_FORMAT)
    except ValueError as exc:
        raise MalformedRow(f"{name} {lineno_hint}: bad timestamp '{text}'") from exc


def read_player(path: str) -> TimeSeries:
    """Read a `time,value` CSV into a strictly-increasing series."""
    name = os.path.basename(path)
    rows: list[tuple[datetime, float]] = []
    for i, parts in enumerate(_parse_rows(path, 2, name)):
        t = _parse_time(parts[0], name, f"row {i + 1}")
        try:
            value = float(parts[1])
        except ValueError as exc:
            raise MalformedRow(f"{name} row {i + 1}: bad value '{parts[1]}'") from exc
        if rows and t <= rows[-1][0]:
            raise NonMonotonicTime(f"{name} row {i + 1}: timestamps must strictly increase")
        rows.append((t, value))
    return TimeSeries(name, rows)


@dataclass
class WeatherSeries:
    temperature: TimeSeries
    irradiance: TimeSeries

    def sample(self, t: datetime) -> tuple[float, float]:
        return self.temperature.sample(t), self.irradiance.sample(t)


def read_weather(path: str) -> WeatherSeries:
    """Read `time,temperature_degF,irradiance_fraction` CSV."""
    name = os.path.basename(path)
    temps: list[tuple[datetime, float]] = []
    irr: list[tuple[datetime, float]] = []
    for i, parts in enumerate(_parse_rows(path, 3, name)):
        t = _parse_time(parts[0], name, f"row {i + 1}")
        if temps and t <= temps[-1][0]:
            raise NonMonotonicTime(f"{name} row {i + 1}: timestamps must strictly increase")
        try:
            temps.append((t, float(parts[1])))
            irr.append((t, float(parts[2])))
        except ValueError as exc:
            raise MalformedRow(f"{name} row {i + 1}: bad number") from exc
    return WeatherSeries(TimeSeries(name, temps), TimeSeries(name, irr))


DEFAULT_WEATHER_DEGF = 90.0
DEFAULT_IRRADIANCE = 0.5


def constant_weather(t0: datetime) -> WeatherSeries:
    """Fallback when a scenario names no weather file."""
    return WeatherSeries(
        TimeSeries("<constant>", [(t0, DEFAULT_WEATHER_DEGF)]),
        TimeSeries("<constant>", [(t0, DEFAULT_IRRADIANCE)]),
    )


@dataclass
class RecorderTable:
    name: str
    file: str
    header: list[str]  # time, props..., flags
    rows: list[list[str]] = field(default_factory=list)

    def append(self, t: datetime, values: list, flags: str) -> None:
        self.rows.append([t.strftime(TIME_FORMAT)] + [format_number(v) for v in values] + [flags])

    def serialize(self) -> str:
        out = [",".join(self.header)]
        out.extend(",".join(row) for row in self.rows)
        return "\n".join(out) + "\n"


def write_results(result, out_dir: str) -> list[str]:
    """Write recorder CSVs, the event audit log, and the run summary.

    Returns the manifest (relative file names, sorted) for deterministic
    listing.  `result` is a kernel SimulationResult.
    """
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as exc:
        raise IoFailure(f"cannot create {out_dir}: {exc}") from exc
    manifest = []

    for table in result.tables.values():
        _write_text(os.path.join(out_dir, table.file), table.serialize())
        manifest.append(table.file)

    audit_lines = ["time,target,property,old_value,new_value,origin"]
    for row in result.audit:
        audit_lines.append(
            ",".join(
                [
                    row.time.strftime(TIME_FORMAT),
                    row.target,
                    row.prop,
                    format_number(row.old_value),
                    format_number(row.new_value),
                    row.origin,
                ]
            )
        )
    _write_text(os.path.join(out_dir, "audit.csv"), "\n".join(audit_lines) + "\n")
    manifest.append("audit.csv")

    summary_lines = [f"{key} {format_number(value)}" for key, value in result.summary.items()]
    _write_text(os.path.join(out_dir, "summary.txt"), "\n".join(summary_lines) + "\n")
    manifest.append("summary.txt")
    return sorted(manifest)


def _write_text(path: str, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
