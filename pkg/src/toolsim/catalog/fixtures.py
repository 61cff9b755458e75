"""Deterministic knowledge fixtures backing the search/lookup tools.

Every knowledge tool (locations, weather, stocks, holidays, currency, units)
is served from versioned JSON files shipped with the package; nothing ever
touches the network. File integrity is pinned by a sha256 checksum manifest.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

FIXTURE_FILES = (
    "locations.json",
    "weather.json",
    "stocks.json",
    "holidays.json",
    "fx_rates.json",
    "units.json",
)


class FixtureIntegrityError(Exception):
    """A fixture file does not match its pinned checksum."""


@dataclass
class CatalogFixtures:
    locations: list[dict[str, Any]] = field(default_factory=list)
    weather: dict[str, dict[str, float]] = field(default_factory=dict)
    stocks: list[dict[str, Any]] = field(default_factory=list)
    holidays: dict[str, dict[str, int]] = field(default_factory=dict)
    fx_rates: dict[str, dict[str, float]] = field(default_factory=dict)
    units: dict[str, dict[str, float]] = field(default_factory=dict)

    def find_locations(self, query: str) -> list[dict[str, Any]]:
        """Case-insensitive substring match over location names, fixture order."""
        needle = query.strip().lower()
        return [loc for loc in self.locations if needle in loc["name"].lower()]

    def weather_for(self, name: str) -> dict[str, float] | None:
        return self.weather.get(name.strip().lower())

    def find_stock(self, query: str) -> dict[str, Any] | None:
        needle = query.strip().lower()
        for entry in self.stocks:
            names = [entry["symbol"], entry.get("name", "")] + entry.get("aliases", [])
            if any(needle == n.lower() for n in names if n):
                return {
                    "symbol": entry["symbol"],
                    "price": entry["price"],
                    "currency_code": entry["currency_code"],
                }
        return None

    def holiday_date(self, name: str, year: int) -> int | None:
        by_year = self.holidays.get(name.strip().lower())
        if by_year is None:
            return None
        return by_year.get(str(int(year)))

    def fx_rate(self, from_code: str, to_code: str) -> float | None:
        from_code, to_code = from_code.upper(), to_code.upper()
        if from_code == to_code:
            return 1.0
        return self.fx_rates.get(from_code, {}).get(to_code)


def fixtures_dir() -> Path:
    return Path(__file__).resolve().parent.parent / "fixtures"


def _verify_checksums(directory: Path) -> None:
    manifest = directory / "CHECKSUMS.sha256"
    pinned: dict[str, str] = {}
    for line in manifest.read_text().splitlines():
        if not line.strip():
            continue
        digest, name = line.split()
        pinned[name] = digest
    for name in FIXTURE_FILES:
        digest = hashlib.sha256((directory / name).read_bytes()).hexdigest()
        if pinned.get(name) != digest:
            raise FixtureIntegrityError(f"fixture '{name}' does not match its pinned checksum")


def load_fixtures(directory: Path | None = None, verify: bool = True) -> CatalogFixtures:
    directory = directory or fixtures_dir()
    if verify:
        _verify_checksums(directory)
    data = {name: json.loads((directory / name).read_text()) for name in FIXTURE_FILES}
    return CatalogFixtures(
        locations=data["locations.json"],
        weather={k.lower(): v for k, v in data["weather.json"].items()},
        stocks=data["stocks.json"],
        holidays={k.lower(): v for k, v in data["holidays.json"].items()},
        fx_rates=data["fx_rates.json"],
        units=data["units.json"],
    )
