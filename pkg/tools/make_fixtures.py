"""Regenerate the bundled geodata fixtures in ``src/rfisim/data``."""

from __future__ import annotations

from pathlib import Path

from rfisim.scenario import manhattan_grid, synthetic_city, write_geodata

DATA = Path(__file__).resolve().parents[1] / "src" / "rfisim" / "data"


def main() -> None:
    for name, scn in (("manhattan_grid", manhattan_grid()), ("synthetic_city", synthetic_city())):
        path = DATA / f"{name}.geojson"
        write_geodata(scn, path)
        print(f"{path.name}: {len(scn.buildings)} buildings, {path.stat().st_size // 1024} KiB")


if __name__ == "__main__":
    main()
