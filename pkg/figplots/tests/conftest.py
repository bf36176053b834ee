"""Session-wide fixture: real preset CSVs generated through the simulation CLI."""

import subprocess
import sys
from pathlib import Path

import pytest

# small but real runs of every preset; fbfid is the slow one
PRESET_ARGS = {
    "fig2a": ["--trajectories", "4"],
    "fig2b": ["--trajectories", "4"],
    "fig3": [],
    "thyvssim": ["--trajectories", "6"],
    "fbfid": ["--trajectories", "2"],
}


def _generate(name: str, directory: Path) -> Path:
    out = directory / f"{name}.csv"
    cmd = [
        sys.executable, "-m", "catparity.cli", "preset", name,
        "--seed", "5", "--workers", "4", "--output", str(out),
    ] + PRESET_ARGS[name]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return out


@pytest.fixture(scope="session")
def preset_csvs(tmp_path_factory) -> dict[str, Path]:
    directory = tmp_path_factory.mktemp("csv")
    return {name: _generate(name, directory) for name in PRESET_ARGS}
