"""Paths to the data files shipped with the package."""

from pathlib import Path

__all__ = ["fixture_path"]


def fixture_path() -> str:
    """The bundled GAG-urine example table (columns Age, GAG, n = 314).

    A simulated surrogate calibrated to the published summary statistics
    of the classic study; see data/README.md for what it can and cannot
    stand in for.
    """
    return str(Path(__file__).resolve().parent / "data" / "gagurine.csv")
