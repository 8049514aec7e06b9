"""Shared fixtures: the bundled urine-screening columns and CLI helpers."""

import contextlib
import io

import numpy as np
import pytest

from lpstats import fixture_path
from lpstats.cli import ingest_csv, main


@pytest.fixture(scope="session")
def gag_data():
    """Both fixture columns as float arrays, loaded once per session."""
    ds = ingest_csv(fixture_path(), ["Age", "GAG"])
    return ds.columns["Age"], ds.columns["GAG"]


@pytest.fixture(scope="session")
def age(gag_data):
    return gag_data[0]


@pytest.fixture(scope="session")
def gag(gag_data):
    return gag_data[1]


def run_cli(argv):
    """Run the CLI in process, returning (exit_code, stdout_text)."""
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = main(argv)
    return code, buf.getvalue()


@pytest.fixture
def cli():
    return run_cli


def random_sample_values(rng, n, tied=True):
    """Draw test data, tie-heavy (small integer support) or continuous."""
    if tied:
        support = rng.integers(2, 12)
        return rng.integers(0, support, size=n).astype(float)
    return rng.standard_normal(n)
