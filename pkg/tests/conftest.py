import os
from pathlib import Path

import numpy as np
import pytest

from weasel_muse.core import Dataset, MultivariateSeries

DATA_DIR = Path(__file__).parent / "data"


def data_path(name: str, split: str) -> Path:
    """``<name>_<split>.csv`` from ``$MUSE_DATA_DIR`` if set, else tests/data."""
    root = Path(os.environ.get("MUSE_DATA_DIR", DATA_DIR))
    return root / f"{name}_{split}.csv"


def random_dataset(n_per_class=6, n_dims=2, length=20, n_classes=2, seed=0, shift=1.5,
                   vary_length=False, prefix="s"):
    """Small labelled set whose classes differ by a level shift in dimension 0."""
    rng = np.random.default_rng(seed)
    samples = []
    for i in range(n_per_class * n_classes):
        c = i % n_classes
        n = int(rng.integers(length // 2, length + 1)) if vary_length else length
        x = rng.normal(size=(n_dims, n)).cumsum(axis=1) * 0.3
        x[0] += shift * c
        samples.append(MultivariateSeries(x, label=f"c{c}", sample_id=f"{prefix}{i}"))
    return Dataset(samples)


@pytest.fixture
def toy_train():
    return random_dataset(seed=1)


@pytest.fixture
def toy_test():
    return random_dataset(n_per_class=5, seed=2, prefix="t")


_CRITERIA = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when == "teardown":
        return
    number, title = mark.args
    ok = _CRITERIA.get(number, (True, title))[0]
    # skipped counts as not passed
    _CRITERIA[number] = (ok and rep.passed, title)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        ok, title = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}")
