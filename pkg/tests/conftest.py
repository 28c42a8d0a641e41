import pytest

from sessionaware.preprocess import PreprocessConfig, run_preprocessing
from sessionaware.synthetic import synthetic_log


@pytest.fixture(scope="session")
def synthetic_events():
    return synthetic_log(n_users=60, sessions_per_user=8, n_items=200, seed=3)


@pytest.fixture(scope="session")
def small_split(synthetic_events):
    cfg = PreprocessConfig(num_slices=1, min_item_support=2)
    return run_preprocessing(synthetic_events, cfg).splits[0]


_CRITERIA: list[tuple[str, str, str]] = []


@pytest.fixture
def criterion():
    """Records one acceptance line: ``criterion(label, passed, detail)``.

    ``passed=None`` records a skipped criterion.
    """

    def record(label: str, passed, detail: str = ""):
        status = "SKIP" if passed is None else ("PASS" if passed else "FAIL")
        _CRITERIA.append((label, status, detail))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for label, status, detail in _CRITERIA:
        terminalreporter.write_line(f"[{status}] {label}" + (f": {detail}" if detail else ""))
