import numpy as np
import pytest
from scipy import stats


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def chi2_uniform_ok(counts, alpha=0.01):
    """Chi-square goodness of fit against equal expected counts."""
    counts = np.asarray(counts, dtype=float)
    expected = counts.sum() / counts.size
    stat = ((counts - expected) ** 2 / expected).sum()
    return stat <= stats.chi2.ppf(1 - alpha, counts.size - 1)


def chi2_ok(counts, probs, alpha=0.01):
    counts = np.asarray(counts, dtype=float)
    probs = np.asarray(probs, dtype=float)
    keep = probs > 0
    assert counts[~keep].sum() == 0, "outcome with zero probability was observed"
    expected = counts.sum() * probs[keep]
    stat = ((counts[keep] - expected) ** 2 / expected).sum()
    return stat <= stats.chi2.ppf(1 - alpha, keep.sum() - 1)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def report():
    """Record one acceptance line: ``report(id, ok, detail)``; ok=None means skipped."""
    def _report(cid, ok, detail):
        status = "SKIP" if ok is None else ("PASS" if ok else "FAIL")
        line = f"criterion {cid:>3}: {status}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
