import math

import numpy as np
import pytest

from delaybandit.ledger import DelayLedger, make_tuner

# filled by tests/test_acceptance.py, printed after the run
ACCEPTANCE_RESULTS = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key, (ok, detail) in ACCEPTANCE_RESULTS.items():
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {key}: {detail}")


def reference_skipping(delays, k):
    """Literal transcription with full knowledge of the delays and an n x n indicator table.

    Returns per-round truncated counts, inverse learning rates, the rounds
    deactivated in each round, and the final skip set.
    """
    n = len(delays)
    d = [None] + list(delays)
    a = np.ones((n + 2, n + 2), dtype=bool)  # a[s, t]
    cum = 0
    counts, inv_etas, deact = [], [], []
    for t in range(1, n + 1):
        dt = sum(1 for s in range(1, t) if s + d[s] >= t and a[s, t])
        cum += dt
        inv_eta = math.sqrt(cum / math.log(k))
        newly = []
        for s in range(1, t):
            if min(d[s], t - s) > inv_eta:
                if a[s, t + 1]:
                    newly.append(s)
                a[s, t + 1:] = False
        counts.append(dt)
        inv_etas.append(inv_eta)
        deact.append(newly)
    skipped = [s for s in range(1, n + 1) if not a[s, n]]
    return counts, inv_etas, deact, skipped, cum


def drive_tuner(delays, k, tuner="advanced"):
    """Run a tuner against a ledger fed by arrivals at s + d_s (no policy, no losses)."""
    n = len(delays)
    ledger = DelayLedger()
    tun = make_tuner(tuner, k)
    arrivals = {}
    for s, ds in enumerate(delays, start=1):
        arrivals.setdefault(s + ds, []).append(s)
    counts, inv_etas, deact = [], [], []
    for t in range(1, n + 1):
        inv_etas.append(tun.begin_round(ledger, t))
        counts.append(tun.last_outstanding)
        deact.append(list(tun.last_deactivated))
        ledger.register(t)
        for s in arrivals.get(t, []):
            ledger.record_arrival(s, t)
    return tun, ledger, counts, inv_etas, deact


def random_horizon_delays(rng, n):
    """Delays uniform on {0, ..., n - t} for each round t."""
    t = np.arange(1, n + 1)
    return (rng.integers(0, n - t + 1)).tolist()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
