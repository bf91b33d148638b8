"""Bookkeeping of outstanding observations and the two learning-rate tuners.

Delays are never given to the ledger.  A round's delay becomes known only
when its observation arrives, which is all the tuners are allowed to use.
"""
from __future__ import annotations

import math

__all__ = [
    "DelayLedger",
    "SimpleTuner",
    "AdvancedTuner",
    "ZeroTuner",
    "make_tuner",
]


class DelayLedger:
    """Arrival table for rounds ``1, 2, ...``.

    ``register(t)`` is called when the learner acts in round ``t`` and
    ``record_arrival(s, t)`` when the observation from round ``s`` is
    delivered at the end of round ``t``.
    """

    def __init__(self):
        self.n_registered = 0
        self._arrival = [None]  # 1-indexed; None while outstanding
        self._outstanding = {}  # insertion ordered by origin round

    def register(self, t: int):
        if t != self.n_registered + 1:
            raise ValueError(f"rounds must be registered in order; expected {self.n_registered + 1}, got {t}")
        self.n_registered = t
        self._arrival.append(None)
        self._outstanding[t] = None

    def record_arrival(self, s: int, t: int):
        if not 1 <= s <= self.n_registered:
            raise ValueError(f"round {s} was never registered")
        if self._arrival[s] is not None:
            raise ValueError(f"observation from round {s} already arrived at round {self._arrival[s]}")
        if t < s:
            raise ValueError(f"observation from round {s} cannot arrive at earlier round {t}")
        self._arrival[s] = t
        del self._outstanding[s]

    def arrived(self, s: int) -> bool:
        return self._arrival[s] is not None

    def delay(self, s: int):
        """Delay of round ``s`` if its observation has arrived, else ``None``."""
        a = self._arrival[s]
        return None if a is None else a - s

    def outstanding_rounds(self):
        """Origin rounds still waiting for their observation, in increasing order."""
        return list(self._outstanding)

    def outstanding_count(self, t: int | None = None) -> int:
        """Number of rounds ``s < t`` whose observation had not arrived before round ``t``.

        Without ``t`` this is the count at the start of the next round, i.e.
        everything registered and not yet delivered.
        """
        if t is None or t == self.n_registered + 1:
            return len(self._outstanding)
        if t > self.n_registered + 1:
            raise ValueError(f"rounds before {t} are not all registered")
        return sum(1 for s in range(1, t) if self._arrival[s] is None or self._arrival[s] >= t)


class SimpleTuner:
    """``inv_eta_t = sqrt(2 * cum_outstanding / log k)`` where ``cum_outstanding``
    sums the outstanding counts of rounds ``1..t``."""

    name = "simple"

    def __init__(self, k: int):
        if k < 2:
            raise ValueError("k >= 2 required")
        self.log_k = math.log(k)
        self.cum_outstanding = 0
        self.last_outstanding = 0
        self.inv_eta = 0.0
        self.last_deactivated = []

    def update(self, outstanding: int) -> float:
        """Fold in this round's outstanding count and return the new inverse learning rate."""
        if outstanding < 0:
            raise ValueError("outstanding count must be nonnegative")
        self.last_outstanding = outstanding
        self.cum_outstanding += outstanding
        self.inv_eta = math.sqrt(2.0 * self.cum_outstanding / self.log_k)
        return self.inv_eta

    def begin_round(self, ledger: DelayLedger, t: int) -> float:
        return self.update(ledger.outstanding_count())

    @property
    def cumulative(self) -> int:
        return self.cum_outstanding

    @property
    def skipped(self):
        return []


class AdvancedTuner:
    """Learning rate with skipping of long-outstanding rounds.

    Outstanding rounds are counted while active.  Once round ``s`` has been
    waited on for more than ``inv_eta_t`` rounds it is deactivated for all
    later rounds.  Its observation is still used by the policy; only the
    learning-rate statistic ignores it from then on.
    """

    name = "advanced"

    def __init__(self, k: int):
        if k < 2:
            raise ValueError("k >= 2 required")
        self.log_k = math.log(k)
        self.cum_truncated = 0
        self.last_outstanding = 0
        self.inv_eta = 0.0
        self.deactivated_at = {}  # origin round -> round in which it was deactivated
        self.last_deactivated = []
        self._active = {}  # active rounds not yet known to have arrived, in order
        self._seen = 0

    def is_active(self, s: int, t: int) -> bool:
        """Indicator a_s^t: whether round ``s`` still counts at round ``t``."""
        r = self.deactivated_at.get(s)
        return r is None or t <= r

    def begin_round(self, ledger: DelayLedger, t: int) -> float:
        for s in range(self._seen + 1, t):
            self._active[s] = None
        self._seen = max(self._seen, t - 1)
        for s in [s for s in self._active if ledger.arrived(s)]:
            del self._active[s]
        waiting = list(self._active)
        self.last_outstanding = len(waiting)
        self.cum_truncated += len(waiting)
        self.inv_eta = math.sqrt(self.cum_truncated / self.log_k)
        # Arrived rounds never pass the test: at their arrival round t' = s + d_s they
        # were still outstanding with t' - s = d_s, and inv_eta only grows afterwards.
        # Hence scanning the active outstanding rounds is the full test.
        self.last_deactivated = [s for s in waiting if t - s > self.inv_eta]
        for s in self.last_deactivated:
            self.deactivated_at[s] = t
            del self._active[s]
        return self.inv_eta

    @property
    def cumulative(self) -> int:
        return self.cum_truncated

    @property
    def skipped(self):
        """Rounds with a_s^t = 0 at the latest round t, in order of deactivation.

        A deactivation during round t only takes effect from round t + 1, so
        it does not count here until the next round begins.
        """
        t = self._seen + 1
        return [s for s, r in self.deactivated_at.items() if r < t]


class ZeroTuner:
    """Pure Tsallis-INF baseline: the negentropy part is switched off."""

    name = "tsallis"

    def __init__(self, k: int):
        if k < 2:
            raise ValueError("k >= 2 required")
        self.log_k = math.log(k)
        self.cum_outstanding = 0
        self.last_outstanding = 0
        self.inv_eta = 0.0
        self.last_deactivated = []

    def begin_round(self, ledger: DelayLedger, t: int) -> float:
        d = ledger.outstanding_count()
        self.last_outstanding = d
        self.cum_outstanding += d
        return 0.0

    @property
    def cumulative(self) -> int:
        return self.cum_outstanding

    @property
    def skipped(self):
        return []


_TUNERS = {
    "simple": SimpleTuner,
    "advanced": AdvancedTuner,
    "tsallis": ZeroTuner,
    "tsallis-baseline": ZeroTuner,
}


def make_tuner(name: str, k: int):
    try:
        return _TUNERS[name](k)
    except KeyError:
        raise ValueError(f"unknown tuner {name!r}; choose from simple, advanced, tsallis") from None
