"""Explicit allocation accounting for the cost-construction benchmark.

The benchmark compares *structural* memory footprints, so we count the
working buffers that the cost routines declare rather than sampling OS
RSS: the number is deterministic and portable. Routines register a
buffer when they create it and release it when it dies; the ledger keeps
the running total and the peak.
"""

import numpy as np


class AllocationLedger:
    """Running/peak byte counter for registered buffers."""

    def __init__(self):
        self.current = 0
        self.peak = 0

    def reset(self):
        self.current = 0
        self.peak = 0

    def add(self, arr):
        self.current += arr.nbytes
        if self.current > self.peak:
            self.peak = self.current
        return arr

    def release(self, arr):
        self.current -= arr.nbytes

    def zeros(self, shape, dtype):
        return self.add(np.zeros(shape, dtype=dtype))

    def empty(self, shape, dtype):
        return self.add(np.empty(shape, dtype=dtype))


class NullLedger(AllocationLedger):
    """Ledger that allocates but does not account (the default)."""

    def add(self, arr):
        return arr

    def release(self, arr):
        pass


NULL_LEDGER = NullLedger()
