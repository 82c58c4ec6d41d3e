"""Time-indexed state sequences produced by the engines."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scenario import Scenario, StateVector


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class Trajectory:
    """Recorded run of one engine.

    times: recorded time stamps (units of tau; integers for the discrete map).
    probabilities: array (records, groups, alternatives).
    long_memory: accumulated long-term memory per record and group
        (zero columns for short-term groups).
    step: underlying advance per engine step (1 for discrete, h for continuous).
    """

    algorithm: str
    times: np.ndarray
    probabilities: np.ndarray
    long_memory: np.ndarray
    step: float
    record_stride: int
    scenario: Scenario

    def __post_init__(self):
        for name in ("times", "probabilities", "long_memory"):
            a = np.asarray(getattr(self, name), dtype=float)
            a.flags.writeable = False
            object.__setattr__(self, name, a)

    @property
    def n_records(self):
        return len(self.times)

    def channel(self, group, alternative=0):
        """1-D series p_group(alternative, t) over the recorded grid."""
        return self.probabilities[:, group, alternative]

    def state_at(self, index):
        return StateVector(
            probabilities=self.probabilities[index],
            long_memory_acc=self.long_memory[index],
            time=float(self.times[index]),
        )

    def final_state(self):
        return self.state_at(-1)

    def integer_samples(self):
        """Indices of records lying on the integer time grid, plus those times.

        Raises GridError when the recorded grid misses integers (stride or
        step choices that never hit whole times).
        """
        t = self.times
        near = np.abs(t - np.round(t)) <= 1e-9
        idx = np.nonzero(near)[0]
        if idx.size == 0:
            raise GridError("recorded grid contains no integer times")
        ints = np.round(t[idx]).astype(int)
        want = np.arange(ints[0], ints[-1] + 1)
        if ints.size != want.size or np.any(ints != want):
            raise GridError("integer times are not consecutive on the recorded grid")
        return idx, ints
