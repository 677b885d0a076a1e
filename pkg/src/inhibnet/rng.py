"""Reproducible random substreams on top of counter-based Philox.

Every stochastic component of the package draws from a Generator obtained
through :func:`substream`, keyed by the master seed plus a structured
purpose key. A given key always yields the same stream regardless of how
many draws other streams have consumed, so proposal clocks, labels,
neuron choices, acceptance coins and reset draws stay independent and
reproducible.
"""

from __future__ import annotations

import numpy as np

# Top-level stream domains. Never renumber: changing these silently
# changes every seeded output.
SIM = 0
FIRST_JUMP = 1
BACKWARD = 2
FORWARD = 3
GENERATOR_MC = 4
TIME_AVERAGE = 5
DOMINATING = 6

# Sub-purposes within SIM.
SIM_GAPS = 0
SIM_LABELS = 1
SIM_NEURONS = 2
SIM_COINS = 3
SIM_RESETS = 4

# Event kinds for backward streams.
KIND_SURE = 0
KIND_POSSIBLE = 1


def zigzag(i: int) -> int:
    """Map a lattice index in Z to a nonnegative integer (0, -1, 1, -2, ...)."""
    return 2 * i if i >= 0 else -2 * i - 1


def substream(seed: int, *key: int) -> np.random.Generator:
    """Generator for the stream identified by (seed, key).

    The key goes through SeedSequence's spawn mechanism, so distinct keys
    give statistically independent streams.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))
