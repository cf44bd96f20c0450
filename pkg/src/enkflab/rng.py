"""Deterministic random-stream management.

Every stochastic ingredient of a run (observation noise, member
perturbations, initial draws, Brownian increments) is pulled from its own
substream, keyed by a purpose tag together with member and step indices.
Substreams are derived on demand from a single master seed, so results do
not depend on the order in which draws happen to be requested, and a run
is bitwise reproducible from (config, seed).
"""

from __future__ import annotations

import zlib

import numpy as np


class RngStream:
    """Factory of independent generators derived from one master seed.

    Args:
        master_seed: non-negative integer seeding the whole run.
    """

    def __init__(self, master_seed: int):
        if master_seed < 0:
            raise ValueError("master seed must be non-negative")
        self.master_seed = int(master_seed)

    def substream(self, purpose: str, member: int = 0, step: int = 0) -> np.random.Generator:
        """Return the generator for (purpose, member, step).

        Repeated calls with the same key return generators in the same
        initial state.  Distinct keys give statistically independent
        streams (SeedSequence avalanche mixing).
        """
        if member < 0 or step < 0:
            raise ValueError("member and step indices must be non-negative")
        tag = zlib.crc32(purpose.encode("utf-8"))
        seq = np.random.SeedSequence(entropy=self.master_seed, spawn_key=(tag, member, step))
        return np.random.default_rng(seq)

    def child_seed(self, purpose: str, index: int = 0) -> int:
        """Derive a master seed for a nested run (e.g. one Monte Carlo replica)."""
        gen = self.substream(purpose, member=index)
        return int(gen.integers(0, 2**63 - 1))

    def __repr__(self) -> str:
        return f"RngStream(master_seed={self.master_seed})"
