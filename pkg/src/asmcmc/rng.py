"""Seeded random streams for chains.

A :class:`ChainStream` owns three independent numpy generators spawned from
one seed: standard normals for proposal directions, chi-square variates for
heavy-tailed radial mixing, and uniforms for the accept/reject decision.
Each chain step consumes exactly one increment and one uniform.  Because
numpy fills arrays sequentially, drawing a block of k variates gives the same
numbers as k single draws, so block-wise kernels and the step-by-step API
see identical randomness.
"""

from __future__ import annotations

import numpy as np


def derive_seed_sequence(seed: int, replica: int | None = None) -> np.random.SeedSequence:
    """Seed sequence for ``replica`` of a run seeded with ``seed``.

    A pure function of ``(seed, replica)``: adding replicas never changes the
    streams of the existing ones.
    """
    key = () if replica is None else (int(replica),)
    return np.random.SeedSequence(int(seed), spawn_key=key)


class ChainStream:
    """Per-chain random stream with draw counters."""

    def __init__(self, seed=0, replica: int | None = None):
        if isinstance(seed, np.random.SeedSequence):
            ss = seed
        else:
            ss = derive_seed_sequence(seed, replica)
        normal_ss, mix_ss, unif_ss = ss.spawn(3)
        self._normal = np.random.Generator(np.random.PCG64(normal_ss))
        self._mix = np.random.Generator(np.random.PCG64(mix_ss))
        self._uniform = np.random.Generator(np.random.PCG64(unif_ss))
        self.increments_drawn = 0
        self.uniforms_drawn = 0

    def normals(self, k: int, d: int) -> np.ndarray:
        self.increments_drawn += k
        return self._normal.standard_normal((k, d))

    def chisquare(self, k: int, df: float) -> np.ndarray:
        # counted together with the normals of the same increments
        return self._mix.chisquare(df, size=k)

    def uniforms(self, k: int) -> np.ndarray:
        self.uniforms_drawn += k
        return self._uniform.random(k)

    @property
    def position(self) -> tuple[int, int]:
        """(increments consumed, uniforms consumed)."""
        return self.increments_drawn, self.uniforms_drawn
