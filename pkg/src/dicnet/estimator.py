"""Monte Carlo spread estimation with deterministic parallel replications.

Replication i always draws from counter-based streams keyed on
(master_seed, i, purpose), so results are bit-identical for any worker
count; the reduction sums partial results in replication-index order.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .diffusion import run_policy
from .model import DicNetwork
from .realization import sample_full

# purpose tags keep the world stream and the policy's own stream independent
PURPOSE_WORLD = 0
PURPOSE_POLICY = 1

_MASK = (1 << 64) - 1


def substream(master_seed: int, index: int, purpose: int = 0):
    """Independent generator for one replication, derived from the key alone
    (counter-based, so no state is shared between indices)."""
    key = np.array([master_seed & _MASK,
                    ((index << 8) | (purpose & 0xFF)) & _MASK],
                   dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def hoeffding_samples(n: float, eps: float, delta: float) -> int:
    """Minimal replication count R such that the sample mean of [0, n]-bounded
    draws satisfies P(|mean - mu| >= eps) <= delta."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    if not (0 < delta < 1):
        raise ValueError("delta must be in (0, 1)")
    return math.ceil(n * n * math.log(2.0 / delta) / (2.0 * eps * eps))


def half_width(n: float, replications: int, delta: float) -> float:
    """Hoeffding confidence half-width for [0, n]-bounded samples."""
    return n * math.sqrt(math.log(2.0 / delta) / (2.0 * replications))


@dataclass(frozen=True)
class Estimate:
    mean: float
    replications: int
    half_width: float
    master_seed: int


@dataclass(frozen=True)
class ReplicationResult:
    replication: int
    spread: int
    rounds: int
    seeds_used: int
    gain_evaluations: int
    wall_time_ms: float          # per-seed-selection wall time


class _StreamPool:
    """Reusable generators producing exactly the `substream` streams, without
    paying bit-generator construction per replication."""

    def __init__(self, master_seed: int):
        self.master_seed = master_seed & _MASK
        self._slots: dict[int, tuple] = {}

    def get(self, index: int, purpose: int):
        slot = self._slots.get(purpose)
        if slot is None:
            bitgen = np.random.Philox(key=np.zeros(2, dtype=np.uint64))
            key = np.array([self.master_seed, 0], dtype=np.uint64)
            template = {
                "bit_generator": "Philox",
                "state": {"counter": np.zeros(4, dtype=np.uint64), "key": key},
                "buffer": np.zeros(4, dtype=np.uint64),
                "buffer_pos": 4, "has_uint32": 0, "uinteger": 0,
            }
            slot = (bitgen, np.random.Generator(bitgen), template, key)
            self._slots[purpose] = slot
        bitgen, gen, template, key = slot
        key[1] = ((index << 8) | (purpose & 0xFF)) & _MASK
        bitgen.state = template            # setter copies the array contents
        return gen


class _LazyRng:
    """Generator stand-in that only keys its stream on first use, so policies
    that never draw randomness cost nothing."""

    __slots__ = ("_pool", "_index", "_purpose", "_gen")

    def __init__(self, pool, index, purpose):
        self._pool = pool
        self._index = index
        self._purpose = purpose
        self._gen = None

    def __getattr__(self, name):            # only called for missing attrs
        if self._gen is None:
            self._gen = self._pool.get(self._index, self._purpose)
        return getattr(self._gen, name)


def _run_chunk(net: DicNetwork, policy_factory, master_seed: int,
               start: int, stop: int) -> list[ReplicationResult]:
    pool = _StreamPool(master_seed)
    rows = []
    for i in range(start, stop):
        x = sample_full(net, pool.get(i, PURPOSE_WORLD))
        policy = policy_factory(_LazyRng(pool, i, PURPOSE_POLICY))
        t0 = time.perf_counter()
        run = run_policy(net, policy, x, collect_trace=False)
        elapsed_ms = (time.perf_counter() - t0) * 1000.0
        per_seed = elapsed_ms / max(1, len(run.seeds))
        rows.append(ReplicationResult(i, run.spread, run.rounds,
                                      len(run.seeds), run.gain_evaluations,
                                      per_seed))
    return rows


def _sum_chunk(net: DicNetwork, policy_factory, master_seed: int,
               start: int, stop: int) -> int:
    """Spread total over a replication range, without per-row bookkeeping."""
    pool = _StreamPool(master_seed)
    total = 0
    for i in range(start, stop):
        x = sample_full(net, pool.get(i, PURPOSE_WORLD))
        policy = policy_factory(_LazyRng(pool, i, PURPOSE_POLICY))
        total += run_policy(net, policy, x, collect_trace=False).spread
    return total


def run_replications(net: DicNetwork, policy_factory, replications: int,
                     master_seed: int, workers: int = 1) -> list[ReplicationResult]:
    """One policy run per replication, in replication order.

    `policy_factory(rng) -> policy` must be picklable when workers > 1
    (a module-level function or functools.partial of one).
    """
    if replications < 1:
        raise ValueError("replications must be >= 1")
    if workers <= 1:
        return _run_chunk(net, policy_factory, master_seed, 0, replications)
    chunk = max(1, -(-replications // (workers * 4)))
    bounds = [(s, min(s + chunk, replications))
              for s in range(0, replications, chunk)]
    rows: list[ReplicationResult] = []
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_run_chunk, net, policy_factory, master_seed, s, t)
                   for s, t in bounds]
        for f in futures:          # submission order == replication order
            rows.extend(f.result())
    return rows


def estimate_policy_spread(net: DicNetwork, policy_factory, replications: int,
                           master_seed: int, delta: float = 0.01,
                           workers: int = 1) -> Estimate:
    """Mean spread of the policy over `replications` independent realizations,
    with a Hoeffding half-width at confidence 1 - delta."""
    if replications < 1:
        raise ValueError("replications must be >= 1")
    if workers <= 1:
        total = _sum_chunk(net, policy_factory, master_seed, 0, replications)
    else:
        chunk = max(1, -(-replications // (workers * 4)))
        bounds = [(s, min(s + chunk, replications))
                  for s in range(0, replications, chunk)]
        total = 0
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_sum_chunk, net, policy_factory,
                                   master_seed, s, t) for s, t in bounds]
            for f in futures:      # fixed index-order reduction
                total += f.result()
    mean = total / replications
    return Estimate(mean, replications,
                    half_width(net.node_count, replications, delta),
                    master_seed)
