"""Small shared helpers: thread pool sizing and seed derivation."""

from __future__ import annotations

import hashlib
import os
from concurrent.futures import ThreadPoolExecutor

THREADS_ENV = "BLASTSEL_THREADS"


def thread_count() -> int:
    """Worker count from BLASTSEL_THREADS; unset or 0 means auto (cpu count)."""
    raw = os.environ.get(THREADS_ENV, "0").strip()
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n <= 0:
        n = os.cpu_count() or 1
    return n


def thread_map(fn, items) -> list:
    """Order-preserving map, threaded when BLASTSEL_THREADS allows.

    Results are collected by input position, so output is identical for any
    worker count as long as fn(i) itself is deterministic.
    """
    items = list(items)
    workers = min(thread_count(), len(items)) or 1
    if workers == 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def derive_seed(master: int, label: str) -> int:
    """Stable 63-bit child seed from a master seed and a stage label."""
    digest = hashlib.blake2b(f"{master}:{label}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big") >> 1
