"""Reproducible random streams for simulation tasks."""
import hashlib

import numpy as np


def task_entropy(master_seed: int, *keys: object) -> int:
    """Hash the master seed and task keys into 128 bits of entropy.

    The result depends only on the keys, never on scheduling order.
    """
    material = ":".join([str(master_seed), *(str(k) for k in keys)]).encode("utf-8")
    digest = hashlib.blake2b(material, digest_size=16).digest()
    return int.from_bytes(digest, "big")


def make_rng(seed: int | np.random.SeedSequence) -> np.random.Generator:
    """Counter-based Philox generator."""
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    return np.random.Generator(np.random.Philox(seed))


def task_streams(master_seed: int, *keys: object, n_streams: int = 2) -> list[np.random.Generator]:
    """Independent substreams for one task (e.g. derivation and validation cohorts)."""
    root = np.random.SeedSequence(task_entropy(master_seed, *keys))
    return [make_rng(child) for child in root.spawn(n_streams)]
