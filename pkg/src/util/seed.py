"""Seed management for reproducible Monte Carlo runs."""

import json
import random
from pathlib import Path
from typing import List, Optional

import numpy as np


def generate_or_load_seed(manifest_path: str, provided_seed: Optional[int] = None) -> int:
    """
    Resolve the run seed and record it in the run manifest.

    Args:
        manifest_path: JSON manifest holding the seed of previous runs
        provided_seed: Explicit seed from the config or command line

    Returns:
        int: Seed to use

    Behavior:
        - An explicit seed wins and is written to the manifest
        - Otherwise a seed already stored in the manifest is reused
        - Otherwise a fresh seed is drawn and written
    """
    manifest_file = Path(manifest_path)

    if provided_seed is not None:
        _write_seed_to_manifest(manifest_file, provided_seed)
        return provided_seed

    if manifest_file.exists():
        try:
            with open(manifest_file, "r") as f:
                data = json.load(f)
                if "seed" in data:
                    return int(data["seed"])
        except (json.JSONDecodeError, KeyError, IOError, ValueError):
            pass

    new_seed = random.randint(1, 2**31 - 1)
    _write_seed_to_manifest(manifest_file, new_seed)
    return new_seed


def _write_seed_to_manifest(manifest_file: Path, seed: int) -> None:
    """Write seed to the manifest, keeping any other fields."""
    manifest_file.parent.mkdir(parents=True, exist_ok=True)

    data = {}
    if manifest_file.exists():
        try:
            with open(manifest_file, "r") as f:
                data = json.load(f)
        except (json.JSONDecodeError, IOError):
            pass

    data["seed"] = seed
    with open(manifest_file, "w") as f:
        json.dump(data, f, indent=2)


def chain_generators(seed: int, n_chains: int) -> List[np.random.Generator]:
    """Independent generators, one per chain, spawned from a single seed.

    Chain ``i`` always receives the same stream for a given seed, whatever the
    number of chains requested.
    """
    children = np.random.SeedSequence(seed).spawn(n_chains)
    return [np.random.Generator(np.random.PCG64(child)) for child in children]
