"""Counter-based seed derivation.

Every random stream in the library is a Philox generator keyed by a
``SeedSequence(master_seed, spawn_key=labels)``.  Philox is counter-based,
so two streams with different label tuples are statistically independent
and the mapping ``(master_seed, labels) -> stream`` is pure: any trial,
iteration, or MC batch can be regenerated in isolation, in any order, on
any number of workers.

Label conventions used across the package (all small non-negative ints):

* experiments:  ``(epsilon_index, trial_index, purpose)``
* saddle fits:  ``(iteration, purpose)``
* one-off MC:   ``(purpose,)``

Purpose codes live next to their call sites; they only need to be distinct
within one parent seed.
"""

from __future__ import annotations

import numpy as np

__all__ = ["derive_seed", "generator"]


def derive_seed(master_seed: int, *labels: int) -> int:
    """Map (master seed, label tuple) to a 64-bit child seed."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(x) for x in labels))
    return int(ss.generate_state(1, np.uint64)[0])


def generator(master_seed: int, *labels: int) -> np.random.Generator:
    """Philox generator for the given (master seed, label tuple)."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(x) for x in labels))
    return np.random.Generator(np.random.Philox(ss))
