"""Counter-based random streams.

Every random quantity in the package comes from a Philox generator whose
key is ``(master_seed, stream)`` and whose counter encodes a block index.
A block is a fixed-size batch of replicates, so results depend only on
``(master_seed, stream, block)`` and never on how blocks are scheduled.
"""

from __future__ import annotations

import numpy as np

#: Seed used when none is given.
DEFAULT_SEED = 20100401

# stream identifiers
STREAM_MC = 1
STREAM_PVALUE_SET = 2
STREAM_JITTER = 3
STREAM_QQ = 4
STREAM_VALIDATE = 5
STREAM_MISC = 6

_MASK64 = (1 << 64) - 1


def block_generator(master_seed: int, stream: int, block: int) -> np.random.Generator:
    if master_seed < 0 or block < 0:
        raise ValueError("seed and block index must be nonnegative")
    key = np.array([master_seed & _MASK64, stream & _MASK64], dtype=np.uint64)
    # high counter word = block; each block draws far fewer than 2**192 words
    counter = np.array([0, 0, 0, block & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=counter))
