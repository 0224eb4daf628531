"""Seeded, stream-addressable random number generation.

Every random object in the package is drawn from a Philox (counter-based)
generator keyed by a root seed and a tuple of stream ids, so a trial or a
sketch can be reproduced without replaying the draws that came before it.
"""

import numpy as np

SEED_MASK = (1 << 64) - 1

# stream ids, kept stable so that stored seeds keep reproducing the same sketches
STREAM_LEFT = 0
STREAM_RIGHT = 1
STREAM_INNER = 10
STREAM_OUTER = 11
STREAM_PROBLEM = 20
STREAM_TRIAL = 30


def generator(seed, *stream):
    """Return a ``numpy.random.Generator`` for ``(seed, *stream)``.

    Parameters
    ----------
    seed : int
        Root seed, reduced to 64 bits.
    *stream : int
        Non-negative stream ids. Distinct tuples give statistically
        independent streams.
    """
    seq = np.random.SeedSequence(int(seed) & SEED_MASK, spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.Philox(seq))


def derive_seed(seed, *stream):
    """Derive a child 64-bit seed, used when a sub-object stores its own seed."""
    seq = np.random.SeedSequence(int(seed) & SEED_MASK, spawn_key=tuple(int(s) for s in stream))
    return int(seq.generate_state(1, dtype=np.uint64)[0])
