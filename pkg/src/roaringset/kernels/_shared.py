"""Constants shared by both kernel backends."""

from __future__ import annotations

import numpy as np

# The four supported logical operations, also used as CLI flag values.
OPS = ("and", "or", "andnot", "xor")

# Block width for the array kernels (values per block).
BLOCK_K = 8

# Switch to galloping intersection when len(small) * GALLOP_RATIO < len(large).
GALLOP_RATIO = 64

# Words per full bitset container and per Harley-Seal block.
BLOCK_WORDS = 1024


def empty_u16() -> np.ndarray:
    return np.empty(0, dtype=np.uint16)
