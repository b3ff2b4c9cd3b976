"""Kernel backends and dispatch.

Two interchangeable implementations of every inner loop live here: a portable
pure-Python one (``scalar``) and a numpy one (``accelerated``).  Both produce
bit-identical outputs.  The active backend is picked once at import time: a
capability probe selects the accelerated backend when numpy is usable, and the
``ROARINGSET_KERNEL`` environment variable overrides the choice
("scalar" or "accelerated").
"""

from __future__ import annotations

import os

from ._shared import BLOCK_K, BLOCK_WORDS, GALLOP_RATIO, OPS, empty_u16
from . import scalar

ENV_BACKEND = "ROARINGSET_KERNEL"

__all__ = [
    "OPS", "BLOCK_K", "BLOCK_WORDS", "GALLOP_RATIO", "ENV_BACKEND",
    "backend_name", "empty_u16",
    "csa", "popcount_block", "bitset_op_with_count", "bitset_op_count_only",
    "extract_set_bits", "bitset_apply_array",
    "array_intersect", "array_intersect_galloping",
    "merge_blocks", "dedup_store", "array_union", "array_difference",
    "array_xor",
]


def _select_backend():
    choice = os.environ.get(ENV_BACKEND, "auto").strip().lower() or "auto"
    if choice == "scalar":
        return scalar
    if choice == "accelerated":
        from . import accelerated
        return accelerated
    if choice == "auto":
        try:
            from . import accelerated
            return accelerated
        except ImportError:
            return scalar
    raise ValueError(
        f"{ENV_BACKEND} must be 'scalar' or 'accelerated', got {choice!r}")


_BACKEND = _select_backend()


def backend_name() -> str:
    """Name of the backend selected at startup."""
    return _BACKEND.BACKEND_NAME


csa = _BACKEND.csa
popcount_block = _BACKEND.popcount_block
bitset_op_with_count = _BACKEND.bitset_op_with_count
bitset_op_count_only = _BACKEND.bitset_op_count_only
extract_set_bits = _BACKEND.extract_set_bits
bitset_apply_array = _BACKEND.bitset_apply_array
array_intersect = _BACKEND.array_intersect
array_intersect_galloping = _BACKEND.array_intersect_galloping
merge_blocks = _BACKEND.merge_blocks
dedup_store = _BACKEND.dedup_store
array_union = _BACKEND.array_union
array_difference = _BACKEND.array_difference
array_xor = _BACKEND.array_xor
