"""roaringset: compressed 32-bit integer sets with dual scalar/vector kernels.

The set is chunked by the high 16 bits of each value; every non-empty chunk
stores its low 16 bits in whichever of three container shapes (sorted array,
bitset, run list) is smallest.  Set algebra, count-only queries, wide unions,
a byte-exact wire format, text dataset loading, a clustered synthetic
generator, and a benchmark CLI are included.
"""

from .bitmap import RoaringBitmap
from .containers import (ArrayContainer, BitsetContainer, RunContainer,
                         container_add, container_contains,
                         container_normalize, container_pairwise,
                         container_pairwise_cardinality, container_remove)
from .serde import (Dataset, DatasetError, DecodeError, deserialize,
                    gen_clusterdata, load_dataset, serialize, write_dataset)

__version__ = "0.1.0"

__all__ = [
    "RoaringBitmap",
    "ArrayContainer", "BitsetContainer", "RunContainer",
    "container_add", "container_remove", "container_contains",
    "container_normalize", "container_pairwise",
    "container_pairwise_cardinality",
    "Dataset", "DatasetError", "DecodeError",
    "serialize", "deserialize", "load_dataset", "write_dataset",
    "gen_clusterdata",
    "__version__",
]
