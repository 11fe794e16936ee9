from typing import Iterable, Mapping, Sequence

import numpy as np
import xxhash


def array_digest(array: np.ndarray) -> str:
    """Hash of dtype, shape and raw bytes; equal digests mean bit-identical arrays."""
    h = xxhash.xxh3_64()
    contiguous = np.ascontiguousarray(array)
    h.update(str(contiguous.dtype).encode())
    h.update(repr(contiguous.shape).encode())
    h.update(contiguous.tobytes())
    return h.hexdigest()


def mapping_digest(arrays: Mapping[str, np.ndarray]) -> str:
    h = xxhash.xxh3_64()
    for name in sorted(arrays):
        h.update(name.encode())
        h.update(array_digest(arrays[name]).encode())
    return h.hexdigest()


def sequences_digest(sequences: Iterable[Sequence[int]]) -> str:
    h = xxhash.xxh3_64()
    for seq in sequences:
        h.update(np.asarray(seq, dtype="<i8").tobytes())
        h.update(b"|")
    return h.hexdigest()
