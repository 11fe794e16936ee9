import math
from functools import lru_cache

import numpy as np

from tensor_autodiff import ops
from tensor_autodiff.tensor import Tensor


def relative_position_bucket(relative_distance, bidirectional: bool = True, buckets: int = 32, max_distance: int = 128):
    """Map `key_position - query_position` to a bias bucket.

    Small distances get their own bucket, larger ones share logarithmically wider
    buckets up to `max_distance`, and everything beyond lands in the last bucket.
    Bidirectional mode splits the buckets between past and future; otherwise
    future keys all map to bucket 0.
    """
    relative = np.asarray(relative_distance, dtype=np.int64)
    result = np.zeros_like(relative)
    num_buckets = buckets
    if bidirectional:
        num_buckets //= 2
        result += (relative > 0).astype(np.int64) * num_buckets
        relative = np.abs(relative)
    else:
        relative = -np.minimum(relative, 0)

    max_exact = max(num_buckets // 2, 1)
    is_small = relative < max_exact
    safe = np.maximum(relative, 1).astype(np.float64)
    if max_distance > max_exact:
        scaled = np.log(safe / max_exact) / math.log(max_distance / max_exact) * (num_buckets - max_exact)
    else:
        scaled = np.full_like(safe, num_buckets - max_exact, dtype=np.float64)
    if_large = max_exact + scaled.astype(np.int64)
    if_large = np.minimum(if_large, num_buckets - 1)
    result += np.where(is_small, relative, if_large)
    if np.ndim(relative_distance) == 0:
        return int(result)
    return result


@lru_cache(maxsize=1024)
def bucket_grid(query_len: int, key_len: int, query_offset: int, bidirectional: bool, buckets: int, max_distance: int) -> np.ndarray:
    query = np.arange(query_offset, query_offset + query_len)[:, None]
    key = np.arange(key_len)[None, :]
    grid = relative_position_bucket(key - query, bidirectional, buckets, max_distance)
    grid.setflags(write=False)
    return grid


def position_bias(
    table: Tensor,
    query_len: int,
    key_len: int,
    *,
    bidirectional: bool,
    max_distance: int,
    query_offset: int = 0,
) -> Tensor:
    """Bias of shape 1 x heads x query_len x key_len gathered from a buckets x heads table."""
    buckets, heads = table.shape
    grid = bucket_grid(query_len, key_len, query_offset, bidirectional, buckets, max_distance)
    gathered = ops.embedding(table, grid)
    return ops.reshape(ops.transpose(gathered, (2, 0, 1)), (1, heads, query_len, key_len))
