import numpy as np
import xxhash


def make_rng(seed: int) -> np.random.Generator:
    """Seeded 64-bit generator (SFC64) used for every random draw in the project."""
    return np.random.Generator(np.random.SFC64(seed))


def derive_seed(seed: int, *labels: object) -> int:
    """Stable child seed for a labelled sub-task, independent of call order."""
    text = ":".join([str(seed), *(str(label) for label in labels)])
    return xxhash.xxh3_64_intdigest(text.encode("utf-8")) & 0x7FFF_FFFF_FFFF_FFFF
