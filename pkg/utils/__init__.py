__all__ = [
    # Settings
    "settings",
    # Logging helpers
    "setup_logging",
    "setup_from_settings",
    "log_kv",
    # Randomness and hashing
    "make_rng",
    "derive_seed",
    "array_digest",
    "mapping_digest",
    "sequences_digest",
    # Process setup
    "pin_blas_threads",
]


def __getattr__(name):
    if name == "settings":
        from .settings import settings
        return settings
    if name in ("setup_logging", "setup_from_settings", "log_kv"):
        from .logging import setup_logging, setup_from_settings, log_kv
        return {
            "setup_logging": setup_logging,
            "setup_from_settings": setup_from_settings,
            "log_kv": log_kv,
        }[name]
    if name in ("make_rng", "derive_seed"):
        from .rng import make_rng, derive_seed
        return {"make_rng": make_rng, "derive_seed": derive_seed}[name]
    if name in ("array_digest", "mapping_digest", "sequences_digest"):
        from .digest import array_digest, mapping_digest, sequences_digest
        return {
            "array_digest": array_digest,
            "mapping_digest": mapping_digest,
            "sequences_digest": sequences_digest,
        }[name]
    if name == "pin_blas_threads":
        from .threads import pin_blas_threads
        return pin_blas_threads
    raise AttributeError(name)
