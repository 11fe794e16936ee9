__all__ = [
    "GenerationConfig",
    "GenerationTrace",
    "GenerationResult",
    "generate",
    "generate_uncached",
    "generate_in_batches",
    "mean_genl",
    "strip_generated",
]


def __getattr__(name):
    if name in ("GenerationConfig", "GenerationTrace", "GenerationResult"):
        from generation_engine import schemas
        return getattr(schemas, name)
    if name in ("generate", "generate_uncached", "generate_in_batches", "mean_genl", "strip_generated"):
        from generation_engine import engine
        return getattr(engine, name)
    raise AttributeError(name)
