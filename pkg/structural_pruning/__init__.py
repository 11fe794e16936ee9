__all__ = [
    "PruneSpec",
    "RetentionStrategy",
    "select_layers",
    "retained_layers",
    "prune",
    "enumerate_grid",
    "layer_digest",
]


def __getattr__(name):
    if name in ("PruneSpec", "RetentionStrategy"):
        from structural_pruning.schemas import PruneSpec, RetentionStrategy
        return {"PruneSpec": PruneSpec, "RetentionStrategy": RetentionStrategy}[name]
    if name in ("select_layers", "retained_layers", "prune", "enumerate_grid", "layer_digest"):
        from structural_pruning import pruning
        return getattr(pruning, name)
    raise AttributeError(name)
