"""Node components for the pruning grid and scale sweep workflows.

Import-light to avoid pulling heavy deps unless explicitly requested.
"""

__all__ = [
    "prepare_baseline_node",
    "dispatch_variants",
    "refit_variant_node",
    "benchmark_variants_node",
    "assemble_records_node",
    "check_scales_node",
    "dispatch_scales",
    "train_scale_node",
    "benchmark_scales_node",
    "summarize_sweep_node",
]


def __getattr__(name):
    if name == "prepare_baseline_node":
        from .prepare_baseline import prepare_baseline_node
        return prepare_baseline_node
    if name == "dispatch_variants":
        from .dispatch_variants import dispatch_variants
        return dispatch_variants
    if name == "refit_variant_node":
        from .refit_variant import refit_variant_node
        return refit_variant_node
    if name == "benchmark_variants_node":
        from .benchmark_variants import benchmark_variants_node
        return benchmark_variants_node
    if name == "assemble_records_node":
        from .assemble_records import assemble_records_node
        return assemble_records_node
    if name in ("check_scales_node", "dispatch_scales", "train_scale_node", "benchmark_scales_node", "summarize_sweep_node"):
        from . import scale_sweep
        return getattr(scale_sweep, name)
    raise AttributeError(name)
