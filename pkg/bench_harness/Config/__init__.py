from bench_harness.Config.nodes import (
    COST_MODEL_CONFIG,
    MEASURE_CONFIG,
    WORKLOAD_CONFIG,
)

__all__ = [
    "MEASURE_CONFIG",
    "WORKLOAD_CONFIG",
    "COST_MODEL_CONFIG",
]
