from stf_pipeline.Config.nodes import (
    BENCHMARK_CONFIG,
    EVALUATION_CONFIG,
    FINETUNE_CONFIG,
    QUICK_BENCHMARK_CONFIG,
    TRAIN_CONFIG,
)

__all__ = [
    "TRAIN_CONFIG",
    "FINETUNE_CONFIG",
    "EVALUATION_CONFIG",
    "BENCHMARK_CONFIG",
    "QUICK_BENCHMARK_CONFIG",
]
