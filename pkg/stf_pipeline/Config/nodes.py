from bench_harness.Config import MEASURE_CONFIG, WORKLOAD_CONFIG

# Optimisation; the effective batch is reached by gradient accumulation
TRAIN_CONFIG = {
    "effective_batch": 64,
    "micro_batch": 8,
    "learning_rate": 1e-4,
    "weight_decay": 0.01,
    "epochs": 3,
    "patience": 2,  # Validation evaluations without improvement before stopping
}

# Re-fine-tuning of pruned variants
FINETUNE_CONFIG = {
    "enabled": True,
    "same_hyperparams": True,  # Reuse the baseline hyperparameters after pruning
}

EVALUATION_CONFIG = {
    "batch_size": 16,
    "max_new_tokens": None,  # None: twice the longest reference summary, plus EOS
}

# Latency of every grid variant; measured one variant at a time after all training is done,
# under the bench_harness measurement protocol and workload shape
BENCHMARK_CONFIG = {
    "enabled": True,
    **MEASURE_CONFIG,
    **WORKLOAD_CONFIG,  # Workload sequences are drawn from the test split
    "stragglers": False,  # One long sequence per batch, the rest stop at new_tokens // 8
}

# Smoke-test measurements; numbers are not comparable with the protocol above
QUICK_BENCHMARK_CONFIG = {
    "batch_sizes": [1],
    "runs": 3,
    "warmup": 1,
    "size": 4,
    "input_len": 128,
    "new_tokens": 32,
}
