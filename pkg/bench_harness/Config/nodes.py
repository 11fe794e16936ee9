# Measurement protocol
MEASURE_CONFIG = {
    "runs": 7,  # Timed runs per report
    "warmup": 1,  # Untimed runs discarded first
    "batch_sizes": [1, 8, 16],
}

WORKLOAD_CONFIG = {
    "size": 16,  # Sequences per workload
    "input_len": 512,
    "new_tokens": 128,
}

COST_MODEL_CONFIG = {
    "min_points": 4,  # Distinct (l_enc, l_dec) shapes per batch size
}
