PUBLISHED_PRESETS = {
    "flan-t5-small": {
        "d_model": 512,
        "n_heads": 6,
        "d_kv": 64,
        "d_ff": 1024,
        "n_enc_layers": 8,
        "n_dec_layers": 8,
        "vocab_size": 32128,
        "tie_embeddings": False,
        "ff_activation": "gated-gelu",
    },
    "flan-t5-base": {
        "d_model": 768,
        "n_heads": 12,
        "d_kv": 64,
        "d_ff": 2048,
        "n_enc_layers": 12,
        "n_dec_layers": 12,
        "vocab_size": 32128,
        "tie_embeddings": False,
        "ff_activation": "gated-gelu",
    },
    "flan-t5-large": {
        "d_model": 1024,
        "n_heads": 16,
        "d_kv": 64,
        "d_ff": 2816,
        "n_enc_layers": 24,
        "n_dec_layers": 24,
        "vocab_size": 32128,
        "tie_embeddings": False,
        "ff_activation": "gated-gelu",
    },
}

# Encoder:decoder ratios released with those checkpoints
PUBLISHED_RATIOS = {
    "flan-t5-small": 0.849,
    "flan-t5-base": 0.795,
    "flan-t5-large": 0.772,
}

# Desk-scale stand-ins, 6+6 layers like the pruning grid; vocab comes from the corpus
TOY_PRESETS = {
    "toy-small": {"d_model": 32, "n_heads": 2, "d_kv": 16, "d_ff": 64, "n_enc_layers": 6, "n_dec_layers": 6, "rel_pos_buckets": 16, "rel_pos_max_distance": 64},
    "toy-base": {"d_model": 48, "n_heads": 3, "d_kv": 16, "d_ff": 96, "n_enc_layers": 6, "n_dec_layers": 6, "rel_pos_buckets": 16, "rel_pos_max_distance": 64},
    "toy-large": {"d_model": 64, "n_heads": 4, "d_kv": 16, "d_ff": 128, "n_enc_layers": 6, "n_dec_layers": 6, "rel_pos_buckets": 16, "rel_pos_max_distance": 64},
    "toy-latency": {"d_model": 128, "n_heads": 4, "d_kv": 32, "d_ff": 512, "n_enc_layers": 6, "n_dec_layers": 6},
}
