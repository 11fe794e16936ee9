from seq2seq_model.Config.presets import (
    PUBLISHED_PRESETS,
    PUBLISHED_RATIOS,
    TOY_PRESETS,
)

__all__ = [
    "PUBLISHED_PRESETS",
    "PUBLISHED_RATIOS",
    "TOY_PRESETS",
    "build_config",
]


def build_config(preset: str, **overrides):
    """ModelConfig from a named preset plus overrides (e.g. the corpus vocab size)."""
    from seq2seq_model.schemas import ModelConfig
    from utils.errors import ConfigError

    base = PUBLISHED_PRESETS.get(preset) or TOY_PRESETS.get(preset)
    if base is None:
        raise ConfigError(f"unknown preset {preset!r}", field="preset")
    return ModelConfig.from_mapping({**base, **overrides})
