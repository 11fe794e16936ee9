"""T5-style encoder-decoder with independently sized stacks.

Import-light: heavy submodules load on first attribute access.
"""

__all__ = [
    "ModelConfig",
    "ModelWeights",
    "StackPart",
    "PAD_ID",
    "EOS_ID",
    "BOS_ID",
    "UNK_ID",
    "init_model",
    "encode",
    "decode_step",
    "decode_full",
    "forward",
    "DecoderCache",
    "count_params",
    "count_params_for_config",
    "param_shapes",
    "stack_ratio",
    "relative_position_bucket",
    "save_checkpoint",
    "load_checkpoint",
]


def __getattr__(name):
    if name in ("ModelConfig", "ModelWeights", "StackPart", "PAD_ID", "EOS_ID", "BOS_ID", "UNK_ID"):
        from seq2seq_model import schemas
        return getattr(schemas, name)
    if name == "init_model":
        from seq2seq_model.init import init_model
        return init_model
    if name in ("encode", "decode_step", "decode_full", "forward", "DecoderCache"):
        from seq2seq_model import model
        return getattr(model, name)
    if name in ("count_params", "count_params_for_config", "param_shapes", "stack_ratio"):
        from seq2seq_model import layout
        return getattr(layout, name)
    if name == "relative_position_bucket":
        from seq2seq_model.position import relative_position_bucket
        return relative_position_bucket
    if name in ("save_checkpoint", "load_checkpoint"):
        from seq2seq_model import checkpoint
        return getattr(checkpoint, name)
    raise AttributeError(name)
