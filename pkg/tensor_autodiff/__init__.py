"""Dense float64 tensors with tape-based reverse-mode differentiation and AdamW."""

__all__ = [
    "Tensor",
    "Tape",
    "no_grad",
    "backward",
    "ops",
    "OptimizerConfig",
    "OptimizerState",
    "optimizer_step",
    "gradcheck",
]


def __getattr__(name):
    if name in ("Tensor", "Tape", "no_grad", "backward"):
        from .tensor import Tensor, Tape, no_grad, backward
        return {"Tensor": Tensor, "Tape": Tape, "no_grad": no_grad, "backward": backward}[name]
    if name == "ops":
        import importlib
        return importlib.import_module(".ops", __name__)
    if name == "OptimizerConfig":
        from .schemas import OptimizerConfig
        return OptimizerConfig
    if name in ("OptimizerState", "optimizer_step"):
        from .optim import OptimizerState, optimizer_step
        return {"OptimizerState": OptimizerState, "optimizer_step": optimizer_step}[name]
    if name == "gradcheck":
        from .numeric import gradcheck
        return gradcheck
    raise AttributeError(name)
