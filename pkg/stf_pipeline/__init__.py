"""Shrink-then-fine-tune experiments: train, prune, re-fine-tune, evaluate, benchmark, record."""

__all__ = [
    "Hyperparams",
    "ExperimentRecord",
    "ScaleConfig",
    "train",
    "token_accuracy",
    "evaluate_model",
    "shrink_then_finetune",
    "run_grid",
    "run_scale_sweep",
    "run_experiment",
    "load_experiment_config",
]


def __getattr__(name):
    if name in ("Hyperparams", "ExperimentRecord", "ScaleConfig"):
        from stf_pipeline import schemas
        return getattr(schemas, name)
    if name in ("train", "token_accuracy"):
        from stf_pipeline import training
        return getattr(training, name)
    if name == "evaluate_model":
        from stf_pipeline.evaluation import evaluate_model
        return evaluate_model
    if name in ("shrink_then_finetune", "run_grid", "run_scale_sweep", "run_experiment"):
        from stf_pipeline import agent
        return getattr(agent, name)
    if name == "load_experiment_config":
        from stf_pipeline.experiment_config import load_experiment_config
        return load_experiment_config
    raise AttributeError(name)
