from pydantic import BaseModel, Field


class OptimizerConfig(BaseModel):
    """Adam with decoupled weight decay; learning rate stays constant across steps."""

    learning_rate: float = Field(default=1e-4, gt=0, description="Constant learning rate")
    weight_decay: float = Field(default=0.01, ge=0, description="Decoupled weight decay coefficient")
    beta1: float = Field(default=0.9, ge=0, lt=1)
    beta2: float = Field(default=0.999, ge=0, lt=1)
    epsilon: float = Field(default=1e-8, gt=0)
