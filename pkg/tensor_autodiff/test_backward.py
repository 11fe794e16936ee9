import numpy as np
import pytest

from tensor_autodiff import ops
from tensor_autodiff.optim import OptimizerState, optimizer_step
from tensor_autodiff.schemas import OptimizerConfig
from tensor_autodiff.tensor import Tape, Tensor, backward
from utils.errors import OptimizerError, ShapeError, TapeError


def test_sum_gradient_is_ones():
    x = Tensor([1.0, 2.0, 3.0, 4.0], requires_grad=True)
    with Tape() as tape:
        loss = ops.sum(x)
    backward(tape, loss)
    assert x.grad.tolist() == [1.0, 1.0, 1.0, 1.0]


def test_square_gradient_is_twice_input():
    x = Tensor([1.0, 2.0], requires_grad=True)
    with Tape() as tape:
        loss = ops.sum(ops.mul(x, x))
    backward(tape, loss)
    assert x.grad.tolist() == [2.0, 4.0]


def test_non_scalar_loss_is_rejected():
    x = Tensor([1.0, 2.0], requires_grad=True)
    with Tape() as tape:
        out = ops.scale(x, 2.0)
    with pytest.raises(ShapeError):
        backward(tape, out)


def test_loss_off_tape_is_rejected():
    loss = ops.sum(Tensor([1.0, 2.0]))
    with pytest.raises(TapeError):
        backward(Tape(), loss)


def test_disconnected_parameter_gets_zero_gradient():
    used = Tensor([1.0, 2.0], requires_grad=True)
    unused = Tensor(np.ones((2, 2)), requires_grad=True)
    with Tape() as tape:
        loss = ops.sum(used)
    backward(tape, loss, params=[used, unused])
    assert np.array_equal(unused.grad, np.zeros((2, 2)))


def test_nodes_without_grad_inputs_are_not_recorded():
    a = Tensor([1.0])
    with Tape() as tape:
        ops.scale(a, 3.0)
    assert len(tape) == 0


def test_gradients_accumulate_across_backward_calls():
    x = Tensor([1.0, -1.0], requires_grad=True)
    for _ in range(2):
        with Tape() as tape:
            loss = ops.sum(ops.scale(x, 3.0))
        backward(tape, loss)
    assert x.grad.tolist() == [6.0, 6.0]


def test_shared_subexpression_visited_once():
    x = Tensor([2.0], requires_grad=True)
    with Tape() as tape:
        y = ops.mul(x, x)
        loss = ops.sum(ops.add(y, y))
    backward(tape, loss)
    assert x.grad.tolist() == [8.0]


def test_zero_gradient_without_decay_leaves_parameters():
    p = Tensor(np.array([0.5, -1.5]), requires_grad=True)
    params = {"p": p}
    state = OptimizerState.create(params, OptimizerConfig(weight_decay=0.0))
    optimizer_step(params, {"p": np.zeros(2)}, state)
    assert p.data.tolist() == [0.5, -1.5]


def test_first_adam_step_moves_by_learning_rate():
    p = Tensor(np.array([1.0]), requires_grad=True)
    params = {"w": p}
    state = OptimizerState.create(params, OptimizerConfig(learning_rate=1e-4, weight_decay=0.0))
    p.grad = np.array([1.0])
    optimizer_step(params, None, state)
    delta = p.data[0] - 1.0
    assert delta < 0
    assert delta == pytest.approx(-1e-4 * (1 - 1e-8), rel=1e-9)
    assert state.step == 1


def test_identical_parameters_stay_identical():
    a = Tensor(np.array([0.3, 0.7]), requires_grad=True)
    b = Tensor(np.array([0.3, 0.7]), requires_grad=True)
    params = {"a": a, "b": b}
    state = OptimizerState.create(params, OptimizerConfig(learning_rate=1e-2, weight_decay=0.05))
    rng = np.random.default_rng(0)
    for _ in range(25):
        g = rng.normal(size=2)
        optimizer_step(params, {"a": g, "b": g.copy()}, state)
    assert a.data.tobytes() == b.data.tobytes()
    assert state.step == 25


def test_decoupled_weight_decay_shrinks_parameter():
    p = Tensor(np.array([2.0]), requires_grad=True)
    params = {"p": p}
    state = OptimizerState.create(params, OptimizerConfig(learning_rate=0.1, weight_decay=0.1))
    optimizer_step(params, {"p": np.zeros(1)}, state)
    assert p.data[0] == pytest.approx(2.0 - 0.1 * 0.1 * 2.0)


def test_nan_gradient_aborts_with_parameter_name():
    params = {"good": Tensor([1.0]), "bad.weight": Tensor([1.0])}
    state = OptimizerState.create(params)
    with pytest.raises(OptimizerError) as err:
        optimizer_step(params, {"good": np.array([0.1]), "bad.weight": np.array([np.nan])}, state)
    assert err.value.parameter == "bad.weight"
    assert params["good"].data[0] == 1.0
    assert state.step == 0
