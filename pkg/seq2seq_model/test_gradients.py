import numpy as np

from seq2seq_model.init import init_model
from seq2seq_model.model import encode, forward, shift_right
from seq2seq_model.schemas import BOS_ID, EOS_ID, PAD_ID, ModelConfig, ModelWeights
from tensor_autodiff import ops
from tensor_autodiff.numeric import gradcheck
from tensor_autodiff.tensor import Tensor
from utils.rng import make_rng

GRAD_TOL = 1e-4


def as_function(config: ModelConfig, names, loss_fn):
    def fn(*tensors):
        return loss_fn(ModelWeights(config=config, tensors=dict(zip(names, tensors))))
    return fn


def test_one_layer_encoder_gradients(tiny_config):
    weights = init_model(tiny_config, seed=11)
    names = [n for n in weights.names() if n.startswith("encoder.") or n == "shared.embedding"]
    rng = make_rng(12)
    ids = rng.integers(4, tiny_config.vocab_size, size=(2, 5))
    mask = np.ones((2, 5), dtype=bool)
    mask[1, 3:] = False
    projection = Tensor(rng.normal(size=(2, 5, tiny_config.d_model)))

    def loss(w):
        return ops.sum(ops.mul(encode(w, ids, mask), projection))

    tensors = [weights[n] for n in names]
    assert gradcheck(as_function(tiny_config, names, loss), tensors) < GRAD_TOL


def test_full_model_cross_entropy_gradients(tiny_config):
    config = ModelConfig(**{**tiny_config.model_dump(), "tie_embeddings": False, "ff_activation": "gated-gelu"})
    weights = init_model(config, seed=13)
    names = weights.names()
    src = np.array([[5, 6, 7, 8], [9, 10, 11, PAD_ID]])
    src_mask = src != PAD_ID
    dec_in, targets = shift_right([[6, 7], [12]], BOS_ID, EOS_ID, PAD_ID)

    def loss(w):
        return ops.cross_entropy(forward(w, src, src_mask, dec_in), targets)

    assert gradcheck(as_function(config, names, loss), [weights[n] for n in names]) < GRAD_TOL


def test_tied_head_gradients(tiny_config):
    weights = init_model(tiny_config, seed=14)
    names = weights.names()
    src = np.array([[4, 5, 6]])
    dec_in, targets = shift_right([[7, 8]], BOS_ID, EOS_ID, PAD_ID)

    def loss(w):
        return ops.cross_entropy(forward(w, src, None, dec_in), targets)

    assert gradcheck(as_function(tiny_config, names, loss), [weights[n] for n in names]) < GRAD_TOL
