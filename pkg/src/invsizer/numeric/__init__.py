"""Dense tensors with reverse-mode gradients, Adam, and a gradient checker."""
from .gradcheck import grad_check, relative_discrepancy
from .optim import AdamState, adam_step
from .tensor import (Tensor, add, as_tensor, dropout, l1_loss, layer_norm, matmul, mse_loss,
                     no_grad, relu, softmax, softmax_rows)

__all__ = ["AdamState", "Tensor", "adam_step", "add", "as_tensor", "dropout", "grad_check",
           "l1_loss", "layer_norm", "matmul", "mse_loss", "no_grad", "relative_discrepancy",
           "relu", "softmax", "softmax_rows"]
