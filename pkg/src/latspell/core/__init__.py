from .backend import BACKEND
from .value import Value, backward, zero_grads

__all__ = ["BACKEND", "Value", "backward", "zero_grads"]
