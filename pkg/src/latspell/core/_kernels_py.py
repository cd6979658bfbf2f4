"""Pure numpy kernels, the fallback backend.

Same function-for-function surface as the compiled module in _kernels.pyx.
Forward kernels return fresh arrays; backward kernels accumulate (+=) into the
grad buffers they are handed and return None. All arrays are expected to be
C-contiguous float64, which Value guarantees.
"""

import numpy as np

NAME = "python"


# ---------------------------------------------------------------- forward

def matvec(W, x):
    return W @ x


def affine1(W, b, x):
    return W @ x + b


def affine2(W, b, u, v):
    n = u.shape[0]
    return W[:, :n] @ u + W[:, n:] @ v + b


def sigmoid(x):
    # exp may overflow to inf for very negative x; 1/(1+inf) is a clean 0.0
    with np.errstate(over="ignore"):
        return 1.0 / (1.0 + np.exp(-x))


def tanh(x):
    return np.tanh(x)


def hadamard(a, b):
    return a * b


def add(a, b):
    return a + b


def one_minus(x):
    return 1.0 - x


def negate(x):
    return -x


def concat2(a, b):
    return np.concatenate((a, b))


# --------------------------------------------------------------- backward

def matvec_bwd(W, x, g, gW, gx):
    gW += np.outer(g, x)
    gx += W.T @ g


def affine1_bwd(W, x, g, gW, gb, gx):
    gW += np.outer(g, x)
    gb += g
    gx += W.T @ g


def affine2_bwd(W, u, v, g, gW, gb, gu, gv):
    n = u.shape[0]
    gW[:, :n] += np.outer(g, u)
    gW[:, n:] += np.outer(g, v)
    gb += g
    gu += W[:, :n].T @ g
    gv += W[:, n:].T @ g


def sigmoid_bwd(y, g, gx):
    gx += y * (1.0 - y) * g


def tanh_bwd(y, g, gx):
    gx += (1.0 - y * y) * g


def hadamard_bwd(a, b, g, ga, gb):
    ga += b * g
    gb += a * g


def add_bwd(g, ga, gb):
    ga += g
    gb += g


def one_minus_bwd(g, gx):
    gx -= g


def negate_bwd(g, gx):
    gx -= g


def concat2_bwd(g, ga, gb):
    n = ga.shape[0]
    ga += g[:n]
    gb += g[n:]


# ------------------------------------------------------------- optimizer

def adam_update(p, g, m, v, t, lr, beta1, beta2, eps):
    """One Adam update on flat views, in place. t is the post-increment step."""
    m *= beta1
    m += (1.0 - beta1) * g
    v *= beta2
    v += (1.0 - beta2) * (g * g)
    mhat = m / (1.0 - beta1 ** t)
    vhat = v / (1.0 - beta2 ** t)
    p -= lr * mhat / (np.sqrt(vhat) + eps)


def grad_sqnorm(g):
    return float(np.dot(g, g))


def scale_(g, s):
    g *= s
