"""Brute-force reference implementations used to cross-check the fast paths.

These deliberately enumerate indices one at a time; with small integer
data both routes are exact in float64, so comparisons can demand
bitwise equality.
"""

import numpy as np


def matricize_oracle(X, mode):
    """Index-loop unfolding: column index accumulates the remaining modes
    in increasing order, lowest mode fastest."""
    dims = X.shape
    rest = [k for k in range(X.ndim) if k != mode]
    ncols = 1
    for k in rest:
        ncols *= dims[k]
    M = np.zeros((dims[mode], ncols))
    for idx in np.ndindex(*dims):
        col = 0
        stride = 1
        for k in rest:
            col += idx[k] * stride
            stride *= dims[k]
        M[idx[mode], col] = X[idx]
    return M


def mode_multiply_oracle(X, B, mode):
    """Index-loop mode product."""
    out_shape = list(X.shape)
    out_shape[mode] = B.shape[0]
    out = np.zeros(out_shape)
    for idx in np.ndindex(*out.shape):
        acc = 0.0
        for t in range(X.shape[mode]):
            src = list(idx)
            src[mode] = t
            acc += B[idx[mode], t] * X[tuple(src)]
        out[idx] = acc
    return out


def kron_oracle(A, B):
    """Index-loop Kronecker product."""
    out = np.zeros((A.shape[0] * B.shape[0], A.shape[1] * B.shape[1]))
    for i in range(A.shape[0]):
        for j in range(A.shape[1]):
            for k in range(B.shape[0]):
                for l in range(B.shape[1]):
                    out[i * B.shape[0] + k, j * B.shape[1] + l] = A[i, j] * B[k, l]
    return out


def integer_tensor(gen, shape, low=-4, high=5):
    """Random small-integer tensor; float64 arithmetic on it is exact."""
    return gen.integers(low, high, size=shape).astype(np.float64)
