"""Fourth-order central finite-difference stencils."""

import numpy as np

# offsets -2, -1, 0, +1, +2
D1_WEIGHTS = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
D2_WEIGHTS = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0
OFFSETS = np.array([-2.0, -1.0, 0.0, 1.0, 2.0])


def derivative(f, x, direction, h):
    """First derivative of ``f`` at ``x`` along ``direction`` (not normalised).

    ``x`` may carry leading batch axes; ``h`` may broadcast against them.
    """
    x = np.asarray(x, dtype=float)
    e = np.asarray(direction, dtype=float)
    h = np.asarray(h, dtype=float)
    hx = h[..., None] if h.ndim else h
    acc = 0.0
    for w, s in ((D1_WEIGHTS[0], -2.0), (D1_WEIGHTS[1], -1.0),
                 (D1_WEIGHTS[3], 1.0), (D1_WEIGHTS[4], 2.0)):
        acc = acc + w * f(x + s * hx * e)
    return acc / h


def gradient(f, x, h):
    """Gradient of a scalar field over n-vectors (last axis); returns shape ``x.shape``."""
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    comps = [derivative(f, x, np.eye(n)[a], h) for a in range(n)]
    return np.stack(comps, axis=-1)


def second_derivative(f, x, h):
    """Second derivative of a scalar function of one real variable."""
    acc = 0.0
    for w, s in zip(D2_WEIGHTS, OFFSETS):
        acc = acc + w * f(x + s * h)
    return acc / (h * h)
