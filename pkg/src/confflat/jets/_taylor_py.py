"""Pure numpy kernels for truncated order-3 multivariate Taylor arithmetic.

A jet in n variables is the tuple (v, g, h, t) with v a float, g of shape
(n,), h of shape (n, n) and t of shape (n, n, n); h and t are kept fully
symmetric.  `order` truncates the computation: entries above the order are
left at zero.
"""
import numpy as np

BACKEND = "python"


def mul(order, v1, g1, h1, t1, v2, g2, h2, t2):
    v = v1 * v2
    g = h = t = None
    if order >= 1:
        g = g1 * v2 + v1 * g2
    if order >= 2:
        h = h1 * v2 + v1 * h2 + np.outer(g1, g2) + np.outer(g2, g1)
    if order >= 3:
        t = t1 * v2 + v1 * t2
        t = t + h1[:, :, None] * g2[None, None, :]
        t = t + h1[:, None, :] * g2[None, :, None]
        t = t + h1[None, :, :] * g2[:, None, None]
        t = t + h2[:, :, None] * g1[None, None, :]
        t = t + h2[:, None, :] * g1[None, :, None]
        t = t + h2[None, :, :] * g1[:, None, None]
    return v, g, h, t


def compose(order, v, g, h, t, c0, c1, c2, c3):
    """Univariate chain rule: jet of f(u) from the jet of u and the Taylor
    coefficients c_k = f^(k)(u.v)."""
    rv = c0
    rg = rh = rt = None
    if order >= 1:
        rg = c1 * g
    if order >= 2:
        rh = c1 * h + c2 * np.outer(g, g)
    if order >= 3:
        rt = c1 * t
        rt = rt + c2 * (
            g[:, None, None] * h[None, :, :]
            + g[None, :, None] * h[:, None, :]
            + g[None, None, :] * h[:, :, None]
        )
        rt = rt + c3 * (g[:, None, None] * g[None, :, None] * g[None, None, :])
    return rv, rg, rh, rt
