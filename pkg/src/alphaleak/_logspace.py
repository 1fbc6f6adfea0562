"""Log-domain primitives shared by the measure and capacity code."""

import numpy as np


def safe_log(x):
    """Elementwise natural log with ``log 0 = -inf`` and no warnings."""
    x = np.asarray(x, dtype=float)
    out = np.full(x.shape, -np.inf)
    np.log(x, out=out, where=x > 0)
    return out


def logsumexp(a, axis=None):
    """Max-shifted log-sum-exp that tolerates all ``-inf`` slices.

    A slice made only of ``-inf`` returns ``-inf`` (an empty sum) instead
    of ``nan``.
    """
    a = np.asarray(a, dtype=float)
    m = np.max(a, axis=axis, keepdims=True)
    m_safe = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        s = np.log(np.sum(np.exp(a - m_safe), axis=axis, keepdims=True)) + m_safe
    if axis is None:
        return float(s.reshape(()))
    return np.squeeze(s, axis=axis)


def xlogx(p):
    """``p log p`` with ``0 log 0 = 0``."""
    p = np.asarray(p, dtype=float)
    lp = safe_log(p)
    lp[p <= 0] = 0.0
    return p * lp
