import numpy as np
from scipy.special import logsumexp


def _check(values, temperature: float, label: str) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise ValueError("smooth max/min of an empty vector")
    if not temperature > 0:
        raise ValueError(f"{label} must be positive, got {temperature}")
    return values


def smooth_max(values, T: float, axis: int = -1):
    """(1/T) logsumexp(T x) - log(m)/T; lies in [max(x) - log(m)/T, max(x)]"""
    values = _check(values, T, "T")
    m = values.shape[axis] if values.ndim else 1
    return logsumexp(T * values, axis=axis) / T - np.log(m) / T


def soft_upper_max(values, beta: float, axis: int = -1):
    """(1/beta) logsumexp(beta x); lies in [max(x), max(x) + log(m)/beta]"""
    values = _check(values, beta, "beta")
    return logsumexp(beta * values, axis=axis) / beta


def smooth_min(values, beta: float, axis: int = -1):
    """-(1/beta) logsumexp(-beta x); lies in [min(x) - log(m)/beta, min(x)]"""
    values = _check(values, beta, "beta")
    return -logsumexp(-beta * values, axis=axis) / beta
