"""
Row-stochastic landmark selector: logits, Gumbel-softmax sampling and
hard-argmax deployment to compressed labels.
"""

import logging
import os
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

import numpy as np
from scipy.special import softmax

from heuristics.alt import CompressedLabels
from landmarks.labels import SENTINEL, LabelTable

logger = logging.getLogger(__name__)

INIT_SCHEMES = ("block_sparse", "identity_first_m")

_SELECTOR_MAGIC = b"AACSEL01"
_SELECTOR_HEADER = struct.Struct("<8sIIIIqB")


def split_budget(m: int, directed: bool) -> Tuple[int, int]:
    """(m_fwd, m_bwd): floor(m/2) forward rows and the rest backward when directed"""
    if not directed:
        return m, 0
    m_fwd = m // 2
    return m_fwd, m - m_fwd


@dataclass(eq=False)
class Selector:
    """Logit matrices W_fwd (m_fwd x K0) and, when directed, W_bwd (m_bwd x K0)"""
    w_fwd: np.ndarray
    w_bwd: Optional[np.ndarray] = None

    @property
    def directed(self) -> bool:
        return self.w_bwd is not None

    @property
    def k0(self) -> int:
        return self.w_fwd.shape[1]

    @property
    def m_fwd(self) -> int:
        return self.w_fwd.shape[0]

    @property
    def m_bwd(self) -> int:
        return 0 if self.w_bwd is None else self.w_bwd.shape[0]

    @property
    def m(self) -> int:
        return self.m_fwd + self.m_bwd

    def parameters(self) -> Dict[str, np.ndarray]:
        """Named logit arrays, shared with the optimizer"""
        params = {"w_fwd": self.w_fwd}
        if self.w_bwd is not None:
            params["w_bwd"] = self.w_bwd
        return params

    def soft_rows(self, tau: float = 1.0) -> Dict[str, np.ndarray]:
        """softmax(W / tau) per direction"""
        return {name: softmax(w / tau, axis=1) for name, w in self.parameters().items()}

    def hard_indices(self) -> Tuple[np.ndarray, Optional[np.ndarray]]:
        """Argmax pool index per row (ties to the lowest index)"""
        idx_fwd = np.argmax(self.w_fwd, axis=1)
        idx_bwd = None if self.w_bwd is None else np.argmax(self.w_bwd, axis=1)
        return idx_fwd, idx_bwd

    def unique_ratio(self) -> float:
        """Distinct selected landmarks per direction, summed, over m"""
        idx_fwd, idx_bwd = self.hard_indices()
        distinct = len(np.unique(idx_fwd))
        if idx_bwd is not None:
            distinct += len(np.unique(idx_bwd))
        return distinct / self.m

    def copy(self) -> "Selector":
        return Selector(self.w_fwd.copy(), None if self.w_bwd is None else self.w_bwd.copy())


def _init_block(k0: int, rows: int, scheme: str, boost: float, noise: float,
                rng: np.random.Generator) -> np.ndarray:
    logits = rng.normal(0.0, noise, size=(rows, k0))
    for i in range(rows):
        if scheme == "identity_first_m":
            logits[i, i] += boost
        else:
            lo, hi = (i * k0) // rows, ((i + 1) * k0) // rows
            logits[i, lo:max(hi, lo + 1)] += boost
    return logits


def init_logits(k0: int, m: int, scheme: str = "block_sparse", seed: int = 42, directed: bool = False,
                boost: float = 3.0, noise: float = 0.01) -> Selector:
    """Initial logits: block_sparse boosts a contiguous K0/m block per row, identity_first_m boosts column i"""
    if scheme not in INIT_SCHEMES:
        raise ValueError(f"unknown init scheme {scheme!r}, expected one of {INIT_SCHEMES}")
    m_fwd, m_bwd = split_budget(m, directed)
    if m_fwd < 1 or (directed and m_bwd < 1):
        raise ValueError(f"m={m} leaves an empty direction (directed={directed})")
    if max(m_fwd, m_bwd) > k0:
        raise ValueError(f"m={m} needs more rows per direction than the pool size K0={k0}")

    rng = np.random.default_rng(seed)
    w_fwd = _init_block(k0, m_fwd, scheme, boost, noise, rng)
    w_bwd = _init_block(k0, m_bwd, scheme, boost, noise, rng) if directed else None
    return Selector(w_fwd, w_bwd)


@dataclass
class SelectionSample:
    """Soft Gumbel-softmax rows and their one-hot argmax per direction"""
    soft: Dict[str, np.ndarray]
    hard: Dict[str, np.ndarray]


def one_hot_argmax(rows: np.ndarray) -> np.ndarray:
    hard = np.zeros_like(rows)
    if rows.size:
        hard[np.arange(rows.shape[0]), np.argmax(rows, axis=1)] = 1.0
    return hard


def sample_selection(selector: Selector, tau: float, rng: np.random.Generator, noise: bool = True) -> SelectionSample:
    """Gumbel-softmax rows p = softmax((W + g) / tau) and hard = one-hot(argmax p)"""
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    soft, hard = {}, {}
    tiny = np.finfo(np.float64).tiny
    for name, w in selector.parameters().items():
        if noise:
            u = np.clip(rng.uniform(size=w.shape), tiny, 1.0 - np.finfo(np.float64).eps)
            gumbel = -np.log(-np.log(u))
        else:
            gumbel = 0.0
        soft[name] = softmax((w + gumbel) / tau, axis=1)
        hard[name] = one_hot_argmax(soft[name])
    return SelectionSample(soft, hard)


def softmax_backward(p: np.ndarray, grad_p: np.ndarray) -> np.ndarray:
    """Pull a gradient on softmax outputs back to its inputs (row-wise)"""
    return p * (grad_p - np.sum(grad_p * p, axis=1, keepdims=True))


def deploy(selector: Selector, labels: LabelTable) -> CompressedLabels:
    """Gather the pool rows picked by each row's argmax into per-vertex labels"""
    if selector.k0 != labels.k0:
        raise ValueError(f"selector K0={selector.k0} does not match label pool size {labels.k0}")
    if selector.directed != labels.directed:
        raise ValueError("selector and label table disagree on directedness")
    idx_fwd, idx_bwd = selector.hard_indices()
    y_fwd = np.ascontiguousarray(labels.d_out[idx_fwd].T)
    y_bwd = y_fwd if idx_bwd is None else np.ascontiguousarray(labels.d_in[idx_bwd].T)
    return CompressedLabels(y_fwd, y_bwd, labels.directed, idx_fwd, idx_bwd)


def _compress_rows(a: np.ndarray, table: np.ndarray) -> np.ndarray:
    """y = A d(v) per vertex; a vertex whose support touches SENTINEL keeps SENTINEL"""
    unreachable = table == SENTINEL
    y = a @ np.where(unreachable, 0.0, table)
    touched = (a > 0).astype(np.float64) @ unreachable.astype(np.float64)
    y[touched > 0] = SENTINEL
    return np.ascontiguousarray(y.T)


def compress(labels: LabelTable, a_fwd: np.ndarray, a_bwd: Optional[np.ndarray] = None) -> CompressedLabels:
    """Compressed labels for arbitrary row-stochastic matrices (soft or one-hot)"""
    a_fwd = np.asarray(a_fwd, dtype=np.float64)
    y_fwd = _compress_rows(a_fwd, labels.d_out)
    if not labels.directed:
        return CompressedLabels(y_fwd, y_fwd, False)
    if a_bwd is None:
        raise ValueError("directed compression needs a backward selection matrix")
    y_bwd = _compress_rows(np.asarray(a_bwd, dtype=np.float64), labels.d_in)
    return CompressedLabels(y_fwd, y_bwd, True)


def save_selector(selector: Selector, path: Union[str, os.PathLike], epoch: int = 0, seed: int = 0) -> Path:
    """Header (magic, K0, m_fwd, m_bwd, epoch, seed, directed) then row-major float64 logits"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as handle:
        handle.write(_SELECTOR_HEADER.pack(_SELECTOR_MAGIC, selector.k0, selector.m_fwd, selector.m_bwd,
                                           int(epoch), int(seed), int(selector.directed)))
        for w in selector.parameters().values():
            handle.write(np.ascontiguousarray(w, dtype="<f8").tobytes())
    return path


def load_selector(path: Union[str, os.PathLike]) -> Tuple[Selector, int, int]:
    """Read a checkpoint; returns (selector, epoch, seed)"""
    with open(path, "rb") as handle:
        magic, k0, m_fwd, m_bwd, epoch, seed, directed = _SELECTOR_HEADER.unpack(
            handle.read(_SELECTOR_HEADER.size))
        if magic != _SELECTOR_MAGIC:
            raise ValueError(f"{path} is not a selector checkpoint")
        w_fwd = np.frombuffer(handle.read(8 * m_fwd * k0), dtype="<f8").reshape(m_fwd, k0).astype(np.float64)
        w_bwd = None
        if directed:
            w_bwd = np.frombuffer(handle.read(8 * m_bwd * k0), dtype="<f8").reshape(m_bwd, k0).astype(np.float64)
    return Selector(w_fwd, w_bwd), epoch, seed
