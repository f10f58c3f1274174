"""
Gap-to-full-pool training of the landmark selector.

The loss on a batch of (s, t) queries is

    mean_q (h_T(s, t) - h_A(s, t))_+ + lambda_cond R_ent + lambda_uniq R_uniq + lambda_cov r_cov

where h_T is full-pool ALT (or the exact distance when a reference is given)
and h_A is the compressed heuristic under the sampled selection. Gradients are
derived by hand: the outer max routes to its argmax term (lowest index on
ties, the zero term wins ties on directed graphs) and the positive part passes
gradient only where the gap is positive. In straight-through mode the forward
pass uses the hard rows and the backward pass the soft ones.
"""

import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy.special import softmax

from heuristics.smooth import smooth_min, soft_upper_max
from landmarks.labels import LabelTable
from models.optim import Adam
from models.selector import (INIT_SCHEMES, Selector, init_logits, sample_selection, save_selector,
                             softmax_backward)
from utils.io import write_commented_csv

logger = logging.getLogger(__name__)


@dataclass
class TrainConfig:
    """Selector training hyperparameters"""
    learning_rate: float = 1e-3
    epochs: int = 200
    batch_size: int = 256
    queries_per_epoch: int = 1024
    lambda_cond: float = 0.01
    lambda_uniq: float = 0.0
    lambda_cov: float = 0.0
    cov_beta: float = 10.0
    tau_start: float = 1.0
    tau_end: float = 0.1
    init: str = "block_sparse"
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 42
    checkpoints: Tuple[int, ...] = ()
    straight_through: bool = True
    boost: float = 3.0

    def __post_init__(self):
        if self.init not in INIT_SCHEMES:
            raise ValueError(f"unknown init scheme {self.init!r}, expected one of {INIT_SCHEMES}")
        if not self.tau_start > self.tau_end > 0:
            raise ValueError(f"tau schedule must decrease strictly to a positive value, "
                             f"got {self.tau_start} -> {self.tau_end}")
        for name in ("lambda_cond", "lambda_uniq", "lambda_cov"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.epochs < 0 or self.batch_size < 1 or self.queries_per_epoch < 1:
            raise ValueError("epochs must be >= 0, batch_size and queries_per_epoch >= 1")
        self.checkpoints = tuple(sorted(set(int(e) for e in self.checkpoints)))

    @classmethod
    def from_config(cls, settings: Dict[str, Any], **overrides) -> "TrainConfig":
        """Build from Config.get_train_config() plus explicit overrides"""
        known = {k: v for k, v in settings.items() if k in cls.__dataclass_fields__}
        known.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**known)

    def tau_at(self, epoch: int) -> float:
        """tau_start * (tau_end / tau_start) ** (epoch / epochs)"""
        if self.epochs == 0:
            return self.tau_start
        return self.tau_start * (self.tau_end / self.tau_start) ** (epoch / self.epochs)


@dataclass
class TrainReport:
    """Per-epoch training trace and checkpoints"""
    losses: List[float] = field(default_factory=list)
    unique_ratios: List[float] = field(default_factory=list)
    taus: List[float] = field(default_factory=list)
    checkpoints: Dict[int, Selector] = field(default_factory=dict)
    diverged: bool = False
    optimizer: Dict[str, float] = field(default_factory=dict)
    selected_fwd: Optional[np.ndarray] = None
    selected_bwd: Optional[np.ndarray] = None

    @property
    def final_unique_ratio(self) -> Optional[float]:
        return self.unique_ratios[-1] if self.unique_ratios else None

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "epoch": np.arange(1, len(self.losses) + 1),
            "loss": self.losses,
            "unique_ratio": self.unique_ratios,
            "tau": self.taus,
        })

    def write_csv(self, path: Union[str, os.PathLike], header_lines: Sequence[str] = ()) -> Path:
        lines = list(header_lines)
        lines += [f"# {k}={v}" for k, v in self.optimizer.items()]
        lines.append(f"# diverged={self.diverged}")
        return write_commented_csv(self.to_frame(), path, lines)


def _hard_max_terms(c_rows: np.ndarray, q_count: int, floor_zero: bool) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Value, winning row and sign of max over rows; floor_zero adds a zero term that wins ties"""
    if c_rows.shape[0] == 0:
        return np.zeros(q_count), np.full(q_count, -1), np.zeros(q_count)
    if floor_zero:
        winner = np.argmax(c_rows, axis=0)
        value = c_rows[winner, np.arange(q_count)]
        sign = np.where(value > 0, 1.0, 0.0)
        return np.maximum(value, 0.0), winner, sign
    magnitude = np.abs(c_rows)
    winner = np.argmax(magnitude, axis=0)
    value = c_rows[winner, np.arange(q_count)]
    return np.abs(value), winner, np.sign(value)


def _full_pool_values(labels: LabelTable, sources: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Full-pool ALT on each query"""
    if not labels.directed:
        return np.abs(labels.d_out[:, sources] - labels.d_out[:, targets]).max(axis=0)
    fwd = (labels.d_out[:, targets] - labels.d_out[:, sources]).max(axis=0)
    bwd = (labels.d_in[:, sources] - labels.d_in[:, targets]).max(axis=0)
    return np.maximum(np.maximum(fwd, bwd), 0.0)


def _gap_loss(rows: Dict[str, np.ndarray], labels: LabelTable, sources: np.ndarray, targets: np.ndarray,
              reference: Optional[np.ndarray]) -> Tuple[float, Dict[str, np.ndarray]]:
    """Mean positive gap and its gradient with respect to the selection rows"""
    q_count = len(sources)
    d_out = np.asarray(labels.d_out, dtype=np.float64)
    target_h = _full_pool_values(labels, sources, targets) if reference is None else np.asarray(reference, dtype=np.float64)

    if not labels.directed:
        delta = d_out[:, sources] - d_out[:, targets]
        c = rows["w_fwd"] @ delta
        h_a, winner, sign = _hard_max_terms(c, q_count, floor_zero=False)
        deltas = {"w_fwd": delta}
        row_owner = {"w_fwd": (winner, sign)}
    else:
        d_in = np.asarray(labels.d_in, dtype=np.float64)
        delta_f = d_out[:, targets] - d_out[:, sources]
        delta_b = d_in[:, sources] - d_in[:, targets]
        c_f = rows["w_fwd"] @ delta_f
        c_b = rows["w_bwd"] @ delta_b
        stacked = np.vstack([c_f, c_b])
        h_a, winner, sign = _hard_max_terms(stacked, q_count, floor_zero=True)
        m_fwd = c_f.shape[0]
        is_fwd = winner < m_fwd
        deltas = {"w_fwd": delta_f, "w_bwd": delta_b}
        row_owner = {
            "w_fwd": (np.where(is_fwd, winner, -1), np.where(is_fwd, sign, 0.0)),
            "w_bwd": (np.where(is_fwd, -1, winner - m_fwd), np.where(is_fwd, 0.0, sign)),
        }

    gap = target_h - h_a
    active = gap > 0
    loss = float(np.mean(np.where(active, gap, 0.0)))

    grads = {}
    for name, delta in deltas.items():
        winner_rows, signs = row_owner[name]
        # dL/dh_A = -1/Q on active queries; dh_A/dA[i*] = sign * delta
        coeff = np.zeros((rows[name].shape[0], q_count))
        use = active & (winner_rows >= 0)
        coeff[winner_rows[use], np.flatnonzero(use)] = -signs[use] / q_count
        grads[name] = coeff @ delta.T
    return loss, grads


def entropy_penalty(selector: Selector) -> Tuple[float, Dict[str, np.ndarray]]:
    """Mean row entropy of softmax(W) and its gradient in W"""
    probs = selector.soft_rows(1.0)
    n_rows = sum(p.shape[0] for p in probs.values())
    total, grads = 0.0, {}
    for name, p in probs.items():
        log_p = np.log(np.clip(p, np.finfo(np.float64).tiny, None))
        row_entropy = -np.sum(p * log_p, axis=1)
        total += float(row_entropy.sum())
        grads[name] = -p * (log_p + row_entropy[:, None]) / n_rows
    return total / n_rows, grads


def uniqueness_penalty(selector: Selector) -> Tuple[float, Dict[str, np.ndarray]]:
    """Sum over row pairs within a direction of <p_i, p_j>, gradient in W"""
    probs = selector.soft_rows(1.0)
    total, grads = 0.0, {}
    for name, p in probs.items():
        column_sum = p.sum(axis=0)
        total += 0.5 * float(column_sum @ column_sum - np.sum(p * p))
        grads[name] = softmax_backward(p, column_sum[None, :] - p)
    return total, grads


def _symmetrized_finite(labels: LabelTable) -> np.ndarray:
    dsym = np.asarray(labels.symmetrized(), dtype=np.float64)
    return dsym[:, labels.finite_vertices()]


def smooth_covering_radius(labels: LabelTable, selector: Selector, beta: float = 10.0,
                           with_grad: bool = False):
    """Soft max over vertices of soft min over rows of the expected landmark distance"""
    probs = selector.soft_rows(1.0)
    names = list(probs)
    stacked = np.vstack([probs[n] for n in names])
    dsym = _symmetrized_finite(labels)
    if dsym.shape[1] == 0:
        raise ValueError("no vertex has finite labels")
    expected = stacked @ dsym
    per_vertex = smooth_min(expected, beta, axis=0)
    value = float(soft_upper_max(per_vertex, beta))
    if not with_grad:
        return value

    a = softmax(beta * per_vertex)
    b = softmax(-beta * expected, axis=0)
    grad_rows = (b * a[None, :]) @ dsym.T
    grads, start = {}, 0
    for name in names:
        count = probs[name].shape[0]
        grads[name] = softmax_backward(probs[name], grad_rows[start:start + count])
        start += count
    return value, grads


def loss_and_grad(selector: Selector, labels: LabelTable, queries: np.ndarray, tau: float,
                  config: TrainConfig, rng: Optional[np.random.Generator] = None,
                  reference: Optional[np.ndarray] = None, noise: bool = True) -> Tuple[float, Dict[str, np.ndarray]]:
    """Batch loss and its analytic gradient with respect to the logits"""
    queries = np.asarray(queries, dtype=np.int64).reshape(-1, 2)
    if len(queries) == 0:
        raise ValueError("loss_and_grad needs a non-empty query batch")
    rng = rng if rng is not None else np.random.default_rng(config.seed)
    sample = sample_selection(selector, tau, rng, noise=noise)
    forward_rows = sample.hard if config.straight_through else sample.soft

    loss, row_grads = _gap_loss(forward_rows, labels, queries[:, 0], queries[:, 1], reference)
    grads = {name: softmax_backward(sample.soft[name], g) / tau for name, g in row_grads.items()}

    penalties = (
        (config.lambda_cond, entropy_penalty),
        (config.lambda_uniq, uniqueness_penalty),
        (config.lambda_cov, lambda s: smooth_covering_radius(labels, s, config.cov_beta, with_grad=True)),
    )
    for weight, penalty in penalties:
        if weight == 0:
            continue
        value, penalty_grads = penalty(selector)
        loss += weight * value
        for name, g in penalty_grads.items():
            grads[name] = grads[name] + weight * g
    return loss, grads


def sample_training_queries(vertices: np.ndarray, count: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform (s, t) pairs with s != t over the given vertices"""
    n = len(vertices)
    if n < 2:
        raise ValueError("training needs at least two vertices with finite labels")
    idx_s = rng.integers(0, n, size=count)
    idx_t = (idx_s + rng.integers(1, n, size=count)) % n
    return np.stack([vertices[idx_s], vertices[idx_t]], axis=1)


def train(labels: LabelTable, m: int, config: TrainConfig,
          training_queries: Optional[np.ndarray] = None,
          checkpoint_dir: Optional[Union[str, os.PathLike]] = None) -> Tuple[Selector, TrainReport]:
    """Adam on the gap loss with exponential tau annealing; queries resampled per epoch unless given"""
    selector = init_logits(labels.k0, m, config.init, config.seed, labels.directed, config.boost)
    optimizer = Adam(config.learning_rate, config.beta1, config.beta2, config.eps)
    report = TrainReport(optimizer=optimizer.settings())
    rng = np.random.default_rng(config.seed)
    vertices = np.flatnonzero(labels.finite_vertices())

    logger.info(f"Training selector: K0={labels.k0}, m={m}, init={config.init}, epochs={config.epochs}")
    for epoch in range(config.epochs):
        tau = config.tau_at(epoch)
        if training_queries is None:
            epoch_queries = sample_training_queries(vertices, config.queries_per_epoch,
                                                    np.random.default_rng([config.seed, epoch]))
        else:
            epoch_queries = np.asarray(training_queries, dtype=np.int64).reshape(-1, 2)

        batch_losses = []
        for start in range(0, len(epoch_queries), config.batch_size):
            batch = epoch_queries[start:start + config.batch_size]
            loss, grads = loss_and_grad(selector, labels, batch, tau, config, rng)
            if not np.isfinite(loss) or not all(np.all(np.isfinite(g)) for g in grads.values()):
                report.diverged = True
                break
            last_good = selector.copy()
            optimizer.step(selector.parameters(), grads)
            if not all(np.all(np.isfinite(w)) for w in selector.parameters().values()):
                selector = last_good
                report.diverged = True
                break
            batch_losses.append(loss)

        if report.diverged:
            logger.warning(f"Selector training diverged at epoch {epoch + 1}; keeping last finite logits")
            break

        epoch_loss = float(np.mean(batch_losses))
        report.losses.append(epoch_loss)
        report.unique_ratios.append(selector.unique_ratio())
        report.taus.append(tau)
        logger.debug(f"epoch {epoch + 1}: loss={epoch_loss:.6f} tau={tau:.4f} "
                     f"unique_ratio={report.unique_ratios[-1]:.3f}")

        if epoch + 1 in config.checkpoints:
            report.checkpoints[epoch + 1] = selector.copy()
            if checkpoint_dir is not None:
                save_selector(selector, Path(checkpoint_dir) / f"selector-epoch{epoch + 1}.bin",
                              epoch + 1, config.seed)

    report.selected_fwd, report.selected_bwd = selector.hard_indices()
    if report.losses:
        logger.info(f"Training finished: final loss {report.losses[-1]:.6f}, "
                    f"unique ratio {report.final_unique_ratio:.3f}")
    return selector, report
