"""Optimum prediction from per-period best solutions.

The best few solutions of each change period form a time series. A small
two-layer network reads the best positions of the last five periods and
predicts where the optimum moves next; noisy copies of that prediction are
injected into the population after a change.

Architecture: a shared 4-unit first layer is applied to each of the five
input positions independently (ReLU), the five hidden vectors are
concatenated into a 20-wide representation, and a linear output layer maps it
back to d coordinates. Training is plain mini-batch gradient descent on mean
squared error, with inputs and targets normalised to [-1, 1].
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import Evaluation, Individual, clamp_to_bounds, feasibility_key

HIDDEN = 4


@dataclass(frozen=True)
class PredictorConfig:
    k: int = 3
    history: int = 5
    min_batch: int = 20
    max_new_per_time: int = 32
    n_p: int = 5
    noise_sigma: float = 0.01
    epochs: int = 4
    batch_size: int = 4
    learning_rate: float = 0.01


@dataclass
class TrainingPair:
    """Input window of `history` positions (oldest first) and the next best."""

    inputs: np.ndarray  # (history, d)
    target: np.ndarray  # (d,)


class TimeBestStore:
    """k feasibility-best distinct positions observed per change period."""

    def __init__(self, k: int):
        self.k = k
        self._entries: dict[int, list[tuple[np.ndarray, Evaluation]]] = {}

    def record(self, t: int, candidates: list[Individual]) -> None:
        """Merge candidates into period t, keeping the k best distinct ones."""
        pool = list(self._entries.get(t, []))
        for ind in candidates:
            if ind.ev is None:
                continue
            pool.append((ind.x, ind.ev))
        pool.sort(key=lambda pe: feasibility_key(pe[1]))
        kept: list[tuple[np.ndarray, Evaluation]] = []
        for x, ev in pool:
            if any(np.array_equal(x, kx) for kx, _ in kept):
                continue
            kept.append((np.array(x, dtype=float, copy=True), ev))
            if len(kept) == self.k:
                break
        self._entries[t] = kept

    def times(self) -> list[int]:
        return sorted(self._entries)

    def entries(self, t: int) -> list[np.ndarray]:
        return [x for x, _ in self._entries.get(t, [])]

    def rank1(self, t: int) -> np.ndarray:
        return self._entries[t][0][0]

    def has_window(self, target_t: int, history: int) -> bool:
        """True when target_t and the `history` times before it are stored."""
        if target_t not in self._entries:
            return False
        return all(target_t - j in self._entries for j in range(1, history + 1))

    def __len__(self) -> int:
        return len(self._entries)


def record_time_best(store: TimeBestStore, t: int, candidates: list[Individual]) -> TimeBestStore:
    store.record(t, candidates)
    return store


def _window_pairs(store: TimeBestStore, target_t: int, history: int,
                  max_new: int, rng: np.random.Generator) -> list[TrainingPair]:
    """Pairs for one window: inputs from t-history..t-1, target rank-1 of t.

    The candidate pool is the cartesian product of the stored entries per
    input slot; a uniform subset of size min(max_new, pool) is drawn without
    replacement.
    """
    slot_entries = [store.entries(target_t - history + j) for j in range(history)]
    radices = [len(e) for e in slot_entries]
    pool = 1
    for r in radices:
        pool *= r
    n_draw = min(max_new, pool)
    picked = rng.choice(pool, size=n_draw, replace=False)
    target = np.array(store.rank1(target_t), copy=True)
    pairs = []
    for code in picked:
        idx = []
        c = int(code)
        for r in reversed(radices):
            idx.append(c % r)
            c //= r
        idx.reverse()
        inputs = np.stack([slot_entries[j][idx[j]] for j in range(history)])
        pairs.append(TrainingPair(inputs, target))
    return pairs


def build_samples(store: TimeBestStore, max_new_per_time: int,
                  rng: np.random.Generator, history: int = 5) -> list[TrainingPair]:
    """Training pairs for every complete window in the store."""
    pairs: list[TrainingPair] = []
    for t in store.times():
        if store.has_window(t, history):
            pairs.extend(_window_pairs(store, t, history, max_new_per_time, rng))
    return pairs


class Network:
    """Two-layer prediction net; all math in normalised coordinates."""

    def __init__(self, d: int, history: int = 5):
        self.d = d
        self.history = history
        self.W1 = np.zeros((HIDDEN, d))
        self.b1 = np.zeros(HIDDEN)
        self.W2 = np.zeros((d, HIDDEN * history))
        self.b2 = np.zeros(d)

    def init_weights(self, rng: np.random.Generator) -> None:
        """Uniform init in +-sqrt(1/fan_in) per layer."""
        s1 = np.sqrt(1.0 / self.d)
        s2 = np.sqrt(1.0 / (HIDDEN * self.history))
        self.W1 = rng.uniform(-s1, s1, size=self.W1.shape)
        self.b1 = rng.uniform(-s1, s1, size=self.b1.shape)
        self.W2 = rng.uniform(-s2, s2, size=self.W2.shape)
        self.b2 = rng.uniform(-s2, s2, size=self.b2.shape)

    def forward(self, X: np.ndarray) -> np.ndarray:
        """X: (history, d) -> predicted position (d,)."""
        pre = X @ self.W1.T + self.b1            # (history, HIDDEN)
        H = np.maximum(pre, 0.0).reshape(-1)     # (HIDDEN*history,)
        return self.W2 @ H + self.b2

    def _forward_batch(self, Xb: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        pre = Xb @ self.W1.T + self.b1                      # (B, history, HIDDEN)
        H = np.maximum(pre, 0.0).reshape(Xb.shape[0], -1)   # (B, HIDDEN*history)
        out = H @ self.W2.T + self.b2                       # (B, d)
        return pre, H, out

    def loss_and_grads(self, Xb: np.ndarray, Y: np.ndarray):
        """Mean squared error over the batch and analytic parameter gradients."""
        B = Xb.shape[0]
        pre, H, out = self._forward_batch(Xb)
        resid = out - Y
        loss = float(np.mean(resid * resid))
        d_out = 2.0 * resid / (B * self.d)                  # (B, d)
        gW2 = d_out.T @ H
        gb2 = d_out.sum(axis=0)
        dH = (d_out @ self.W2).reshape(pre.shape)           # (B, history, HIDDEN)
        d_pre = dH * (pre > 0.0)
        gW1 = np.einsum("bth,btd->hd", d_pre, Xb)
        gb1 = d_pre.sum(axis=(0, 1))
        return loss, (gW1, gb1, gW2, gb2)

    def apply_grads(self, grads, lr: float) -> None:
        gW1, gb1, gW2, gb2 = grads
        self.W1 -= lr * gW1
        self.b1 -= lr * gb1
        self.W2 -= lr * gW2
        self.b2 -= lr * gb2

    def save_weights(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(f"{self.d},{self.history},{HIDDEN}\n")
            for arr in (self.W1, self.b1, self.W2, self.b2):
                for v in np.asarray(arr).reshape(-1):
                    fh.write(f"{v:.17g}\n")

    @classmethod
    def load_weights(cls, path) -> "Network":
        with open(path) as fh:
            lines = fh.read().split()
        d, history, hidden = (int(v) for v in lines[0].split(","))
        if hidden != HIDDEN:
            raise ValueError(f"unsupported hidden width {hidden}")
        net = cls(d, history)
        vals = [float(v) for v in lines[1:]]
        shapes = [net.W1.shape, net.b1.shape, net.W2.shape, net.b2.shape]
        arrays = []
        pos = 0
        for shape in shapes:
            n = int(np.prod(shape))
            arrays.append(np.array(vals[pos:pos + n]).reshape(shape))
            pos += n
        net.W1, net.b1, net.W2, net.b2 = arrays
        return net


def train(net: Network, pairs: list[TrainingPair], epochs: int, batch_size: int,
          rng: np.random.Generator, learning_rate: float = 0.01) -> list[float]:
    """Mini-batch gradient descent on MSE; returns per-epoch mean loss.

    Pairs are consumed as-is (the caller is responsible for normalisation and
    for any minimum-sample gating).
    """
    if not pairs:
        raise ValueError("train called with no pairs")
    Xb = np.stack([p.inputs for p in pairs])
    Y = np.stack([p.target for p in pairs])
    n = len(pairs)
    history = []
    for _ in range(epochs):
        order = rng.permutation(n)
        losses = []
        for start in range(0, n, batch_size):
            sel = order[start:start + batch_size]
            loss, grads = net.loss_and_grads(Xb[sel], Y[sel])
            net.apply_grads(grads, learning_rate)
            losses.append(loss)
        history.append(float(np.mean(losses)))
    return history


def predict_neighbors(net: Network, store: TimeBestStore, n_p: int, sigma: float,
                      rng: np.random.Generator, lower: float, upper: float,
                      history: int = 5) -> list[np.ndarray]:
    """n_p candidate positions around the predicted next optimum.

    The first returned position is the raw (clamped) prediction; the rest add
    per-coordinate Gaussian noise scaled by sigma * (upper - lower).
    """
    times = store.times()
    if len(times) < history:
        raise ValueError("store does not cover the prediction window")
    lasts = times[-history:]
    X = np.stack([store.rank1(t) for t in lasts])
    mid = 0.5 * (upper + lower)
    half = 0.5 * (upper - lower)
    base = net.forward((X - mid) / half) * half + mid
    out = [clamp_to_bounds(base, lower, upper)]
    scale = sigma * (upper - lower)
    for _ in range(n_p - 1):
        noisy = base + rng.normal(0.0, scale, size=base.shape)
        out.append(clamp_to_bounds(noisy, lower, upper))
    return out


class OptimumPredictor:
    """Run-level wrapper: data collection, incremental training, prediction.

    Owns the store, the network and the sample buffer. Training pairs are
    kept in normalised coordinates and retained for the whole run; each
    training call continues from the current weights.
    """

    def __init__(self, d: int, cfg: PredictorConfig, lower: float, upper: float,
                 rng: np.random.Generator):
        self.cfg = cfg
        self.lower = lower
        self.upper = upper
        self._mid = 0.5 * (upper + lower)
        self._half = 0.5 * (upper - lower)
        self.store = TimeBestStore(cfg.k)
        self.net = Network(d, cfg.history)
        self.net.init_weights(rng)
        self.rng = rng
        self.pairs: list[TrainingPair] = []
        self._built_targets: set[int] = set()
        self.trained = False

    def observe(self, t: int, population: list[Individual]) -> None:
        self.store.record(t, population)

    def ingest_new_samples(self) -> int:
        """Build pairs for windows completed since the last call."""
        added = 0
        for t in self.store.times():
            if t in self._built_targets:
                continue
            if not self.store.has_window(t, self.cfg.history):
                continue
            raw = _window_pairs(self.store, t, self.cfg.history,
                                self.cfg.max_new_per_time, self.rng)
            for p in raw:
                self.pairs.append(TrainingPair(
                    (p.inputs - self._mid) / self._half,
                    (p.target - self._mid) / self._half))
            self._built_targets.add(t)
            added += len(raw)
        return added

    @property
    def ready(self) -> bool:
        return len(self.pairs) >= self.cfg.min_batch

    def fit(self) -> list[float]:
        if not self.ready:
            raise RuntimeError("not enough samples collected to train")
        hist = train(self.net, self.pairs, self.cfg.epochs, self.cfg.batch_size,
                     self.rng, self.cfg.learning_rate)
        self.trained = True
        return hist

    def predict_neighbors(self) -> list[np.ndarray]:
        if not self.trained:
            raise RuntimeError("predictor not trained yet")
        return predict_neighbors(self.net, self.store, self.cfg.n_p,
                                 self.cfg.noise_sigma, self.rng,
                                 self.lower, self.upper, self.cfg.history)
