"""Toy supervised trainer used to drive mixture rebalancing at desk scale.

The model is a small dense net (tanh hidden layers, linear output) trained
with plain SGD to predict an example's original domain label from its
embedding. Losses are summed over the batch; SGD applies the mean gradient.

The piece that matters for rebalancing: for the last linear layer with
input activations a and per-example output-gradient rows ds, the
per-example weight gradient is the outer product a_i (x) ds_i, so one
backward pass yields every example's final-layer gradient and their sum
equals the batch gradient exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from gradmix.balance import (
    GradientAccumulator,
    check_simplex,
    gram,
    multiplicative_weights_update,
    randb_update,
    stratified_weights,
)
from gradmix.corpus import Corpus
from gradmix.regroup import Partition, assign_to_nearest
from gradmix.seeding import substream

STRATEGIES = ("stratified", "multiplicative_weights", "randb")
LOSS_KINDS = ("cross_entropy", "squared_error")


class DivergenceError(RuntimeError):
    """Training produced a non-finite loss or parameter."""

    def __init__(self, message: str, round_index: int | None = None):
        super().__init__(message)
        self.round_index = round_index


@dataclass(eq=False)
class ToyModel:
    """Dense net: tanh after every layer except the last (linear) one."""

    weights: list[np.ndarray]  # layer i maps (d_i, d_{i+1})
    biases: list[np.ndarray]
    loss_kind: str = "cross_entropy"

    def __post_init__(self):
        if self.loss_kind not in LOSS_KINDS:
            raise ValueError(f"loss_kind must be one of {LOSS_KINDS}")
        if not self.weights or len(self.weights) != len(self.biases):
            raise ValueError("weights and biases must be non-empty and aligned")

    @property
    def num_params(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))


@dataclass(eq=False)
class Gradients:
    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def scaled(self, factor: float) -> "Gradients":
        return Gradients(
            weights=[w * factor for w in self.weights],
            biases=[b * factor for b in self.biases],
        )


@dataclass(eq=False)
class ForwardCache:
    layer_inputs: list[np.ndarray]  # input to each linear layer; [0] is X


@dataclass(eq=False)
class BackwardPass:
    loss: float
    grads: Gradients
    output_grads: np.ndarray  # per-example d(loss)/d(logits), (B, d_out)
    cache: ForwardCache


def init_model(layer_dims, rng: np.random.Generator,
               loss_kind: str = "cross_entropy") -> ToyModel:
    """Gaussian init with scale 1/sqrt(fan_in); zero biases."""
    dims = list(layer_dims)
    if len(dims) < 2:
        raise ValueError("need at least input and output dimensions")
    weights, biases = [], []
    for d_in, d_out in zip(dims[:-1], dims[1:]):
        weights.append(rng.normal(0.0, 1.0 / np.sqrt(d_in), size=(d_in, d_out)))
        biases.append(np.zeros(d_out))
    return ToyModel(weights=weights, biases=biases, loss_kind=loss_kind)


def forward(model: ToyModel, X: np.ndarray):
    """Returns (logits, cache of every linear layer's input)."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("X must be (batch, d_in)")
    layer_inputs = [X]
    h = X
    last = len(model.weights) - 1
    for i, (W, b) in enumerate(zip(model.weights, model.biases)):
        z = h @ W + b
        if i < last:
            h = np.tanh(z)
            layer_inputs.append(h)
        else:
            h = z
    return h, ForwardCache(layer_inputs=layer_inputs)


def _loss_and_output_grads(model: ToyModel, logits: np.ndarray, targets):
    if model.loss_kind == "cross_entropy":
        y = np.asarray(targets)
        if y.ndim != 1 or y.shape[0] != logits.shape[0]:
            raise ValueError("cross_entropy targets must be (batch,) class indices")
        zmax = logits.max(axis=1, keepdims=True)
        lse = zmax[:, 0] + np.log(np.exp(logits - zmax).sum(axis=1))
        per_example = lse - logits[np.arange(len(y)), y]
        probs = np.exp(logits - lse[:, None])
        ds = probs
        ds[np.arange(len(y)), y] -= 1.0
        return per_example, ds
    y = np.asarray(targets, dtype=np.float64)
    if y.shape != logits.shape:
        raise ValueError("squared_error targets must match the logits' shape")
    diff = logits - y
    return np.einsum("ij,ij->i", diff, diff), 2.0 * diff


def loss_and_backward(model: ToyModel, X: np.ndarray, targets) -> BackwardPass:
    """Summed loss over the batch plus the full parameter gradient.

    Also returns the per-example output-gradient rows and the forward cache
    so callers can form per-example final-layer gradients without a second
    pass. Raises DivergenceError on a non-finite loss.
    """
    logits, cache = forward(model, X)
    per_example, ds = _loss_and_output_grads(model, logits, targets)
    loss = float(per_example.sum())
    if not np.isfinite(loss):
        raise DivergenceError("non-finite training loss")
    gw: list = [None] * len(model.weights)
    gb: list = [None] * len(model.weights)
    delta = ds
    for i in reversed(range(len(model.weights))):
        a = cache.layer_inputs[i]
        gw[i] = a.T @ delta
        gb[i] = delta.sum(axis=0)
        if i > 0:
            # layer_inputs[i] is tanh(z_{i-1}), so tanh' = 1 - a^2
            delta = (delta @ model.weights[i].T) * (1.0 - cache.layer_inputs[i] ** 2)
    return BackwardPass(
        loss=loss, grads=Gradients(weights=gw, biases=gb),
        output_grads=ds, cache=cache,
    )


def per_example_losses(model: ToyModel, X: np.ndarray, targets) -> np.ndarray:
    logits, _ = forward(model, X)
    per_example, _ = _loss_and_output_grads(model, logits, targets)
    return per_example


def per_example_final_layer_grads(final_inputs: np.ndarray,
                                  output_grads: np.ndarray) -> np.ndarray:
    """Per-example gradients of the last layer's weights, shape (B, d_in, d_out).

    Row i is outer(final_inputs[i], output_grads[i]); summing over the batch
    reproduces the batch weight gradient exactly.
    """
    a = np.asarray(final_inputs, dtype=np.float64)
    ds = np.asarray(output_grads, dtype=np.float64)
    if a.ndim != 2 or ds.ndim != 2 or a.shape[0] != ds.shape[0]:
        raise ValueError("final_inputs and output_grads must be (B, d) arrays")
    return np.einsum("bi,bo->bio", a, ds)


def sgd_step(model: ToyModel, grads: Gradients, learning_rate: float) -> ToyModel:
    """In-place parameter update theta -= learning_rate * grad."""
    for W, gW in zip(model.weights, grads.weights):
        W -= learning_rate * gW
    for b, gb in zip(model.biases, grads.biases):
        b -= learning_rate * gb
    for arr in (*model.weights, *model.biases):
        if not np.all(np.isfinite(arr)):
            raise DivergenceError("non-finite parameter after SGD step")
    return model


def get_parameter_vector(model: ToyModel) -> np.ndarray:
    """Flat view (copy) of all parameters: W0, b0, W1, b1, ..."""
    parts = []
    for W, b in zip(model.weights, model.biases):
        parts.append(W.ravel())
        parts.append(b)
    return np.concatenate(parts)


def set_parameter_vector(model: ToyModel, theta: np.ndarray) -> None:
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape != (model.num_params,):
        raise ValueError(f"theta must have shape ({model.num_params},)")
    pos = 0
    for W, b in zip(model.weights, model.biases):
        W[...] = theta[pos : pos + W.size].reshape(W.shape)
        pos += W.size
        b[...] = theta[pos : pos + b.size]
        pos += b.size


def flatten_gradients(grads: Gradients) -> np.ndarray:
    parts = []
    for W, b in zip(grads.weights, grads.biases):
        parts.append(W.ravel())
        parts.append(b)
    return np.concatenate(parts)


def sample_batch(cluster_sets, p, batch_size: int, rng: np.random.Generator):
    """Draw a batch: cluster per slot ~ p, then uniform within the cluster.

    ``cluster_sets`` is a sequence of index arrays, one per cluster. Returns
    (example_indices, cluster_tags). A cluster given positive weight must be
    non-empty. batch_size 0 yields empty arrays.
    """
    p = check_simplex(p)
    if len(cluster_sets) != p.size:
        raise ValueError("cluster_sets and p disagree on the number of domains")
    sizes = np.array([len(s) for s in cluster_sets])
    if np.any((p > 0) & (sizes == 0)):
        bad = int(np.flatnonzero((p > 0) & (sizes == 0))[0])
        raise ValueError(f"cluster {bad} has positive weight but no examples")
    if batch_size < 0:
        raise ValueError("batch_size must be >= 0")
    if batch_size == 0:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    tags = rng.choice(p.size, size=batch_size, p=p).astype(np.int64)
    picks = np.empty(batch_size, dtype=np.int64)
    for j, c in enumerate(tags):
        members = cluster_sets[c]
        picks[j] = members[int(rng.integers(len(members)))]
    return picks, tags


@dataclass(frozen=True)
class TrainConfig:
    rounds: int
    steps_per_round: int
    batch_size: int
    learning_rate: float
    lam: float = 3.0
    seed: int = 0
    strategy: str = "randb"
    hidden_units: int = 16
    eta: float = 1.0  # optional extra multiplier inside the softmax argument
    loss_kind: str = "cross_entropy"

    def __post_init__(self):
        if self.loss_kind not in LOSS_KINDS:
            raise ValueError(f"loss_kind must be one of {LOSS_KINDS}")
        if self.rounds < 1:
            raise ValueError("rounds must be >= 1")
        if self.steps_per_round < 0 or self.batch_size < 0:
            raise ValueError("steps_per_round and batch_size must be >= 0")
        if self.learning_rate <= 0 or not np.isfinite(self.learning_rate):
            raise ValueError("learning_rate must be positive and finite")
        if self.lam <= 0 or not np.isfinite(self.lam):
            raise ValueError("lam must be positive and finite")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"strategy must be one of {STRATEGIES}")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        if self.hidden_units < 1:
            raise ValueError("hidden_units must be >= 1")


@dataclass(eq=False)
class RoundLog:
    round: int
    weights_used: np.ndarray  # sampling weights during this round
    gram: np.ndarray
    train_loss: float  # mean per-example loss over the round's steps
    eval_loss_per_cluster: np.ndarray
    eval_loss_weighted: float


def _cluster_index_sets(partition: Partition, ids) -> list[np.ndarray]:
    assignment = partition.assignment
    missing = [i for i in ids if i not in assignment]
    if missing:
        raise ValueError(f"partition does not assign train example {missing[0]!r}")
    labels = np.array([assignment[i] for i in ids], dtype=np.int64)
    return [np.flatnonzero(labels == c) for c in range(partition.k)]


def run_training(corpus: Corpus, partition: Partition, config: TrainConfig,
                 eval_weights, model: ToyModel | None = None):
    """Train for config.rounds rounds, rebalancing sampling weights per round.

    Each round runs config.steps_per_round SGD steps, accumulating summed
    per-domain final-layer gradients (taken at each step's pre-update
    parameters). At the round's end the Gram matrix of mean gradients
    produces the next round's sampling weights according to the strategy;
    a degenerate update (||G p|| = 0) keeps the current weights. Returns
    (model, list of RoundLog). Raises DivergenceError tagged with the round
    index if the loss or parameters go non-finite.
    """
    p_eval = check_simplex(eval_weights)
    m = partition.k
    if p_eval.size != m:
        raise ValueError(f"eval_weights has {p_eval.size} entries for {m} clusters")

    train_exs = corpus.train_examples
    cluster_sets = _cluster_index_sets(partition, [ex.id for ex in train_exs])
    X_train = corpus.embedding_matrix("train")
    class_index = {label: i for i, label in enumerate(corpus.domain_vocabulary)}
    y_train = np.array([class_index[ex.domain_label] for ex in train_exs])

    eval_exs = corpus.eval_examples
    X_eval = corpus.embedding_matrix("eval")
    y_eval = np.array([class_index[ex.domain_label] for ex in eval_exs])

    loss_kind = config.loss_kind if model is None else model.loss_kind
    if loss_kind == "squared_error":
        eye = np.eye(len(corpus.domain_vocabulary))
        y_train = eye[y_train]  # one-hot targets
        y_eval = eye[y_eval]
    assignment = partition.assignment
    known = [assignment.get(ex.id, -1) for ex in eval_exs]
    eval_clusters = np.array(known, dtype=np.int64)
    todo = eval_clusters == -1
    if todo.any():
        eval_clusters[todo] = assign_to_nearest(partition.centroids, X_eval[todo])

    if model is None:
        dims = [corpus.d_emb, config.hidden_units, len(corpus.domain_vocabulary)]
        model = init_model(dims, substream(config.seed, "init"),
                           loss_kind=loss_kind)
    final_dim = model.weights[-1].size
    rng = substream(config.seed, "sampling")

    p_t = stratified_weights(m)
    mw_state = stratified_weights(m)
    logs: list[RoundLog] = []
    for t in range(config.rounds):
        acc = GradientAccumulator(m, final_dim)
        step_losses = []
        try:
            for _ in range(config.steps_per_round):
                idx, tags = sample_batch(cluster_sets, p_t, config.batch_size, rng)
                if len(idx) == 0:
                    continue
                bp = loss_and_backward(model, X_train[idx], y_train[idx])
                per_ex = per_example_final_layer_grads(
                    bp.cache.layer_inputs[-1], bp.output_grads
                )
                for c in np.unique(tags):
                    sel = tags == c
                    acc.add(int(c), per_ex[sel].sum(axis=0), int(sel.sum()))
                sgd_step(model, bp.grads.scaled(1.0 / len(idx)), config.learning_rate)
                step_losses.append(bp.loss / len(idx))
        except DivergenceError as e:
            raise DivergenceError(f"diverged in round {t}: {e}", round_index=t) from e

        G = gram(acc)
        eval_losses = per_example_losses(model, X_eval, y_eval)
        per_cluster = np.zeros(m)
        for c in range(m):
            sel = eval_clusters == c
            if sel.any():
                per_cluster[c] = eval_losses[sel].mean()
        weighted = float(p_eval @ per_cluster)
        train_loss = float(np.mean(step_losses)) if step_losses else float("nan")
        logs.append(
            RoundLog(
                round=t,
                weights_used=p_t.copy(),
                gram=G,
                train_loss=train_loss,
                eval_loss_per_cluster=per_cluster,
                eval_loss_weighted=weighted,
            )
        )

        if config.strategy == "stratified":
            p_next = stratified_weights(m)
        elif config.strategy == "randb":
            update = randb_update(G, p_eval, lam=config.lam, eta=config.eta)
            p_next = p_t if update is None else update
        else:
            mw_state = multiplicative_weights_update(
                mw_state, G, p_eval, eta=config.learning_rate, mu=1.0 / config.lam
            )
            p_next = mw_state
        p_t = p_next
    return model, logs
