"""Restricted Boltzmann Machines and the RBM-pretrained deep autoencoder.

Basis images are cut into patch vectors, a stack of binary-binary RBMs is
pretrained greedily with contrastive divergence (real inputs in [0,1] are
treated as Bernoulli probabilities), the stack is unrolled into a symmetric
untied autoencoder with a logistic activation on every layer, and the whole
network is fine-tuned by backpropagation on mean squared reconstruction
error. The bottleneck activations are the latent codes the bitstream
quantizes and entropy-codes.

Energy of a visible/hidden pair:

    E(v, h) = -sum_ij w[i, j] h_i v_j - sum_j b_j v_j - sum_i c_i h_i

with w of shape (hidden, visible). Brute-force enumeration of the Gibbs
distribution (small nets only) serves as the oracle for the conditional
formulas p(h_i=1|v) = logistic(w v + c)_i and p(v_j=1|h) = logistic(w^T h + b)_j.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import ModelError

ENUMERATION_LIMIT = 20  # brute force walks 2^(n+m) states

DEFAULT_LAYER_SIZES = (128, 256, 64, 32)


def sigmoid(x) -> np.ndarray:
    """Numerically stable logistic function."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


@dataclass(frozen=True)
class RbmParams:
    """Weights (hidden, visible) and the two bias vectors."""

    w: np.ndarray
    b: np.ndarray  # visible biases, length n
    c: np.ndarray  # hidden biases, length m

    def __post_init__(self):
        w = np.asarray(self.w, dtype=np.float64)
        b = np.asarray(self.b, dtype=np.float64)
        c = np.asarray(self.c, dtype=np.float64)
        if w.ndim != 2 or b.ndim != 1 or c.ndim != 1:
            raise ValueError("w must be a matrix, b and c vectors")
        if w.shape != (c.size, b.size):
            raise ValueError(
                f"weight shape {w.shape} inconsistent with biases ({c.size}, {b.size})"
            )
        for arr in (w, b, c):
            if not np.all(np.isfinite(arr)):
                raise ValueError("RBM parameters must be finite")
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)

    @property
    def visible_units(self) -> int:
        return self.b.size

    @property
    def hidden_units(self) -> int:
        return self.c.size


def init_rbm(n_visible: int, n_hidden: int, rng, scale: float = 0.01) -> RbmParams:
    """Small-normal weights, zero biases."""
    w = scale * rng.standard_normal((n_hidden, n_visible))
    return RbmParams(w=w, b=np.zeros(n_visible), c=np.zeros(n_hidden))


def rbm_energy(params: RbmParams, v, h) -> float:
    v = np.asarray(v, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    if v.shape != (params.visible_units,) or h.shape != (params.hidden_units,):
        raise ValueError(
            f"expected v of length {params.visible_units} and h of length "
            f"{params.hidden_units}, got {v.shape} and {h.shape}"
        )
    return float(-h @ params.w @ v - params.b @ v - params.c @ h)


def _enumerate_states(count: int) -> np.ndarray:
    """All binary vectors of the given length, ordered by integer value."""
    values = np.arange(1 << count, dtype=np.uint32)
    shifts = np.arange(count - 1, -1, -1, dtype=np.uint32)
    return ((values[:, None] >> shifts[None, :]) & 1).astype(np.float64)


def _state_energies(params: RbmParams) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    n, m = params.visible_units, params.hidden_units
    if n + m > ENUMERATION_LIMIT:
        raise ValueError(
            f"enumeration over {n}+{m} units exceeds the {ENUMERATION_LIMIT} limit"
        )
    vs = _enumerate_states(n)
    hs = _enumerate_states(m)
    # energies[a, b] = E(vs[a], hs[b])
    energies = -(vs @ params.w.T @ hs.T) - (vs @ params.b)[:, None] - (hs @ params.c)[None, :]
    return vs, hs, energies


def partition_function_bruteforce(params: RbmParams) -> float:
    """Z by exhaustive enumeration; the normalization oracle for small nets."""
    _, _, energies = _state_energies(params)
    return float(np.exp(-energies).sum())


def joint_probabilities_bruteforce(params: RbmParams):
    """(visible states, hidden states, probability table p[a, b])."""
    vs, hs, energies = _state_energies(params)
    weights = np.exp(-energies)
    return vs, hs, weights / weights.sum()


def hidden_probabilities(params: RbmParams, visible: np.ndarray) -> np.ndarray:
    """p(h_i = 1 | v) for a batch of visible rows."""
    return sigmoid(visible @ params.w.T + params.c)


def visible_probabilities(params: RbmParams, hidden: np.ndarray) -> np.ndarray:
    """p(v_j = 1 | h) for a batch of hidden rows."""
    return sigmoid(hidden @ params.w + params.b)


def conditional_probabilities(params: RbmParams, side: str, clamped) -> np.ndarray:
    """Factorized conditional of one layer given the other, clamped.

    side "hidden" yields p(h|v) with clamped = v; side "visible" yields
    p(v|h) with clamped = h. Clamped values may be mean-field reals in [0,1].
    """
    clamped = np.asarray(clamped, dtype=np.float64)
    if side == "hidden":
        if clamped.shape != (params.visible_units,):
            raise ValueError(f"expected visible vector of length {params.visible_units}")
        return hidden_probabilities(params, clamped[None, :])[0]
    if side == "visible":
        if clamped.shape != (params.hidden_units,):
            raise ValueError(f"expected hidden vector of length {params.hidden_units}")
        return visible_probabilities(params, clamped[None, :])[0]
    raise ValueError(f"side must be 'hidden' or 'visible', got {side!r}")


@dataclass
class CdState:
    """Momentum velocities threaded through successive cd_update calls."""

    vel_w: np.ndarray
    vel_b: np.ndarray
    vel_c: np.ndarray

    @classmethod
    def zeros(cls, params: RbmParams) -> "CdState":
        return cls(
            vel_w=np.zeros_like(params.w),
            vel_b=np.zeros_like(params.b),
            vel_c=np.zeros_like(params.c),
        )


def cd_update(
    params: RbmParams,
    batch: np.ndarray,
    k: int = 1,
    lr: float = 0.05,
    momentum: float = 0.5,
    rng=None,
    state: CdState | None = None,
) -> tuple[RbmParams, CdState]:
    """One contrastive-divergence parameter update on a mini-batch.

    Positive statistics come from the data and p(h|data); the negative phase
    runs k alternating Gibbs steps where hidden units are sampled binary and
    visible units keep their probabilities (the final hidden term is also a
    probability). Momentum velocities live in the returned state; pass it
    back in to continue a training run.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    batch = np.asarray(batch, dtype=np.float64)
    if batch.ndim != 2 or batch.shape[1] != params.visible_units:
        raise ValueError(
            f"batch must be (count, {params.visible_units}), got {batch.shape}"
        )
    if batch.shape[0] == 0:
        raise ValueError("batch is empty")
    if rng is None:
        rng = np.random.default_rng(0)
    if state is None:
        state = CdState.zeros(params)
    count = batch.shape[0]

    ph0 = hidden_probabilities(params, batch)
    visible = batch
    ph = ph0
    for _ in range(k):
        hidden = (rng.random(ph.shape) < ph).astype(np.float64)
        visible = visible_probabilities(params, hidden)
        ph = hidden_probabilities(params, visible)

    grad_w = (ph0.T @ batch - ph.T @ visible) / count
    grad_b = (batch - visible).mean(axis=0)
    grad_c = (ph0 - ph).mean(axis=0)

    vel_w = momentum * state.vel_w + lr * grad_w
    vel_b = momentum * state.vel_b + lr * grad_b
    vel_c = momentum * state.vel_c + lr * grad_c
    updated = RbmParams(w=params.w + vel_w, b=params.b + vel_b, c=params.c + vel_c)
    return updated, CdState(vel_w=vel_w, vel_b=vel_b, vel_c=vel_c)


def reconstruction_cross_entropy(params: RbmParams, batch: np.ndarray) -> float:
    """Mean-field reconstruction cross-entropy, the pretraining progress gauge."""
    batch = np.asarray(batch, dtype=np.float64)
    ph = hidden_probabilities(params, batch)
    pv = np.clip(visible_probabilities(params, ph), 1e-12, 1.0 - 1e-12)
    ce = -(batch * np.log(pv) + (1.0 - batch) * np.log(1.0 - pv))
    return float(ce.sum(axis=1).mean())


@dataclass(frozen=True)
class DbnConfig:
    layer_sizes: tuple[int, ...] = DEFAULT_LAYER_SIZES
    patch: int = 16
    stride: int = 32
    variance_threshold: float = 1e-4
    epochs: int = 20
    learning_rate: float = 0.05
    momentum: float = 0.5
    batch_size: int = 64
    cd_steps: int = 1
    seed: int = 11
    allow_any_sizes: bool = False  # lifts the F2 dominance rule below

    def __post_init__(self):
        sizes = tuple(int(x) for x in self.layer_sizes)
        object.__setattr__(self, "layer_sizes", sizes)
        if len(sizes) != 4 or any(s < 1 for s in sizes):
            raise ValueError(f"layer_sizes must be four sizes >= 1, got {sizes}")
        f1, f2, f3, f4 = sizes
        if not self.allow_any_sizes and not (f2 > f3 > f4 and f2 > f1):
            raise ValueError(
                f"layer sizes {sizes} violate F2 > F3 > F4 and F2 > F1; "
                "set allow_any_sizes to override"
            )
        if self.patch < 2:
            raise ValueError("patch must be >= 2")
        if self.stride < 1:
            raise ValueError("stride must be >= 1")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.cd_steps < 1:
            raise ValueError("cd_steps must be >= 1")
        if self.variance_threshold < 0:
            raise ValueError("variance_threshold must be >= 0")


def _minibatches(count: int, batch_size: int, rng) -> list[np.ndarray]:
    order = rng.permutation(count)
    return [order[i : i + batch_size] for i in range(0, count, batch_size)]


def pretrain_stack(data, config: DbnConfig) -> list[RbmParams]:
    """Greedy layer-by-layer CD pretraining of the encoder RBM chain.

    Each trained RBM's hidden probabilities become the visible data of the
    next layer. With epochs = 0 the seeded initial parameters come back
    unchanged, which pins the initialization for reproducibility tests.
    """
    visible = np.asarray(getattr(data, "vectors", data), dtype=np.float64)
    if visible.ndim != 2 or visible.shape[0] == 0:
        raise ValueError("training data must be a non-empty (count, dim) array")
    rng = np.random.default_rng(config.seed)
    stack = []
    for size in config.layer_sizes:
        params = init_rbm(visible.shape[1], size, rng)
        state = CdState.zeros(params)
        for _ in range(config.epochs):
            for index in _minibatches(visible.shape[0], config.batch_size, rng):
                params, state = cd_update(
                    params,
                    visible[index],
                    k=config.cd_steps,
                    lr=config.learning_rate,
                    momentum=config.momentum,
                    rng=rng,
                    state=state,
                )
        stack.append(params)
        visible = hidden_probabilities(params, visible)
    return stack


@dataclass(frozen=True)
class Autoencoder:
    """Affine layers with a logistic activation after every one of them."""

    weights: tuple[np.ndarray, ...]  # per layer, (out_dim, in_dim)
    biases: tuple[np.ndarray, ...]

    def __post_init__(self):
        weights = tuple(np.asarray(w, dtype=np.float64) for w in self.weights)
        biases = tuple(np.asarray(b, dtype=np.float64) for b in self.biases)
        if len(weights) != len(biases) or not weights:
            raise ValueError("need matching non-empty weight and bias lists")
        if len(weights) % 2 != 0:
            raise ValueError("encoder and decoder halves must have equal depth")
        for w, b in zip(weights, biases):
            if w.ndim != 2 or b.shape != (w.shape[0],):
                raise ValueError("each layer needs an (out, in) matrix and out bias")
        for prev, nxt in zip(weights, weights[1:]):
            if nxt.shape[1] != prev.shape[0]:
                raise ValueError(
                    f"layer dims do not chain: {prev.shape} then {nxt.shape}"
                )
        sizes = self.sizes_of(weights)
        if sizes != sizes[::-1]:
            raise ValueError(f"layer size chain {sizes} is not symmetric")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "biases", biases)

    @staticmethod
    def sizes_of(weights) -> tuple[int, ...]:
        return (weights[0].shape[1],) + tuple(w.shape[0] for w in weights)

    @property
    def sizes(self) -> tuple[int, ...]:
        return self.sizes_of(self.weights)

    @property
    def encoder_depth(self) -> int:
        return len(self.weights) // 2

    @property
    def code_units(self) -> int:
        return self.weights[self.encoder_depth - 1].shape[0]

    @property
    def input_units(self) -> int:
        return self.weights[0].shape[1]


def unroll(stack: list[RbmParams]) -> Autoencoder:
    """Unfold the RBM chain into an untied symmetric autoencoder.

    Encoder layer i carries RBM i's recognition direction (w, c); the decoder
    appends the generative directions (w^T, b) in reverse order. All arrays
    are copies, so fine-tuning never writes back into the RBMs.
    """
    if not stack:
        raise ValueError("empty RBM stack")
    for lower, upper in zip(stack, stack[1:]):
        if upper.visible_units != lower.hidden_units:
            raise ValueError(
                f"stack dims do not chain: {lower.hidden_units} hidden feeding "
                f"{upper.visible_units} visible"
            )
    weights = [params.w.copy() for params in stack]
    biases = [params.c.copy() for params in stack]
    for params in reversed(stack):
        weights.append(params.w.T.copy())
        biases.append(params.b.copy())
    return Autoencoder(weights=tuple(weights), biases=tuple(biases))


def forward(ae: Autoencoder, batch: np.ndarray) -> list[np.ndarray]:
    """Activations after every layer; index -1 is the reconstruction."""
    batch = np.asarray(batch, dtype=np.float64)
    if batch.ndim != 2 or batch.shape[1] != ae.input_units:
        raise ValueError(f"batch must be (count, {ae.input_units}), got {batch.shape}")
    activations = [batch]
    for w, b in zip(ae.weights, ae.biases):
        activations.append(sigmoid(activations[-1] @ w.T + b))
    return activations


def encode_patches(ae: Autoencoder, patches: np.ndarray) -> np.ndarray:
    """Mean-field pass through the encoder half; rows land in (0,1)^F4."""
    patches = np.asarray(patches, dtype=np.float64)
    if patches.ndim != 2 or patches.shape[1] != ae.input_units:
        raise ValueError(
            f"patches must be (count, {ae.input_units}), got {patches.shape}"
        )
    out = patches
    for w, b in zip(ae.weights[: ae.encoder_depth], ae.biases[: ae.encoder_depth]):
        out = sigmoid(out @ w.T + b)
    return out


def decode_patches(ae: Autoencoder, codes: np.ndarray) -> np.ndarray:
    """Mean-field pass through the decoder half."""
    codes = np.asarray(codes, dtype=np.float64)
    if codes.ndim != 2 or codes.shape[1] != ae.code_units:
        raise ValueError(f"codes must be (count, {ae.code_units}), got {codes.shape}")
    out = codes
    for w, b in zip(ae.weights[ae.encoder_depth :], ae.biases[ae.encoder_depth :]):
        out = sigmoid(out @ w.T + b)
    return out


def reconstruction_mse(ae: Autoencoder, batch: np.ndarray) -> float:
    batch = np.asarray(batch, dtype=np.float64)
    recon = forward(ae, batch)[-1]
    return float(np.mean((recon - batch) ** 2))


def backprop_gradients(ae: Autoencoder, batch: np.ndarray):
    """Gradients of 0.5 * mean-per-sample squared error; returns (gw, gb, loss)."""
    activations = forward(ae, batch)
    batch = activations[0]
    count = batch.shape[0]
    recon = activations[-1]
    loss = 0.5 * float(np.sum((recon - batch) ** 2)) / count
    delta = (recon - batch) / count * recon * (1.0 - recon)
    grads_w = [None] * len(ae.weights)
    grads_b = [None] * len(ae.weights)
    for layer in range(len(ae.weights) - 1, -1, -1):
        grads_w[layer] = delta.T @ activations[layer]
        grads_b[layer] = delta.sum(axis=0)
        if layer > 0:
            back = delta @ ae.weights[layer]
            prev = activations[layer]
            delta = back * prev * (1.0 - prev)
    return grads_w, grads_b, loss


def finetune(ae: Autoencoder, data, config: DbnConfig) -> Autoencoder:
    """Mini-batch momentum backprop on reconstruction MSE.

    Tracks the best full-data error seen (the untouched input network
    included) and returns that snapshot, so the result never ends worse than
    it started even if the last epochs overshoot.
    """
    vectors = np.asarray(getattr(data, "vectors", data), dtype=np.float64)
    if vectors.ndim != 2 or vectors.shape[0] == 0:
        raise ValueError("training data must be a non-empty (count, dim) array")
    rng = np.random.default_rng(config.seed + 1)
    weights = [w.copy() for w in ae.weights]
    biases = [b.copy() for b in ae.biases]
    vel_w = [np.zeros_like(w) for w in weights]
    vel_b = [np.zeros_like(b) for b in biases]
    best = Autoencoder(weights=tuple(weights), biases=tuple(biases))
    best_error = reconstruction_mse(best, vectors)
    for _ in range(config.epochs):
        for index in _minibatches(vectors.shape[0], config.batch_size, rng):
            current = Autoencoder(weights=tuple(weights), biases=tuple(biases))
            grads_w, grads_b, _ = backprop_gradients(current, vectors[index])
            for layer in range(len(weights)):
                vel_w[layer] = config.momentum * vel_w[layer] - config.learning_rate * grads_w[layer]
                vel_b[layer] = config.momentum * vel_b[layer] - config.learning_rate * grads_b[layer]
                weights[layer] = weights[layer] + vel_w[layer]
                biases[layer] = biases[layer] + vel_b[layer]
        candidate = Autoencoder(weights=tuple(weights), biases=tuple(biases))
        error = reconstruction_mse(candidate, vectors)
        if error < best_error:
            best, best_error = candidate, error
    return best


@dataclass(frozen=True)
class PatchDataset:
    """Flattened patches plus what it takes to undo the slicing."""

    vectors: np.ndarray  # (count, p*p) in [0,1]
    records: np.ndarray  # (count, 2) per-patch (min, max) before normalization
    patch: int
    layout: tuple[int, int, int, int] | None  # (H, W, rows, cols); None in training mode
    normalized: bool = False

    @property
    def count(self) -> int:
        return self.vectors.shape[0]


def _normalize_rows(vectors: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    lo = vectors.min(axis=1)
    hi = vectors.max(axis=1)
    span = hi - lo
    flat = span <= 0
    safe = np.where(flat, 1.0, span)
    normalized = (vectors - lo[:, None]) / safe[:, None]
    normalized[flat] = 0.0
    return normalized, np.stack([lo, hi], axis=1)


def denormalize_rows(vectors: np.ndarray, records: np.ndarray) -> np.ndarray:
    lo = records[:, 0][:, None]
    hi = records[:, 1][:, None]
    return vectors * (hi - lo) + lo


def patchify(
    image: np.ndarray,
    p: int,
    stride: int | None = None,
    mode: str = "coding",
    variance_threshold: float = 1e-4,
    normalize: bool = False,
) -> PatchDataset:
    """Cut an image into p*p patch vectors.

    Training mode slides a stride-spaced window over full placements only and
    drops near-uniform patches (variance below threshold). Coding mode tiles
    with stride = p, padding the right and bottom edges by replication so
    depatchify can invert exactly; nothing is dropped.
    """
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 2:
        raise ValueError(f"image must be 2-D grayscale, got shape {image.shape}")
    if p < 2:
        raise ValueError("patch size must be >= 2")
    H, W = image.shape
    if H < p or W < p:
        raise ValueError(f"image {image.shape} smaller than patch {p}")
    if mode == "training":
        stride = p if stride is None else stride
        if stride < 1:
            raise ValueError("stride must be >= 1")
        rows = []
        for y in range(0, H - p + 1, stride):
            for x in range(0, W - p + 1, stride):
                tile = image[y : y + p, x : x + p]
                if tile.var() >= variance_threshold:
                    rows.append(tile.reshape(-1))
        vectors = (
            np.array(rows, dtype=np.float64)
            if rows
            else np.empty((0, p * p), dtype=np.float64)
        )
        layout = None
    elif mode == "coding":
        grid_rows = -(-H // p)
        grid_cols = -(-W // p)
        padded = np.pad(
            image, ((0, grid_rows * p - H), (0, grid_cols * p - W)), mode="edge"
        )
        tiles = padded.reshape(grid_rows, p, grid_cols, p).transpose(0, 2, 1, 3)
        vectors = tiles.reshape(grid_rows * grid_cols, p * p)
        layout = (H, W, grid_rows, grid_cols)
    else:
        raise ValueError(f"mode must be 'training' or 'coding', got {mode!r}")
    if vectors.size:
        records = np.stack([vectors.min(axis=1), vectors.max(axis=1)], axis=1)
    else:
        records = np.empty((0, 2), dtype=np.float64)
    if normalize and vectors.size:
        vectors, records = _normalize_rows(vectors)
    return PatchDataset(
        vectors=np.ascontiguousarray(vectors),
        records=records,
        patch=p,
        layout=layout,
        normalized=normalize,
    )


def depatchify(patches: PatchDataset, layout=None) -> np.ndarray:
    """Reassemble a coding-mode dataset into the original image."""
    layout = layout if layout is not None else patches.layout
    if layout is None:
        raise ValueError("depatchify needs a coding-mode layout")
    H, W, grid_rows, grid_cols = layout
    p = patches.patch
    vectors = patches.vectors
    if patches.normalized:
        vectors = denormalize_rows(vectors, patches.records)
    if vectors.shape != (grid_rows * grid_cols, p * p):
        raise ValueError(
            f"expected {grid_rows * grid_cols} patches of {p * p} values, "
            f"got {vectors.shape}"
        )
    tiles = vectors.reshape(grid_rows, grid_cols, p, p).transpose(0, 2, 1, 3)
    return tiles.reshape(grid_rows * p, grid_cols * p)[:H, :W].copy()


MODEL_MAGIC = b"DBN1"


def save_model(path, ae: Autoencoder) -> None:
    """Magic, layer-size chain, then per-layer f64 weights and biases."""
    sizes = ae.sizes
    blob = [MODEL_MAGIC, struct.pack("<I", len(ae.weights))]
    blob.append(struct.pack(f"<{len(sizes)}I", *sizes))
    for w, b in zip(ae.weights, ae.biases):
        blob.append(np.ascontiguousarray(w, dtype="<f8").tobytes())
        blob.append(np.ascontiguousarray(b, dtype="<f8").tobytes())
    with open(path, "wb") as handle:
        handle.write(b"".join(blob))


def load_model(path) -> Autoencoder:
    with open(path, "rb") as handle:
        raw = handle.read()
    if raw[:4] != MODEL_MAGIC:
        raise ModelError(f"bad model magic {raw[:4]!r}")
    offset = 4
    try:
        (layer_count,) = struct.unpack_from("<I", raw, offset)
        offset += 4
        sizes = struct.unpack_from(f"<{layer_count + 1}I", raw, offset)
        offset += 4 * (layer_count + 1)
        weights, biases = [], []
        for layer in range(layer_count):
            in_dim, out_dim = sizes[layer], sizes[layer + 1]
            w = np.frombuffer(raw, dtype="<f8", count=out_dim * in_dim, offset=offset)
            offset += 8 * out_dim * in_dim
            b = np.frombuffer(raw, dtype="<f8", count=out_dim, offset=offset)
            offset += 8 * out_dim
            weights.append(w.reshape(out_dim, in_dim).copy())
            biases.append(b.copy())
    except (struct.error, ValueError) as exc:
        raise ModelError(f"truncated or malformed model file: {exc}") from exc
    if offset != len(raw):
        raise ModelError(f"{len(raw) - offset} trailing bytes after model payload")
    try:
        return Autoencoder(weights=tuple(weights), biases=tuple(biases))
    except ValueError as exc:
        raise ModelError(str(exc)) from exc
