"""Additive layered-display model and layer-pattern optimizer.

A stack of K transmittance layers at integer depth offsets d_k reproduces
the view with signed angular offsets (a_s, a_t) as

    out(u, v) = sum_k P_k(u + d_k * a_s, v + d_k * a_t)

Lookups falling outside a layer contribute zero; a validity mask marks the
positions where every layer lookup is in range. Because the model is linear
in the layer images, optimal layers for a target light field are the
solution of a box-constrained least-squares problem, solved here by
projected gradient descent with backtracking.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .lightfield import LightField, angular_offset
from .pnm import read_pnm, write_pnm

DEFAULT_DEPTHS = (-1, 0, 1)


@dataclass(frozen=True)
class LayerStack:
    """K layer images over (u, v) with distinct integer depth offsets.

    Every sample lies in [0, bound] with bound = 1/K so that the additive
    sum of a full stack stays displayable in [0, 1].
    """

    depths: tuple[int, ...]
    images: np.ndarray  # (K, C, H, W) float64

    def __post_init__(self):
        images = np.ascontiguousarray(np.asarray(self.images, dtype=np.float64))
        depths = tuple(int(d) for d in self.depths)
        if images.ndim != 4:
            raise ValueError(f"layer images must be (K, C, H, W), got {images.shape}")
        if len(depths) != images.shape[0]:
            raise ValueError(
                f"{len(depths)} depths for {images.shape[0]} layer images"
            )
        if any(b <= a for a, b in zip(depths, depths[1:])):
            raise ValueError(f"depths must be strictly increasing, got {depths}")
        if not np.all(np.isfinite(images)):
            raise ValueError("layer images contain non-finite samples")
        bound = 1.0 / len(depths)
        if images.size and (images.min() < 0.0 or images.max() > bound + 1e-12):
            raise ValueError(f"layer samples must lie in [0, {bound:.6g}]")
        object.__setattr__(self, "images", images)
        object.__setattr__(self, "depths", depths)

    @property
    def layer_count(self) -> int:
        return len(self.depths)

    @property
    def bound(self) -> float:
        return 1.0 / len(self.depths)


@dataclass(frozen=True)
class SolverConfig:
    max_iterations: int = 500
    step_size: float = 1.0
    backtracks: int = 30
    tolerance: float = 1e-9
    seed: int = 0
    random_init: bool = False

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.step_size <= 0:
            raise ValueError("step_size must be positive")
        if self.tolerance < 0:
            raise ValueError("tolerance must be >= 0")


def _shift_windows(depths, offsets_s, offsets_t, height, width):
    """Per (t, s, k) output windows [v0:v1, u0:u1] where the shifted layer
    lookup stays in range, as slice bounds into the output view."""
    windows = {}
    for ti, a_t in enumerate(offsets_t):
        for si, a_s in enumerate(offsets_s):
            for ki, d in enumerate(depths):
                sy, sx = d * a_t, d * a_s
                v0, v1 = max(0, -sy), min(height, height - sy)
                u0, u1 = max(0, -sx), min(width, width - sx)
                windows[ti, si, ki] = (v0, v1, u0, u1, sy, sx)
    return windows


def render_additive(
    stack: LayerStack, angular_dims: tuple[int, int]
) -> tuple[np.ndarray, np.ndarray]:
    """Render the light-field tensor produced by an additive layer stack.

    Returns (samples, mask): samples shaped (C, T, S, H, W) and a boolean
    mask shaped (T, S, H, W) that is true exactly where all layer lookups
    were in range. Out-of-range lookups contribute zero to the sum.
    """
    S, T = angular_dims
    if S < 1 or T < 1:
        raise ValueError(f"bad angular dims {angular_dims}")
    K, C, H, W = stack.images.shape
    offsets_s = [angular_offset(s, S) for s in range(S)]
    offsets_t = [angular_offset(t, T) for t in range(T)]
    windows = _shift_windows(stack.depths, offsets_s, offsets_t, H, W)

    out = np.zeros((C, T, S, H, W), dtype=np.float64)
    mask = np.zeros((T, S, H, W), dtype=bool)
    for ti in range(T):
        for si in range(S):
            valid = np.ones((H, W), dtype=bool)
            for ki in range(K):
                v0, v1, u0, u1, sy, sx = windows[ti, si, ki]
                if v0 < v1 and u0 < u1:
                    out[:, ti, si, v0:v1, u0:u1] += stack.images[
                        ki, :, v0 + sy : v1 + sy, u0 + sx : u1 + sx
                    ]
                window = np.zeros((H, W), dtype=bool)
                window[v0:v1, u0:u1] = True
                valid &= window
            mask[ti, si] = valid
    return out, mask


def adjoint_scatter(
    residual: np.ndarray,
    mask: np.ndarray,
    depths,
    spatial_dims: tuple[int, int],
    channels: int | None = None,
) -> np.ndarray:
    """Exact adjoint of the masked render operator.

    Scatters each valid residual sample back onto every layer position that
    contributed to it: grad_k(x, y) accumulates residual(u, v, s, t) over
    all valid samples with x = u + d_k*a_s, y = v + d_k*a_t. Satisfies
    <render(P) * mask, L> == <P, adjoint_scatter(L * mask)>.
    """
    W, H = spatial_dims
    if residual.ndim != 5:
        raise ValueError(f"residual must be (C, T, S, H, W), got {residual.shape}")
    C, T, S, h, w = residual.shape
    if (h, w) != (H, W) or mask.shape != (T, S, H, W):
        raise ValueError("residual/mask shapes inconsistent with geometry")
    if channels is not None and channels != C:
        raise ValueError(f"expected {channels} channels, got {C}")
    depths = tuple(int(d) for d in depths)
    offsets_s = [angular_offset(s, S) for s in range(S)]
    offsets_t = [angular_offset(t, T) for t in range(T)]
    windows = _shift_windows(depths, offsets_s, offsets_t, H, W)

    masked = residual * mask[None, :, :, :, :]
    grad = np.zeros((len(depths), C, H, W), dtype=np.float64)
    for ti in range(T):
        for si in range(S):
            for ki in range(len(depths)):
                v0, v1, u0, u1, sy, sx = windows[ti, si, ki]
                if v0 < v1 and u0 < u1:
                    grad[ki, :, v0 + sy : v1 + sy, u0 + sx : u1 + sx] += masked[
                        :, ti, si, v0:v1, u0:u1
                    ]
    return grad


def _masked_loss(target: np.ndarray, rendered: np.ndarray, mask: np.ndarray) -> float:
    diff = (target - rendered)[:, mask]
    return 0.5 * float(np.dot(diff.ravel(), diff.ravel()))


def optimize_layers(
    target: LightField,
    layer_count: int = 3,
    depths=None,
    config: SolverConfig | None = None,
) -> tuple[LayerStack, list[float]]:
    """Fit a layer stack to a target light field by projected gradient descent.

    Minimizes half the squared error over the valid mask, projecting each
    layer onto [0, 1/K] after every step. The step size starts at
    config.step_size, is halved until an iteration does not increase the
    loss, and grows again after accepted steps, so the recorded loss history
    is non-increasing. Returns the stack and the loss per accepted iterate.
    """
    config = config or SolverConfig()
    if depths is None:
        depths = DEFAULT_DEPTHS if layer_count == 3 else tuple(
            range(-(layer_count // 2), layer_count - layer_count // 2)
        )
    depths = tuple(int(d) for d in depths)
    if len(depths) != layer_count:
        raise ValueError(f"{len(depths)} depths for layer_count={layer_count}")
    S, T = target.angular_dims
    W, H = target.spatial_dims
    C = target.channels
    bound = 1.0 / layer_count

    zero_stack = LayerStack(depths, np.zeros((layer_count, C, H, W)))
    _, mask = render_additive(zero_stack, (S, T))
    if not mask.any():
        raise DataError("geometry shifts every sample out of range (empty mask)")

    if config.random_init:
        rng = np.random.default_rng(config.seed)
        images = rng.uniform(0.0, bound, size=(layer_count, C, H, W))
    else:
        images = np.full(
            (layer_count, C, H, W), float(target.samples.mean()) / layer_count
        )

    def render_images(imgs):
        rendered, _ = render_additive(LayerStack(depths, imgs), (S, T))
        return rendered

    rendered = render_images(images)
    loss = _masked_loss(target.samples, rendered, mask)
    history = [loss]
    step = config.step_size
    for _ in range(config.max_iterations):
        residual = (target.samples - rendered) * mask[None]
        grad = adjoint_scatter(residual, mask, depths, (W, H))
        accepted = False
        for _ in range(config.backtracks + 1):
            candidate = np.clip(images + step * grad, 0.0, bound)
            cand_rendered = render_images(candidate)
            cand_loss = _masked_loss(target.samples, cand_rendered, mask)
            if cand_loss <= loss:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
        images, rendered = candidate, cand_rendered
        prev_loss, loss = loss, cand_loss
        history.append(loss)
        step *= 2.0
        if prev_loss == 0.0 or (prev_loss - loss) <= config.tolerance * max(
            prev_loss, 1e-300
        ):
            break
    return LayerStack(depths, images), history


def save_layer_stack(stack: LayerStack, base_dir, bit_depth: int = 8) -> None:
    """Write one PGM/PPM per layer (scaled by K to span [0, 1]) + sidecar."""
    from .pnm import unit_to_image

    os.makedirs(base_dir, exist_ok=True)
    K, C, _, _ = stack.images.shape
    ext = "pgm" if C == 1 else "ppm"
    names = []
    for k in range(K):
        rel = f"layer_{k}.{ext}"
        scaled = stack.images[k] * K
        img = scaled[0] if C == 1 else scaled.transpose(1, 2, 0)
        write_pnm(os.path.join(base_dir, rel), unit_to_image(img, bit_depth))
        names.append(rel)
    with open(os.path.join(base_dir, "layers.txt"), "w", encoding="utf-8") as fh:
        fh.write(f"count {K}\n")
        fh.write("depths " + " ".join(str(d) for d in stack.depths) + "\n")
        fh.write(f"bound {stack.bound!r}\n")
        fh.write(f"bit_depth {bit_depth}\n")
        for rel in names:
            fh.write(rel + "\n")


def load_layer_stack(base_dir) -> LayerStack:
    """Inverse of save_layer_stack (up to the on-disk bit depth)."""
    from .pnm import image_to_unit

    sidecar = os.path.join(base_dir, "layers.txt")
    if not os.path.exists(sidecar):
        raise DataError(f"missing layer sidecar {sidecar}")
    depths, names, count = None, [], None
    with open(sidecar, "r", encoding="utf-8") as fh:
        for line in fh:
            fields = line.split()
            if not fields:
                continue
            if fields[0] == "count":
                count = int(fields[1])
            elif fields[0] == "depths":
                depths = tuple(int(x) for x in fields[1:])
            elif fields[0] in ("bound", "bit_depth"):
                continue
            else:
                names.append(fields[0])
    if count is None or depths is None or len(names) != count:
        raise DataError(f"malformed layer sidecar {sidecar}")
    imgs = []
    for rel in names:
        pixels = image_to_unit(read_pnm(os.path.join(base_dir, rel)))
        imgs.append(pixels[None] if pixels.ndim == 2 else pixels.transpose(2, 0, 1))
    images = np.stack(imgs) / count
    return LayerStack(depths, np.clip(images, 0.0, 1.0 / count))
