"""End-to-end codec pipeline: light field -> layers -> WBI -> DBN -> bytes.

Encoding runs the stages in order: fit additive display layers to the light
field, factor the layer stack into scalable weighted-binary levels, squeeze
each basis image through the autoencoder patch by patch, quantize the latent
codes, and entropy-code everything into the progressive container. Decoding
mirrors the chain from whichever prefix of the container survived.

The autoencoder is an input here, not a byproduct: models are trained once
per dataset family with train_autoencoder and shipped alongside the
bitstreams, the way an offline-trained codec component normally is.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import bitstream, dbn, wbi
from .config import PipelineConfig, default_config, quant_bits_for_qp
from .errors import ContainerError, DataError
from .layers import LayerStack, optimize_layers, render_additive
from .lightfield import LightField

__all__ = [
    "EncodeResult",
    "DecodeResult",
    "encode_light_field",
    "decode_light_field",
    "train_autoencoder",
    "training_images_from_light_field",
    "collect_training_patches",
    "model_layout",
]


@dataclass(frozen=True)
class EncodeResult:
    container: bytes
    header: bitstream.ContainerHeader
    layers: LayerStack
    wbi_code: wbi.WbiCode
    solver_history: tuple[float, ...]
    timings: dict[str, float]

    @property
    def bits_per_pixel(self) -> float:
        return bitstream.bits_per_pixel(
            len(self.container), self.header.angular_dims, self.header.spatial_dims
        )


@dataclass(frozen=True)
class DecodeResult:
    light_field: LightField
    mask: np.ndarray  # (T, S, H, W) validity of the additive model
    layers: LayerStack
    wbi_code: wbi.WbiCode
    levels_used: int
    header: bitstream.ContainerHeader


def model_layout(model: dbn.Autoencoder) -> tuple[int, tuple[int, ...]]:
    """(patch size, encoder layer sizes F1..F4) implied by a model."""
    input_units = model.input_units
    patch = int(round(input_units**0.5))
    if patch * patch != input_units:
        raise DataError(f"model input width {input_units} is not a square patch")
    sizes = model.sizes[1 : model.encoder_depth + 1]
    return patch, tuple(sizes)


def _unit_normalize(image: np.ndarray, lo: float, hi: float) -> np.ndarray:
    if hi > lo:
        return (image - lo) / (hi - lo)
    return np.zeros_like(image)


def _unit_denormalize(image: np.ndarray, lo: float, hi: float) -> np.ndarray:
    return image * (hi - lo) + lo


def _level_symbols(
    level: wbi.WbiLevel, model: dbn.Autoencoder, patch: int, quant_bits: int
) -> np.ndarray:
    """Quantized latent symbols for every basis image of one level."""
    chunks = []
    n, channels = level.basis.shape[0], level.basis.shape[1]
    for comp in range(n):
        for chan in range(channels):
            lo, hi = level.norm_records[comp, chan]
            unit = _unit_normalize(level.basis[comp, chan], lo, hi)
            tiles = dbn.patchify(unit, patch, mode="coding")
            latent = dbn.encode_patches(model, tiles.vectors)
            chunks.append(bitstream.quantize(latent.ravel(), quant_bits))
    return np.concatenate(chunks) if chunks else np.empty(0, dtype=np.uint32)


def encode_light_field(
    lf: LightField,
    model: dbn.Autoencoder | None,
    config: PipelineConfig | None = None,
    qp: int | None = None,
    quant_bits: int | None = None,
    lossless: bool | None = None,
) -> EncodeResult:
    """Run the full encoder; quality comes from qp, quant_bits, or config."""
    config = config or default_config()
    if qp is not None and quant_bits is not None:
        raise ValueError("give qp or quant_bits, not both")
    bits = quant_bits_for_qp(qp) if qp is not None else (quant_bits or config.quant_bits)
    lossless = config.lossless if lossless is None else lossless
    if model is None and not lossless:
        raise DataError("lossy encoding requires an autoencoder model")

    timings: dict[str, float] = {}
    tick = time.perf_counter()
    stack, history = optimize_layers(
        lf, layer_count=len(config.depths), depths=config.depths, config=config.solver
    )
    timings["layers"] = time.perf_counter() - tick

    tick = time.perf_counter()
    code = wbi.encode_scalable(stack.images, config.wbi)
    timings["wbi"] = time.perf_counter() - tick

    if lossless:
        patch, layer_sizes = config.dbn.patch, config.dbn.layer_sizes
    else:
        patch, layer_sizes = model_layout(model)
    W, H = lf.spatial_dims
    header = bitstream.ContainerHeader(
        angular_dims=lf.angular_dims,
        spatial_dims=(W, H),
        channels=lf.channels,
        depths=stack.depths,
        layer_bound=stack.bound,
        partition=code.partition,
        patch=patch,
        layer_sizes=layer_sizes,
        quant_bits=bits,
        lossless=lossless,
        norm_records=np.concatenate([lvl.norm_records for lvl in code.levels]),
    )

    tick = time.perf_counter()
    payloads = []
    for level in code.levels:
        if lossless:
            payloads.append(
                bitstream.LevelPayload(codes=level.codes, basis_raw=level.basis)
            )
        else:
            payloads.append(
                bitstream.LevelPayload(
                    codes=level.codes,
                    symbols=_level_symbols(level, model, patch, bits),
                )
            )
    timings["latent"] = time.perf_counter() - tick

    tick = time.perf_counter()
    container = bitstream.write_container(header, payloads)
    timings["container"] = time.perf_counter() - tick

    return EncodeResult(
        container=container,
        header=header,
        layers=stack,
        wbi_code=code,
        solver_history=tuple(history),
        timings=timings,
    )


def _level_from_payload(
    header: bitstream.ContainerHeader,
    payload: bitstream.LevelPayload,
    level_index: int,
    model: dbn.Autoencoder | None,
) -> wbi.WbiLevel:
    n = header.partition[level_index]
    first = sum(header.partition[:level_index])
    records = header.norm_records[first : first + n]
    W, H = header.spatial_dims
    C = header.channels
    if header.lossless:
        basis = np.asarray(payload.basis_raw, dtype=np.float64)
    else:
        patch = header.patch
        grid_rows, grid_cols = -(-H // patch), -(-W // patch)
        per_image = grid_rows * grid_cols * header.layer_sizes[-1]
        expected = n * C * per_image
        if payload.symbols.size != expected:
            raise ContainerError(
                f"level {level_index + 1} holds {payload.symbols.size} symbols, "
                f"expected {expected}"
            )
        basis = np.empty((n, C, H, W), dtype=np.float64)
        layout = (H, W, grid_rows, grid_cols)
        for comp in range(n):
            for chan in range(C):
                start = (comp * C + chan) * per_image
                latent = bitstream.dequantize(
                    payload.symbols[start : start + per_image], header.quant_bits
                ).reshape(grid_rows * grid_cols, header.layer_sizes[-1])
                vectors = dbn.decode_patches(model, latent)
                tiles = dbn.PatchDataset(
                    vectors=vectors,
                    records=np.zeros((vectors.shape[0], 2)),
                    patch=patch,
                    layout=layout,
                )
                lo, hi = records[comp, chan]
                basis[comp, chan] = _unit_denormalize(dbn.depatchify(tiles), lo, hi)
    return wbi.WbiLevel(
        components=tuple(range(first, first + n)),
        codes=payload.codes,
        basis=basis,
        norm_records=records,
    )


def decode_light_field(
    data: bytes,
    model: dbn.Autoencoder | None = None,
    max_level: int | None = None,
) -> DecodeResult:
    """Decode a container (or any section-aligned prefix of one)."""
    decoded = bitstream.read_container(data, max_level)
    header = decoded.header
    if not header.lossless:
        if model is None:
            raise DataError("lossy decoding requires the autoencoder model")
        patch, layer_sizes = model_layout(model)
        if patch != header.patch or layer_sizes != header.layer_sizes:
            raise DataError(
                f"model layout (p={patch}, {layer_sizes}) does not match "
                f"container (p={header.patch}, {header.layer_sizes})"
            )
    levels = [
        _level_from_payload(header, payload, index, model)
        for index, payload in enumerate(decoded.payloads)
    ]
    W, H = header.spatial_dims
    code = wbi.WbiCode(
        stack_size=header.layer_count,
        image_shape=(header.channels, H, W),
        levels=tuple(levels),
    )
    images = wbi.decode_levels(code, decoded.levels_used)
    images = np.clip(images, 0.0, header.layer_bound)
    stack = LayerStack(header.depths, images)
    rendered, mask = render_additive(stack, header.angular_dims)
    lf = LightField(samples=np.clip(rendered, 0.0, 1.0))
    return DecodeResult(
        light_field=lf,
        mask=mask,
        layers=stack,
        wbi_code=code,
        levels_used=decoded.levels_used,
        header=header,
    )


def training_images_from_light_field(
    lf: LightField, config: PipelineConfig | None = None
) -> list[np.ndarray]:
    """Unit-normalized basis images from running the front half of the encoder.

    This is the same distribution the autoencoder sees at coding time, which
    beats training on raw views.
    """
    config = config or default_config()
    stack, _ = optimize_layers(
        lf, layer_count=len(config.depths), depths=config.depths, config=config.solver
    )
    code = wbi.encode_scalable(stack.images, config.wbi)
    images = []
    for level in code.levels:
        for comp in range(level.basis.shape[0]):
            for chan in range(level.basis.shape[1]):
                lo, hi = level.norm_records[comp, chan]
                images.append(_unit_normalize(level.basis[comp, chan], lo, hi))
    return images


def collect_training_patches(images, config: dbn.DbnConfig) -> np.ndarray:
    """Stride-sampled, variance-filtered patch vectors from [0,1] images."""
    chunks = []
    for image in images:
        dataset = dbn.patchify(
            image,
            config.patch,
            stride=config.stride,
            mode="training",
            variance_threshold=config.variance_threshold,
        )
        if dataset.count:
            chunks.append(dataset.vectors)
    if not chunks:
        raise DataError(
            "no training patches survived the variance filter; lower "
            "dbn.variance_threshold or dbn.stride"
        )
    return np.concatenate(chunks, axis=0)


def train_autoencoder(patches: np.ndarray, config: dbn.DbnConfig) -> dbn.Autoencoder:
    """Greedy CD pretraining, unrolling, and backprop fine-tuning."""
    patches = np.asarray(patches, dtype=np.float64)
    if patches.ndim != 2 or patches.shape[0] == 0:
        raise DataError(f"training patches must be (count, p*p), got {patches.shape}")
    if patches.shape[1] != config.patch * config.patch:
        raise DataError(
            f"patch vectors are {patches.shape[1]} wide, config wants "
            f"{config.patch * config.patch}"
        )
    stack = dbn.pretrain_stack(patches, config)
    return dbn.finetune(dbn.unroll(stack), patches, config)
