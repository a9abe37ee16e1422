"""Progressive container: quantizer, adaptive arithmetic coder, serialization.

The container carries everything a decoder needs, front-loaded: a header with
the light-field geometry, layer depths, the weighted-binary partition, the
autoencoder layout and per-basis-image normalization records, followed by one
self-contained section per scalability level. Sections hold the packed binary
code matrix plus the entropy-coded quantized latent codes of that level's
basis images (or the raw 64-bit images in lossless mode). A byte prefix of
the container that ends on a section boundary is itself a valid container
for the levels it covers, which is the whole point of the format.

The entropy stage is a 32-bit binary arithmetic coder in the classic
low/high/underflow formulation, driven MSB-first over the bit planes of each
quantized symbol with one adaptive (Laplace-smoothed) frequency pair per
plane. It is strictly sequential and bit-reproducible.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ContainerError, TruncatedSectionError, TruncatedStreamError
from .pnm import read_pnm, write_pnm

MAGIC = b"LFLC"
VERSION = 1
MIN_QUANT_BITS = 2
MAX_QUANT_BITS = 16

_STATE_BITS = 32
_STATE_MASK = (1 << _STATE_BITS) - 1
_HALF = 1 << (_STATE_BITS - 1)
_QUARTER = 1 << (_STATE_BITS - 2)
_RESCALE_TOTAL = 1 << 16
_EOF_BIT_ALLOWANCE = 48  # legitimate decoder tail overshoot is < state width


# ---------------------------------------------------------------------------
# quantizer


def quantize(values, bits: int) -> np.ndarray:
    """Uniform midrise quantization of [0,1] values to integer symbols."""
    if not MIN_QUANT_BITS <= bits <= MAX_QUANT_BITS:
        raise ValueError(f"quantizer bits must be in [{MIN_QUANT_BITS}, {MAX_QUANT_BITS}]")
    values = np.asarray(values, dtype=np.float64)
    if values.size and (values.min() < 0.0 or values.max() > 1.0):
        raise ValueError("quantizer input must lie in [0, 1]")
    scale = (1 << bits) - 1
    return np.floor(values * scale + 0.5).astype(np.uint32)


def dequantize(symbols, bits: int) -> np.ndarray:
    if not MIN_QUANT_BITS <= bits <= MAX_QUANT_BITS:
        raise ValueError(f"quantizer bits must be in [{MIN_QUANT_BITS}, {MAX_QUANT_BITS}]")
    symbols = np.asarray(symbols)
    if symbols.size and int(symbols.max()) >= (1 << bits):
        raise ValueError(f"symbol overflow for {bits}-bit quantizer")
    return symbols.astype(np.float64) / ((1 << bits) - 1)


# ---------------------------------------------------------------------------
# adaptive binary arithmetic coder


class _BitWriter:
    def __init__(self):
        self._bytes = bytearray()
        self._acc = 0
        self._count = 0

    def write(self, bit: int) -> None:
        self._acc = (self._acc << 1) | bit
        self._count += 1
        if self._count == 8:
            self._bytes.append(self._acc)
            self._acc = 0
            self._count = 0

    def getvalue(self) -> bytes:
        if self._count:
            return bytes(self._bytes) + bytes([self._acc << (8 - self._count)])
        return bytes(self._bytes)


class _BitReader:
    """MSB-first bit reader that tolerates a bounded read-past-end tail."""

    def __init__(self, data: bytes):
        self._data = data
        self._pos = 0
        self._acc = 0
        self._count = 0
        self.overrun = 0

    def read(self) -> int:
        if self._count == 0:
            if self._pos < len(self._data):
                self._acc = self._data[self._pos]
                self._pos += 1
                self._count = 8
            else:
                self.overrun += 1
                if self.overrun > _EOF_BIT_ALLOWANCE:
                    raise TruncatedStreamError(
                        "entropy stream exhausted mid-symbol"
                    )
                return 0
        self._count -= 1
        return (self._acc >> self._count) & 1


class _PlaneModel:
    """One adaptive zero/one frequency pair per symbol bit plane."""

    def __init__(self, planes: int):
        self.counts = [[1, 1] for _ in range(planes)]

    def freqs(self, plane: int) -> tuple[int, int]:
        zero, one = self.counts[plane]
        return zero, zero + one

    def record(self, plane: int, bit: int) -> None:
        pair = self.counts[plane]
        pair[bit] += 1
        if pair[0] + pair[1] >= _RESCALE_TOTAL:
            pair[0] = (pair[0] + 1) >> 1
            pair[1] = (pair[1] + 1) >> 1


class _Encoder:
    def __init__(self):
        self.low = 0
        self.high = _STATE_MASK
        self.pending = 0
        self.out = _BitWriter()

    def encode(self, bit: int, zero: int, total: int) -> None:
        span = self.high - self.low + 1
        split = self.low + zero * span // total
        if bit:
            self.low = split
        else:
            self.high = split - 1
        while ((self.low ^ self.high) & _HALF) == 0:
            top = self.low >> (_STATE_BITS - 1)
            self.out.write(top)
            for _ in range(self.pending):
                self.out.write(top ^ 1)
            self.pending = 0
            self.low = (self.low << 1) & _STATE_MASK
            self.high = ((self.high << 1) & _STATE_MASK) | 1
        while (self.low & ~self.high & _QUARTER) != 0:
            self.pending += 1
            self.low = (self.low << 1) ^ _HALF
            self.high = ((self.high ^ _HALF) << 1) | _HALF | 1

    def finish(self) -> bytes:
        self.out.write(1)
        for _ in range(self.pending):
            self.out.write(0)
        return self.out.getvalue()


class _Decoder:
    def __init__(self, data: bytes):
        self.low = 0
        self.high = _STATE_MASK
        self.reader = _BitReader(data)
        self.code = 0
        for _ in range(_STATE_BITS):
            self.code = (self.code << 1) | self.reader.read()

    def decode(self, zero: int, total: int) -> int:
        span = self.high - self.low + 1
        split = self.low + zero * span // total
        bit = 1 if self.code >= split else 0
        if bit:
            self.low = split
        else:
            self.high = split - 1
        while ((self.low ^ self.high) & _HALF) == 0:
            self.code = ((self.code << 1) & _STATE_MASK) | self.reader.read()
            self.low = (self.low << 1) & _STATE_MASK
            self.high = ((self.high << 1) & _STATE_MASK) | 1
        while (self.low & ~self.high & _QUARTER) != 0:
            self.code = (
                (self.code & _HALF)
                | ((self.code << 1) & (_STATE_MASK >> 1))
                | self.reader.read()
            )
            self.low = (self.low << 1) ^ _HALF
            self.high = ((self.high ^ _HALF) << 1) | _HALF | 1
        return bit


def entropy_encode(symbols, bits: int) -> bytes:
    """Arithmetic-code symbols MSB-plane-first with per-plane adaptation."""
    symbols = np.asarray(symbols).ravel()
    if symbols.size and int(symbols.max()) >= (1 << bits):
        raise ValueError(f"symbol overflow for {bits}-bit planes")
    if symbols.size and int(symbols.min()) < 0:
        raise ValueError("symbols must be non-negative")
    model = _PlaneModel(bits)
    encoder = _Encoder()
    for symbol in symbols.tolist():
        for plane in range(bits - 1, -1, -1):
            bit = (symbol >> plane) & 1
            zero, total = model.freqs(bits - 1 - plane)
            encoder.encode(bit, zero, total)
            model.record(bits - 1 - plane, bit)
    return encoder.finish()


def entropy_decode(data: bytes, count: int, bits: int) -> np.ndarray:
    """Invert entropy_encode; raises TruncatedStreamError on starved input."""
    if count < 0:
        raise ValueError("count must be >= 0")
    out = np.empty(count, dtype=np.uint32)
    if count == 0:
        return out
    model = _PlaneModel(bits)
    decoder = _Decoder(data)
    for i in range(count):
        symbol = 0
        for plane in range(bits - 1, -1, -1):
            zero, total = model.freqs(bits - 1 - plane)
            bit = decoder.decode(zero, total)
            model.record(bits - 1 - plane, bit)
            symbol = (symbol << 1) | bit
        out[i] = symbol
    return out


# ---------------------------------------------------------------------------
# container serialization


@dataclass(frozen=True)
class ContainerHeader:
    """Everything global a decoder needs before reading any section."""

    angular_dims: tuple[int, int]  # (S, T)
    spatial_dims: tuple[int, int]  # (W, H)
    channels: int
    depths: tuple[int, ...]  # layer depth offsets; K = len(depths)
    layer_bound: float  # per-layer cap, 1/K
    partition: tuple[int, ...]  # components per level; M = len(partition)
    patch: int
    layer_sizes: tuple[int, ...]  # encoder sizes F1..F4
    quant_bits: int
    lossless: bool
    norm_records: np.ndarray  # (N, C, 2) per-basis-image (min, max)

    def __post_init__(self):
        records = np.ascontiguousarray(
            np.asarray(self.norm_records, dtype=np.float64)
        )
        total = sum(self.partition)
        if records.shape != (total, self.channels, 2):
            raise ValueError(
                f"norm records must be ({total}, {self.channels}, 2), "
                f"got {records.shape}"
            )
        object.__setattr__(self, "angular_dims", tuple(map(int, self.angular_dims)))
        object.__setattr__(self, "spatial_dims", tuple(map(int, self.spatial_dims)))
        object.__setattr__(self, "depths", tuple(map(int, self.depths)))
        object.__setattr__(self, "partition", tuple(map(int, self.partition)))
        object.__setattr__(self, "layer_sizes", tuple(map(int, self.layer_sizes)))
        object.__setattr__(self, "norm_records", records)

    @property
    def layer_count(self) -> int:
        return len(self.depths)

    @property
    def level_count(self) -> int:
        return len(self.partition)

    @property
    def component_count(self) -> int:
        return sum(self.partition)


@dataclass(frozen=True)
class LevelPayload:
    """One section's worth of encoded data, still symbol-domain."""

    codes: np.ndarray  # (n, K) uint8 binary selection matrix
    symbols: np.ndarray | None = None  # quantized latent symbols (lossy mode)
    basis_raw: np.ndarray | None = None  # (n, C, H, W) float64 (lossless mode)


@dataclass(frozen=True)
class DecodedContainer:
    header: ContainerHeader
    payloads: tuple[LevelPayload, ...]
    levels_used: int


def _pack_header(header: ContainerHeader) -> bytes:
    S, T = header.angular_dims
    W, H = header.spatial_dims
    parts = [
        MAGIC,
        struct.pack("<HH", VERSION, 1 if header.lossless else 0),
        struct.pack("<5I", S, T, W, H, header.channels),
        struct.pack("<I", header.layer_count),
        struct.pack(f"<{header.layer_count}i", *header.depths),
        struct.pack("<d", header.layer_bound),
        struct.pack("<I", header.level_count),
        struct.pack(f"<{header.level_count}I", *header.partition),
        struct.pack("<I", header.patch),
        struct.pack("<I", len(header.layer_sizes)),
        struct.pack(f"<{len(header.layer_sizes)}I", *header.layer_sizes),
        struct.pack("<I", header.quant_bits),
        np.ascontiguousarray(header.norm_records, dtype="<f8").tobytes(),
    ]
    return b"".join(parts)


class _Cursor:
    def __init__(self, data: bytes):
        self.data = data
        self.offset = 0

    def take(self, count: int, what: str) -> bytes:
        if self.offset + count > len(self.data):
            raise ContainerError(f"container ends inside {what}")
        chunk = self.data[self.offset : self.offset + count]
        self.offset += count
        return chunk

    def unpack(self, fmt: str, what: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt), what))

    @property
    def remaining(self) -> int:
        return len(self.data) - self.offset


def _parse_header(cursor: _Cursor) -> ContainerHeader:
    magic = cursor.take(4, "magic")
    if magic != MAGIC:
        raise ContainerError(f"bad container magic {magic!r}")
    version, flags = cursor.unpack("<HH", "version")
    if version != VERSION:
        raise ContainerError(f"unsupported container version {version}")
    S, T, W, H, channels = cursor.unpack("<5I", "dimensions")
    (layer_count,) = cursor.unpack("<I", "layer count")
    depths = cursor.unpack(f"<{layer_count}i", "depths")
    (layer_bound,) = cursor.unpack("<d", "layer bound")
    (level_count,) = cursor.unpack("<I", "level count")
    partition = cursor.unpack(f"<{level_count}I", "partition")
    (patch,) = cursor.unpack("<I", "patch size")
    (n_sizes,) = cursor.unpack("<I", "layer size count")
    layer_sizes = cursor.unpack(f"<{n_sizes}I", "layer sizes")
    (quant_bits,) = cursor.unpack("<I", "quantizer bits")
    total = sum(partition)
    raw = cursor.take(8 * total * channels * 2, "normalization records")
    records = np.frombuffer(raw, dtype="<f8").reshape(total, channels, 2).copy()
    if layer_count < 1 or level_count < 1 or min(partition, default=0) < 1:
        raise ContainerError("degenerate layer or level structure")
    if not MIN_QUANT_BITS <= quant_bits <= MAX_QUANT_BITS:
        raise ContainerError(f"quantizer bits {quant_bits} out of range")
    return ContainerHeader(
        angular_dims=(S, T),
        spatial_dims=(W, H),
        channels=channels,
        depths=depths,
        layer_bound=layer_bound,
        partition=partition,
        patch=patch,
        layer_sizes=layer_sizes,
        quant_bits=quant_bits,
        lossless=bool(flags & 1),
        norm_records=records,
    )


def _pack_section(header: ContainerHeader, payload: LevelPayload, n: int) -> bytes:
    K = header.layer_count
    codes = np.asarray(payload.codes, dtype=np.uint8)
    if codes.shape != (n, K):
        raise ValueError(f"level codes must be ({n}, {K}), got {codes.shape}")
    body = [struct.pack("<I", n), np.packbits(codes.reshape(-1)).tobytes()]
    if header.lossless:
        if payload.basis_raw is None:
            raise ValueError("lossless container needs raw basis images")
        W, H = header.spatial_dims
        basis = np.asarray(payload.basis_raw, dtype=np.float64)
        if basis.shape != (n, header.channels, H, W):
            raise ValueError(
                f"raw basis must be ({n}, {header.channels}, {H}, {W}), "
                f"got {basis.shape}"
            )
        body.append(np.ascontiguousarray(basis, dtype="<f8").tobytes())
    else:
        if payload.symbols is None:
            raise ValueError("lossy container needs quantized symbols")
        symbols = np.asarray(payload.symbols).ravel()
        stream = entropy_encode(symbols, header.quant_bits)
        body.append(struct.pack("<I", symbols.size))
        body.append(struct.pack("<I", len(stream)))
        body.append(stream)
    blob = b"".join(body)
    return struct.pack(">I", len(blob)) + blob


def _parse_section(header: ContainerHeader, blob: bytes, n: int) -> LevelPayload:
    cursor = _Cursor(blob)
    (stored_n,) = cursor.unpack("<I", "component count")
    if stored_n != n:
        raise ContainerError(
            f"section declares {stored_n} components, header says {n}"
        )
    K = header.layer_count
    packed = cursor.take((n * K + 7) // 8, "code matrix")
    codes = np.unpackbits(np.frombuffer(packed, dtype=np.uint8), count=n * K)
    codes = codes.reshape(n, K).astype(np.uint8)
    if header.lossless:
        W, H = header.spatial_dims
        count = n * header.channels * H * W
        raw = cursor.take(8 * count, "raw basis images")
        basis = np.frombuffer(raw, dtype="<f8").reshape(n, header.channels, H, W)
        payload = LevelPayload(codes=codes, basis_raw=basis.copy())
    else:
        (symbol_count,) = cursor.unpack("<I", "symbol count")
        (stream_len,) = cursor.unpack("<I", "stream length")
        stream = cursor.take(stream_len, "entropy stream")
        symbols = entropy_decode(stream, symbol_count, header.quant_bits)
        payload = LevelPayload(codes=codes, symbols=symbols)
    if cursor.remaining:
        raise ContainerError(f"{cursor.remaining} stray bytes inside section")
    return payload


def write_container(header: ContainerHeader, payloads) -> bytes:
    payloads = tuple(payloads)
    if len(payloads) != header.level_count:
        raise ValueError(
            f"expected {header.level_count} level payloads, got {len(payloads)}"
        )
    parts = [_pack_header(header)]
    for payload, n in zip(payloads, header.partition):
        parts.append(_pack_section(header, payload, n))
    return b"".join(parts)


def read_container(data: bytes, max_level: int | None = None) -> DecodedContainer:
    """Parse header plus up to max_level sections.

    Truncation exactly at a section boundary is a valid shorter container:
    the result simply reports fewer levels_used. Truncation inside a section
    raises TruncatedSectionError carrying the last complete level.
    """
    cursor = _Cursor(data)
    header = _parse_header(cursor)
    if max_level is None:
        max_level = header.level_count
    if not 1 <= max_level <= header.level_count:
        raise ValueError(
            f"max_level must be in [1, {header.level_count}], got {max_level}"
        )
    payloads = []
    for level in range(max_level):
        if cursor.remaining == 0:
            break  # clean boundary: a shorter but valid container
        try:
            (length,) = cursor.unpack(">I", "section length")
            blob = cursor.take(length, f"section {level + 1}")
            payloads.append(_parse_section(header, blob, header.partition[level]))
        except (ContainerError, TruncatedStreamError) as exc:
            raise TruncatedSectionError(
                f"container truncated inside section {level + 1}: {exc}",
                last_complete_level=level,
            ) from exc
    if not payloads:
        raise TruncatedSectionError(
            "container holds no complete section", last_complete_level=0
        )
    return DecodedContainer(
        header=header, payloads=tuple(payloads), levels_used=len(payloads)
    )


def packed_header_size(header: ContainerHeader) -> int:
    """Byte length of the serialized header (sections start right after)."""
    return len(_pack_header(header))


def section_boundaries(data: bytes) -> list[int]:
    """Byte offsets at which each section ends (after the header)."""
    cursor = _Cursor(data)
    header = _parse_header(cursor)
    boundaries = []
    for _ in range(header.level_count):
        (length,) = cursor.unpack(">I", "section length")
        cursor.take(length, "section body")
        boundaries.append(cursor.offset)
    if cursor.remaining:
        raise ContainerError(f"{cursor.remaining} trailing bytes after last section")
    return boundaries


def truncate_container(data: bytes, levels: int) -> bytes:
    """Cut a container down to its first `levels` sections."""
    boundaries = section_boundaries(data)
    if not 1 <= levels <= len(boundaries):
        raise ValueError(f"levels must be in [1, {len(boundaries)}], got {levels}")
    return data[: boundaries[levels - 1]]


def bits_per_pixel(byte_count: int, angular_dims, spatial_dims) -> float:
    S, T = angular_dims
    W, H = spatial_dims
    return byte_count * 8.0 / (S * T * W * H)


# ---------------------------------------------------------------------------
# latent-plane export hook for external video codecs

FRAME_ROWS = 64


def export_latent_planes(codes: np.ndarray, path) -> list[Path]:
    """Tile latent vectors into 8-bit PGM frames for an external encoder.

    Rows are patches, columns latent dimensions. Frames hold FRAME_ROWS rows
    each; the final frame is zero-padded to full height. Returns the written
    frame paths (path_0000.pgm, path_0001.pgm, ...).
    """
    codes = np.asarray(codes, dtype=np.float64)
    if codes.ndim != 2 or codes.size == 0:
        raise ValueError(f"codes must be a non-empty (count, dim) array, got {codes.shape}")
    if codes.min() < 0.0 or codes.max() > 1.0:
        raise ValueError("latent codes must lie in [0, 1]")
    count, dim = codes.shape
    frames = -(-count // FRAME_ROWS)
    padded = np.zeros((frames * FRAME_ROWS, dim), dtype=np.float64)
    padded[:count] = codes
    pixels = np.floor(padded * 255.0 + 0.5).astype(np.uint8)
    base = Path(path)
    written = []
    for index in range(frames):
        frame = pixels[index * FRAME_ROWS : (index + 1) * FRAME_ROWS]
        target = base.with_name(f"{base.name}_{index:04d}.pgm")
        write_pnm(target, frame)
        written.append(target)
    return written


def import_latent_planes(path, count: int | None = None) -> np.ndarray:
    """Read back exported latent frames; inverse of export_latent_planes.

    With count given, padding rows are stripped; otherwise every row is
    returned (zero padding included).
    """
    base = Path(path)
    frames = sorted(base.parent.glob(f"{base.name}_*.pgm"))
    if not frames:
        raise ValueError(f"no latent frames matching {base.name}_*.pgm in {base.parent}")
    rows = []
    width = None
    for frame in frames:
        pixels = read_pnm(frame)
        if pixels.ndim != 2 or pixels.dtype != np.uint8:
            raise ValueError(f"{frame} is not an 8-bit grayscale frame")
        if pixels.shape[0] != FRAME_ROWS:
            raise ValueError(
                f"{frame} has {pixels.shape[0]} rows, expected {FRAME_ROWS}"
            )
        if width is None:
            width = pixels.shape[1]
        elif pixels.shape[1] != width:
            raise ValueError(
                f"{frame} is {pixels.shape[1]} wide, other frames are {width}"
            )
        rows.append(pixels)
    stacked = np.concatenate(rows, axis=0).astype(np.float64) / 255.0
    if count is not None:
        if count > stacked.shape[0]:
            raise ValueError(
                f"requested {count} rows but frames hold only {stacked.shape[0]}"
            )
        stacked = stacked[:count]
    return stacked
