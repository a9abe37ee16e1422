"""Quantizer, arithmetic coder, container format, latent-plane export."""

import numpy as np
import pytest

from lflc.bitstream import (
    ContainerHeader,
    DecodedContainer,
    FRAME_ROWS,
    LevelPayload,
    bits_per_pixel,
    dequantize,
    entropy_decode,
    entropy_encode,
    export_latent_planes,
    import_latent_planes,
    packed_header_size,
    quantize,
    read_container,
    section_boundaries,
    truncate_container,
    write_container,
)
from lflc.errors import ContainerError, TruncatedSectionError, TruncatedStreamError


def make_header(levels=(2, 2), channels=1, lossless=False, quant_bits=8,
                spatial=(6, 4), layers=3):
    total = sum(levels)
    records = np.zeros((total, channels, 2))
    records[:, :, 1] = 1.0
    return ContainerHeader(
        angular_dims=(3, 3),
        spatial_dims=spatial,
        channels=channels,
        depths=tuple(range(-(layers // 2), layers - layers // 2)),
        layer_bound=1.0 / layers,
        partition=tuple(levels),
        patch=2,
        layer_sizes=(4, 6, 3, 2),
        quant_bits=quant_bits,
        lossless=lossless,
        norm_records=records,
    )


def make_payloads(header, rng):
    payloads = []
    W, H = header.spatial_dims
    for n in header.partition:
        codes = (rng.random((n, header.layer_count)) < 0.5).astype(np.uint8)
        if header.lossless:
            basis = rng.random((n, header.channels, H, W))
            payloads.append(LevelPayload(codes=codes, basis_raw=basis))
        else:
            symbols = rng.integers(
                0, 1 << header.quant_bits, size=n * 10, dtype=np.uint32
            )
            payloads.append(LevelPayload(codes=codes, symbols=symbols))
    return payloads


class TestQuantizer:
    def test_closed_form_symbols(self):
        out = quantize([0.0, 1 / 3, 0.5, 1.0], 2)
        np.testing.assert_array_equal(out, [0, 1, 2, 3])

    def test_rounding_is_nearest(self):
        # with 3 levels (2 bits would be 4), use 2 bits: scale 3
        assert quantize([0.49999 / 3], 2)[0] == 0
        assert quantize([0.50001 / 3], 2)[0] == 1

    def test_roundtrip_error_bound(self):
        rng = np.random.default_rng(40)
        values = rng.random(500)
        for bits in (2, 5, 8, 12, 16):
            back = dequantize(quantize(values, bits), bits)
            assert np.max(np.abs(back - values)) <= 0.5 / ((1 << bits) - 1) + 1e-12

    def test_monotone(self):
        values = np.linspace(0, 1, 1000)
        symbols = quantize(values, 6)
        assert np.all(np.diff(symbols.astype(int)) >= 0)

    def test_bit_range_enforced(self):
        with pytest.raises(ValueError):
            quantize([0.5], 1)
        with pytest.raises(ValueError):
            quantize([0.5], 17)
        with pytest.raises(ValueError):
            dequantize([0], 1)
        quantize([0.5], 2)
        quantize([0.5], 16)

    def test_domain_enforced(self):
        with pytest.raises(ValueError):
            quantize([-0.01], 8)
        with pytest.raises(ValueError):
            quantize([1.01], 8)
        with pytest.raises(ValueError):
            dequantize([256], 8)


class TestEntropyCodec:
    def test_roundtrips(self):
        rng = np.random.default_rng(41)
        for bits in (2, 3, 8, 12, 16):
            for count in (1, 2, 37, 1000):
                symbols = rng.integers(0, 1 << bits, size=count, dtype=np.uint32)
                data = entropy_encode(symbols, bits)
                back = entropy_decode(data, count, bits)
                np.testing.assert_array_equal(back, symbols)

    def test_empty_roundtrip(self):
        data = entropy_encode(np.empty(0, dtype=np.uint32), 8)
        assert entropy_decode(data, 0, 8).size == 0

    def test_constant_stream_compresses_hard(self):
        data = entropy_encode(np.zeros(10_000, dtype=np.uint32), 8)
        assert len(data) < 200

    def test_skew_beats_uniform(self):
        rng = np.random.default_rng(42)
        uniform = rng.integers(0, 256, size=5000, dtype=np.uint32)
        skewed = rng.choice(
            np.arange(256, dtype=np.uint32), size=5000,
            p=np.array([0.9] + [0.1 / 255] * 255),
        )
        assert len(entropy_encode(skewed, 8)) < 0.5 * len(entropy_encode(uniform, 8))

    def test_deterministic(self):
        rng = np.random.default_rng(43)
        symbols = rng.integers(0, 64, size=400, dtype=np.uint32)
        assert entropy_encode(symbols, 6) == entropy_encode(symbols, 6)

    def test_truncated_stream_raises(self):
        rng = np.random.default_rng(44)
        symbols = rng.integers(0, 256, size=1000, dtype=np.uint32)
        data = entropy_encode(symbols, 8)
        with pytest.raises(TruncatedStreamError):
            entropy_decode(data[: len(data) // 2], 1000, 8)

    def test_symbol_validation(self):
        with pytest.raises(ValueError):
            entropy_encode(np.array([256], dtype=np.int64), 8)
        with pytest.raises(ValueError):
            entropy_encode(np.array([-1], dtype=np.int64), 8)
        with pytest.raises(ValueError):
            entropy_decode(b"", -1, 8)


class TestContainer:
    def test_lossy_roundtrip(self):
        rng = np.random.default_rng(45)
        header = make_header()
        payloads = make_payloads(header, rng)
        data = write_container(header, payloads)
        decoded = read_container(data)
        assert isinstance(decoded, DecodedContainer)
        assert decoded.levels_used == 2
        got = decoded.header
        assert got.angular_dims == header.angular_dims
        assert got.spatial_dims == header.spatial_dims
        assert got.channels == header.channels
        assert got.depths == header.depths
        assert got.layer_bound == header.layer_bound
        assert got.partition == header.partition
        assert got.patch == header.patch
        assert got.layer_sizes == header.layer_sizes
        assert got.quant_bits == header.quant_bits
        assert got.lossless == header.lossless
        np.testing.assert_array_equal(got.norm_records, header.norm_records)
        for sent, back in zip(payloads, decoded.payloads):
            np.testing.assert_array_equal(sent.codes, back.codes)
            np.testing.assert_array_equal(sent.symbols, back.symbols)
            assert back.basis_raw is None

    def test_lossless_roundtrip_is_bit_exact(self):
        rng = np.random.default_rng(46)
        header = make_header(levels=(1, 2, 1), channels=3, lossless=True)
        payloads = make_payloads(header, rng)
        data = write_container(header, payloads)
        decoded = read_container(data)
        for sent, back in zip(payloads, decoded.payloads):
            np.testing.assert_array_equal(sent.codes, back.codes)
            assert np.array_equal(sent.basis_raw, back.basis_raw)
            assert back.symbols is None

    def test_max_level_limits_parsing(self):
        rng = np.random.default_rng(47)
        header = make_header(levels=(2, 1, 1))
        data = write_container(header, make_payloads(header, rng))
        decoded = read_container(data, max_level=1)
        assert decoded.levels_used == 1
        with pytest.raises(ValueError):
            read_container(data, max_level=0)
        with pytest.raises(ValueError):
            read_container(data, max_level=4)

    def test_boundary_truncation_is_a_valid_container(self):
        rng = np.random.default_rng(48)
        header = make_header(levels=(2, 2))
        payloads = make_payloads(header, rng)
        data = write_container(header, payloads)
        short = truncate_container(data, 1)
        assert len(short) < len(data)
        decoded = read_container(short)
        assert decoded.levels_used == 1
        np.testing.assert_array_equal(decoded.payloads[0].codes, payloads[0].codes)
        np.testing.assert_array_equal(decoded.payloads[0].symbols, payloads[0].symbols)

    def test_mid_section_truncation_reports_last_level(self):
        rng = np.random.default_rng(49)
        header = make_header(levels=(2, 2))
        data = write_container(header, make_payloads(header, rng))
        first_end = section_boundaries(data)[0]
        with pytest.raises(TruncatedSectionError) as info:
            read_container(data[: first_end + 3])
        assert info.value.last_complete_level == 1

    def test_header_only_has_no_sections(self):
        rng = np.random.default_rng(50)
        header = make_header()
        data = write_container(header, make_payloads(header, rng))
        with pytest.raises(TruncatedSectionError) as info:
            read_container(data[: packed_header_size(header)])
        assert info.value.last_complete_level == 0

    def test_truncation_inside_header(self):
        rng = np.random.default_rng(51)
        header = make_header()
        data = write_container(header, make_payloads(header, rng))
        with pytest.raises(ContainerError):
            read_container(data[:10])

    def test_bad_magic(self):
        with pytest.raises(ContainerError):
            read_container(b"XXXX" + b"\x00" * 100)

    def test_unknown_version(self):
        rng = np.random.default_rng(52)
        header = make_header()
        data = bytearray(write_container(header, make_payloads(header, rng)))
        data[4] = 0xFF
        with pytest.raises(ContainerError):
            read_container(bytes(data))

    def test_section_boundaries_and_trailing_bytes(self):
        rng = np.random.default_rng(53)
        header = make_header(levels=(1, 1, 2))
        data = write_container(header, make_payloads(header, rng))
        boundaries = section_boundaries(data)
        assert len(boundaries) == 3
        assert boundaries == sorted(boundaries)
        assert boundaries[-1] == len(data)
        with pytest.raises(ContainerError):
            section_boundaries(data + b"\x00")

    def test_truncate_levels_range(self):
        rng = np.random.default_rng(54)
        header = make_header(levels=(1, 1))
        data = write_container(header, make_payloads(header, rng))
        with pytest.raises(ValueError):
            truncate_container(data, 0)
        with pytest.raises(ValueError):
            truncate_container(data, 3)
        assert truncate_container(data, 2) == data

    def test_payload_count_must_match_partition(self):
        rng = np.random.default_rng(55)
        header = make_header(levels=(2, 2))
        payloads = make_payloads(header, rng)
        with pytest.raises(ValueError):
            write_container(header, payloads[:1])

    def test_lossless_payload_needs_basis(self):
        header = make_header(levels=(1,), lossless=True)
        codes = np.ones((1, 3), dtype=np.uint8)
        with pytest.raises(ValueError):
            write_container(header, [LevelPayload(codes=codes, symbols=np.zeros(4, np.uint32))])

    def test_header_records_shape_validated(self):
        with pytest.raises(ValueError):
            make_header(levels=(2, 2), channels=1).__class__(
                angular_dims=(3, 3),
                spatial_dims=(4, 4),
                channels=1,
                depths=(0,),
                layer_bound=1.0,
                partition=(2,),
                patch=2,
                layer_sizes=(4, 6, 3, 2),
                quant_bits=8,
                lossless=False,
                norm_records=np.zeros((3, 1, 2)),
            )

    def test_bits_per_pixel_closed_form(self):
        assert bits_per_pixel(100, (5, 5), (4, 4)) == 2.0


class TestLatentPlanes:
    def test_export_import_roundtrip(self, tmp_path):
        rng = np.random.default_rng(56)
        codes = rng.random((100, 8))
        written = export_latent_planes(codes, tmp_path / "latent")
        assert [p.name for p in written] == ["latent_0000.pgm", "latent_0001.pgm"]
        back = import_latent_planes(tmp_path / "latent", count=100)
        assert back.shape == (100, 8)
        assert np.max(np.abs(back - codes)) <= 0.5 / 255 + 1e-12

    def test_padding_rows_are_zero(self, tmp_path):
        rng = np.random.default_rng(57)
        codes = rng.random((70, 4))
        export_latent_planes(codes, tmp_path / "latent")
        full = import_latent_planes(tmp_path / "latent")
        assert full.shape == (2 * FRAME_ROWS, 4)
        np.testing.assert_array_equal(full[70:], 0.0)

    def test_validation(self, tmp_path):
        with pytest.raises(ValueError):
            export_latent_planes(np.empty((0, 4)), tmp_path / "x")
        with pytest.raises(ValueError):
            export_latent_planes(np.full((4, 4), 1.5), tmp_path / "x")
        with pytest.raises(ValueError):
            export_latent_planes(np.zeros(4), tmp_path / "x")
        with pytest.raises(ValueError):
            import_latent_planes(tmp_path / "missing")
        codes = np.random.default_rng(58).random((FRAME_ROWS, 3))
        export_latent_planes(codes, tmp_path / "latent")
        with pytest.raises(ValueError):
            import_latent_planes(tmp_path / "latent", count=FRAME_ROWS + 1)
