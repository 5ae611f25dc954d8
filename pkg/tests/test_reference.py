"""Reference generation and the binary cache format."""

import struct

import numpy as np
import pytest

from wavebench.problem import WaveProblem
from wavebench.reference import (MAGIC, VERSION, CacheError, ReferenceSolution,
                                 fnv1a64, generate_reference, write_reference,
                                 load_reference, cache_filename)


def test_fnv1a64_test_vectors():
    # standard 64-bit FNV-1a vectors
    assert int(fnv1a64(b"")) == 14695981039346656037
    assert int(fnv1a64(b"a")) == 0xAF63DC4C8601EC8C
    assert int(fnv1a64(b"foobar")) == 0x85944171F73967E8


def test_fnv1a64_chaining():
    whole = fnv1a64(b"hello world")
    part = fnv1a64(b" world", fnv1a64(b"hello"))
    assert int(whole) == int(part)


def _small_ref(ic="polynomial", nx=6, dt=1.0 / 12):
    prob = WaveProblem(ic=ic)
    return prob, generate_reference(prob, nx, nx, dt, cache_dir=None)


def test_generate_shapes_and_boundary():
    prob, ref = _small_ref()
    assert ref.values.shape == (13, 7, 7)
    assert ref.Nt_ref == 12
    assert np.all(ref.values[:, 0, :] == 0)
    assert np.all(ref.values[:, -1, :] == 0)
    assert np.all(ref.values[:, :, 0] == 0)
    assert np.all(ref.values[:, :, -1] == 0)
    # level 0 is the nodal interpolant of the initial condition
    xs = np.linspace(0, 1, 7)
    X, Y = np.meshgrid(xs, xs)
    np.testing.assert_allclose(ref.values[0], X * (1 - X) * Y * (1 - Y),
                               atol=1e-14)


def test_at_time_interpolates_linearly():
    _, ref = _small_ref()
    dt = ref.dt_ref
    np.testing.assert_allclose(ref.at_time(3 * dt), ref.values[3])
    blend = 0.25 * ref.values[3] + 0.75 * ref.values[4]
    np.testing.assert_allclose(ref.at_time(3.75 * dt), blend, atol=1e-14)
    with pytest.raises(ValueError):
        ref.at_time(1.5)


def test_header_layout(tmp_path):
    prob, ref = _small_ref()
    path = tmp_path / "ref.wben"
    write_reference(ref, path)
    raw = path.read_bytes()
    magic, ver, nx, ny, Nt = struct.unpack_from("<4sIIII", raw)
    assert magic == MAGIC == b"WBEN"
    assert ver == VERSION == 1
    assert (nx, ny, Nt) == (6, 6, 12)
    L1, L2, c, T, dt = struct.unpack_from("<5d", raw, 20)
    assert (L1, L2, c, T) == (1.0, 1.0, 1.0, 1.0)
    assert dt == pytest.approx(1.0 / 12)
    n_vals = 13 * 7 * 7
    assert len(raw) == 60 + 8 * n_vals + 8
    # values are little-endian f64, time-major
    vals = np.frombuffer(raw, dtype="<f8", count=n_vals, offset=60)
    np.testing.assert_array_equal(vals.reshape(13, 7, 7), ref.values)
    # trailing checksum covers everything before it
    (stored,) = struct.unpack_from("<Q", raw, len(raw) - 8)
    assert stored == int(fnv1a64(raw[:-8]))


def test_roundtrip(tmp_path):
    prob, ref = _small_ref()
    path = tmp_path / "ref.wben"
    write_reference(ref, path)
    back = load_reference(path, prob)
    np.testing.assert_array_equal(np.asarray(back.values), ref.values)
    assert back.dt_ref == ref.dt_ref
    assert back.grid_nx == 6


def test_corruption_detected(tmp_path):
    prob, ref = _small_ref()
    path = tmp_path / "ref.wben"
    write_reference(ref, path)
    raw = bytearray(path.read_bytes())
    raw[200] ^= 0xFF
    path.write_bytes(bytes(raw))
    with pytest.raises(CacheError, match="checksum"):
        load_reference(path, prob)


def test_truncation_detected(tmp_path):
    prob, ref = _small_ref()
    path = tmp_path / "ref.wben"
    write_reference(ref, path)
    path.write_bytes(path.read_bytes()[:100])
    with pytest.raises(CacheError):
        load_reference(path, prob)


def test_bad_magic_detected(tmp_path):
    prob, ref = _small_ref()
    path = tmp_path / "ref.wben"
    write_reference(ref, path)
    raw = bytearray(path.read_bytes())
    raw[:4] = b"NOPE"
    path.write_bytes(bytes(raw))
    with pytest.raises(CacheError, match="magic"):
        load_reference(path, prob)


def test_metadata_mismatch_detected(tmp_path):
    prob, ref = _small_ref()
    path = tmp_path / "ref.wben"
    write_reference(ref, path)
    other = WaveProblem(ic="polynomial", c=2.0)
    with pytest.raises(CacheError, match="c="):
        load_reference(path, other)


def test_cache_hit_and_regeneration(tmp_path):
    prob = WaveProblem(ic="polynomial")
    a = generate_reference(prob, 6, 6, 1.0 / 12, cache_dir=tmp_path)
    files = list(tmp_path.glob("*.wben"))
    assert len(files) == 1
    first_bytes = files[0].read_bytes()
    # second call must hit the cache and agree exactly
    b = generate_reference(prob, 6, 6, 1.0 / 12, cache_dir=tmp_path)
    np.testing.assert_array_equal(np.asarray(a.values), np.asarray(b.values))
    assert files[0].read_bytes() == first_bytes
    # a corrupted file is silently regenerated
    raw = bytearray(first_bytes)
    raw[-1] ^= 0xFF
    files[0].write_bytes(bytes(raw))
    c = generate_reference(prob, 6, 6, 1.0 / 12, cache_dir=tmp_path)
    np.testing.assert_array_equal(np.asarray(a.values), np.asarray(c.values))
    assert files[0].read_bytes() == first_bytes


def test_cache_filename_fingerprint():
    a = WaveProblem(ic="polynomial")
    b = WaveProblem(ic="polynomial", c=2.0)
    name_a = cache_filename(a, 100, 100, 200)
    name_b = cache_filename(b, 100, 100, 200)
    assert name_a != name_b
    assert name_a.startswith("ref_polynomial_100x100_nt200_")
    assert name_a == cache_filename(WaveProblem(ic="polynomial"), 100, 100, 200)


def test_generation_deterministic(tmp_path):
    prob = WaveProblem(ic="mollifier")
    a = generate_reference(prob, 8, 8, 1.0 / 16, cache_dir=tmp_path / "a")
    b = generate_reference(prob, 8, 8, 1.0 / 16, cache_dir=tmp_path / "b")
    fa = next((tmp_path / "a").glob("*.wben"))
    fb = next((tmp_path / "b").glob("*.wben"))
    assert fa.read_bytes() == fb.read_bytes()


def test_dt_validation():
    prob = WaveProblem(ic="polynomial")
    with pytest.raises(ValueError):
        generate_reference(prob, 6, 6, -0.1)
    with pytest.raises(ValueError):
        generate_reference(prob, 6, 6, 0.3)      # does not divide T = 1
