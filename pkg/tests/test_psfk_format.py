import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import psfkit as pk
from psfkit import psfk


DTYPES = [np.float32, np.float64, np.complex64, np.complex128, np.uint8, np.bool_]


@pytest.mark.parametrize("dtype", DTYPES)
def test_round_trip_preserves_dtype_and_bits(tmp_path, dtype):
    rng = np.random.default_rng(0)
    arr = rng.uniform(0, 200, size=(4, 7))
    if np.issubdtype(dtype, np.complexfloating):
        arr = (arr + 1j * arr[::-1]).astype(dtype)
    else:
        arr = arr.astype(dtype)
    path = tmp_path / "a.psfk"
    pk.write_array(path, arr)
    back = pk.read_array(path)
    assert back.dtype == np.dtype(dtype)
    assert np.array_equal(back, arr)


def test_header_layout_is_fixed(tmp_path):
    arr = np.array([[1.5, -2.0], [0.25, 8.0], [0.0, 1.0]], dtype=np.float64)
    path = tmp_path / "h.psfk"
    pk.write_array(path, arr)
    blob = path.read_bytes()
    assert blob[:4] == b"PSFK"
    version, code, ndim = struct.unpack("<IBB", blob[4:10])
    assert (version, code, ndim) == (1, 1, 2)
    assert blob[10:24] == b"\x00" * 14
    assert struct.unpack("<QQ", blob[24:40]) == (3, 2)
    # payload is row-major little-endian float64
    assert blob[40:] == arr.astype("<f8").tobytes()
    assert len(blob) == 40 + 3 * 2 * 8


def test_domain_types_store_their_payload(tmp_path, rng):
    taps = rng.standard_normal((3, 5)) + 1j * rng.standard_normal((3, 5))
    objs = {
        "img": pk.ComplexImage(taps, 0.1, 0.1),
        "kernel": pk.FilterKernel.from_taps(taps),
        "mask": pk.RegionMask(taps.real > 0),
        "w": pk.CoherenceMap(np.full((3, 5), 0.5)),
        "env": pk.EnvelopeImage(np.abs(taps), 0.1, 0.1),
        "map": pk.ScattererMap(taps.real, 0.1, 0.1),
        "rf": pk.ChannelData(taps.real, 1.0, 0.0),
    }
    for name, obj in objs.items():
        path = tmp_path / f"{name}.psfk"
        pk.write_array(path, obj)
        back = pk.read_array(path)
        attr = psfk._payload(obj)
        assert np.array_equal(back, attr), name


def test_psf_round_trip_recenters(tmp_path, psf_ideal):
    path = tmp_path / "psf.psfk"
    pk.write_array(path, psf_ideal)
    back = pk.center_psf(pk.read_array(path))
    assert np.array_equal(back.data, psf_ideal.data)


def test_bad_magic(tmp_path):
    path = tmp_path / "x.psfk"
    path.write_bytes(b"NOPE" + b"\x00" * 36)
    with pytest.raises(psfk.BadMagicError):
        pk.read_array(path)


def test_unsupported_version(tmp_path):
    path = tmp_path / "x.psfk"
    path.write_bytes(b"PSFK" + struct.pack("<IBB", 9, 1, 2) + b"\x00" * 14
                     + struct.pack("<QQ", 1, 1) + b"\x00" * 8)
    with pytest.raises(psfk.VersionError):
        pk.read_array(path)


def test_truncated_header_and_payload(tmp_path):
    path = tmp_path / "x.psfk"
    path.write_bytes(b"PSFK\x01")
    with pytest.raises(psfk.TruncatedError):
        pk.read_array(path)
    pk.write_array(path, np.ones((4, 4)))
    blob = path.read_bytes()
    path.write_bytes(blob[:-8])
    with pytest.raises(psfk.TruncatedError):
        pk.read_array(path)


def test_reserved_bytes_must_be_zero(tmp_path):
    path = tmp_path / "x.psfk"
    pk.write_array(path, np.ones((2, 2)))
    blob = bytearray(path.read_bytes())
    blob[15] = 7
    path.write_bytes(bytes(blob))
    with pytest.raises(psfk.PsfkError, match="reserved"):
        pk.read_array(path)


def test_wrong_ndim_and_unknown_code(tmp_path):
    path = tmp_path / "x.psfk"
    with pytest.raises(psfk.DimensionError):
        pk.write_array(path, np.ones(3))
    pk.write_array(path, np.ones((2, 2)))
    blob = bytearray(path.read_bytes())
    blob[9] = 3  # ndim
    path.write_bytes(bytes(blob))
    with pytest.raises(psfk.DimensionError):
        pk.read_array(path)
    blob[9] = 2
    blob[8] = 250  # dtype code
    path.write_bytes(bytes(blob))
    with pytest.raises(psfk.PsfkError, match="dtype"):
        pk.read_array(path)


def test_unsupported_dtype_rejected_on_write(tmp_path):
    with pytest.raises(psfk.PsfkError, match="dtype"):
        pk.write_array(tmp_path / "x.psfk", np.ones((2, 2), dtype=np.int32))


def test_accepts_str_and_path(tmp_path):
    arr = np.eye(3)
    pk.write_array(str(tmp_path / "s.psfk"), arr)
    assert np.array_equal(pk.read_array(str(tmp_path / "s.psfk")), arr)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 12), st.integers(1, 12), st.sampled_from(DTYPES),
       st.integers(0, 2 ** 31))
def test_round_trip_property(nz, nx, dtype, seed):
    import tempfile
    rng = np.random.default_rng(seed)
    arr = (rng.uniform(0, 5, size=(nz, nx)) * 10).astype(dtype)
    with tempfile.NamedTemporaryFile(suffix=".psfk") as fh:
        pk.write_array(fh.name, arr)
        back = pk.read_array(fh.name)
    assert back.dtype == np.dtype(dtype) and np.array_equal(back, arr)
