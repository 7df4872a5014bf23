import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from embcomp.store import (
    HEADER_SIZE,
    EmbeddingMatrix,
    SyntheticSpec,
    generate_synthetic,
    read_batches,
    read_header,
    read_matrix,
    write_matrix,
)

from conftest import make_matrix


def test_header_is_24_bytes_and_little_endian(tmp_path):
    path = str(tmp_path / "two.emb")
    write_matrix(make_matrix([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]], ["a", "b"]), path)
    raw = open(path, "rb").read()
    # 2 vectors of dim 3: 24 header bytes + 24 payload bytes
    assert len(raw) == 48
    assert HEADER_SIZE == 24
    magic, version, dtype_code, dim, count = struct.unpack("<4sIIIQ", raw[:24])
    assert magic == b"CEMB"
    assert version == 1
    assert dtype_code == 0
    assert dim == 3
    assert count == 2
    payload = np.frombuffer(raw[24:], dtype="<f4")
    assert payload.tolist() == [1.0, 2.0, 3.0, 4.0, 5.0, 6.0]


def test_ids_sidecar_has_exactly_count_lines(tmp_path):
    path = str(tmp_path / "m.emb")
    write_matrix(make_matrix(np.ones((3, 2)), ["x", "y", "z"]), path)
    text = open(path + ".ids", encoding="utf-8").read()
    assert text == "x\ny\nz\n"


def test_roundtrip_preserves_bits_and_ids(tmp_path, rng):
    path = str(tmp_path / "rt.emb")
    values = rng.standard_normal((17, 5)).astype(np.float32)
    ids = [f"doc-{i}" for i in range(17)]
    write_matrix(EmbeddingMatrix(ids, values), path)
    back = read_matrix(path)
    assert back.ids == ids
    assert back.values.dtype == np.float32
    assert np.array_equal(back.values, values)


def test_read_batches_partition_sizes(tmp_path, rng):
    path = str(tmp_path / "b.emb")
    values = rng.standard_normal((10, 4)).astype(np.float32)
    write_matrix(make_matrix(values), path)
    batches = list(read_batches(path, batch_size=4))
    assert [b.count for b in batches] == [4, 4, 2]
    assert np.array_equal(np.vstack([b.values for b in batches]), values)
    assert [i for b in batches for i in b.ids] == [f"doc{i}" for i in range(10)]


def test_write_rejects_non_finite_with_location(tmp_path):
    values = np.ones((3, 4), dtype=np.float32)
    values[1, 2] = np.nan
    with pytest.raises(ValueError, match=r"non-finite value at row 1, col 2"):
        write_matrix(make_matrix(values), str(tmp_path / "bad.emb"))
    values[1, 2] = np.inf
    with pytest.raises(ValueError, match=r"non-finite value at row 1, col 2"):
        write_matrix(make_matrix(values), str(tmp_path / "bad.emb"))


def test_write_rejects_duplicate_ids(tmp_path):
    with pytest.raises(ValueError, match="duplicate id"):
        write_matrix(make_matrix(np.ones((2, 2)), ["a", "a"]), str(tmp_path / "d.emb"))


def test_truncated_payload_raises(tmp_path, rng):
    path = str(tmp_path / "t.emb")
    write_matrix(make_matrix(rng.standard_normal((4, 3)).astype(np.float32)), path)
    raw = open(path, "rb").read()
    open(path, "wb").write(raw[:-5])
    with pytest.raises(ValueError, match="truncated payload"):
        list(read_batches(path, 2))


def test_magic_mismatch_raises(tmp_path):
    path = str(tmp_path / "m.emb")
    write_matrix(make_matrix(np.ones((1, 1))), path)
    raw = bytearray(open(path, "rb").read())
    raw[:4] = b"XXXX"
    open(path, "wb").write(bytes(raw))
    with pytest.raises(ValueError, match="magic mismatch"):
        read_header(path)


def test_id_count_mismatch_raises(tmp_path):
    path = str(tmp_path / "i.emb")
    write_matrix(make_matrix(np.ones((3, 2)), ["a", "b", "c"]), path)
    open(path + ".ids", "w").write("a\nb\n")
    with pytest.raises(ValueError, match="ID-count mismatch"):
        list(read_batches(path, 2))
    open(path + ".ids", "w").write("a\nb\nc\nd\n")
    with pytest.raises(ValueError, match="ID-count mismatch"):
        list(read_batches(path, 2))
    # trailing blank line is also a mismatch
    open(path + ".ids", "w").write("a\nb\nc\n\n")
    with pytest.raises(ValueError, match="ID-count mismatch"):
        list(read_batches(path, 2))


def test_non_finite_payload_detected_on_read(tmp_path):
    path = str(tmp_path / "nf.emb")
    write_matrix(make_matrix(np.ones((2, 2)), ["a", "b"]), path)
    raw = bytearray(open(path, "rb").read())
    raw[24:28] = struct.pack("<f", float("inf"))
    open(path, "wb").write(bytes(raw))
    with pytest.raises(ValueError, match="non-finite value at row 0, col 0"):
        list(read_batches(path, 2))


def test_synthetic_is_deterministic_and_named(tmp_path):
    spec = SyntheticSpec(seed=3, dim=6, n_clusters=3, cluster_spread=0.2, count=20)
    a = generate_synthetic(spec)
    b = generate_synthetic(spec)
    assert a.ids == [f"doc{i}" for i in range(20)]
    assert np.array_equal(a.values, b.values)
    pa, pb = str(tmp_path / "a.emb"), str(tmp_path / "b.emb")
    write_matrix(a, pa)
    write_matrix(b, pb)
    assert open(pa, "rb").read() == open(pb, "rb").read()
    assert open(pa + ".ids").read() == open(pb + ".ids").read()


def test_synthetic_cluster_means_near_centers(tmp_path):
    # independent re-read: parse the emitted file with struct/frombuffer only
    spec = SyntheticSpec(seed=7, dim=8, n_clusters=2, cluster_spread=0.1, count=100)
    path = str(tmp_path / "syn.emb")
    write_matrix(generate_synthetic(spec), path)

    raw = open(path, "rb").read()
    _, _, _, dim, count = struct.unpack("<4sIIIQ", raw[:24])
    vals = np.frombuffer(raw[24:], dtype="<f4").reshape(count, dim)

    rng = np.random.default_rng(7)
    centers = rng.standard_normal((2, 8))
    centers /= np.linalg.norm(centers, axis=1, keepdims=True)
    for c in range(2):
        mean = vals[np.arange(count) % 2 == c].mean(axis=0)
        assert np.abs(mean - centers[c]).max() < 0.05


@settings(max_examples=25, deadline=None)
@given(
    n=st.integers(0, 12),
    dim=st.integers(1, 6),
    batch=st.integers(1, 7),
    seed=st.integers(0, 2**31),
)
def test_roundtrip_property(tmp_path_factory, n, dim, batch, seed):
    tmp = tmp_path_factory.mktemp("prop")
    rng = np.random.default_rng(seed)
    values = rng.standard_normal((n, dim)).astype(np.float32)
    ids = [f"v{i}" for i in range(n)]
    path = str(tmp / "p.emb")
    write_matrix(EmbeddingMatrix(ids, values), path)
    got = list(read_batches(path, batch))
    all_vals = (
        np.vstack([b.values for b in got]) if got else np.zeros((0, dim), np.float32)
    )
    assert np.array_equal(all_vals, values)
    assert [i for b in got for i in b.ids] == ids
