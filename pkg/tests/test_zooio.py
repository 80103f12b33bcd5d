import struct

import numpy as np
import pytest

from transrate import zooio
from transrate.errors import (
    BadMagic,
    EmptyFile,
    FileFormatError,
    ManifestError,
    NonFiniteValue,
    NonInteger,
    RaggedCsv,
    TruncatedFile,
    VersionUnsupported,
)


def raw_bytes(n, d, values, magic=b"TRFM", version=1):
    return magic + struct.pack("<IQQ", version, n, d) + np.asarray(values, "<f4").tobytes()


def test_minimal_raw_file(tmp_path):
    p = tmp_path / "one.trfm"
    p.write_bytes(raw_bytes(1, 1, [1.0]))
    assert p.stat().st_size == 28
    F = zooio.read_feature_file(p)
    assert F.shape == (1, 1) and F[0, 0] == 1.0


def test_writer_layout(tmp_path):
    p = tmp_path / "w.trfm"
    zooio.write_feature_file(p, np.array([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]))
    assert p.read_bytes() == raw_bytes(3, 2, [1, 2, 3, 4, 5, 6])
    assert p.read_bytes()[:8].hex() == "5452464d01000000"


def test_round_trip_bit_identical(tmp_path, rng):
    F = rng.normal(size=(17, 9)).astype(np.float32)
    p, q = tmp_path / "a.trfm", tmp_path / "b.trfm"
    zooio.write_feature_file(p, F)
    back = zooio.read_feature_file(p)
    assert back.astype(np.float32).tobytes() == F.tobytes()
    zooio.write_feature_file(q, back)
    assert p.read_bytes() == q.read_bytes()


@pytest.mark.parametrize("blob, err", [
    (b"TRFX" + struct.pack("<IQQ", 1, 1, 1) + b"\0" * 4, BadMagic),
    (raw_bytes(1, 1, [1.0], version=2), VersionUnsupported),
    (raw_bytes(2, 2, [1.0, 2.0, 3.0]), TruncatedFile),
    (b"TRFM\x01\x00", TruncatedFile),
    (b"TR", TruncatedFile),
    (raw_bytes(1, 2, [1.0, np.nan]), NonFiniteValue),
    (raw_bytes(1, 1, [1.0, 2.0]), FileFormatError),
])
def test_raw_errors(tmp_path, blob, err):
    p = tmp_path / "bad.trfm"
    p.write_bytes(blob)
    with pytest.raises(err) as exc:
        zooio.read_feature_file(p)
    assert exc.value.exit_code == 2


def test_nonfinite_position(tmp_path):
    p = tmp_path / "nan.trfm"
    p.write_bytes(raw_bytes(2, 3, [0, 0, 0, 0, np.inf, 0]))
    with pytest.raises(NonFiniteValue) as exc:
        zooio.read_feature_file(p)
    assert (exc.value.row, exc.value.col) == (1, 1)


def test_csv_header(tmp_path):
    p = tmp_path / "f.csv"
    p.write_text("f0,f1\n0.5,0.5\n")
    np.testing.assert_array_equal(zooio.read_feature_file(p), [[0.5, 0.5]])


def test_csv_no_header(tmp_path):
    p = tmp_path / "f.csv"
    p.write_text("1,2\r\n3,4\r\n")
    np.testing.assert_array_equal(zooio.read_feature_file(p), [[1, 2], [3, 4]])


def test_csv_ragged(tmp_path):
    p = tmp_path / "f.csv"
    p.write_text("1,2\n3\n")
    with pytest.raises(RaggedCsv):
        zooio.read_feature_file(p)


def test_csv_nonfinite(tmp_path):
    p = tmp_path / "f.csv"
    p.write_text("1,2\n3,nan\n")
    with pytest.raises(NonFiniteValue):
        zooio.read_feature_file(p)


def test_labels_classification(tmp_path):
    p = tmp_path / "y.txt"
    p.write_text("0\n1\n0\n")
    y = zooio.read_labels(p)
    assert y.values.tolist() == [0, 1, 0] and y.n_classes == 2


def test_labels_gap_inferred(tmp_path):
    p = tmp_path / "y.txt"
    p.write_text("0\r\n2\r\n")
    assert zooio.read_labels(p).n_classes == 3


def test_labels_regression(tmp_path):
    p = tmp_path / "y.txt"
    p.write_text("1.5\n-2.0\n")
    assert zooio.read_labels(p, "regression").values.tolist() == [1.5, -2.0]


@pytest.mark.parametrize("text, kind, err", [
    ("0\n1.5\n", "classification", NonInteger),
    ("0\n-1\n", "classification", NonInteger),
    ("1.0\ninf\n", "regression", NonFiniteValue),
    ("\n\n", "classification", EmptyFile),
])
def test_label_errors(tmp_path, text, kind, err):
    p = tmp_path / "y.txt"
    p.write_text(text)
    with pytest.raises(err):
        zooio.read_labels(p, kind)


def test_pseudo_labels(tmp_path, rng):
    a = rng.random((5, 3))
    P = a / a.sum(axis=1, keepdims=True)
    p = tmp_path / "p.trfm"
    zooio.write_feature_file(p, P)
    back = zooio.read_pseudo_labels(p)
    np.testing.assert_allclose(back.sum(axis=1), 1.0, atol=1e-15)
    zooio.write_feature_file(p, P * 2)
    with pytest.raises(FileFormatError):
        zooio.read_pseudo_labels(p)


def test_manifest_round_trip(tmp_path):
    m = zooio.ZooManifest("classification", [
        zooio.ModelEntry("a", tmp_path / "a.trfm", tmp_path / "y.txt"),
        zooio.ModelEntry("b", tmp_path / "b.trfm", tmp_path / "y.txt", tmp_path / "pb.trfm"),
    ], tmp_path / "acc.csv")
    zooio.write_manifest(tmp_path / "m.json", m)
    back = zooio.read_manifest(tmp_path / "m.json")
    assert [e.name for e in back.models] == ["a", "b"]
    assert back.models[1].pseudo_labels_path == tmp_path / "pb.trfm"
    assert back.accuracy_path == tmp_path / "acc.csv"


def test_manifest_shared_labels_and_errors(tmp_path):
    (tmp_path / "m.json").write_text('{"labels_path": "y.txt", "models": [{"name": "a", "features_path": "a.csv"}]}')
    assert zooio.read_manifest(tmp_path / "m.json").models[0].labels_path == tmp_path / "y.txt"
    (tmp_path / "m.json").write_text('{"labels_path": "y.txt", "models": [{"name": "a", "features_path": "a"},'
                                     '{"name": "a", "features_path": "b"}]}')
    with pytest.raises(ManifestError):
        zooio.read_manifest(tmp_path / "m.json")


def test_accuracies_subset(tmp_path):
    (tmp_path / "acc.csv").write_text("model,accuracy\na,0.5\n")
    (tmp_path / "m.json").write_text('{"labels_path": "y", "accuracy_path": "acc.csv", "models": ['
                                     '{"name": "a", "features_path": "a"}, {"name": "b", "features_path": "b"}]}')
    assert zooio.read_manifest(tmp_path / "m.json").accuracies() == {"a": 0.5}
    (tmp_path / "acc.csv").write_text("zzz,0.5\n")
    with pytest.raises(ManifestError):
        zooio.read_manifest(tmp_path / "m.json").accuracies()


def test_fmt_float_round_trips(rng):
    for v in rng.normal(size=200) * 10.0 ** rng.integers(-30, 30, 200):
        s = zooio.fmt_float(v)
        assert float(s) == v
        mantissa = s.lstrip("-").split("e")[0].replace(".", "").lstrip("0")
        assert len(mantissa) <= 17


def test_dumps():
    text = zooio.dumps({"a": [1, 0.1], "b": {"c": True, "d": None, "e": "x"}})
    assert '"a": [\n    1,\n    0.10000000000000001\n  ]' in text
    import json
    assert json.loads(text)["b"] == {"c": True, "d": None, "e": "x"}
