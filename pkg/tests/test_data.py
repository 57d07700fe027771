import io

import numpy as np
import pytest

from drsvm.data import (
    DataError,
    Dataset,
    ParseError,
    Sample,
    gen_synthetic,
    load_dataset,
    parse_libsvm,
    signed_samples,
    write_libsvm,
)


def test_parse_basic_lines():
    samples, dim = parse_libsvm(io.StringIO("+1 1:0.5 3:-2\n-1 2:1\n"))
    assert samples[0] == Sample(label=1, features={1: 0.5, 3: -2.0})
    assert samples[1] == Sample(label=-1, features={2: 1.0})
    assert dim == 3


def test_parse_label_variants():
    samples, _ = parse_libsvm(io.StringIO("1 1:1\n-1 1:1\n+1.0 1:1\n-1.0 1:1\n"))
    assert [s.label for s in samples] == [1, -1, 1, -1]


def test_parse_errors_carry_line_numbers():
    with pytest.raises(ParseError, match="line 1"):
        parse_libsvm(io.StringIO("1 1:1 1:2\n"))  # repeated index
    with pytest.raises(ParseError, match="line 2"):
        parse_libsvm(io.StringIO("+1 1:1\n+1 3:1 2:1\n"))  # decreasing index
    with pytest.raises(ParseError, match="line 1"):
        parse_libsvm(io.StringIO("2 1:1\n"))  # label outside {-1,+1}
    with pytest.raises(ParseError, match="line 3"):
        parse_libsvm(io.StringIO("+1 1:1\n\n+1 0:1\n"))  # index < 1
    with pytest.raises(ParseError, match="line 1"):
        parse_libsvm(io.StringIO("+1 1:abc\n"))  # bad value token
    with pytest.raises(ParseError, match="line 1"):
        parse_libsvm(io.StringIO("+1 1\n"))  # missing colon


def test_parse_skips_blank_and_comment_lines():
    samples, dim = parse_libsvm(io.StringIO("\n# header\n+1 2:1\r\n\n-1 1:3\n"))
    assert len(samples) == 2
    assert dim == 2


def test_label_only_sample():
    samples, dim = parse_libsvm(io.StringIO("+1\n-1 2:1\n"))
    assert samples[0].features == {}
    assert dim == 2


def test_round_trip():
    rng = np.random.default_rng(21)
    samples = []
    for _ in range(200):
        idx = np.sort(rng.choice(np.arange(1, 40), size=rng.integers(0, 8), replace=False))
        feats = {int(i): float(v) for i, v in zip(idx, rng.normal(size=idx.size))}
        samples.append(Sample(label=int(rng.choice([-1, 1])), features=feats))
    buf = io.StringIO()
    write_libsvm(samples, buf)
    reparsed, _ = parse_libsvm(io.StringIO(buf.getvalue()))
    assert reparsed == samples


def test_signed_samples():
    ds = signed_samples([Sample(label=-1, features={1: 1.0, 2: 2.0})])
    assert np.allclose(ds.z, [[-1.0, -2.0]])
    ds = signed_samples([Sample(label=1, features={})], d=2)
    assert np.allclose(ds.z, [[0.0, 0.0]])
    ds = signed_samples([Sample(label=1, features={1: 3.0})])
    assert np.allclose(ds.z, [[3.0]])
    with pytest.raises(DataError):
        signed_samples([Sample(label=1, features={3: 1.0})], d=2)


def test_signed_samples_identity_for_positive_labels():
    rng = np.random.default_rng(22)
    for _ in range(50):
        d = rng.integers(1, 10)
        dense = rng.normal(size=d) * (rng.random(size=d) > 0.4)
        feats = {j + 1: float(v) for j, v in enumerate(dense) if v != 0.0}
        ds = signed_samples([Sample(label=1, features=feats)], d=d)
        assert np.allclose(ds.z[0], dense)


def test_gen_synthetic_deterministic():
    ds1, w1 = gen_synthetic(50, 7, 0.5, seed=123)
    ds2, w2 = gen_synthetic(50, 7, 0.5, seed=123)
    assert np.array_equal(ds1.z, ds2.z)
    assert np.array_equal(w1, w2)
    ds3, _ = gen_synthetic(50, 7, 0.5, seed=124)
    assert not np.array_equal(ds1.z, ds3.z)


def test_gen_synthetic_noiseless_is_separable():
    ds, w_star = gen_synthetic(300, 11, 0.0, seed=9)
    # z_i = y_i x_i, so separability reads z_i'w* >= 0
    assert (ds.z @ w_star >= 0).all()


def test_gen_synthetic_shape():
    ds, w_star = gen_synthetic(1000, 100, 0.5, seed=1)
    assert ds.n == 1000 and ds.d == 100
    assert w_star.shape == (100,)


def test_dataset_validation():
    with pytest.raises(DataError):
        Dataset(np.zeros((0, 3)))
    with pytest.raises(DataError):
        Dataset(np.zeros((3, 0)))
    with pytest.raises(DataError):
        Dataset(np.zeros(5))


def test_load_dataset(tmp_path):
    p = tmp_path / "toy.txt"
    p.write_text("+1 1:1 3:2\n-1 2:0.5\n")
    ds = load_dataset(p)
    assert ds.n == 2 and ds.d == 3
    assert np.allclose(ds.z, [[1.0, 0.0, 2.0], [0.0, -0.5, 0.0]])
    ds5 = load_dataset(p, d=5)
    assert ds5.d == 5
