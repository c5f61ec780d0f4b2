import math

import numpy as np
import pytest

import bcsinet


def test_binarize_matches_numpy_oracle():
    rng = np.random.default_rng(3)
    w = rng.uniform(-2.0, 2.0, size=(6, 7)).astype(np.float32)
    signs, alpha = bcsinet.binarize(w)
    expect_signs = np.where(w >= 0, 1, -1).astype(np.int8)
    assert np.array_equal(signs, expect_signs)
    assert alpha == pytest.approx(np.abs(w).mean(), rel=1e-6)


def test_binary_gemv_matches_numpy():
    rng = np.random.default_rng(5)
    signs = rng.choice(np.array([-1, 1], dtype=np.int8), size=(9, 130))
    x = rng.uniform(-1.0, 1.0, size=130).astype(np.float32)
    bias = rng.uniform(-1.0, 1.0, size=9).astype(np.float32)
    alpha = 0.37
    y = bcsinet.binary_gemv(signs, x, alpha, bias)
    expect = alpha * (signs.astype(np.float32) @ x) + bias
    np.testing.assert_allclose(y, expect, rtol=1e-5, atol=1e-6)


def test_network_shapes_and_range():
    net = bcsinet.build_network(family="bcsinet", head="B", refinenets=3, eta=0.25, seed=7)
    assert net.name == "BCsiNet-B3"
    assert net.codeword_len == 512
    x = np.random.default_rng(7).uniform(0.0, 1.0, size=(2, 2, 32, 32)).astype(np.float32)
    code = net.encode(x)
    assert code.shape == (2, 512)
    rec = net.decode(code)
    assert rec.shape == (2, 2, 32, 32)
    assert np.all(rec > 0.0) and np.all(rec < 1.0)


def test_generate_samples_deterministic():
    a = bcsinet.generate_samples(3, 11)
    b = bcsinet.generate_samples(3, 11)
    assert a.shape == (3, 2, 32, 32)
    assert np.array_equal(a, b)
    c = bcsinet.generate_samples(3, 12)
    assert not np.array_equal(a, c)


def test_lr_schedule():
    assert bcsinet.lr_at(0, 100, 30, 1e-2, 5e-5) == pytest.approx(1e-2 / 30)
    assert bcsinet.lr_at(30, 100, 30, 1e-2, 5e-5) == pytest.approx(1e-2)
    assert bcsinet.lr_at(99, 100, 30, 1e-2, 5e-5) == pytest.approx(5e-5)
    with pytest.raises(Exception):
        bcsinet.lr_at(100, 100, 30, 1e-2, 5e-5)


def test_nmse():
    t = np.array([[1.0, 0.0]], dtype=np.float32)
    p = np.array([[0.5, 0.5]], dtype=np.float32)
    linear, db = bcsinet.nmse(p, t)
    assert linear == pytest.approx(0.5)
    assert db == pytest.approx(10 * math.log10(0.5))
    linear, db = bcsinet.nmse(t, t)
    assert linear == 0.0
    assert db == -120.0


def test_complexity_table_and_memory_multiple():
    table = bcsinet.complexity_table("tab4")
    for cell in ("1085K", "37K", "74K", "33K"):
        assert cell in table
    assert bcsinet.memory_multiple("A", 0.25) == pytest.approx(31.48, abs=0.01)
    for head in "ABC":
        for eta in (0.25, 0.125, 0.0625, 0.03125):
            assert bcsinet.memory_multiple(head, eta) > 30.0
