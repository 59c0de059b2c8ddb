import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from structbal.encoder import (EncoderParams, cosine_sim, cosine_sim_matrix, embed,
                               encoder_loss_and_grad, init_encoder, predict_proba, softmax,
                               train_encoder)


def blobs(n=200, seed=0):
    rng = np.random.default_rng(seed)
    y = np.repeat([0, 1], n // 2)
    x = rng.normal(size=(n, 2)) + np.where(y[:, None] == 1, [3.0, 3.0], [-3.0, -3.0])
    return x, y


def test_init_deterministic_and_bounded():
    a = init_encoder(20, 30, 4, 7)
    b = init_encoder(20, 30, 4, 7)
    for k in a.arrays():
        np.testing.assert_array_equal(a.arrays()[k], b.arrays()[k])
    s1 = np.sqrt(6 / 50)
    assert np.abs(a.W1).max() <= s1
    assert np.all(a.b1 == 0) and np.all(a.b2 == 0)


def test_init_bound_many_draws():
    p = init_encoder(100, 100, 3, 1)  # 10^4 draws in W1
    s = np.sqrt(6 / 200)
    assert np.abs(p.W1).max() <= s
    assert np.abs(p.W1).max() > 0.95 * s  # actually fills the interval


def test_degenerate_width():
    p = init_encoder(3, 1, 2, 0)
    assert embed(p, np.ones((4, 3))).shape == (4, 1)


def test_zero_input_zero_embedding():
    p = init_encoder(5, 4, 3, 0)
    np.testing.assert_array_equal(embed(p, np.zeros((2, 5))), 0.0)


def test_rows_independent():
    p = init_encoder(5, 4, 3, 0)
    x = np.random.default_rng(1).normal(size=(6, 5))
    np.testing.assert_array_equal(embed(p, x)[3], embed(p, x[3:4])[0])


def test_embed_scalar_loop_oracle():
    rng = np.random.default_rng(2)
    p = init_encoder(4, 3, 2, 5)
    p = EncoderParams(p.W1, rng.normal(size=3), p.W2, p.b2)
    x = rng.normal(size=(5, 4))
    expect = np.zeros((5, 3))
    for i in range(5):
        for j in range(3):
            s = p.b1[j]
            for k in range(4):
                s += x[i, k] * p.W1[k, j]
            expect[i, j] = max(s, 0.0)
    np.testing.assert_allclose(embed(p, x), expect, atol=1e-12)


def test_shape_mismatch():
    with pytest.raises(ValueError):
        embed(init_encoder(5, 4, 3, 0), np.ones((2, 4)))


def test_uniform_when_logits_equal():
    p = init_encoder(3, 4, 5, 0)
    p = EncoderParams(p.W1, p.b1, np.zeros_like(p.W2), np.zeros(5))
    np.testing.assert_allclose(predict_proba(p, np.ones((2, 3))), 0.2, atol=1e-15)


@settings(max_examples=50)
@given(arrays(np.float64, (4, 6), elements=st.floats(-700, 700)), st.floats(-1e3, 1e3))
def test_softmax_normalized_and_shift_invariant(logits, c):
    p = softmax(logits)
    np.testing.assert_allclose(p.sum(axis=1), 1.0, atol=1e-12)
    np.testing.assert_allclose(softmax(logits + c), p, atol=1e-12)


def test_predict_rows_sum_to_one_extreme_inputs():
    p = init_encoder(3, 8, 4, 0)
    x = np.array([[1e6, -1e6, 3e5], [0, 0, 0], [-1e8, 1e8, 1]])
    prob = predict_proba(p, x)
    assert np.all(np.isfinite(prob))
    np.testing.assert_allclose(prob.sum(axis=1), 1.0, atol=1e-12)


def test_permutation_equivariance():
    p = init_encoder(4, 5, 3, 0)
    x = np.random.default_rng(0).normal(size=(7, 4))
    perm = np.random.default_rng(1).permutation(7)
    np.testing.assert_array_equal(embed(p, x[perm]), embed(p, x)[perm])


def test_lr_zero_unchanged():
    x, y = blobs()
    p = init_encoder(2, 8, 2, 0)
    q = train_encoder(p, x, y, np.ones(len(y), bool), 5, 0.0)
    for k in p.arrays():
        np.testing.assert_array_equal(p.arrays()[k], q.arrays()[k])


def test_empty_mask_rejected():
    x, y = blobs()
    with pytest.raises(ValueError, match="no nodes"):
        train_encoder(init_encoder(2, 4, 2, 0), x, y, np.zeros(len(y), bool), 5, 0.1)


def test_separable_blobs():
    x, y = blobs()
    p = init_encoder(2, 16, 2, 0)
    mask = np.ones(len(y), bool)
    loss0, _ = encoder_loss_and_grad(p, x, y, mask)
    p = train_encoder(p, x, y, mask, 200, 0.1)
    loss1, _ = encoder_loss_and_grad(p, x, y, mask)
    assert loss1 < loss0
    assert np.mean(predict_proba(p, x).argmax(1) == y) >= 0.95


def finite_difference_check(params, x, y, mask, coords, eps=1e-6):
    _, grads = encoder_loss_and_grad(params, x, y, mask)
    errs = []
    for name, idx in coords:
        arrs = {k: v.copy() for k, v in params.arrays().items()}
        arrs[name][idx] += eps
        up, _ = encoder_loss_and_grad(EncoderParams(**arrs), x, y, mask)
        arrs[name][idx] -= 2 * eps
        down, _ = encoder_loss_and_grad(EncoderParams(**arrs), x, y, mask)
        fd = (up - down) / (2 * eps)
        an = grads[name][idx]
        errs.append(abs(fd - an) / max(abs(fd), abs(an), 1e-8))
    return max(errs)


def random_coords(params, rng, k):
    arrs = params.arrays()
    names = list(arrs)
    out = []
    for _ in range(k):
        name = names[rng.integers(len(names))]
        out.append((name, tuple(rng.integers(s) for s in arrs[name].shape)))
    return out


@pytest.mark.parametrize("seed", range(3))
def test_gradient_finite_differences(seed):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(8, 5))
    y = rng.integers(0, 3, size=8)
    p = init_encoder(5, 6, 3, seed)
    p = EncoderParams(p.W1, rng.normal(scale=0.1, size=6), p.W2, rng.normal(scale=0.1, size=3))
    mask = rng.random(8) < 0.7
    mask[0] = True
    assert finite_difference_check(p, x, y, mask, random_coords(p, rng, 10)) < 1e-4
    # every block at least once
    coords = [(k, (0,) * v.ndim) for k, v in p.arrays().items()]
    assert finite_difference_check(p, x, y, mask, coords) < 1e-4


def test_cosine_cases():
    v = np.array([1.0, 2.0, -3.0])
    assert cosine_sim(v, v) == pytest.approx(1.0)
    assert cosine_sim([1, 0], [0, 1]) == 0.0
    assert cosine_sim(v, -v) == pytest.approx(-1.0)
    assert cosine_sim(np.zeros(3), v) == 0.0
    assert cosine_sim(np.zeros(3), np.zeros(3)) == 0.0


def test_cosine_matrix_matches_scalar():
    rng = np.random.default_rng(0)
    a = rng.normal(size=(4, 3))
    b = rng.normal(size=(5, 3))
    b[2] = 0
    m = cosine_sim_matrix(a, b)
    for i in range(4):
        for j in range(5):
            assert m[i, j] == pytest.approx(cosine_sim(a[i], b[j]), abs=1e-12)
