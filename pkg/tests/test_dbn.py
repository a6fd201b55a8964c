import numpy as np
import pytest

from ecsdbn import dbn as dbn_mod
from ecsdbn.dbn import (Dbn, DbnConfig, finetune, load_dbn, loss_and_gradients,
                        predict, predict_proba, pretrain, save_dbn)
from ecsdbn.exceptions import DataError, FormatError, ParameterError, ShapeError
from ecsdbn.numerics import RngStream
from ecsdbn.rbm import CdConfig, cd_train, hidden_given_visible, init_rbm

from oracles import softmax_direct
from gradcheck import finite_difference, rel_err, random_dbn
from toydata import blobs

FAST = CdConfig(epochs=3)


def test_single_layer_pretrain_is_one_cd_call():
    x = np.random.default_rng(0).random((20, 5))
    cfg = DbnConfig(layer_sizes=(4,), n_classes=2, pretrain=FAST, seed=9)
    net = pretrain(cfg, x)
    rng = RngStream(9, 0)
    expected = cd_train(init_rbm(5, 4, rng), x, FAST, rng)
    assert np.array_equal(net.rbm_stack[0].weights, expected.weights)
    assert np.array_equal(net.rbm_stack[0].hidden_bias, expected.hidden_bias)


def test_second_layer_trains_on_first_layer_activations():
    x = np.random.default_rng(1).random((20, 5))
    cfg = DbnConfig(layer_sizes=(4, 3), n_classes=2, pretrain=FAST, seed=3)
    net = pretrain(cfg, x)
    rng = RngStream(3, 1)
    layer_input = hidden_given_visible(net.rbm_stack[0], x)
    expected = cd_train(init_rbm(4, 3, rng), layer_input, FAST, rng)
    assert np.array_equal(net.rbm_stack[1].weights, expected.weights)


def test_pretrain_deterministic():
    x = np.random.default_rng(2).random((15, 4))
    cfg = DbnConfig(layer_sizes=(5, 5), n_classes=3, pretrain=FAST, seed=11)
    a, b = pretrain(cfg, x), pretrain(cfg, x)
    for ra, rb in zip(a.rbm_stack, b.rbm_stack):
        assert np.array_equal(ra.weights, rb.weights)
    assert np.array_equal(a.softmax_weights, b.softmax_weights)


def test_pretrain_empty_rejected():
    with pytest.raises(ParameterError):
        pretrain(DbnConfig(n_classes=2), np.empty((0, 3)))


def test_config_validation():
    with pytest.raises(ParameterError):
        DbnConfig(n_classes=1)
    with pytest.raises(ParameterError):
        DbnConfig(layer_sizes=())


def test_zero_finetune_lr_is_identity():
    x, y = blobs((10, 10), [(0.2, 0.2), (0.8, 0.8)], 0.05, 0)
    cfg = DbnConfig(layer_sizes=(4,), n_classes=2, pretrain=FAST, finetune_lr=0.0,
                    finetune_epochs=3)
    net = pretrain(cfg, x)
    out = finetune(net, x, y, cfg)
    assert np.array_equal(out.softmax_weights, net.softmax_weights)
    assert np.array_equal(out.rbm_stack[0].weights, net.rbm_stack[0].weights)


def test_finetune_separable_blobs():
    x, y = blobs((100, 100), [(0.25, 0.25), (0.75, 0.75)], 0.06, 1)
    cfg = DbnConfig(n_classes=2, seed=4)
    curve = []
    net = finetune(pretrain(cfg, x), x, y, cfg, curve)
    assert len(curve) == 300
    assert curve[-1] <= curve[0]
    assert np.mean(predict(net, x) == y) >= 0.95


def test_finetune_rejects_bad_labels():
    x = np.random.default_rng(0).random((6, 2))
    cfg = DbnConfig(layer_sizes=(3,), n_classes=2, pretrain=FAST, finetune_epochs=1)
    net = pretrain(cfg, x)
    with pytest.raises(DataError):
        finetune(net, x, np.array([0, 1, 2, 0, 1, 0]), cfg)


@pytest.mark.parametrize("seed", range(5))
def test_gradients_match_finite_differences(seed):
    net = random_dbn([4, 5, 3], 3, seed, scale=0.5)
    g = np.random.default_rng(100 + seed)
    x, y = g.random((7, 4)), g.integers(0, 3, 7)
    _, grads = loss_and_gradients(net, x, y)
    assert rel_err(grads["softmax_weights"], finite_difference(net, x, y, net.softmax_weights)) < 1e-4
    assert rel_err(grads["softmax_bias"], finite_difference(net, x, y, net.softmax_bias)) < 1e-4
    for i, rbm in enumerate(net.rbm_stack):
        assert rel_err(grads["weights"][i], finite_difference(net, x, y, rbm.weights)) < 1e-4
        assert rel_err(grads["hidden_bias"][i], finite_difference(net, x, y, rbm.hidden_bias)) < 1e-4


def test_zero_softmax_is_uniform():
    net = random_dbn([3, 4], 4, 0)
    net.softmax_weights[:] = 0
    net.softmax_bias[:] = 0
    p = predict_proba(net, np.random.default_rng(0).random((5, 3)))
    assert np.all(p == 0.25)


def test_equal_logits_split_evenly():
    net = random_dbn([2, 3], 2, 1)
    net.softmax_weights[:] = 0.7  # identical columns give identical logits
    net.softmax_bias[:] = -0.2
    assert np.all(predict_proba(net, np.random.default_rng(1).random((4, 2))) == 0.5)


def test_predict_proba_matches_direct_formula():
    net = random_dbn([3, 4, 2], 3, 5)
    x = np.random.default_rng(5).random((6, 3))
    top = dbn_mod.top_features(net, x)
    logits = (top @ net.softmax_weights + net.softmax_bias).tolist()
    np.testing.assert_allclose(predict_proba(net, x), softmax_direct(logits), rtol=0, atol=1e-12)


@pytest.mark.parametrize("seed", range(10))
def test_rows_sum_to_one_and_predict_is_argmax(seed):
    net = random_dbn([5, 6, 4], 3, seed, scale=3.0)
    x = np.random.default_rng(seed).random((20, 5))
    p = predict_proba(net, x)
    assert np.all((p >= 0) & (p <= 1))
    np.testing.assert_allclose(p.sum(axis=1), 1.0, rtol=0, atol=1e-9)
    assert np.array_equal(predict(net, x), np.argmax(p, axis=1))


def test_predict_tie_goes_to_lowest_index():
    net = random_dbn([2, 3], 2, 2)
    net.softmax_weights[:] = 0
    net.softmax_bias[:] = [np.log(0.7), np.log(0.3)]
    assert predict(net, np.zeros((1, 2)))[0] == 0
    net.softmax_bias[:] = 0
    assert predict(net, np.zeros((1, 2)))[0] == 0


def test_shape_errors():
    net = random_dbn([3, 2], 2, 0)
    with pytest.raises(ShapeError):
        predict_proba(net, np.ones((2, 4)))
    with pytest.raises(ShapeError):
        Dbn(net.rbm_stack, np.zeros((3, 2)), np.zeros(2))


def test_end_to_end_reproducible():
    x, y = blobs((30, 10), [(0.3, 0.3), (0.7, 0.6)], 0.1, 3)
    cfg = DbnConfig(layer_sizes=(6, 5), n_classes=2, pretrain=CdConfig(epochs=5),
                    finetune_epochs=10, seed=21)
    a = finetune(pretrain(cfg, x), x, y, cfg)
    b = finetune(pretrain(cfg, x), x, y, cfg)
    assert np.array_equal(predict_proba(a, x), predict_proba(b, x))


def test_save_load_roundtrip(tmp_path):
    net = random_dbn([4, 3, 5], 3, 8)
    path = tmp_path / "net.npz"
    save_dbn(net, path)
    back = load_dbn(path)
    x = np.random.default_rng(0).random((4, 4))
    assert np.array_equal(predict_proba(back, x), predict_proba(net, x))
    assert np.array_equal(back.rbm_stack[1].visible_bias, net.rbm_stack[1].visible_bias)


def test_load_rejects_foreign_file(tmp_path):
    path = tmp_path / "other.npz"
    np.savez(path, something=np.zeros(2))
    with pytest.raises(FormatError):
        load_dbn(path)
