import numpy as np
import pytest

from staghunt.neural import (
    ConvPolicyNet,
    RMSPropState,
    TrainSpec,
    discounted_returns,
    load_checkpoint,
    reinforce_batch_update,
    reinforce_loss_grad,
    sample_actions,
    save_checkpoint,
)
from staghunt.neural import layers

REL_TOL = 1e-6


def rel_error(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-10)


def numeric_grad(f, arr, coords, h=1e-5):
    """Central differences of scalar f at the given flat coordinates."""
    out = []
    flat = arr.reshape(-1)
    for k in coords:
        orig = flat[k]
        flat[k] = orig + h
        up = f()
        flat[k] = orig - h
        down = f()
        flat[k] = orig
        out.append((up - down) / (2 * h))
    return out


def sample_coords(rng, size, k=8):
    return rng.choice(size, size=min(k, size), replace=False)


class TestConvLayer:
    @pytest.mark.parametrize("stride", [1, 2])
    def test_gradients(self, stride):
        rng = np.random.default_rng(1)
        x = rng.normal(size=(2, 5, 5, 3))
        w = rng.normal(size=(4, 3, 3, 3))
        proj = rng.normal(size=(2, -(-5 // stride), -(-5 // stride), 4))

        def loss():
            out, _ = layers.conv2d_forward(x, w, stride)
            return float((out * proj).sum())

        out, cache = layers.conv2d_forward(x, w, stride)
        dx, dw = layers.conv2d_backward(proj, cache)
        for arr, grad in ((x, dx), (w, dw)):
            coords = sample_coords(rng, arr.size)
            numeric = numeric_grad(loss, arr, coords)
            for k, n in zip(coords, numeric):
                assert rel_error(grad.reshape(-1)[k], n) < REL_TOL

    @pytest.mark.parametrize("size,stride,expected", [(5, 1, 5), (5, 2, 3), (3, 2, 2), (2, 2, 1)])
    def test_output_spatial_size(self, size, stride, expected):
        out, _ = layers.conv2d_forward(np.zeros((1, size, size, 2)), np.zeros((3, 2, 3, 3)), stride)
        assert out.shape == (1, expected, expected, 3)


class TestBatchNorm:
    def test_train_gradients(self):
        rng = np.random.default_rng(2)
        x = rng.normal(size=(4, 2, 2, 3))
        gamma = rng.uniform(0.5, 1.5, size=3)
        beta = rng.normal(size=3)
        rm, rv = np.zeros(3), np.ones(3)
        proj = rng.normal(size=x.shape)

        def loss():
            out, *_ = layers.batchnorm_forward(x, gamma, beta, rm, rv, train=True)
            return float((out * proj).sum())

        out, cache, _, _ = layers.batchnorm_forward(x, gamma, beta, rm, rv, train=True)
        dx, dgamma, dbeta = layers.batchnorm_backward(proj, cache)
        for arr, grad in ((x, dx), (gamma, dgamma), (beta, dbeta)):
            coords = sample_coords(rng, arr.size)
            numeric = numeric_grad(loss, arr, coords)
            for k, n in zip(coords, numeric):
                assert rel_error(grad.reshape(-1)[k], n) < REL_TOL

    def test_normalizes_batch_statistics(self):
        rng = np.random.default_rng(3)
        x = rng.normal(loc=3.0, scale=2.5, size=(16, 5, 5, 4))
        out, *_ = layers.batchnorm_forward(
            x, np.ones(4), np.zeros(4), np.zeros(4), np.ones(4), train=True
        )
        means = out.mean(axis=(0, 1, 2))
        variances = out.var(axis=(0, 1, 2))
        assert np.all(np.abs(means) < 1e-6)
        assert np.all(np.abs(variances - 1.0) < 1e-4)

    def test_eval_uses_running_statistics(self):
        x = np.zeros((2, 2, 2, 3))
        rm = np.array([1.0, 2.0, 3.0])
        rv = np.array([1.0, 4.0, 9.0])
        out, *_ = layers.batchnorm_forward(x, np.ones(3), np.zeros(3), rm, rv, train=False)
        expected = -rm / np.sqrt(rv + layers.BN_EPS)
        assert np.allclose(out[0, 0, 0, :], expected)


class TestReluAndLinear:
    def test_relu_gradient_away_from_kink(self):
        rng = np.random.default_rng(4)
        x = rng.normal(size=(3, 4))
        x[np.abs(x) < 1e-2] = 0.5  # keep finite differences off the kink
        proj = rng.normal(size=x.shape)

        def loss():
            out, _ = layers.relu_forward(x)
            return float((out * proj).sum())

        _, cache = layers.relu_forward(x)
        dx = layers.relu_backward(proj, cache)
        coords = sample_coords(rng, x.size)
        numeric = numeric_grad(loss, x, coords)
        for k, n in zip(coords, numeric):
            assert rel_error(dx.reshape(-1)[k], n) < REL_TOL

    def test_relu_zero_input_zero_subgradient(self):
        x = np.array([[0.0, -1.0, 2.0]])
        _, cache = layers.relu_forward(x)
        dx = layers.relu_backward(np.ones_like(x), cache)
        assert dx.tolist() == [[0.0, 0.0, 1.0]]

    def test_linear_gradients(self):
        rng = np.random.default_rng(5)
        x = rng.normal(size=(4, 6))
        w = rng.normal(size=(3, 6))
        b = rng.normal(size=3)
        proj = rng.normal(size=(4, 3))

        def loss():
            out, _ = layers.linear_forward(x, w, b)
            return float((out * proj).sum())

        _, cache = layers.linear_forward(x, w, b)
        dx, dw, db = layers.linear_backward(proj, cache, w)
        for arr, grad in ((x, dx), (w, dw), (b, db)):
            coords = sample_coords(rng, arr.size)
            numeric = numeric_grad(loss, arr, coords)
            for k, n in zip(coords, numeric):
                assert rel_error(grad.reshape(-1)[k], n) < REL_TOL


class TestSoftmax:
    def test_sums_to_one_across_magnitudes(self):
        rng = np.random.default_rng(6)
        for _ in range(200):
            logits = rng.uniform(-50, 50, size=(1, rng.integers(2, 8)))
            assert abs(layers.softmax(logits).sum() - 1.0) < 1e-9

    def test_log_softmax_gradient_via_loss(self):
        rng = np.random.default_rng(7)
        logits = rng.normal(size=(5, 4))
        actions = rng.integers(0, 4, size=5)
        returns = rng.normal(size=5)

        def loss():
            value, _ = reinforce_loss_grad(logits, actions, returns, entropy_weight=0.3)
            return value

        _, dlogits = reinforce_loss_grad(logits, actions, returns, entropy_weight=0.3)
        coords = sample_coords(rng, logits.size, k=12)
        numeric = numeric_grad(loss, logits, coords)
        for k, n in zip(coords, numeric):
            assert rel_error(dlogits.reshape(-1)[k], n) < REL_TOL


class TestConvPolicyNet:
    def test_block_structure_for_board_five(self):
        net = ConvPolicyNet(in_channels=7, board_size=5, base_channels=16)
        assert net.n_blocks == 4
        assert net.spatial_sizes() == [5, 5, 3, 2, 1]
        assert net.feature_size == 16 * 8
        assert net.params["head.w"].shape == (4, 128)

    def test_channel_doubling(self):
        net = ConvPolicyNet(board_size=5, base_channels=8)
        shapes = [net.params[f"conv{i}.w"].shape[0] for i in range(net.n_blocks)]
        assert shapes == [8, 16, 32, 64]

    def test_zero_input_uniform_policy(self):
        net = ConvPolicyNet(board_size=5, base_channels=4, rng=np.random.default_rng(8))
        logits = net.forward(np.zeros((3, 7, 5, 5)))
        probs = layers.softmax(logits)
        assert np.allclose(probs, 0.25)

    def test_duplicate_sample_same_logits_eval(self):
        rng = np.random.default_rng(9)
        net = ConvPolicyNet(board_size=5, base_channels=4, rng=rng)
        obs = rng.normal(size=(7, 5, 5))
        batch = np.stack([obs, rng.normal(size=(7, 5, 5)), obs])
        logits = net.forward(batch, train=False)
        assert np.array_equal(logits[0], logits[2])

    def test_shape_mismatch_fails(self):
        net = ConvPolicyNet(board_size=5)
        with pytest.raises(ValueError):
            net.forward(np.zeros((1, 7, 4, 4)))

    def test_end_to_end_gradients(self):
        rng = np.random.default_rng(10)
        net = ConvPolicyNet(in_channels=3, board_size=5, base_channels=4, rng=rng)
        x = rng.normal(size=(6, 3, 5, 5))
        proj = rng.normal(size=(6, 4))

        def loss():
            return float((net.forward(x, train=True) * proj).sum())

        net.forward(x, train=True)
        grads = net.backward(proj)
        for name, param in net.params.items():
            coords = sample_coords(rng, param.size, k=6)
            numeric = numeric_grad(loss, param, coords)
            for k, n in zip(coords, numeric):
                assert rel_error(grads[name].reshape(-1)[k], n) < REL_TOL, name

    def test_constant_loss_zero_gradients(self):
        rng = np.random.default_rng(11)
        net = ConvPolicyNet(board_size=5, base_channels=4, rng=rng)
        net.forward(rng.normal(size=(4, 7, 5, 5)), train=True)
        grads = net.backward(np.zeros((4, 4)))
        assert all(np.all(g == 0.0) for g in grads.values())

    def test_backward_requires_train_forward(self):
        net = ConvPolicyNet(board_size=5, base_channels=4)
        net.forward(np.zeros((1, 7, 5, 5)), train=False)
        with pytest.raises(RuntimeError):
            net.backward(np.zeros((1, 4)))


class TestRMSProp:
    def test_zero_gradient_leaves_parameters(self):
        net = ConvPolicyNet(board_size=5, base_channels=4, rng=np.random.default_rng(12))
        opt = RMSPropState.for_net(net)
        before = net.clone_parameters()
        opt.apply(net.params, {k: np.zeros_like(v) for k, v in net.params.items()})
        assert all(np.array_equal(before[k], net.params[k]) for k in before)

    def test_descends(self):
        params = {"w": np.array([1.0, 1.0])}
        opt = RMSPropState(sq={"w": np.zeros(2)}, lr=0.1)
        opt.apply(params, {"w": np.array([1.0, -1.0])})
        assert params["w"][0] < 1.0 and params["w"][1] > 1.0


class TestTrainSpec:
    def test_validation(self):
        with pytest.raises(ValueError):
            TrainSpec(batch_episodes=0)
        with pytest.raises(ValueError):
            TrainSpec(discount=0.0)
        with pytest.raises(ValueError):
            TrainSpec(discount=1.2)


class TestReinforceBatchUpdate:
    @staticmethod
    def fixed_episode(rng, length, reward=0.0):
        return [(rng.normal(size=(7, 5, 5)), int(rng.integers(4)), reward) for _ in range(length)]

    def test_discounted_returns(self):
        assert np.allclose(discounted_returns([0.0, 0.0, 1.0], 0.99), [0.9801, 0.99, 1.0])

    def test_entropy_only_update_raises_entropy(self):
        rng = np.random.default_rng(13)
        net = ConvPolicyNet(board_size=5, base_channels=4, rng=rng)
        # Start from a peaked policy; a fresh net is already near max entropy.
        net.params["head.b"] = np.array([3.0, -1.0, 0.0, 1.0])
        opt = RMSPropState.for_net(net, lr=5e-3)
        spec = TrainSpec(batch_episodes=4, entropy_weight=5.0)
        episodes = [self.fixed_episode(rng, 6) for _ in range(4)]
        obs = np.stack([o for ep in episodes for o, _, _ in ep])

        def mean_entropy():
            probs = layers.softmax(net.forward(obs, train=False))
            return float(-(probs * np.log(probs)).sum(axis=1).mean())

        before = mean_entropy()
        for _ in range(5):
            reinforce_batch_update(net, episodes, spec, opt)
        assert mean_entropy() > before

    def test_empty_episodes_excluded(self):
        rng = np.random.default_rng(14)
        net = ConvPolicyNet(board_size=5, base_channels=4, rng=rng)
        spec = TrainSpec(batch_episodes=2)
        episode = self.fixed_episode(rng, 3, reward=1.0)

        net_a = ConvPolicyNet(board_size=5, base_channels=4, rng=np.random.default_rng(15))
        net_b = ConvPolicyNet(board_size=5, base_channels=4, rng=np.random.default_rng(15))
        opt_a = RMSPropState.for_net(net_a)
        opt_b = RMSPropState.for_net(net_b)
        loss_a = reinforce_batch_update(net_a, [episode, []], spec, opt_a)
        loss_b = reinforce_batch_update(net_b, [episode], spec, opt_b)
        assert loss_a == loss_b
        assert all(np.array_equal(net_a.params[k], net_b.params[k]) for k in net_a.params)

    def test_all_empty_fails(self):
        net = ConvPolicyNet(board_size=5, base_channels=4)
        with pytest.raises(ValueError):
            reinforce_batch_update(net, [[], []], TrainSpec(), RMSPropState.for_net(net))

    def test_training_bit_reproducible(self):
        def run():
            rng = np.random.default_rng(16)
            net = ConvPolicyNet(board_size=5, base_channels=4, rng=rng)
            opt = RMSPropState.for_net(net, lr=1e-3)
            spec = TrainSpec(batch_episodes=2, entropy_weight=0.05)
            for _ in range(3):
                episodes = [
                    [(rng.normal(size=(7, 5, 5)), int(rng.integers(4)), float(rng.normal()))
                     for _ in range(4)]
                    for _ in range(2)
                ]
                reinforce_batch_update(net, episodes, spec, opt)
            return net

        a, b = run(), run()
        assert all(np.array_equal(a.params[k], b.params[k]) for k in a.params)
        assert all(np.array_equal(a.running[k], b.running[k]) for k in a.running)


class TestCheckpoint:
    def test_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(17)
        net = ConvPolicyNet(board_size=5, base_channels=4, rng=rng)
        net.forward(rng.normal(size=(8, 7, 5, 5)), train=True)  # move running stats
        path = tmp_path / "ckpt.npz"
        save_checkpoint(net, path)
        other = ConvPolicyNet(board_size=5, base_channels=4, rng=np.random.default_rng(999))
        load_checkpoint(other, path)
        assert all(np.array_equal(net.params[k], other.params[k]) for k in net.params)
        assert all(np.array_equal(net.running[k], other.running[k]) for k in net.running)

    def test_mismatched_checkpoint_rejected(self, tmp_path):
        net = ConvPolicyNet(board_size=5, base_channels=4)
        path = tmp_path / "ckpt.npz"
        save_checkpoint(net, path)
        bigger = ConvPolicyNet(board_size=5, base_channels=8)
        with pytest.raises(ValueError):
            load_checkpoint(bigger, path)


class TestSampleActions:
    def test_deterministic_given_seed(self):
        rng = np.random.default_rng(18)
        net = ConvPolicyNet(board_size=5, base_channels=4, rng=rng)
        obs = rng.normal(size=(10, 7, 5, 5))
        a = sample_actions(net, obs, np.random.default_rng(3))
        b = sample_actions(net, obs, np.random.default_rng(3))
        assert np.array_equal(a, b)
        assert set(a.tolist()) <= {0, 1, 2, 3}
