import numpy as np
import pytest

from staghunt.learners import (
    AdamState,
    RewardMixer,
    SoftmaxPolicy,
    mix_rewards,
    policy_gradient,
    reinforce_update,
    sample_action,
)


class TestSoftmaxPolicy:
    def test_probabilities_sum_to_one_and_stay_positive(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            policy = SoftmaxPolicy(rng.normal(0, 5, size=rng.integers(2, 7)))
            probs = policy.action_probabilities()
            assert probs.sum() == pytest.approx(1.0, abs=1e-9)
            assert np.all(probs > 0)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            SoftmaxPolicy([np.inf, 0.0])

    def test_random_init_seeded(self):
        a = SoftmaxPolicy.random_init(2, np.random.default_rng(5))
        b = SoftmaxPolicy.random_init(2, np.random.default_rng(5))
        assert np.array_equal(a.logits, b.logits)


class TestMixRewards:
    def test_selfish_identity(self):
        assert mix_rewards(RewardMixer(0.0), own=3.0, others=[-5.0]) == 3.0

    def test_equal_weighting(self):
        assert mix_rewards(RewardMixer(0.5), own=2.0, others=[0.0]) == 1.0

    def test_average_mode_many_others(self):
        assert mix_rewards(RewardMixer(0.5, "average"), 1.0, [3.0, 5.0, 7.0, 9.0]) == 3.5

    def test_sum_mode(self):
        assert mix_rewards(RewardMixer(0.5, "sum"), 1.0, [3.0, 5.0]) == 4.5

    def test_empty_others_fails(self):
        with pytest.raises(ValueError):
            mix_rewards(RewardMixer(0.5), 1.0, [])

    def test_linear_in_each_argument(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            mixer = RewardMixer(rng.uniform(0, 1), rng.choice(["average", "sum"]))
            own, other = rng.normal(size=2)
            at_zero_own = mix_rewards(mixer, 0.0, [other])
            at_zero_other = mix_rewards(mixer, own, [0.0])
            # Mixing is affine with no constant term: f(x, y) = f(x, 0) + f(0, y).
            assert mix_rewards(mixer, own, [other]) == pytest.approx(
                at_zero_own + at_zero_other, abs=1e-12
            )

    def test_alpha_zero_identity_for_every_mode(self):
        rng = np.random.default_rng(3)
        for mode in ("average", "sum"):
            for _ in range(50):
                own = rng.normal()
                others = list(rng.normal(size=rng.integers(1, 5)))
                assert mix_rewards(RewardMixer(0.0, mode), own, others) == own


class TestSampleAction:
    def test_uniform_logits_chi_square(self):
        rng = np.random.default_rng(7)
        policy = SoftmaxPolicy([0.0, 0.0])
        draws = np.array([sample_action(policy, rng) for _ in range(10000)])
        counts = np.bincount(draws, minlength=2)
        chi2 = ((counts - 5000.0) ** 2 / 5000.0).sum()
        assert chi2 < 10.83  # chi-square(1) critical value at p=0.001

    def test_extreme_logits_pick_argmax(self):
        rng = np.random.default_rng(11)
        policy = SoftmaxPolicy([10.0, -10.0])
        draws = [sample_action(policy, rng) for _ in range(20000)]
        assert all(a == 0 for a in draws)

    def test_reproducible_with_seed(self):
        policy = SoftmaxPolicy([0.3, -0.2, 0.1])
        rng1, rng2 = np.random.default_rng(9), np.random.default_rng(9)
        seq_a = [sample_action(policy, rng1) for _ in range(50)]
        seq_b = [sample_action(policy, rng2) for _ in range(50)]
        assert seq_a == seq_b

    def test_non_finite_logits_fail_loudly(self):
        policy = SoftmaxPolicy([0.0, 0.0])
        policy.logits = np.array([np.nan, 0.0])
        with pytest.raises(FloatingPointError):
            sample_action(policy, np.random.default_rng(0))


class TestAdam:
    def test_zero_lr_leaves_parameters(self):
        policy = SoftmaxPolicy([0.5, -0.5])
        adam = AdamState.for_policy(policy, lr=0.0)
        updated = adam.apply(policy.logits, np.array([1.0, -2.0]))
        assert np.array_equal(updated, policy.logits)

    def test_zero_gradient_leaves_parameters(self):
        policy = SoftmaxPolicy([0.5, -0.5])
        adam = AdamState.for_policy(policy, lr=0.01)
        updated = adam.apply(policy.logits, np.zeros(2))
        assert np.array_equal(updated, policy.logits)

    def test_descends_along_gradient(self):
        adam = AdamState(m=np.zeros(2), v=np.zeros(2), lr=0.1)
        params = np.array([1.0, 1.0])
        updated = adam.apply(params, np.array([1.0, -1.0]))
        assert updated[0] < 1.0 and updated[1] > 1.0


class TestPolicyGradient:
    def test_log_softmax_identity(self):
        # Single one-step episode: gradient is (one_hot(a) - probs) * G.
        policy = SoftmaxPolicy([0.2, -0.4, 0.9])
        probs = policy.action_probabilities()
        for action in range(3):
            grad = policy_gradient(policy, [[(action, 2.5)]])
            expected = -probs * 2.5
            expected[action] += 2.5
            assert np.allclose(grad, expected, atol=1e-12)

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(13)
        for _ in range(20):
            n = int(rng.integers(2, 5))
            logits = rng.normal(size=n)
            episodes = [
                [(int(rng.integers(0, n)), float(rng.normal())) for _ in range(rng.integers(1, 4))]
                for _ in range(rng.integers(1, 5))
            ]
            discount = float(rng.uniform(0.5, 1.0))
            grad = policy_gradient(SoftmaxPolicy(logits), episodes, discount=discount)

            def surrogate(vec):
                pol = SoftmaxPolicy(vec)
                shifted = pol.logits - pol.logits.max()
                logp = shifted - np.log(np.exp(shifted).sum())
                total, count = 0.0, 0
                for ep in episodes:
                    acc = 0.0
                    rewards = [r for _, r in ep]
                    rtg = []
                    for r in reversed(rewards):
                        acc = r + discount * acc
                        rtg.append(acc)
                    rtg.reverse()
                    for (a, _), g in zip(ep, rtg):
                        total += logp[a] * g
                        count += 1
                return total / count

            h = 1e-6
            for k in range(n):
                bump = np.zeros(n)
                bump[k] = h
                numeric = (surrogate(logits + bump) - surrogate(logits - bump)) / (2 * h)
                denom = max(abs(numeric), abs(grad[k]), 1e-10)
                assert abs(numeric - grad[k]) / denom < 1e-6

    def test_empty_episode_excluded(self):
        policy = SoftmaxPolicy([0.0, 0.0])
        with_empty = policy_gradient(policy, [[(0, 1.0)], []])
        without = policy_gradient(policy, [[(0, 1.0)]])
        assert np.allclose(with_empty, without)

    def test_all_empty_fails(self):
        with pytest.raises(ValueError):
            policy_gradient(SoftmaxPolicy([0.0, 0.0]), [[], []])


class TestReinforceUpdate:
    def test_zero_rewards_leave_logits(self):
        policy = SoftmaxPolicy([0.4, -0.1])
        adam = AdamState.for_policy(policy)
        before = policy.logits.copy()
        reinforce_update(policy, [[(0, 0.0)], [(1, 0.0)]], adam)
        assert np.array_equal(policy.logits, before)

    def test_rewarded_action_probability_rises_monotonically(self):
        rng = np.random.default_rng(17)
        policy = SoftmaxPolicy(rng.normal(size=2))
        adam = AdamState.for_policy(policy, lr=0.05)
        history = []
        for _ in range(100):
            action = sample_action(policy, rng)
            reward = 1.0 if action == 0 else 0.0
            reinforce_update(policy, [[(action, reward)]], adam)
            history.append(policy.action_probabilities()[0])
        # Monotone trend: large majority of increments non-negative and net rise.
        diffs = np.diff(np.array(history))
        assert history[-1] > history[0]
        assert (diffs >= -1e-9).mean() > 0.8

    def test_baseline_flag_changes_gradient(self):
        # Action counts must be asymmetric, otherwise the baseline term cancels.
        policy = SoftmaxPolicy([0.3, -0.2])
        episodes = [[(0, 1.0)], [(0, 3.0)], [(1, 2.0)]]
        g_plain = policy_gradient(policy, episodes, baseline=False)
        g_base = policy_gradient(policy, episodes, baseline=True)
        assert not np.allclose(g_plain, g_base)
