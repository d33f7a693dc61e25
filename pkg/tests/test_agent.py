import numpy as np
import numpy.testing as npt
import pytest

from forcepush.agent import (AgentHyper, DdpgAgent, actor_update,
                             critic_update, select_action, td_target)
from forcepush.nets import AdamState, Mlp


def zeroed(net):
    for p in net.params:
        p[...] = 0.0
    return net


def toy_actor(seed=0, obs=4, goal=2, act=2):
    return Mlp([obs + goal, 6, act], output_activation="tanh", rng=seed)


def toy_critic(seed=0, obs=4, goal=2, act=2):
    return Mlp([obs + act + goal, 6, 1], output_activation="identity", rng=seed)


class TestSelectAction:
    def test_noise_free_equals_actor_output(self):
        actor = toy_actor(obs=16, act=3)
        obs = np.random.default_rng(0).normal(size=16)
        goal = np.array([0.3, 0.4])
        a = select_action(actor, obs, goal, 0.0)
        npt.assert_array_equal(a, actor.forward(np.concatenate([obs, goal])))
        assert np.all(np.abs(a) <= 1.0)

    def test_noisy_actions_stay_clipped(self):
        actor = toy_actor(seed=1, obs=16, act=3)
        rng = np.random.default_rng(2)
        obs = rng.normal(size=16)
        goal = rng.uniform(0, 1, 2)
        for _ in range(10000):
            a = select_action(actor, obs, goal, 0.5, rng)
            assert np.all(a >= -1.0) and np.all(a <= 1.0)

    def test_noise_is_zero_mean(self):
        actor = toy_actor(seed=3, obs=16, act=3)
        # keep the raw output near 0 so clipping cannot bias the mean
        zeroed(actor)
        rng = np.random.default_rng(4)
        obs = rng.normal(size=16)
        goal = rng.uniform(0, 1, 2)
        sigma = 0.1
        n = 10000
        draws = np.array([select_action(actor, obs, goal, sigma, rng)
                          for _ in range(n)])
        assert np.all(np.abs(draws.mean(axis=0)) < 3 * sigma / np.sqrt(n))

    def test_dimension_mismatch_raises(self):
        with pytest.raises(ValueError):
            select_action(toy_actor(), np.zeros(3), np.zeros(2), 0.0)


class TestTdTarget:
    def batch(self, n=3, seed=0):
        rng = np.random.default_rng(seed)
        return (rng.normal(size=(n, 4)), rng.uniform(0, 1, (n, 2)),
                rng.uniform(-1, 0, n), np.zeros(n))

    def test_gamma_zero_is_reward(self):
        next_obs, goals, rewards, terminals = self.batch()
        y = td_target(toy_critic(), toy_actor(), next_obs, goals, rewards,
                      terminals, gamma=0.0)
        npt.assert_array_equal(y, rewards)

    def test_direct_arithmetic(self):
        critic = zeroed(toy_critic())
        critic.biases[-1][...] = -5.0  # Q == -5 everywhere
        y = td_target(critic, toy_actor(), np.zeros((1, 4)), np.zeros((1, 2)),
                      np.array([-1.0]), np.zeros(1), gamma=0.98)
        npt.assert_allclose(y, [-5.9], atol=1e-12)

    def test_terminal_masks_bootstrap(self):
        critic = zeroed(toy_critic())
        critic.biases[-1][...] = -5.0
        y = td_target(critic, toy_actor(), np.zeros((2, 4)), np.zeros((2, 2)),
                      np.array([-1.0, -1.0]), np.array([0.0, 1.0]), gamma=0.98)
        npt.assert_allclose(y, [-5.9, -1.0], atol=1e-12)

    def test_matches_elementwise_recomputation(self):
        critic, actor = toy_critic(seed=5), toy_actor(seed=6)
        next_obs, goals, rewards, terminals = self.batch(seed=7)
        y = td_target(critic, actor, next_obs, goals, rewards, terminals, 0.98)
        for i in range(len(rewards)):
            a = actor.forward(np.concatenate([next_obs[i], goals[i]]))
            q = critic.forward(np.concatenate([next_obs[i], a, goals[i]]))[0]
            assert abs(y[i] - (rewards[i] + 0.98 * q)) < 1e-12


class TestCriticUpdate:
    def test_zero_error_leaves_parameters_unchanged(self):
        critic = toy_critic(seed=8)
        state = AdamState.for_params(critic.params)
        rng = np.random.default_rng(9)
        obs = rng.normal(size=(4, 4))
        actions = rng.uniform(-1, 1, (4, 2))
        goals = rng.uniform(0, 1, (4, 2))
        x = np.concatenate([obs, actions, goals], axis=1)
        y = critic.forward(x)[:, 0]
        before = [p.copy() for p in critic.params]
        loss = critic_update(critic, state, obs, actions, goals, y)
        assert loss == 0.0
        for p, b in zip(critic.params, before):
            npt.assert_array_equal(p, b)

    def test_loss_arithmetic(self):
        critic = zeroed(toy_critic())  # Q == 0 everywhere
        state = AdamState.for_params(critic.params)
        loss = critic_update(critic, state, np.zeros((2, 4)), np.zeros((2, 2)),
                             np.zeros((2, 2)), np.array([1.0, 2.0]))
        assert loss == pytest.approx(2.5)

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(10)
        h = 1e-6
        critic = toy_critic(seed=11)
        obs = rng.normal(size=(3, 4))
        actions = rng.uniform(-1, 1, (3, 2))
        goals = rng.uniform(0, 1, (3, 2))
        y = rng.normal(size=3)
        x = np.concatenate([obs, actions, goals], axis=1)

        def loss():
            q = critic.forward(x)[:, 0]
            return float(np.mean((q - y) ** 2))

        q = critic.forward(x)[:, 0]
        grads, _ = critic.backward(x, (2.0 / 3) * (q - y)[:, None])
        for p, g in zip(critic.params, grads):
            fp, fg = p.ravel(), g.ravel()
            for i in range(fp.size):
                orig = fp[i]
                fp[i] = orig + h
                up = loss()
                fp[i] = orig - h
                down = loss()
                fp[i] = orig
                fd = (up - down) / (2 * h)
                assert abs(fg[i] - fd) <= 1e-5 * max(abs(fd), 1e-8) + 1e-8


class TestActorUpdate:
    def test_action_independent_critic_gives_no_update(self):
        critic = zeroed(toy_critic())
        critic.biases[-1][...] = 3.0  # constant Q
        actor = toy_actor(seed=12)
        state = AdamState.for_params(actor.params)
        before = [p.copy() for p in actor.params]
        rng = np.random.default_rng(13)
        mean_q = actor_update(actor, critic, state, rng.normal(size=(4, 4)),
                              rng.uniform(0, 1, (4, 2)))
        assert mean_q == pytest.approx(3.0)
        for p, b in zip(actor.params, before):
            npt.assert_array_equal(p, b)

    def test_objective_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(14)
        h = 1e-6
        actor = toy_actor(seed=15)
        critic = toy_critic(seed=16)
        obs = rng.normal(size=(3, 4))
        goals = rng.uniform(0, 1, (3, 2))
        sg = np.concatenate([obs, goals], axis=1)

        def objective():
            a = actor.forward(sg)
            q = critic.forward(np.concatenate([obs, a, goals], axis=1))[:, 0]
            return float(np.mean(q))

        actions = actor.forward(sg)
        x = np.concatenate([obs, actions, goals], axis=1)
        _, x_grad = critic.backward(x, np.full((3, 1), 1.0 / 3))
        grads, _ = actor.backward(sg, x_grad[:, 4:6])
        for p, g in zip(actor.params, grads):
            fp, fg = p.ravel(), g.ravel()
            for i in range(fp.size):
                orig = fp[i]
                fp[i] = orig + h
                up = objective()
                fp[i] = orig - h
                down = objective()
                fp[i] = orig
                fd = (up - down) / (2 * h)
                assert abs(fg[i] - fd) <= 1e-5 * max(abs(fd), 1e-8) + 1e-8

    def test_small_step_does_not_decrease_mean_q(self):
        rng = np.random.default_rng(17)
        actor = toy_actor(seed=18)
        critic = toy_critic(seed=19)  # frozen critic
        state = AdamState.for_params(actor.params, learning_rate=1e-4)
        obs = rng.normal(size=(16, 4))
        goals = rng.uniform(0, 1, (16, 2))

        def mean_q():
            a = actor.forward(np.concatenate([obs, goals], axis=1))
            return float(np.mean(
                critic.forward(np.concatenate([obs, a, goals], axis=1))))

        before = mean_q()
        actor_update(actor, critic, state, obs, goals)
        assert mean_q() >= before - 1e-12


class TestSupervisedSanity:
    def test_critic_regresses_fixed_targets(self):
        # gamma = 0, no target nets: plain regression should drive the MSE
        # below 1e-4 within 2000 Adam steps
        rng = np.random.default_rng(20)
        critic = Mlp([4 + 2 + 2, 64, 64, 1], output_activation="identity", rng=21)
        state = AdamState.for_params(critic.params, learning_rate=1e-3)
        obs = rng.normal(size=(32, 4))
        actions = rng.uniform(-1, 1, (32, 2))
        goals = rng.uniform(0, 1, (32, 2))
        y = rng.uniform(-1, 0, 32)
        loss = None
        for _ in range(2000):
            loss = critic_update(critic, state, obs, actions, goals, y)
        assert loss < 1e-4


class TestDdpgAgent:
    def test_training_keeps_everything_finite(self):
        hyper = AgentHyper(updates_per_episode=5)
        agent = DdpgAgent(hyper, seed=0)
        rng = np.random.default_rng(1)
        for _ in range(50):
            arrays = {
                "observation": rng.normal(size=(16, 16)),
                "next_observation": rng.normal(size=(16, 16)),
                "action": rng.uniform(-1, 1, (16, 3)),
                "goal": rng.uniform(0, 1, (16, 2)),
                "reward": rng.uniform(-1.2, 0.2, 16),
                "terminal": np.zeros(16),
            }
            loss, mean_q = agent.train_on_batch(arrays)
            assert np.isfinite(loss) and np.isfinite(mean_q)
        for net in (agent.actor, agent.critic, agent.target_actor,
                    agent.target_critic):
            for p in net.params:
                assert np.all(np.isfinite(p))

    def test_hyper_validation(self):
        with pytest.raises(ValueError):
            AgentHyper(gamma=1.0)
        with pytest.raises(ValueError):
            AgentHyper(actor_lr=0.0)
