import unittest

import numpy as np
import pandas as pd
from funcnodes_core import testing

import funcnodes_monotone_nash as fnmn
from funcnodes_monotone_nash.errors import NonFinitePayoffError, UsageError
from funcnodes_monotone_nash.game import BoxSet, GameDefinition, registry
from funcnodes_monotone_nash.learner import (
    RUN_COLUMNS,
    LearnerConfig,
    RecordBuffer,
    init_state,
    records_to_frame,
    run,
    sample_actions,
    step,
)
from funcnodes_monotone_nash.schedules import DEFAULT_EXPONENTS, ScheduleExponents
from funcnodes_monotone_nash.smoothing import SmoothedQuery, analytic_smoothed_gradient
from funcnodes_monotone_nash.utils import get_logger


def _config(game="bilinear", mu0=(0.5, -0.5), max_iters=10, seed=42, **kwargs):
    return LearnerConfig(
        game=registry(game) if isinstance(game, str) else game,
        exponents=kwargs.pop("exponents", DEFAULT_EXPONENTS),
        mu0=np.array(mu0, dtype=float),
        max_iters=max_iters,
        seed=seed,
        **kwargs,
    )


class TestSampling(unittest.TestCase):
    def test_degenerate_sigma(self):
        state = init_state(_config())
        x = sample_actions(state, 1e-12)
        self.assertLessEqual(np.linalg.norm(x - state.mu), 1e-9)

    def test_same_seed_same_samples(self):
        a, b = init_state(_config(seed=42)), init_state(_config(seed=42))
        np.testing.assert_array_equal(sample_actions(a, 0.3), sample_actions(b, 0.3))

    def test_gaussian_moments(self):
        state = init_state(_config(mu0=(0.0, 0.0), seed=5))
        xs = np.stack([sample_actions(state, 1.0) for _ in range(100_000)])
        self.assertTrue(np.all(np.abs(xs.mean(axis=0)) <= 3 / np.sqrt(100_000)))
        self.assertTrue(np.all(np.abs(xs.var(axis=0) - 1.0) <= 0.03))

    def test_invalid_sigma(self):
        with self.assertRaises(UsageError):
            sample_actions(init_state(_config()), 0.0)


class TestStep(unittest.TestCase):
    def test_regularized_update(self):
        config = _config()
        state = init_state(config)
        record = step(state, config, x=np.array([0.6, -0.4]))
        self.assertAlmostEqual(record.payoff[0], -0.24)
        self.assertAlmostEqual(record.payoff[1], 0.24)
        np.testing.assert_allclose(record.mu.reshape(-1), [0.024, -0.024], atol=1e-12)
        np.testing.assert_allclose(state.mu, record.mu)
        self.assertEqual(state.t, 2)
        self.assertEqual((record.gamma, record.sigma, record.epsilon), (1.0, 1.0, 1.0))

    def test_baseline_update(self):
        config = _config(regularized=False)
        state = init_state(config)
        record = step(state, config, x=np.array([0.6, -0.4]))
        np.testing.assert_allclose(record.mu.reshape(-1), [0.524, -0.524], atol=1e-12)
        self.assertEqual(record.epsilon, 0.0)

    def test_sample_at_mean_only_regularizes(self):
        game = GameDefinition(
            name="single",
            n_players=1,
            dim=1,
            action_sets=(BoxSet.interval(-1, 1),),
            cost=lambda i, a: float(a[0, 0] ** 2),
        )
        config = _config(game=game, mu0=(1.0,))
        state = init_state(config)
        record = step(state, config, x=np.array([1.0]))
        np.testing.assert_allclose(record.mu, [[0.0]])

    def test_projection_clamps(self):
        config = _config(mu0=(0.9, 0.9))
        state = init_state(config)
        record = step(state, config, x=np.array([3.0, -3.0]))
        # player 1: 0.9 - (-9 * 2.1 + 0.9) = 18.9, player 2: 0.9 - (9 * -3.9 + 0.9) = 35.1
        np.testing.assert_allclose(record.mu.reshape(-1), [1.0, 1.0])

    def test_non_finite_payoff(self):
        game = GameDefinition(
            name="broken",
            n_players=1,
            dim=1,
            action_sets=(BoxSet.interval(-1, 1),),
            cost=lambda i, a: float("nan"),
        )
        config = _config(game=game, mu0=(0.0,))
        with self.assertRaises(NonFinitePayoffError) as ctx:
            step(init_state(config), config)
        self.assertEqual(ctx.exception.player, 0)

    def test_one_step_drift_matches_smoothed_gradient(self):
        # with mu frozen, the mean payoff-based direction is the smoothed gradient
        game = registry("quadratic-strong")
        mu = np.array([[0.4], [-0.3]])
        sig = 0.3
        rng = np.random.default_rng(11)
        n = 100_000
        z = rng.standard_normal((n,) + game.shape)
        xs = mu + sig * z
        for i in range(2):
            costs = game.cost(i, xs)
            samples = costs * (xs[:, i, 0] - mu[i, 0]) / sig**2
            mean, se = samples.mean(), samples.std(ddof=1) / np.sqrt(n)
            expected = analytic_smoothed_gradient(SmoothedQuery(game, mu, sig, 1), i).value[0]
            self.assertLessEqual(abs(mean - expected), 3 * se)


class TestRun(unittest.TestCase):
    def test_single_iteration(self):
        records = RecordBuffer()
        state = run(_config(max_iters=1), records)
        self.assertEqual(len(records), 1)
        self.assertEqual(state.t, 2)

    def test_deterministic(self):
        a, b = RecordBuffer(), RecordBuffer()
        run(_config(max_iters=300, seed=9), a)
        run(_config(max_iters=300, seed=9), b)
        pd.testing.assert_frame_equal(records_to_frame(a), records_to_frame(b))

    def test_feasible(self):
        records = RecordBuffer()
        run(_config(game="shifted-sum", mu0=(1.0, -1.0), max_iters=2000, seed=3), records)
        mus = np.stack([r.mu for r in records])
        self.assertTrue(np.all(np.abs(mus) <= 1.0))

    def test_thinning(self):
        records = RecordBuffer()
        run(_config(max_iters=95, thinning=10), records)
        self.assertEqual([r.t for r in records], [1, 10, 20, 30, 40, 50, 60, 70, 80, 90, 95])

        records = RecordBuffer()
        run(_config(max_iters=10_025), records)
        ts = [r.t for r in records]
        self.assertEqual(ts[:3], [1, 2, 3])
        self.assertIn(10_000, ts)
        self.assertNotIn(10_001, ts)
        self.assertIn(10_010, ts)
        self.assertEqual(ts[-1], 10_025)

    def test_invalid_schedule(self):
        config = _config(exponents=ScheduleExponents(0.5, 0.125, 0.125))
        with self.assertRaises(UsageError):
            run(config)
        with self.assertLogs(get_logger("learner"), level="WARNING"):
            run(_config(exponents=ScheduleExponents(0.5, 0.125, 0.125), allow_invalid_schedule=True))
        # the baseline ignores the regularization schedule
        run(_config(exponents=ScheduleExponents(0.5, 0.125, 0.125), regularized=False))

    def test_records_to_frame(self):
        records = RecordBuffer()
        run(_config(max_iters=5), records)
        frame = records_to_frame(records, replication=3)
        self.assertEqual(list(frame.columns), RUN_COLUMNS)
        self.assertEqual(len(frame), 10)
        self.assertTrue((frame["replication"] == 3).all())
        self.assertEqual(frame["player"].tolist()[:4], [0, 1, 0, 1])
        last = records[-1]
        rows = frame[frame["t"] == 5]
        np.testing.assert_array_equal(rows["mu"], last.mu.reshape(-1))
        np.testing.assert_array_equal(rows["payoff"], last.payoff)
        np.testing.assert_allclose(rows["dist_ref"], np.linalg.norm(last.mu))

    def test_invalid_config(self):
        with self.assertRaises(UsageError):
            _config(max_iters=0)
        with self.assertRaises(UsageError):
            _config(mu0=(np.inf, 0.0))
        with self.assertRaises(UsageError):
            _config(mu0=(0.1, 0.2, 0.3))


class TestConvergence(unittest.TestCase):
    """Finite-budget behaviour on the bilinear game, 20 seeds, 5000 iterations."""

    @staticmethod
    def _final(config_kwargs, seeds=range(20)):
        rng = np.random.default_rng(2024)
        starts = rng.uniform(-1.0, 1.0, size=(len(seeds), 2))
        out = []
        for seed, mu0 in zip(seeds, starts):
            records = RecordBuffer()
            run(_config(mu0=mu0, max_iters=5000, seed=seed, **config_kwargs), records)
            out.append(records)
        return out

    def test_regularized_reaches_equilibrium(self):
        runs = self._final({})
        final = np.median([r[-1].dist_to_ref for r in runs])
        early = np.median([next(x for x in r if x.t == 100).dist_to_ref for r in runs])
        self.assertLessEqual(final, 0.1)
        self.assertLess(final, early)

    def test_baseline_does_not(self):
        runs = self._final({"regularized": False})
        never = sum(all(x.dist_to_ref > 0.1 for x in r) for r in runs)
        self.assertGreaterEqual(never, 16)


class TestLearnerNodes(unittest.IsolatedAsyncioTestCase):
    def setUp(self) -> None:
        testing.setup()

    def tearDown(self):
        testing.teardown()

    async def test_learn_run(self):
        ins = fnmn.learn_run()
        ins.inputs["game"].value = registry("bilinear")
        ins.inputs["mu0"].value = np.array([0.8, -0.6])
        ins.inputs["max_iters"].value = 50
        ins.inputs["seed"].value = 1
        await ins
        trajectory = ins.outputs["trajectory"].value
        self.assertEqual(len(trajectory), 100)
        self.assertEqual(ins.outputs["mu"].value.shape, (2, 1))
        self.assertTrue((trajectory["mu"].abs() <= 1).all())
