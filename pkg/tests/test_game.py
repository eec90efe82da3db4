import unittest

import numpy as np
from funcnodes_core import testing

import funcnodes_monotone_nash as fnmn
from funcnodes_monotone_nash._types import GameName
from funcnodes_monotone_nash.errors import CapabilityError, UsageError
from funcnodes_monotone_nash.game import (
    GAME_REGISTRY,
    BoxSet,
    GameDefinition,
    batch_cost,
    check_monotone,
    estimate_lipschitz,
    eval_cost,
    eval_game_mapping,
    finite_difference_mapping,
    nash_gap,
    project,
    registry,
    registry_names,
)


class TestGameModel(unittest.TestCase):
    def test_bilinear_cost(self):
        game = registry("bilinear")
        self.assertEqual(eval_cost(game, 0, [1.0, 1.0]), 1.0)
        self.assertEqual(eval_cost(game, 1, [1.0, 1.0]), -1.0)
        self.assertEqual(eval_cost(game, 0, [0.0, 0.0]), 0.0)

    def test_shifted_sum_cost(self):
        game = registry("shifted-sum")
        self.assertAlmostEqual(eval_cost(game, 0, [0.5, 0.5]), -0.125)

    def test_cost_dimension_mismatch(self):
        game = registry("bilinear")
        with self.assertRaises(UsageError):
            eval_cost(game, 0, [1.0, 2.0, 3.0])
        with self.assertRaises(UsageError):
            eval_cost(game, 2, [1.0, 2.0])

    def test_bilinear_mapping(self):
        game = registry("bilinear")
        np.testing.assert_allclose(eval_game_mapping(game, [1.0, 2.0]), [2.0, -1.0])

    def test_mapping_vanishes_at_equilibria(self):
        np.testing.assert_allclose(
            eval_game_mapping(registry("shifted-sum"), [0.5, 0.5]), [0.0, 0.0]
        )
        quad = registry("quadratic-strong")
        np.testing.assert_allclose(
            eval_game_mapping(quad, quad.reference_equilibrium), [0.0, 0.0], atol=1e-12
        )

    def test_quadratic_reference(self):
        ref = registry("quadratic-strong").reference_equilibrium.reshape(-1)
        expected = np.linalg.solve([[2.0, 0.1], [0.1, 2.0]], [0.6, -0.4])
        np.testing.assert_allclose(ref, expected)
        self.assertTrue(np.all(np.abs(ref) <= 1.0))

    def test_mapping_without_gradient(self):
        game = GameDefinition(
            name="plain",
            n_players=2,
            dim=1,
            action_sets=(BoxSet.interval(-1, 1), BoxSet.interval(-1, 1)),
            cost=lambda i, a: float(a[i, 0] ** 2 + a[0, 0] * a[1, 0]),
        )
        with self.assertRaises(CapabilityError):
            eval_game_mapping(game, [0.2, 0.3])
        np.testing.assert_allclose(
            eval_game_mapping(game, [0.2, 0.3], allow_finite_difference=True),
            [0.7, 0.8],
            atol=1e-8,
        )

    def test_project(self):
        box = BoxSet.interval(-1.0, 1.0, dim=2)
        np.testing.assert_array_equal(project(box, [0.3, -0.7]), [0.3, -0.7])
        np.testing.assert_array_equal(project(box, [2.5, -3.0]), [1.0, -1.0])
        half_line = BoxSet([0.0], [np.inf])
        np.testing.assert_array_equal(project(half_line, [-4.0]), [0.0])
        self.assertFalse(half_line.bounded)

    def test_project_idempotent_and_nonexpansive(self):
        box = BoxSet.interval(-1.0, 1.0, dim=3)
        rng = np.random.default_rng(3)
        for _ in range(200):
            u, v = rng.normal(scale=2.0, size=(2, 3))
            pu, pv = project(box, u), project(box, v)
            np.testing.assert_array_equal(project(box, pu), pu)
            self.assertLessEqual(np.linalg.norm(pu - pv), np.linalg.norm(u - v) + 1e-15)

    def test_empty_box(self):
        with self.assertRaises(UsageError):
            BoxSet([1.0], [0.0])
        with self.assertRaises(UsageError):
            BoxSet([0.0, 0.0], [1.0])

    def test_registry(self):
        self.assertEqual(
            set(registry_names()), {"bilinear", "quadratic-strong", "shifted-sum", "kinked"}
        )
        with self.assertRaises(UsageError) as ctx:
            registry("rock-paper-scissors")
        self.assertIn("bilinear", str(ctx.exception))

    def test_sampled_monotonicity(self):
        for name in GAME_REGISTRY:
            game = registry(name)
            self.assertTrue(game.monotone_flag)
            self.assertGreaterEqual(check_monotone(game, n_pairs=10_000, seed=1), -1e-9, name)

    def test_bilinear_inner_products_vanish(self):
        self.assertAlmostEqual(check_monotone(registry("bilinear"), n_pairs=1000), 0.0, places=12)

    def test_lipschitz(self):
        self.assertAlmostEqual(estimate_lipschitz(registry("bilinear")), 1.0, places=9)
        # affine mappings: the sampled maximum reaches the operator norm
        self.assertAlmostEqual(estimate_lipschitz(registry("shifted-sum")), 2.0, places=9)
        self.assertAlmostEqual(estimate_lipschitz(registry("quadratic-strong")), 2.1, places=9)
        self.assertLessEqual(estimate_lipschitz(registry("shifted-sum"), n_pairs=4), 2.0 + 1e-9)

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(7)
        for name in GAME_REGISTRY:
            game = registry(name)
            for _ in range(100):
                a = rng.uniform(-1.0, 1.0, size=game.shape)
                if name == "kinked":
                    # keep the difference stencil off the kink
                    a[np.abs(a) < 1e-3] = 0.5
                analytic = eval_game_mapping(game, a)
                numeric = finite_difference_mapping(game, a)
                np.testing.assert_allclose(numeric, analytic, rtol=1e-6, atol=1e-8, err_msg=name)

    def test_batch_cost_matches_single(self):
        game = registry("quadratic-strong")
        xs = np.random.default_rng(0).normal(size=(5,) + game.shape)
        batch = batch_cost(game, 1, xs)
        single = [eval_cost(game, 1, x) for x in xs]
        np.testing.assert_allclose(batch, single)

    def test_nash_gap(self):
        quad = registry("quadratic-strong")
        gap = nash_gap(quad, quad.reference_equilibrium)
        self.assertTrue(np.all(gap <= 1e-6))
        self.assertTrue(np.all(nash_gap(quad, [0.9, 0.9]) > 0.01))
        with self.assertRaises(UsageError):
            nash_gap(
                GameDefinition(
                    name="line",
                    n_players=1,
                    dim=1,
                    action_sets=(BoxSet([0.0], [np.inf]),),
                    cost=lambda i, a: float(a[0, 0] ** 2),
                ),
                [0.0],
            )


class TestGameNodes(unittest.IsolatedAsyncioTestCase):
    def setUp(self) -> None:
        testing.setup()
        self.game = registry("bilinear")

    def tearDown(self):
        testing.teardown()

    async def test_game_get(self):
        ins = fnmn.game_get()
        ins.inputs["name"].value = GameName.KINKED
        await ins
        self.assertEqual(ins.outputs["game"].value.name, "kinked")

    async def test_game_cost(self):
        ins = fnmn.game_cost()
        ins.inputs["game"].value = self.game
        ins.inputs["player"].value = 0
        ins.inputs["action"].value = np.array([0.5, -0.5])
        await ins
        self.assertEqual(ins.outputs["cost"].value, -0.25)

    async def test_game_mapping(self):
        ins = fnmn.game_mapping()
        ins.inputs["game"].value = self.game
        ins.inputs["action"].value = np.array([1.0, 2.0])
        await ins
        np.testing.assert_allclose(ins.outputs["mapping"].value, [2.0, -1.0])

    async def test_game_project(self):
        ins = fnmn.game_project()
        ins.inputs["game"].value = self.game
        ins.inputs["player"].value = 1
        ins.inputs["vector"].value = np.array([-3.0])
        await ins
        np.testing.assert_array_equal(ins.outputs["projected"].value, [-1.0])

    async def test_game_reference(self):
        ins = fnmn.game_reference()
        ins.inputs["game"].value = registry("shifted-sum")
        await ins
        np.testing.assert_allclose(ins.outputs["equilibrium"].value, [[0.5], [0.5]])
        np.testing.assert_array_equal(ins.outputs["lower"].value, [[-1.0], [-1.0]])
        np.testing.assert_array_equal(ins.outputs["upper"].value, [[1.0], [1.0]])

    async def test_game_check_monotone(self):
        ins = fnmn.game_check_monotone()
        ins.inputs["game"].value = registry("kinked")
        ins.inputs["n_pairs"].value = 500
        await ins
        self.assertGreaterEqual(ins.outputs["min_inner"].value, 0.0)

    async def test_game_nash_gap(self):
        ins = fnmn.game_nash_gap()
        ins.inputs["game"].value = self.game
        ins.inputs["action"].value = np.array([0.0, 0.0])
        ins.inputs["grid"].value = 101
        await ins
        np.testing.assert_allclose(ins.outputs["gap"].value, [0.0, 0.0], atol=1e-12)
