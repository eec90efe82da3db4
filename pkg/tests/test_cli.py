import io
import json
import tempfile
import unittest
from contextlib import redirect_stderr, redirect_stdout
from pathlib import Path

import numpy as np

from funcnodes_monotone_nash.cli import main
from funcnodes_monotone_nash.learner import RUN_COLUMNS


def _main(*argv):
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = main(list(argv))
    return code, out.getvalue(), err.getvalue()


class TestCheckSchedule(unittest.TestCase):
    def test_valid(self):
        code, out, _ = _main("check-schedule", "5/9", "5/27", "1/27")
        self.assertEqual(code, 0)
        self.assertIn("all conditions hold", out)

    def test_invalid(self):
        code, out, _ = _main("check-schedule", "0.5", "0.125", "0.125")
        self.assertEqual(code, 1)
        self.assertIn("a > 1/2", out)
        self.assertEqual(_main("check-schedule", "0.9", "0.2", "0.1")[0], 1)

    def test_partial_sums(self):
        code, out, _ = _main("check-schedule", "5/9", "5/27", "1/27", "--partial-sums")
        self.assertEqual(code, 0)
        self.assertIn("sum_beta", out)

    def test_bad_exponents(self):
        code, _, err = _main("check-schedule", "0", "0.1", "0.1")
        self.assertEqual(code, 2)
        self.assertIn("error:", err)
        self.assertEqual(_main("check-schedule", "abc", "0.1", "0.1")[0], 2)
        self.assertEqual(_main("check-schedule", "0.5")[0], 2)

    def test_quiet(self):
        code, out, _ = _main("--quiet", "check-schedule", "5/9", "5/27", "1/27")
        self.assertEqual(code, 0)
        self.assertEqual(out, "")


class TestSimulate(unittest.TestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()

    def test_single_iteration(self):
        code, _, _ = _main(
            "simulate", "--replications", "1", "--max-iters", "1", "--out", str(self.tmp)
        )
        self.assertEqual(code, 0)
        lines = (self.tmp / "runs.csv").read_text(encoding="utf-8").splitlines()
        self.assertEqual(lines[0], ",".join(RUN_COLUMNS))
        # one row per player of the bilinear game
        self.assertEqual(len(lines), 3)
        summary = (self.tmp / "summary.csv").read_text(encoding="utf-8").splitlines()
        self.assertEqual(summary[0], "replication,final_dist,first_hit_0p1,wall_ms")
        self.assertEqual(len(summary), 2)

    def test_global_options_in_either_position(self):
        first, second = self.tmp / "first", self.tmp / "second"
        args = ["--replications", "2", "--max-iters", "50"]
        self.assertEqual(
            _main("--seed", "7", "--out", str(first), "--quiet", "simulate", *args)[0], 0
        )
        self.assertEqual(
            _main("simulate", *args, "--seed", "7", "--out", str(second), "--quiet")[0], 0
        )
        self.assertEqual(
            (first / "runs.csv").read_bytes(), (second / "runs.csv").read_bytes()
        )

    def test_config_file_and_overrides(self):
        config = self.tmp / "exp.cfg"
        config.write_text(
            "game = shifted-sum\nreplications = 2\nmax_iters = 20\nformat = json\n",
            encoding="utf-8",
        )
        code, _, _ = _main(
            "simulate", str(config), "--set", "max_iters=10", "--out", str(self.tmp), "--quiet"
        )
        self.assertEqual(code, 0)
        rows = json.loads((self.tmp / "runs.json").read_text(encoding="utf-8"))
        self.assertEqual(len(rows), 2 * 10 * 2)
        self.assertEqual(max(r["t"] for r in rows), 10)

    def test_config_errors(self):
        config = self.tmp / "bad.cfg"
        config.write_text("game = bilinear\nspeed = 3\n", encoding="utf-8")
        code, _, err = _main("simulate", str(config), "--out", str(self.tmp))
        self.assertEqual(code, 2)
        self.assertIn("line 2", err)
        self.assertEqual(_main("simulate", "--game", "chess")[0], 2)
        self.assertEqual(_main("simulate", str(self.tmp / "missing.cfg"))[0], 2)

    def test_invalid_schedule(self):
        args = ["simulate", "--set", "exponents=0.5,0.125,0.125", "--replications", "1"]
        args += ["--max-iters", "5", "--out", str(self.tmp), "--quiet"]
        self.assertEqual(_main(*args)[0], 2)
        self.assertEqual(_main(*args, "--allow-invalid-schedule")[0], 0)

    def test_baseline(self):
        code, _, _ = _main(
            "simulate", "--baseline", "--replications", "1", "--max-iters", "3",
            "--out", str(self.tmp), "--quiet",
        )
        self.assertEqual(code, 0)
        lines = (self.tmp / "runs.csv").read_text(encoding="utf-8").splitlines()
        epsilon = RUN_COLUMNS.index("epsilon")
        self.assertTrue(all(float(line.split(",")[epsilon]) == 0.0 for line in lines[1:]))

    def test_plot(self):
        _main("simulate", "--replications", "2", "--max-iters", "30", "--out", str(self.tmp), "--quiet")
        svg = self.tmp / "median.svg"
        code, _, _ = _main("plot", str(self.tmp / "runs.csv"), str(svg))
        self.assertEqual(code, 0)
        self.assertIn("<svg", svg.read_text(encoding="utf-8"))

    def test_plot_errors(self):
        self.assertEqual(_main("plot", str(self.tmp / "none.csv"), str(self.tmp / "x.svg"))[0], 2)
        broken = self.tmp / "broken.csv"
        broken.write_text(",".join(RUN_COLUMNS) + "\n0,1,0,0,abc,0,0,1,1,1,0\n", encoding="utf-8")
        code, _, err = _main("plot", str(broken), str(self.tmp / "x.svg"))
        self.assertEqual(code, 2)
        self.assertIn("line 2", err)


class TestSolve(unittest.TestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()

    def _payload(self):
        return json.loads((self.tmp / "solve.json").read_text(encoding="utf-8"))

    def test_tikhonov(self):
        code, _, _ = _main(
            "solve", "shifted-sum", "tikhonov", "--epsilon", "0.1", "--out", str(self.tmp)
        )
        self.assertEqual(code, 0)
        payload = self._payload()
        np.testing.assert_allclose(payload["y"], [1 / 2.1, 1 / 2.1], atol=1e-6)
        self.assertEqual(payload["method"], "extragradient")

    def test_path(self):
        code, out, _ = _main("solve", "shifted-sum", "path", "--out", str(self.tmp))
        self.assertEqual(code, 0)
        self.assertIn("M_y", out)
        payload = self._payload()
        self.assertEqual([p["epsilon"] for p in payload["points"]], [1.0, 0.1, 0.01, 0.001])
        np.testing.assert_allclose(payload["limit"], [0.5, 0.5], atol=1e-3)
        self.assertTrue(all(row["holds"] for row in payload["increments"]))

    def test_path_from_schedule(self):
        code, _, _ = _main(
            "solve", "quadratic-strong", "path", "--schedule-exponent", "1/27",
            "--steps", "20", "--out", str(self.tmp),
        )
        self.assertEqual(code, 0)
        self.assertEqual(len(self._payload()["points"]), 20)
        self.assertEqual(
            _main("solve", "shifted-sum", "path", "--schedule-exponent", "1/27")[0], 2
        )

    def test_vi(self):
        code, _, _ = _main("solve", "bilinear", "vi", "--out", str(self.tmp), "--quiet")
        self.assertEqual(code, 0)
        self.assertLessEqual(np.linalg.norm(self._payload()["y"]), 1e-8)

    def test_errors(self):
        self.assertEqual(_main("solve", "shifted-sum", "tikhonov", "--epsilon", "0")[0], 2)
        self.assertEqual(_main("solve", "shifted-sum", "path", "--epsilons", "0.1,1")[0], 2)
        code, _, err = _main(
            "solve", "shifted-sum", "tikhonov", "--max-iters", "2", "--tol", "1e-15",
            "--out", str(self.tmp),
        )
        self.assertEqual(code, 1)
        self.assertIn("did not converge", err)


class TestVerifyGradient(unittest.TestCase):
    def test_reports_comparison(self):
        codes = []
        for seed in range(6):
            code, out, _ = _main(
                "verify-gradient", "quadratic-strong", "--samples", "20000",
                "--mu", "0.2,-0.1", "--seed", str(seed),
            )
            self.assertIn("finite_difference", out)
            self.assertIn("mixed_mapping_mc", out)
            self.assertEqual(code == 0, "all estimators agree" in out)
            codes.append(code)
        # a 3 standard error band lets an occasional seed disagree by chance
        self.assertGreaterEqual(codes.count(0), 4, codes)

    def test_bad_input(self):
        self.assertEqual(_main("verify-gradient", "bilinear", "--mu", "0.1,0.2,0.3")[0], 2)
        self.assertEqual(_main("verify-gradient", "bilinear", "--sigma", "0")[0], 2)
        self.assertEqual(_main("verify-gradient", "bilinear", "--samples", "0")[0], 2)

    def test_no_command(self):
        self.assertEqual(_main()[0], 2)
