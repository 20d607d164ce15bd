"""Drive the lab subcommands end to end through call_command and the console script."""

import contextlib
import csv
import io
import json
import os
import tempfile
import unittest
from unittest import mock

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from django_polytopes import cli
from django_polytopes.conf import lab_setting
from django_polytopes.extremal import GAP_STATISTICS, STATISTICS
from django_polytopes.hull import convex_hull
from django_polytopes.reports import AGGREGATE_HEADER, read_aggregate_rows
from django_polytopes.scaling import fit_rows


def run(*args):
    out = io.StringIO()
    call_command(*args, stdout=out)
    return out.getvalue()


def table(text):
    return list(csv.reader(line for line in text.splitlines() if not line.startswith("#")))


class LabCommandTestCase(SimpleTestCase):
    def setUp(self):
        directory = tempfile.TemporaryDirectory()
        self.addCleanup(directory.cleanup)
        self.tmp = directory.name

    def path(self, name):
        return os.path.join(self.tmp, name)

    def write(self, name, text):
        with open(self.path(name), "w", encoding="utf-8") as handle:
            handle.write(text)
        return self.path(name)

    def assertExitCode(self, code, *args):
        with self.assertRaises(CommandError) as caught:
            run(*args)
        self.assertEqual(caught.exception.returncode, code)


class SimulateTestCase(LabCommandTestCase):
    args = ("simulate", "--n", "2", "--N", "20,40", "--trials", "5", "--seed", "7")

    def test_output_replays(self):
        first = run(*self.args)
        self.assertEqual(first, run(*self.args))
        self.assertTrue(first.startswith("# command=simulate\n# seed=7\n"))
        rows = table(first)
        self.assertEqual(rows[0], AGGREGATE_HEADER)
        self.assertEqual(len(rows) - 1, 2 * len(STATISTICS + GAP_STATISTICS))
        self.assertEqual({row[2] for row in rows[1:]}, {"5"})

    def test_threads_do_not_change_the_output(self):
        self.assertEqual(run(*self.args, "--threads", "1"), run(*self.args, "--threads", "3"))

    def test_out_file_and_json(self):
        run(*self.args, "--out", self.path("agg.csv"))
        with open(self.path("agg.csv"), encoding="utf-8") as handle:
            self.assertEqual(handle.read(), run(*self.args))
        payload = json.loads(run(*self.args, "--format", "json", "--stat", "min_facet,max_facet"))
        self.assertEqual(payload["metadata"]["seed"], 7)
        self.assertEqual({row["stat"] for row in payload["rows"]}, {"min_facet", "max_facet"})
        self.assertEqual(len(payload["rows"]), 4)

    def test_config_file(self):
        config = self.write("lab.conf", "# small run\nn = 2\nN = 20, 40\ntrials = 3\nseed = 7\n")
        self.assertEqual(run("simulate", "--config", config), run(*self.args[:5], "--trials", "3", "--seed", "7"))
        overridden = table(run("simulate", "--config", config, "--trials", "4"))
        self.assertEqual({row[2] for row in overridden[1:]}, {"4"})

    def test_usage_errors(self):
        self.assertExitCode(2, "simulate", "--n", "2")
        self.assertExitCode(2, "simulate", "--n", "2", "--N", "2.5")
        self.assertExitCode(2, "simulate", "--n", "2", "--N", "20", "--trials", "0")
        self.assertExitCode(2, "simulate", "--n", "2", "--N", "20", "--stat", "volume")
        self.assertExitCode(2, "simulate", "--config", self.write("bad.conf", "dimensions = 2\n"))
        self.assertExitCode(2, "simulate", "--config", self.path("missing.conf"))
        self.assertExitCode(2, *self.args, "--config", self.write("hull.conf", "hull_method = gift_wrapping\n"))

    def hull_methods(self, *args):
        with mock.patch("django_polytopes.extremal.convex_hull", wraps=convex_hull) as hull:
            run(*self.args, *args)
        return {call.kwargs["method"] for call in hull.call_args_list}

    def test_hull_method(self):
        self.assertEqual(self.hull_methods(), {"auto"})
        self.assertEqual(self.hull_methods("--hull-method", "qhull"), {"qhull"})
        config = self.write("hull.conf", "hull_method = beneath_beyond\n")
        self.assertEqual(self.hull_methods("--config", config), {"beneath_beyond"})
        self.assertEqual(self.hull_methods("--config", config, "--hull-method", "qhull"), {"qhull"})

    def test_hull_method_is_part_of_the_config_hash(self):
        self.assertNotEqual(
            run(*self.args, "--hull-method", "qhull").splitlines()[2],
            run(*self.args, "--hull-method", "beneath_beyond").splitlines()[2],
        )

    def test_arc_gap_unit(self):
        self.assertIn("# arc_gap_unit=radians\n", run(*self.args))
        three = run("simulate", "--n", "3", "--N", "20", "--trials", "2", "--seed", "7")
        self.assertNotIn("arc_gap_unit", three)


AGGREGATE = "# command=simulate\nn,N,trials,stat,mean,stderr\n"


class FitTestCase(LabCommandTestCase):
    def aggregate_file(self, exponent, n=2, grid=(100, 200, 400, 800)):
        lines = [f"{n},{N},100,min_facet,{3 * N**exponent!r},{0.03 * N**exponent!r}" for N in grid]
        return self.write("agg.csv", AGGREGATE + "\n".join(lines) + "\n")

    def test_power_fit(self):
        payload = json.loads(run("fit", self.aggregate_file(-2.0), "--plot-out", self.path("plot.csv")))
        self.assertEqual(payload["metadata"]["command"], "fit")
        [fit] = payload["fits"]
        self.assertAlmostEqual(fit["exponent"], -2.0, places=9)
        self.assertEqual(fit["status"], "pass")
        with open(self.path("plot.csv"), encoding="utf-8") as handle:
            rows = table(handle.read())
        self.assertEqual(rows[0], ["n", "stat", "N", "mean", "stderr", "model"])
        self.assertEqual(len(rows), 5)

    def test_fit_outside_the_window_fails(self):
        self.assertExitCode(1, "fit", self.aggregate_file(-1.5))

    def test_bad_inputs(self):
        self.assertExitCode(2, "fit", self.aggregate_file(-2.0, grid=(100, 200, 400)))
        self.assertExitCode(2, "fit", self.write("bad.csv", "n,N,mean\n2,100,0.1\n"))
        self.assertExitCode(2, "fit", self.write("bad.json", '{"rows": [{"n": 2}]}'))
        self.assertExitCode(2, "fit", self.path("missing.csv"))

    def test_simulate_output_round_trip(self):
        simulated = run("simulate", "--n", "2", "--N", "50,100,200,400", "--trials", "20", "--out", self.path("sim.csv"))
        self.assertEqual(simulated, "")
        payload = json.loads(run("fit", self.path("sim.csv"), "--stat", "max_facet", "--model", "log_over_N"))
        [fit] = payload["fits"]
        self.assertEqual(fit["N_grid"], [50, 100, 200, 400])
        self.assertGreater(fit["constant"], 0.0)

    def test_fit_rows_on_simulated_edges(self):
        run(
            "simulate", "--n", "2", "--N", "100,200,400,800", "--trials", "400", "--seed", "11",
            "--stat", "min_facet", "--hull-method", "qhull", "--out", self.path("edges.csv"),
        )
        [fit] = fit_rows(read_aggregate_rows(self.path("edges.csv")))
        self.assertEqual(fit.N_grid, (100, 200, 400, 800))
        self.assertTrue(fit.weighted)
        self.assertEqual(fit.status, "pass", fit.to_dict())

    @unittest.skipUnless(lab_setting("SLOW_TESTS"), "acceptance-scale run")
    def test_simulated_exponents_fall_in_their_windows(self):
        run(
            "simulate", "--n", "2,3,4", "--N", "100,200,400,800,1600", "--trials", "1000", "--seed", "20240601",
            "--stat", "min_facet,max_facet", "--hull-method", "qhull", "--out", self.path("scaling.csv"),
        )
        payload = json.loads(run("fit", self.path("scaling.csv"), "--stat", "min_facet"))
        self.assertEqual({fit["n"] for fit in payload["fits"]}, {2, 3, 4})
        for fit in payload["fits"]:
            low, high = fit["window"]
            self.assertTrue(low <= fit["exponent"] <= high, fit)


class VerifyTestCase(LabCommandTestCase):
    def test_simplex_suite(self):
        payload = json.loads(run("verify", "simplex", "--n", "3", "--samples", "50000"))
        self.assertEqual(payload["suite"], "simplex")
        self.assertEqual(payload["summary"]["fail"], 0)
        self.assertEqual(payload["summary"]["inconclusive"], 0)
        self.assertEqual({report["params"]["n"] for report in payload["reports"]}, {3})

    def test_integral_suite(self):
        self.assertEqual(run("verify", "lemma17", "--n", "4", "--N", "10000", "--out", self.path("v.json")), "")
        with open(self.path("v.json"), encoding="utf-8") as handle:
            report = json.load(handle)
        self.assertEqual(len(report["reports"]), 1)
        self.assertEqual(report["reports"][0]["params"], {"n": 4, "N": 10000})

    def test_unknown_suite(self):
        self.assertExitCode(2, "verify", "everything")


class BoundsTestCase(LabCommandTestCase):
    def test_table(self):
        rows = table(run("bounds", "hausdorff_tail", "--n", "2,3", "--N", "50", "--grid", "0.5,1.0"))
        self.assertEqual(rows[0], ["bound", "n", "N", "delta", "value", "clamped"])
        self.assertEqual(len(rows), 5)
        self.assertEqual(f"{float(rows[2][4]):.3g}", "0.000212")

    def test_json_table(self):
        payload = json.loads(run("bounds", "min_facet_interval", "--n", "2,3", "--N", "10", "--format", "json"))
        self.assertEqual(payload["rows"][0]["exponent"], -2.0)
        self.assertIsNone(payload["rows"][1]["lower"])

    def test_usage_errors(self):
        self.assertExitCode(2, "bounds", "hausdorff_tail", "--n", "2", "--N", "50")
        self.assertExitCode(2, "bounds", "no_such_bound", "--n", "2", "--N", "50")
        self.assertExitCode(2, "bounds", "max_facet_expectation", "--n", "2")
        self.assertExitCode(2, "bounds", "lemma8_volume", "--grid", "0.1")


class CapsTestCase(LabCommandTestCase):
    def test_cap_row(self):
        payload = json.loads(run("caps", "--n", "3", "--height", "0.5", "--format", "json"))
        [row] = payload["rows"]
        self.assertEqual(row["kind"], "cap")
        self.assertAlmostEqual(row["area"], 3.141592653589793, places=12)
        self.assertAlmostEqual(row["fraction"], 0.25, places=12)

    def test_area_bounds_and_packing(self):
        payload = json.loads(run("caps", "--n", "4", "--offset", "0.5", "--R", "50", "--packing", "--format", "json"))
        cap, fraction, packing = payload["rows"]
        self.assertLessEqual(cap["area_lower"], cap["area"])
        self.assertLessEqual(cap["area"], cap["area_upper"])
        self.assertLessEqual(fraction["angle_lower"], fraction["angle"])
        self.assertGreaterEqual(packing["caps"], packing["count_lower"])
        self.assertLessEqual(packing["caps"], 50)

    def test_usage_errors(self):
        self.assertExitCode(2, "caps", "--n", "3", "--height", "0.5", "--angle", "1.0")
        self.assertExitCode(2, "caps", "--n", "3")
        self.assertExitCode(2, "caps", "--n", "3", "--height", "0.5", "--packing")
        self.assertExitCode(2, "caps", "--n", "3", "--height", "2.5")


class ConsoleScriptTestCase(SimpleTestCase):
    def test_main(self):
        out = io.StringIO()
        with contextlib.redirect_stdout(out):
            cli.main(["polylab", "caps", "--n", "3", "--angle", "0.5"])
        self.assertIn("kind,n,offset", out.getvalue())

    def test_main_exit_code(self):
        with contextlib.redirect_stderr(io.StringIO()), self.assertRaises(SystemExit) as caught:
            cli.main(["polylab", "caps", "--n", "3"])
        self.assertEqual(caught.exception.code, 2)
