"""
Tests for configs, the experiment runner and plot data
"""

import json
import os
import tempfile
import unittest
from pathlib import Path

import pandas as pd

import restricted_proj
from restricted_proj.errors import ReportSchemaError
from restricted_proj.experiment import PLOT_COLUMNS, ExperimentRunner, load_config, plotdata
from restricted_proj.models import ExperimentConfig, GeneratorSpec, Settings

PACKAGE_DIR = Path(restricted_proj.__file__).parent


def small_config(**overrides) -> ExperimentConfig:
    values = {
        "generator": {"kind": "uniform_segment", "size": 256},
        "alpha": 1.0,
        "delta0": 2.0**-8,
        "epsilon": 0.005,
        "t_sample_count": 8,
        "delta_ladder": [2.0**-4, 2.0**-6, 2.0**-8],
        "dimension_samples": 2,
        "run_lie": True,
    }
    values.update(overrides)
    return ExperimentConfig.model_validate(values)


class TestExperimentConfig(unittest.TestCase):
    """Test cases for ExperimentConfig validation"""

    def test_valid_config(self):
        config = small_config()
        self.assertEqual(config.family.kind, "standard")
        self.assertEqual(len(config.config_hash()), 12)

    def test_epsilon_must_be_small(self):
        with self.assertRaises(ValueError) as ctx:
            small_config(epsilon=0.02)
        self.assertIn("alpha/100", str(ctx.exception))

    def test_all_problems_reported(self):
        with self.assertRaises(ValueError) as ctx:
            small_config(delta0=0.3, delta_ladder=[0.2, 2.0])
        message = str(ctx.exception)
        self.assertIn("not a power of two", message)
        self.assertIn("delta=2.0 outside", message)

    def test_unknown_field(self):
        with self.assertRaises(ValueError):
            small_config(colour="blue")

    def test_hash_ignores_output_dir_and_workers(self):
        a = small_config()
        b = small_config(output_dir="/tmp/elsewhere", workers=3)
        c = small_config(seed=1)
        self.assertEqual(a.config_hash(), b.config_hash())
        self.assertNotEqual(a.config_hash(), c.config_hash())

    def test_shipped_examples_load(self):
        for path in sorted((PACKAGE_DIR / "examples").glob("*.json")):
            config = load_config(path)
            self.assertIsInstance(config, ExperimentConfig)

    def test_schema_matches_models(self):
        with open(PACKAGE_DIR / "data" / "experiment_config.schema.json") as f:
            schema = json.load(f)
        self.assertEqual(set(schema["properties"]), set(ExperimentConfig.model_fields))
        self.assertEqual(set(schema["properties"]["generator"]["properties"]), set(GeneratorSpec.model_fields))
        self.assertEqual(set(schema["required"]), {"generator", "alpha", "delta0", "epsilon"})


class TestExperimentRunner(unittest.TestCase):
    """Test cases for ExperimentRunner"""

    def setUp(self):
        self.tmpdir = tempfile.TemporaryDirectory()
        self.settings = Settings(output_root=self.tmpdir.name, workers=1)

    def tearDown(self):
        self.tmpdir.cleanup()

    def test_run_writes_artifacts(self):
        manifest = ExperimentRunner(small_config(), settings=self.settings).run()
        run_dir = Path(manifest.run_dir)
        self.assertTrue(manifest.passed, manifest.failures)
        self.assertEqual(run_dir.name, small_config().config_hash())
        for name in ("config.json", "cloud.txt", "regularity.json", "good_sets.json", "moment.json",
                     "sweep_04.json", "sweep_06.json", "sweep_08.json", "sweep.csv", "dimensions.json",
                     "lie.txt", "summary.csv", "manifest.json"):
            self.assertTrue((run_dir / name).exists(), name)
        self.assertEqual(len(list((run_dir / "energy").glob("profile_*.csv"))), 8)
        sweep = pd.read_csv(run_dir / "sweep.csv")
        self.assertEqual(list(sweep.columns), ["t_1", "delta", "bad_fraction", "removed_fraction", "good"])
        self.assertEqual(len(sweep), 24)
        self.assertEqual(set(manifest.checks), {"regularity", "good_sets", "finitary", "lie"})
        self.assertEqual([t.stage for t in manifest.timings], ["generate", "regularity", "good_sets", "moment", "finitary", "dimensions", "lie"])

    def test_runs_are_reproducible(self):
        """Same config, same bytes, whatever the worker count"""
        first = ExperimentRunner(small_config(workers=1), output_root=os.path.join(self.tmpdir.name, "a"), settings=self.settings).run()
        second = ExperimentRunner(small_config(workers=4), output_root=os.path.join(self.tmpdir.name, "b"), settings=self.settings).run()
        self.assertEqual(
            [(f.path, f.sha256) for f in first.files],
            [(f.path, f.sha256) for f in second.files],
        )

    def test_output_dir_wins(self):
        target = os.path.join(self.tmpdir.name, "chosen")
        runner = ExperimentRunner(small_config(output_dir=target), output_root=os.path.join(self.tmpdir.name, "ignored"), settings=self.settings)
        self.assertEqual(runner.run_dir.parent, Path(target))

    def test_failed_check_fails_manifest(self):
        config = small_config(max_exceptional_fraction=0.0, delta_ladder=[2.0**-8], run_lie=False, dimension_samples=0,
                              generator={"kind": "kernel_hyperplane", "t0": [1.5], "size": 256},
                              t_sample_count=4, bound_form="proof", a_emp=-1.0, epsilon=0.002)
        runner = ExperimentRunner(config, settings=self.settings)
        runner._t_samples = runner.t_samples.copy()
        runner._t_samples[0] = [1.5]
        manifest = runner.run()
        self.assertFalse(manifest.checks["finitary"])
        self.assertFalse(manifest.passed)
        self.assertTrue(any(f.startswith("finitary") for f in manifest.failures))


class TestPlotData(unittest.TestCase):
    """Test cases for plotdata"""

    def setUp(self):
        self.tmpdir = tempfile.TemporaryDirectory()
        self.settings = Settings(output_root=self.tmpdir.name, workers=1)

    def tearDown(self):
        self.tmpdir.cleanup()

    def test_empty_input(self):
        frame = plotdata([])
        self.assertTrue(frame.empty)
        self.assertEqual(list(frame.columns), PLOT_COLUMNS)

    def test_single_scale_run(self):
        config = small_config(delta_ladder=[2.0**-6], run_lie=False, run_energy=False)
        manifest = ExperimentRunner(config, settings=self.settings).run()
        frame = plotdata([manifest.run_dir])
        scaling = frame[frame["series"] == "delta_scaling"]
        self.assertEqual(len(scaling), 1)
        self.assertAlmostEqual(scaling["x"].iloc[0], -6 * 0.6931471805599453, places=12)
        self.assertTrue(frame["series"].str.startswith("box_counts").any())
        self.assertFalse((frame["series"] == "dimension_vs_distance").any())

    def test_malformed_report(self):
        path = os.path.join(self.tmpdir.name, "sweep_03.json")
        with open(path, "w") as f:
            json.dump({"bound_form": "theorem", "delta": "small"}, f)
        with self.assertRaises(ReportSchemaError) as ctx:
            plotdata([path])
        self.assertEqual(ctx.exception.path, path)

        other = os.path.join(self.tmpdir.name, "other.json")
        with open(other, "w") as f:
            f.write("[1, 2")
        with self.assertRaises(ReportSchemaError):
            plotdata([other])


if __name__ == "__main__":
    unittest.main()
