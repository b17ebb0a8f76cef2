"""
Tests for the command line interface
"""

import io
import json
import os
import tempfile
import unittest
from pathlib import Path
from unittest.mock import patch

from restricted_proj.cli import main, parse_args
from restricted_proj.models import AcceptanceResult, Settings


class TestCli(unittest.TestCase):
    """Test cases for the restricted-proj CLI"""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.root = Path(self.tmp.name)
        self.settings_patcher = patch(
            "restricted_proj.cli.get_settings",
            return_value=Settings(output_root=str(self.root / "runs"), workers=1),
        )
        self.settings_patcher.start()

    def tearDown(self):
        self.settings_patcher.stop()
        self.tmp.cleanup()

    def _main(self, argv):
        with patch("sys.stdout", new_callable=io.StringIO) as out:
            code = main(argv)
        return code, out.getvalue()

    def test_parse_args_defaults(self):
        args = parse_args(["replicate-acceptance"])
        self.assertEqual(args.scale, "full")
        self.assertIsNone(args.only)
        args = parse_args(["lie-check"])
        self.assertEqual(args.ns, [3, 4, 5, 6, 7, 8])

    @patch.dict(os.environ, {"RPROJ_WORKERS": "1"}, clear=True)
    def test_check_env(self):
        code, out = self._main(["--check-env"])
        self.assertEqual(code, 0)
        self.assertIn("✅ RPROJ_WORKERS", out)
        self.assertIn("❌ RPROJ_OUTPUT_ROOT", out)

    def test_no_command(self):
        code, out = self._main([])
        self.assertEqual(code, 1)
        self.assertIn("Please specify a command", out)

    def test_lie_check(self):
        code, out = self._main(["lie-check", "--ns", "3", "--trials", "20"])
        self.assertEqual(code, 0)
        self.assertIn("passed", out)

    def test_generate_sweep_plotdata(self):
        cloud = str(self.root / "segment.txt")
        code, out = self._main(["generate", "--kind", "uniform_segment", "--size", "256", "--out", cloud])
        self.assertEqual(code, 0)
        self.assertEqual(json.loads(out)["N"], 256)

        code, out = self._main(["verify-regularity", "--cloud", cloud])
        self.assertEqual(code, 0)
        self.assertTrue(json.loads(out)["passed"])

        sweep_dir = self.root / "sweep"
        code, _ = self._main([
            "sweep", "--cloud", cloud, "--delta", str(2.0**-6), "--epsilon", "0.005",
            "--t-samples", "4", "--out", str(sweep_dir),
        ])
        self.assertEqual(code, 0)
        self.assertTrue((sweep_dir / "sweep_06.json").exists())

        csv_path = self.root / "plot.csv"
        code, _ = self._main(["plotdata", str(sweep_dir), "--out", str(csv_path)])
        self.assertEqual(code, 0)
        lines = csv_path.read_text().splitlines()
        self.assertEqual(lines[0], "source,series,x,y")
        self.assertEqual(len(lines), 2)
        self.assertIn("delta_scaling", lines[1])

    def test_bad_generator_parameters(self):
        code, _ = self._main(["generate", "--kind", "uniform_segment", "--out", str(self.root / "x.txt")])
        self.assertEqual(code, 2)
        code, _ = self._main(["generate", "--out", str(self.root / "x.txt")])
        self.assertEqual(code, 2)

    def test_missing_cloud_file(self):
        code, _ = self._main(["verify-regularity", "--cloud", str(self.root / "absent.txt")])
        self.assertEqual(code, 2)

    @patch("restricted_proj.cli.replicate_acceptance")
    def test_replicate_acceptance_exit_code(self, mock_replicate):
        mock_replicate.return_value = [
            AcceptanceResult(name="xi_identity", passed=True, detail="ok", seconds=0.1),
            AcceptanceResult(name="ball_mass", passed=False, detail="violated", seconds=0.2),
        ]
        code, out = self._main(["replicate-acceptance", "--scale", "quick"])
        self.assertEqual(code, 1)
        self.assertIn("FAIL", out)
        mock_replicate.assert_called_once_with(scale="quick", seed=0, only=None)

        mock_replicate.return_value = mock_replicate.return_value[:1]
        code, _ = self._main(["replicate-acceptance"])
        self.assertEqual(code, 0)

    def test_run_config(self):
        config_path = self.root / "config.json"
        config_path.write_text(json.dumps({
            "generator": {"kind": "uniform_segment", "size": 256},
            "alpha": 1.0,
            "delta0": 2.0**-8,
            "epsilon": 0.005,
            "t_sample_count": 8,
            "delta_ladder": [2.0**-4, 2.0**-6, 2.0**-8],
        }))
        code, out = self._main(["run", str(config_path), "--output-root", str(self.root / "out")])
        self.assertEqual(code, 0)
        self.assertIn("Run directory:", out)
        self.assertTrue(any((self.root / "out").iterdir()))


if __name__ == "__main__":
    unittest.main()
