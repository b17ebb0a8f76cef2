"""
Tests for environment settings
"""

import os
import unittest
from unittest.mock import patch

from restricted_proj.settings import DEFAULT_OUTPUT_ROOT, get_settings


class TestSettings(unittest.TestCase):
    """Test cases for get_settings"""

    @patch.dict(os.environ, {}, clear=True)
    def test_defaults(self):
        settings = get_settings(load_env_file=False)
        self.assertEqual(settings.output_root, DEFAULT_OUTPUT_ROOT)
        self.assertEqual(settings.log_level, "INFO")
        self.assertGreaterEqual(settings.workers, 1)

    @patch.dict(os.environ, {"RPROJ_OUTPUT_ROOT": "/data/runs", "RPROJ_WORKERS": "3", "RPROJ_LOG_LEVEL": "debug"}, clear=True)
    def test_environment_overrides(self):
        settings = get_settings(load_env_file=False)
        self.assertEqual(settings.output_root, "/data/runs")
        self.assertEqual(settings.workers, 3)
        self.assertEqual(settings.log_level, "DEBUG")

    @patch("restricted_proj.settings.os.cpu_count", return_value=6)
    def test_bad_worker_counts_fall_back(self, _cpu_count):
        for raw in ("zero", "0", "-2", ""):
            with patch.dict(os.environ, {"RPROJ_WORKERS": raw}, clear=True):
                self.assertEqual(get_settings(load_env_file=False).workers, 6)

    @patch("restricted_proj.settings.load_dotenv")
    def test_env_file_is_loaded(self, mock_load_dotenv):
        get_settings()
        mock_load_dotenv.assert_called_once()
        mock_load_dotenv.reset_mock()
        get_settings(load_env_file=False)
        mock_load_dotenv.assert_not_called()


if __name__ == "__main__":
    unittest.main()
