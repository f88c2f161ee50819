"""
Unit tests for benchmark statistics and plots
"""

import unittest
import sys
import os
import io
import tempfile
from contextlib import redirect_stdout
from pathlib import Path

import pandas as pd

# Add parent directory to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.utils import BenchmarkTracker, Visualizer


def sample_tracker() -> BenchmarkTracker:
    tracker = BenchmarkTracker()
    tracker.add_run({'instance': 'seed0', 'verdict': 'unsat', 'solve_seconds': 1.0,
                     'proof_seconds': 1.2, 'check_seconds': 0.3, 'accepted': True,
                     'nodes': 3, 'leaves': 2, 'depth': 1, 'lemmas': 4, 'pivots': 7})
    tracker.add_run({'instance': 'seed1', 'verdict': 'unsat', 'solve_seconds': 1.0,
                     'proof_seconds': 1.4, 'check_seconds': 0.5, 'accepted': True,
                     'nodes': 7, 'leaves': 4, 'depth': 2, 'lemmas': 1, 'pivots': 9})
    tracker.add_run({'instance': 'seed2', 'verdict': 'sat', 'solve_seconds': 0.5,
                     'proof_seconds': 0.6, 'pivots': 2})
    return tracker


class TestBenchmarkTracker(unittest.TestCase):
    """Test the benchmark table and its summary"""

    def setUp(self):
        self.tracker = sample_tracker()

    def test_frame(self):
        """Test one row per instance with missing columns left empty"""
        frame = self.tracker.to_frame()
        self.assertEqual(len(frame), 3)
        self.assertTrue(pd.isna(frame.loc[2, 'check_seconds']))
        self.assertEqual(len(self.tracker.unsat_frame()), 2)

    def test_overhead(self):
        """Test overhead and relative check time over UNSAT instances"""
        self.assertAlmostEqual(self.tracker.get_overhead(), 30.0)
        self.assertAlmostEqual(self.tracker.get_relative_check_time(), 0.8 / 2.6 * 100)

    def test_summary(self):
        """Test the summary figures"""
        summary = self.tracker.get_summary()
        self.assertEqual(summary['total_instances'], 3)
        self.assertEqual(summary['sat'], 1)
        self.assertEqual(summary['unsat'], 2)
        self.assertEqual(summary['accepted'], 2)
        self.assertAlmostEqual(summary['avg_leaves'], 3.0)
        self.assertEqual(summary['max_depth'], 2)

    def test_empty_summary(self):
        """Test an empty tracker summarizes to zeros"""
        summary = BenchmarkTracker().get_summary()
        self.assertEqual(summary['total_instances'], 0)
        self.assertEqual(summary['overhead_percent'], 0.0)
        self.assertEqual(summary['avg_leaves'], 0.0)

    def test_save_csv(self):
        """Test the CSV round trip"""
        with tempfile.TemporaryDirectory() as tmp:
            path = self.tracker.save_csv(Path(tmp) / "bench.csv")
            frame = pd.read_csv(path)
            self.assertEqual(list(frame['instance']), ['seed0', 'seed1', 'seed2'])


class TestVisualizer(unittest.TestCase):
    """Test plots are written"""

    def test_plots(self):
        """Test both PNG files are created"""
        tracker = sample_tracker()
        with tempfile.TemporaryDirectory() as tmp, redirect_stdout(io.StringIO()):
            visualizer = Visualizer(tmp)
            timings = visualizer.plot_timings(tracker.to_frame())
            sizes = visualizer.plot_tree_sizes([2, 4])
            self.assertTrue(timings.exists())
            self.assertTrue(sizes.exists())
            self.assertEqual(sizes.name, "tree_sizes.png")

    def test_empty_histogram(self):
        """Test a histogram without UNSAT instances still renders"""
        with tempfile.TemporaryDirectory() as tmp, redirect_stdout(io.StringIO()):
            self.assertTrue(Visualizer(tmp).plot_tree_sizes([]).exists())


if __name__ == '__main__':
    unittest.main()
