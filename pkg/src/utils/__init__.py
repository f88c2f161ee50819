"""
Benchmark statistics and visualization
"""

from .statistics import BenchmarkTracker
from .visualizer import Visualizer

__all__ = ['BenchmarkTracker', 'Visualizer']
