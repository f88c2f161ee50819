"""
Visualization tools for benchmark results
"""

from pathlib import Path
from typing import List, Union

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
import pandas as pd


class Visualizer:
    """
    Benchmark plots written as PNG files into one output directory
    """

    def __init__(self, output_dir: Union[str, Path] = "."):
        self.output_dir = Path(output_dir)
        self.output_dir.mkdir(parents=True, exist_ok=True)

    def _save(self, name: str) -> Path:
        path = self.output_dir / name
        plt.tight_layout()
        plt.savefig(path, dpi=150)
        plt.close()
        print(f"Saved plot: {path}")
        return path

    def plot_timings(self, frame: pd.DataFrame) -> Path:
        """
        Plot solve, proof-producing solve and check time per UNSAT instance

        Args:
            frame: benchmark table from BenchmarkTracker.to_frame
        """
        unsat = frame[frame['verdict'] == 'unsat']
        positions = np.arange(len(unsat))
        width = 0.27

        plt.figure(figsize=(12, 6))
        plt.bar(positions - width, unsat['solve_seconds'], width, label='Solve (no proofs)',
                color='#3498db', edgecolor='black')
        plt.bar(positions, unsat['proof_seconds'], width, label='Solve with proofs',
                color='#2ecc71', edgecolor='black')
        plt.bar(positions + width, unsat['check_seconds'], width, label='Check',
                color='#f39c12', edgecolor='black')
        plt.xticks(positions, unsat['instance'], rotation=90)
        plt.ylabel('Seconds')
        plt.title('Solving and Checking Time per UNSAT Instance')
        plt.legend()
        plt.grid(axis='y', alpha=0.3)
        return self._save('timings.png')

    def plot_tree_sizes(self, leaves: List[int]) -> Path:
        """Histogram of proof tree leaf counts"""
        plt.figure(figsize=(10, 6))
        if leaves:
            bins = np.arange(1, max(leaves) + 2) - 0.5
            plt.hist(leaves, bins=bins, color='skyblue', edgecolor='black')
        plt.xlabel('Leaves')
        plt.ylabel('Instances')
        plt.title('Proof Tree Size Distribution')
        plt.grid(axis='y', alpha=0.3)
        return self._save('tree_sizes.png')
