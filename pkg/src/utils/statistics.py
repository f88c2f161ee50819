"""
Statistics tracker for verification benchmarks
"""

from pathlib import Path
from typing import Any, Dict, List, Union

import numpy as np
import pandas as pd

COLUMNS = ['instance', 'verdict', 'solve_seconds', 'proof_seconds', 'check_seconds',
           'accepted', 'nodes', 'leaves', 'depth', 'lemmas', 'pivots']


class BenchmarkTracker:
    """
    Collects one record per benchmark instance and summarizes them
    """

    def __init__(self):
        self.records: List[Dict[str, Any]] = []

    def add_run(self, record: Dict[str, Any]):
        """Add the measurements of one instance"""
        self.records.append({column: record.get(column) for column in COLUMNS})

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.records, columns=COLUMNS)

    def unsat_frame(self) -> pd.DataFrame:
        frame = self.to_frame()
        return frame[frame['verdict'] == 'unsat']

    def get_overhead(self) -> float:
        """
        Proof production overhead in percent

        Returns:
            100 * (total proof-producing time / total proof-free time - 1)
            over UNSAT instances, 0 when there are none
        """
        frame = self.unsat_frame()
        baseline = frame['solve_seconds'].sum()
        if frame.empty or baseline <= 0:
            return 0.0
        return (frame['proof_seconds'].sum() / baseline - 1) * 100

    def get_relative_check_time(self) -> float:
        """Checking time as a percentage of proof-producing solve time"""
        frame = self.unsat_frame()
        solving = frame['proof_seconds'].sum()
        if frame.empty or solving <= 0:
            return 0.0
        return frame['check_seconds'].sum() / solving * 100

    def get_summary(self) -> Dict[str, Any]:
        """Get comprehensive benchmark summary"""
        frame = self.to_frame()
        unsat = self.unsat_frame()
        return {
            'total_instances': len(frame),
            'sat': int((frame['verdict'] == 'sat').sum()),
            'unsat': len(unsat),
            'accepted': int(unsat['accepted'].fillna(False).astype(bool).sum()),
            'overhead_percent': self.get_overhead(),
            'relative_check_percent': self.get_relative_check_time(),
            'avg_leaves': float(np.mean(unsat['leaves'])) if len(unsat) else 0.0,
            'max_depth': int(unsat['depth'].max()) if len(unsat) else 0,
        }

    def save_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        self.to_frame().to_csv(path, index=False)
        return path
