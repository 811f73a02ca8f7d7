"""
Main Entry Point for Sparse Walsh-Hadamard Recovery
===================================================
Recovers k-sparse approximations of integer signals of length 2^n from a
non-adaptive set of Walsh-Hadamard spectrum queries.

Usage:
    python main.py gen --n 12 --k 4 --out data/x.txt
    python main.py recover --input data/x.txt --k 4 --report results/run.json
    python main.py verify --condenser certified --n 6 --r 4 --k 2 --mode exhaustive
    python main.py bench --sweep n --from 10 --to 14 --out results/bench_n.csv
"""

import sys
import warnings
from pathlib import Path

warnings.filterwarnings('ignore', category=DeprecationWarning)

# Project root on the path so `src` imports resolve from any working directory
sys.path.insert(0, str(Path(__file__).parent))

from src.cli import main


if __name__ == "__main__":
    sys.exit(main())
