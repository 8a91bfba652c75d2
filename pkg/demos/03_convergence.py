"""
Write convergence traces for the configured instance and print a short
text rendering of them. Usage: python demos/03_convergence.py [out_dir]
"""
import csv
import sys
from pathlib import Path

from risstat.experiment import parse_config, run_convergence

here = Path(__file__).parent
cfg = parse_config(here / "desk_scale.ini")
path = run_convergence(cfg, sys.argv[1] if len(sys.argv) > 1 else "out")
print("wrote", path)

traces = {}
with open(path, newline="") as fh:
    for row in csv.DictReader(fh):
        traces.setdefault(row["algorithm"], []).append(float(row["objective"]))

for name, values in traces.items():
    print(f"\n{name}: {len(values) - 1} iterations")
    lo, hi = min(values), max(values)
    for i, v in enumerate(values[:15], 1):
        bar = "#" * int(1 + 50 * (v - lo) / (hi - lo or 1))
        print(f"{i:3d} {v:.6f} {bar}")
