"""
Rate vs transmit power for every scheme at desk scale, printed as a
table. Usage: python demos/04_rate_sweep.py [workers]
"""
import sys
from pathlib import Path

from risstat.experiment import parse_config, sweep_results

cfg = parse_config(Path(__file__).parent / "desk_scale.ini")
workers = int(sys.argv[1]) if len(sys.argv) > 1 else 2
res = sweep_results(cfg, workers=workers)

names = cfg.algorithms
print("P [dB] " + "".join(f"{n:>17s}" for n in names))
for p in cfg.power_grid_db:
    cells = "".join(f"{res[p, n][0]:11.3f}+/-{res[p, n][1]:.2f}" for n in names)
    print(f"{p:6.0f} {cells}")
