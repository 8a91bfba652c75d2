"""
Projected gradient vs element-wise updates on one instance, plus the
exhaustive grid for a three-element surface as a sanity check.
"""
import numpy as np

from risstat import (Scenario, SystemDims, brute_force_phases, generate_covariances,
                     objective, optimize_elementwise, optimize_pgd, random_phases,
                     substream)

model = generate_covariances(Scenario(SystemDims(M=4, N=40)), 20.0, substream(1))

print("tr(Q^-1) at all-ones phases:", objective(model, np.ones(40)))
print("tr(Q^-1) at random phases:  ", objective(model, random_phases(0, 40)))

for name, solve in (("pgd", optimize_pgd), ("elementwise", optimize_elementwise)):
    rep = solve(model)
    print(f"{name:12s} {rep.iterations:3d} iterations, objective {rep.objective:.6f}, "
          f"{rep.wall_time * 1e3:.1f} ms")

small = generate_covariances(Scenario(SystemDims(M=4, N=3)), 30.0, substream(2))
phi_grid, best = brute_force_phases(small, 32)
print("grid optimum (32^2 points):", best)
print("pgd:        ", optimize_pgd(small).objective)
print("elementwise:", optimize_elementwise(small).objective)
