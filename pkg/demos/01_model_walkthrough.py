"""
Build a statistical model, look at the effective covariance and the
bilinear precoder, and compare the closed-form SNR bound with simulation.
"""
import numpy as np

from risstat import (Scenario, Scheme, SystemDims, coupling_scalar, effective_covariance,
                     generate_covariances, monte_carlo_rate, optimal_transform,
                     rate_lower_bound, snr_lower_bound_optimal, substream)

dims = SystemDims(M=4, N=16, P=10.0)
scenario = Scenario(dims)
model = generate_covariances(scenario, 25.0, substream(0))

print("beta (BS-RIS scaling):", model.beta)
print("trace R_Tx, trace R_RIS:", np.trace(model.R_Tx).real, np.trace(model.R_RIS).real)

phi = np.ones(dims.N, dtype=complex)
stats = effective_covariance(model, phi)
print("coupling s(phi) for all-ones phases:", coupling_scalar(model, phi))
print("eigenvalues of C:", np.round(np.linalg.eigvalsh(stats.C), 3))

pre = optimal_transform(stats.Q, dims.P)
# the transform spends exactly the power budget on the observation
print("tr(A Q A^H) =", np.trace(pre.A @ stats.Q @ pre.A.conj().T).real)

gamma = snr_lower_bound_optimal(stats.C, stats.Q, dims.P, dims.sigma2)
est = monte_carlo_rate(model, phi, Scheme.BILINEAR_STAT, dims, 20_000, substream(0, 1))
print(f"rate bound  {rate_lower_bound(gamma):.3f} bpcu")
print(f"simulated   {est.mean_rate:.3f} +/- {est.std_err:.3f} bpcu")
