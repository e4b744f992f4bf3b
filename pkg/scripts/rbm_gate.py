"""Closed-form RBM marginal against the path simulator, grid vs bridge reflection."""
import numpy as np

from srptlab.diagnostics import ks_statistic
from srptlab.rbm_reference import RbmParams, rbm_marginal_cdf, simulate_rbm_marginal

CASES = [RbmParams(1.0, 1.0, 5 / 3), RbmParams(0.0, 1.0, 5 / 3), RbmParams(0.0, 0.0, 1.0)]

if __name__ == "__main__":
    print("w0    gamma  sigma2  t     method  KS")
    for k, p in enumerate(CASES):
        for t in (0.25, 1.0):
            for method in ("grid", "bridge"):
                w = simulate_rbm_marginal(p, t, 10**5, 1000, np.random.default_rng([7, k]), method=method)
                ks = ks_statistic(w, lambda x: rbm_marginal_cdf(p, t, x))
                print(f"{p.w0:<5g} {p.gamma:<6g} {p.sigma2:<7.4g} {t:<5g} {method:<7} {ks:.4f}")
