#!/usr/bin/env python3
"""Past a critical perturbation budget, the trained estimator gives up.

When eps^2 exceeds the signal energy sigma_c^2, no linear estimator can
beat simply outputting zero, whose worst-case risk is sigma_c^2 exactly.
This script trains adversarially on either side of that transition and
reports the Frobenius norm of the learned matrix together with its
certified robust risk: below the transition the estimator is a genuine
shrinkage; above it the matrix norm drops to nearly zero and the risk
flattens at sigma_c^2.
"""

import numpy as np

import jitterlab as jl

N, D = 100, 50
SIGMA_C = float(np.sqrt(50.0))
SIGMA_Z = 5.0  # sigma_z / sqrt(n) = 0.5
EPS_SQ_REL = (0.5, 0.9, 1.2, 1.5)  # eps^2 / sigma_c^2
N_EVAL = 400
OUT = "collapse_at_large_eps.csv"


def main():
    model = jl.make_subspace(N, D, SIGMA_C, seed=0)
    op = jl.make_diagonal_operator(N, "identity")
    noise = jl.NoiseModel(m=N, sigma_z=SIGMA_Z)
    print(f"n={N}, d={D}, sigma_c^2={SIGMA_C**2:.0f}, sigma_z/sqrt(n)={SIGMA_Z/np.sqrt(N):.2f}")
    print(f"zero-estimator risk = sigma_c^2 = {SIGMA_C**2:.1f}")
    print()
    print(f"{'eps^2/sigma_c^2':>15} {'||H||_F':>10} {'robust risk':>12}")

    rows = []
    for j, rel in enumerate(EPS_SQ_REL):
        eps = float(np.sqrt(rel) * SIGMA_C)
        trace = jl.train(model, op, noise, jl.TrainConfig(
            objective="adversarial", eps=eps, n_iterations=20000, seed=5 + j))
        h_frob = trace.estimator.frobenius_norm()
        rep = jl.robust_risk_exact(trace.estimator, model, op, noise, eps, N_EVAL, seed=1)
        risk = float(rep.values[0])
        marker = "  <- collapsed" if h_frob < 0.05 * np.sqrt(D) else ""
        print(f"{rel:15.2f} {h_frob:10.4f} {risk:12.2f}{marker}")
        rows.append((rel, eps, h_frob, risk))

    with open(OUT, "w", encoding="utf-8") as fh:
        fh.write("eps_sq_rel,eps,h_frob,risk\n")
        for rel, eps, h_frob, risk in rows:
            fh.write(f"{rel:.12g},{eps:.12g},{h_frob:.12g},{risk:.12g}\n")
    print(f"\nwrote {OUT}")


if __name__ == "__main__":
    main()
