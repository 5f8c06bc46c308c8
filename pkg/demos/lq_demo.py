"""Linear-quadratic warm-up: solver output against the closed form.

The scalar LQ problem (dx/dt = u, dy/dt = x, cost x^2 + u^2) has an
explicit extremal, so it doubles as an oracle: the demo solves the
boundary value problem by multiple shooting, compares state and
multiplier with the exact solution, and certifies the exponential
turnpike envelope around the trim.

Run:  python demos/lq_demo.py
"""

import numpy as np

from trimturnpike import (
    ShootingConfig,
    certify,
    check_hyperbolicity,
    lq_exact,
    lq_lambda_approx,
    lq_problem,
    solve_bvp,
    solve_static,
)


def main():
    T = 20.0
    prob = lq_problem(T=T)
    sol = solve_bvp(prob, ShootingConfig(nodes=8, grid=600))

    exact = lq_exact(T=T)
    err_x = np.max(np.abs(sol.x[:, 0] - exact.x(sol.times)))
    print(f"solved in {sol.iterations} Newton iterations, "
          f"residual {sol.residual_norm:.1e}")
    print(f"sup |x - x_exact|       = {err_x:.2e}")
    print(f"multiplier: numeric {sol.lam[0]:+.10f}, exact {exact.lam:+.10f}, "
          f"large-horizon formula {lq_lambda_approx(T=T):+.10f}")

    # trim turnpike: steady point of the reduced field at the converged
    # multiplier, hyperbolicity, and the fitted envelope constants
    sp = solve_static(prob, sol.lam)
    report = check_hyperbolicity(prob, sp)
    cert = certify(prob, sol, sp, report)
    print(f"\ntrim: xbar = {sp.xbar[0]:+.6f}, ubar = {sp.ubar[0]:+.6f}, "
          f"hyperbolic = {report.hyperbolic}, mu* = {report.mu_star:.6f}")
    print(f"envelope fit: C = {cert.C_fit:.4f}, mu = {cert.mu_fit:.4f} "
          f"(theory: mu* = 1)")
    i_mid = len(sol.times) // 2
    dev = cert.dev_x + cert.dev_u
    print(f"shape+control deviation: {dev[0]:.3e} at t=0, "
          f"{dev[i_mid]:.3e} at T/2")


if __name__ == "__main__":
    main()
