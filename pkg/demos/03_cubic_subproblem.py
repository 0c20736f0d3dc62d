"""Exact cubic-regularized subproblem solves, including the hard case.

The solver returns the global minimizer of  g'h + h'Hh/2 + (M/6)||h||^3
and certifies its own optimality conditions on every call.
"""

import numpy as np

from saddlescape import CubicModel, solve_cubic

np.set_printoptions(precision=6, suppress=True)


def show(title, model):
    sol = solve_cubic(model)
    resid = np.linalg.norm(model.g + model.H @ sol.h_star + sol.multiplier * sol.h_star)
    print(f"--- {title} ---")
    print(f"  h* = {sol.h_star}")
    print(f"  radius {sol.radius:.6f}  multiplier {sol.multiplier:.6f}  hard case: {sol.hard_case}")
    print(f"  model decrease {sol.model_decrease:.6f}  "
          f"(cubic-rate bound {-(model.M / 12) * sol.radius**3:.6f})")
    print(f"  stationarity residual {resid:.2e}")
    return sol


# a gradient-dominated solve in one dimension: minimize h + |h|^3
show("1-d: g=1, H=0, M=6", CubicModel(g=np.array([1.0]), H=np.array([[0.0]]), M=6.0))

# pure negative curvature: gradient is orthogonal to the escape direction
show("hard case: g=0, H=diag(-2, 1), M=2",
     CubicModel(g=np.zeros(2), H=np.diag([-2.0, 1.0]), M=2.0))

# a generic dense model
rng = np.random.default_rng(3)
A = rng.standard_normal((4, 4))
show("random 4-d model", CubicModel(g=rng.standard_normal(4), H=0.5 * (A + A.T), M=1.5))

# scale covariance: the minimizer ignores joint rescaling of (g, H, M)
g = rng.standard_normal(3)
B = rng.standard_normal((3, 3))
H = 0.5 * (B + B.T)
base = solve_cubic(CubicModel(g=g, H=H, M=2.0))
scaled = solve_cubic(CubicModel(g=1e3 * g, H=1e3 * H, M=2e3))
print("--- scale covariance ---")
print(f"  || h*(g,H,M) - h*(1e3 g, 1e3 H, 1e3 M) || = "
      f"{np.linalg.norm(base.h_star - scaled.h_star):.2e}")
