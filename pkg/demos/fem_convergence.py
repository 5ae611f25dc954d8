"""Convergence of the Crank-Nicolson P1 solver on a known solution.

The single-mode initial condition sin(pi x) sin(pi y) evolves as a pure
standing wave, so the discrete solution can be compared against the exact
field directly. Halving the mesh size (with dt = T/n coupled to it)
should divide the space-time error by about four.

Run:  python3 demos/fem_convergence.py
"""

import numpy as np

from wavebench import fem
from wavebench.mesh import build_structured_mesh
from wavebench.metrics import mesh_quadrature, simpson_weights
from wavebench.problem import WaveProblem, single_mode_solution


def space_time_error(n: int, problem: WaveProblem) -> float:
    mesh = build_structured_mesh(problem.L1, problem.L2, n, n)
    system = fem.FemSystem.build(mesh, problem.c)
    u0 = fem.interior_values(problem.initial_condition(), mesh)
    traj = fem.cn_solve(system, u0, problem.T / n, n)
    field = traj.field()

    pts, wq = mesh_quadrature(mesh)
    times = np.linspace(0.0, problem.T, 41)
    E = [np.sqrt(max(wq @ (field(pts[:, 0], pts[:, 1], t)
                           - single_mode_solution(pts[:, 0], pts[:, 1], t,
                                                  problem.c)) ** 2, 0.0))
         for t in times]
    ws = simpson_weights(40, times[1] - times[0])
    return float(np.sqrt(ws @ np.asarray(E) ** 2))


def main():
    problem = WaveProblem(ic="single_mode")
    print("  n    st L2 error    observed order")
    prev = None
    for n in (8, 16, 32, 64):
        err = space_time_error(n, problem)
        order = "" if prev is None else f"{np.log2(prev / err):14.2f}"
        print(f"{n:3d}    {err:.4e}{order}")
        prev = err
    print("\nThe conserving scheme with a Taylor first step is second order;"
          "\nthe observed orders should settle near 2.")


if __name__ == "__main__":
    main()
