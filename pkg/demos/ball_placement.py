"""How the reference ball's position, size and the incident direction matter.

Runs the apple reconstruction over a grid of ball placements and two incident
directions, one noise seed per cell, and prints the outcome of each run.
Cells that stall or degenerate show where the single-step Newton scheme is
sensitive to the setup.

Set PHASELESS_THREADS to run cells in parallel.
"""

import time

from refball.cli import run_sweep
from refball.inversion import PRESETS

start = time.perf_counter()
jobs, results = run_sweep(PRESETS["apple"])
print(f"{'ball':>10} {'R':>4} {'direction':>10}  {'outcome':<15} {'k':>3} {'E':>8} {'Er':>8}")
for job, res in zip(jobs, results):
    center = f"({job.ball_center[0]:g},{job.ball_center[1]:g})"
    print(f"{center:>10} {job.ball_radius:4.1f} {job.direction_angle:+10.4f}  "
          f"{res['reason']:<15} {res['iterations']:3d} {res['E']:8.4f} {res['Er']:8.4f}")
done = sum(r["reason"] == "converged" for r in results)
print(f"\n{done}/{len(results)} converged in {time.perf_counter() - start:.1f} s")
