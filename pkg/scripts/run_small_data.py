"""Small-data run: integrate, watch the critical norms, export the report.

Example:
    python3 scripts/run_small_data.py --eps 1e-3 --M 64 --T 2.0 --out runs/demo
"""
import argparse
import sys

import numpy as np

from blcsim.dyadic import build_partition
from blcsim.monitor import CriterionConfig, export_series
from blcsim.presets import PRESET_NAMES, build_preset
from blcsim.solver import SolverConfig, solve
from blcsim.spectral import Grid


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--preset", default="single-mode", choices=PRESET_NAMES)
    ap.add_argument("--eps", type=float, default=1e-3)
    ap.add_argument("--N", type=int, default=2, choices=(2, 3))
    ap.add_argument("--M", type=int, default=64)
    ap.add_argument("--T", type=float, default=2.0)
    ap.add_argument("--mode", default="direct", choices=("direct", "picard"))
    ap.add_argument("--out", default=None, help="directory for report files")
    args = ap.parse_args(argv)

    grid = Grid(dim=args.N, points=args.M)
    part = build_partition(grid)
    u0, tau0, dbar = build_preset(args.preset, grid, eps=args.eps)
    cfg = SolverConfig(t_end=args.T, mode=args.mode)
    crit = CriterionConfig.default_for(args.N)

    traj, report = solve(u0, tau0, dbar, cfg, crit=crit, part=part,
                         config_echo=vars(args))

    print(f"preset={args.preset} eps={args.eps:g} N={args.N} M={args.M} "
          f"T={args.T:g} mode={args.mode}")
    print(f"blocks q in [{part.q_min}, {part.q_max}], dt={traj.dt:.3e}, "
          f"{report.times.size} rows, E0={report.e0:.6g}")
    print(f"{'t':>8} {'E':>12} {'crit1':>12} {'crit2':>12} {'crit3':>12} "
          f"{'drift':>10}")
    n = report.times.size
    for i in np.unique(np.linspace(0, n - 1, min(n, 9)).astype(int)):
        print(f"{report.times[i]:8.3f} {report.e_values[i]:12.5e} "
              f"{report.crit[0, i]:12.5e} {report.crit[1, i]:12.5e} "
              f"{report.crit[2, i]:12.5e} {report.drift[i]:10.2e}")
    peak = float(np.max(report.e_values)) if n else 0.0
    print(f"peak E / E0 = {peak / report.e0 if report.e0 else 0.0:.4f}")
    if report.picard_converged is not None:
        print(f"picard: converged={report.picard_converged} "
              f"diffs={['%.3e' % d for d in report.picard_diffs]}")
    if report.blowup_time is not None:
        print(f"blow-up flagged at t = {report.blowup_time:.6g} "
              f"(fastest growing: {report.fastest_growing})")
        return 1
    if args.out:
        csv_path, json_path = export_series(report, args.out)
        print(f"wrote {csv_path} and {json_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
