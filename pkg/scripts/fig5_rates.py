"""Achievable rates over peak transmit power and ambient photocurrent."""

import numpy as np

from _common import parser
from pvswipt.cli import cmd_rate_sweep, write_outputs
from pvswipt.config import RunConfig, apply_overrides


def main():
    ap = parser(__doc__, "fig5_rates.csv")
    ap.add_argument("--a2", default=",".join(f"{v:.3e}" for v in np.logspace(-4, -1, 13)))
    ap.add_argument("--pa", default="0,1e-5,1e-4,1e-3")
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()
    cfg = apply_overrides(RunConfig(), {"a2": args.a2, "pa": args.pa, "jobs": str(args.jobs)}).validate()
    table, notes = cmd_rate_sweep(cfg)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    out = args.out_dir / args.name
    write_outputs(out, "rate-sweep", cfg, {"": table.render()}, notes)

    print(f"{'A2 (W)':>10} {'pa (A)':>10} {'R_opt':>8} {'R_unif':>8} {'R_bar':>8}")
    for row in table.rows:
        print(f"{row[0]:10.3e} {row[1]:10.1e} {row[2]:8.4f} {row[3]:8.4f} {row[4]:8.4f}")
    for n in notes:
        print("observed:", n)
    print("wrote", out)


if __name__ == "__main__":
    main()
