"""Time the numba kernels against the pure-Python fallback.

The backend is fixed at import, so each path runs in its own interpreter:

    python3 benchmarks/bench_kernels.py [--repeat N] [--json out.json]
"""
import argparse
import json
import os
import subprocess
import sys
import time

WORKLOAD = r"""
import json, sys, time
import numpy as np
from maginterp import _accel, _kernels as K
from maginterp.el_solver import solve_mu_el, solve_nu_el
from maginterp.profiles import SolverConfig
from maginterp.shooting import RadialEquation, shoot

repeat = int(sys.argv[1])
cfg = SolverConfig()
eq = RadialEquation(2, 3.0, 0.0, 0.25, 1.0)

def best(fn):
    fn()  # warm-up (includes compilation on the numba path)
    ts = []
    for _ in range(repeat):
        t = time.perf_counter(); out = fn(); ts.append(time.perf_counter() - t)
    return min(ts), out

t_traj, out = best(lambda: shoot(eq, 3.0, cfg))
t_mu, pt = best(lambda: solve_mu_el(3.0, 1.0, 0.0, cfg))
t_nu, pn = best(lambda: solve_nu_el(1.4, 1.0, 1.5, cfg, scan=False))
print(json.dumps({"backend": _accel.backend_name(), "trajectory_s": t_traj, "steps": out.diagnostics["steps"],
                  "mu_el_s": t_mu, "mu_el": pt.value, "nu_el_s": t_nu, "beta": pn.value}))
"""


def run(disable, repeat):
    env = dict(os.environ, MAGINTERP_DISABLE_NUMBA="1" if disable else "0")
    src = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "src")
    env["PYTHONPATH"] = os.pathsep.join([os.path.abspath(src), env.get("PYTHONPATH", "")])
    res = subprocess.run([sys.executable, "-c", WORKLOAD, str(repeat)], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(res.stdout.strip().splitlines()[-1])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", default=None)
    args = ap.parse_args(argv)
    t0 = time.perf_counter()
    fast = run(False, args.repeat)
    slow = run(True, args.repeat)
    print(f"{'task':<22}{'numba [s]':>12}{'python [s]':>12}{'speedup':>10}")
    for key, label in (("trajectory_s", "one trajectory"), ("mu_el_s", "mu_EL solve"), ("nu_el_s", "nu_EL solve")):
        print(f"{label:<22}{fast[key]:>12.4g}{slow[key]:>12.4g}{slow[key] / fast[key]:>10.1f}")
    print(f"mu_EL  numba {fast['mu_el']!r}  python {slow['mu_el']!r}")
    print(f"beta   numba {fast['beta']!r}  python {slow['beta']!r}")
    print(f"total wall time {time.perf_counter() - t0:.1f} s")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump({"numba": fast, "python": slow}, fh, indent=1, sort_keys=True)


if __name__ == "__main__":
    main()
