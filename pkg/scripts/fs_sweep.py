"""Gradient L^p norms of the rescaled Fubini-Study potentials against lambda."""

import math

import numpy as np

from calabi_lab import fubini_study as fs


def main():
    lams = [10.0**k for k in range(7)]
    for p in (1.0, 1.5, 1.9):
        bound = fs.lp_upper_bound(p)
        exact = math.pi**2 * p / (2 * math.sin(math.pi * p / 2))
        vals = [fs.lp_gradient_norm(fs.FSProbe(lam, p)) for lam in lams]
        print(f"p={p}: bound {bound:.10f} (closed form {exact:.10f})")
        print("   " + " ".join(f"{v:.5f}" for v in vals))
    vals = np.array([fs.lp_gradient_norm(fs.FSProbe(lam, 2.0)) for lam in lams])
    print("p=2 (= I):", " ".join(f"{v:.4f}" for v in vals))
    print("   increments per decade:", " ".join(f"{d:.4f}" for d in np.diff(vals)),
          f"(2 pi log 10 = {2 * math.pi * math.log(10):.4f})")
    print("metric ratio at 0:", [fs.metric_ratio_at_zero(lam) for lam in lams[:4]])
    print("max |S - 2| on the chart:", [f"{fs.fs_curvature_check(lam):.2e}" for lam in lams])


if __name__ == "__main__":
    main()
