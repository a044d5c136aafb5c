"""Compiled vs numpy kernels on the two hot paths.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Density: one analytic curve per (N, K) at 10 dB over the bulk of the law.
KDE: 10^6 SINR-like samples onto a 512-point grid. Both backends must
agree before a timing is reported.
"""

import argparse
import time

import numpy as np

from mimo_sinr import _kernels_py
from mimo_sinr.analytic_pdf import DEFAULT_SETTINGS, _integrand_params, log_c_gamma
from mimo_sinr.config import SystemConfig
from mimo_sinr.empirical_stats import silverman_bandwidth

try:
    from mimo_sinr import _kernels as _kernels_c
except ImportError:
    _kernels_c = None


def best_of(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def bench_density(kern, cfg, gammas, repeat):
    p, q, c, r = _integrand_params(cfg)
    log_tol = np.log(DEFAULT_SETTINGS.abs_tol) - log_c_gamma(gammas, cfg)

    def call():
        return kern.integrate_log_nu_many(1.0 / gammas, p, q, c, r, DEFAULT_SETTINGS.rel_tol,
                                          log_tol, DEFAULT_SETTINGS.max_subdivisions)[0]
    return best_of(call, repeat)


def bench_kde(kern, xs, repeat):
    h = silverman_bandwidth(xs)
    lo, hi = xs[0] - 3 * h, xs[-1] + 3 * h
    dx = (hi - lo) / 511
    return best_of(lambda: kern.kde_uniform_grid(xs, lo, dx, 512, h), repeat)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = [("python", _kernels_py)]
    if _kernels_c is not None:
        backends.append(("cython", _kernels_c))
    else:
        print("compiled kernels not built; timing the numpy fallback only")

    print(f"{'case':34s}" + "".join(f"{name:>12s}" for name, _ in backends) + f"{'speedup':>10s}")
    for n, k in ((16, 8), (32, 16), (128, 64), (256, 128)):
        cfg = SystemConfig.from_snr_db(n, k, 10.0)
        centre = 1.0 / (1.0 / cfg.rho_sq + (k - 1) / n)
        gammas = np.linspace(0.2 * centre, 3.0 * centre, 400)
        results = [bench_density(kern, cfg, gammas, args.repeat) for _, kern in backends]
        report(f"f_gamma 400 pts N={n} K={k}", results)

    rng = np.random.default_rng(0)
    xs = np.sort(rng.gamma(12.0, 0.25, 1_000_000))
    report("KDE 1e6 samples x 512 pts", [bench_kde(kern, xs, args.repeat) for _, kern in backends])


def report(label, results):
    ref = results[0][1]
    for _, out in results[1:]:
        if not np.allclose(out, ref, rtol=1e-9, atol=1e-300):
            raise SystemExit(f"{label}: backends disagree")
    times = [t for t, _ in results]
    speed = f"{times[0] / times[-1]:9.1f}x" if len(times) > 1 else ""
    print(f"{label:34s}" + "".join(f"{t * 1e3:10.1f}ms" for t in times) + f" {speed}")


if __name__ == "__main__":
    main()
