"""Experiment runner: figure presets and ad-hoc configurations.

Exit codes: 0 success, 2 usage, 3 quadrature convergence, 4 I/O.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import formats
from ._backend import BACKEND
from .analytic_pdf import (
    MODULATION_PRESETS,
    GridSpec,
    ModulationParams,
    QuadratureSettings,
    avg_ser,
    avg_sum_rate,
    f_gamma_curve,
    normalization,
)
from .channel_mc import sample_sinr_batch
from .config import SystemConfig
from .empirical_stats import (
    KdeSettings,
    compare,
    default_grid_bounds,
    kde,
    moment_summary,
    silverman_bandwidth,
)
from .errors import ConvergenceError, UsageError
from .special_fn import q_function

log = logging.getLogger("mimo_sinr")

EXIT_OK, EXIT_USAGE, EXIT_CONVERGENCE, EXIT_IO = 0, 2, 3, 4

OUTPUTS = ("analytic_curve", "empirical_curve", "distance", "moments", "ser", "sum_rate")
_NEEDS_SAMPLES = {"empirical_curve", "distance", "moments"}

DEFAULT_SAMPLES = 1_000_000
DEFAULT_SEED = 1
DEFAULT_GRID_POINTS = 400
# N values for the fixed-SNR figures are a repo convention
N_SWEEP = (16, 32, 64, 128)


@dataclass(frozen=True)
class Preset:
    name: str
    caption: str
    points: tuple  # (N, K, snr_db) triples


def _presets():
    out = {}
    for name, (n, k) in zip(("fig1", "fig2", "fig3"), ((16, 8), (32, 16), (128, 64))):
        out[name] = Preset(name, f"PDF of SINR (N={n}, K={k})",
                           tuple((n, k, s) for s in (0.0, 5.0, 10.0)))
    for name, snr in zip(("fig4", "fig5", "fig6"), (0.0, 5.0, 10.0)):
        out[name] = Preset(name, f"PDF of SINR (rho^2/sigma_n^2={snr:g} dB, K=8)",
                           tuple((n, 8, snr) for n in N_SWEEP))
    return out


PRESETS = _presets()


def list_presets():
    """Rows ``(name, caption, [(N, K, snr_db), ...])`` for fig1..fig6."""
    return [(p.name, p.caption, list(p.points)) for p in PRESETS.values()]


def _needs_samples(outputs, grid, save_samples) -> bool:
    # an analytic curve without explicit bounds takes them from sample quantiles
    grid_open = grid is None or grid[0] is None or grid[1] is None
    return bool(_NEEDS_SAMPLES & set(outputs)) or save_samples or (
        "analytic_curve" in outputs and grid_open)


@dataclass(frozen=True)
class ExperimentSpec:
    config: SystemConfig
    samples: int | None = DEFAULT_SAMPLES
    seed: int = DEFAULT_SEED
    grid: tuple | None = None  # (gamma_min, gamma_max, points) with None entries -> quantiles
    kde: KdeSettings = field(default_factory=KdeSettings)
    quadrature: QuadratureSettings = field(default_factory=QuadratureSettings)
    outputs: frozenset = frozenset(OUTPUTS)
    modulation: ModulationParams = MODULATION_PRESETS["bpsk"]
    fmt: str = "csv"
    save_samples: bool = False

    def __post_init__(self):
        if not self.outputs:
            raise UsageError("at least one output must be requested")
        unknown = set(self.outputs) - set(OUTPUTS)
        if unknown:
            raise UsageError(f"unknown outputs: {sorted(unknown)}")
        if self.fmt not in ("csv", "json"):
            raise UsageError(f"unknown format {self.fmt!r}")
        if self.samples is not None and (int(self.samples) != self.samples or self.samples < 1):
            raise UsageError(f"--samples must be >= 1, got {self.samples}")
        if self.needs_samples() and self.samples is None:
            raise UsageError("requested outputs need Monte Carlo samples")

    def needs_samples(self) -> bool:
        return _needs_samples(self.outputs, self.grid, self.save_samples)


def _write_curve(curve, path_stem: Path, fmt: str) -> Path:
    if fmt == "json":
        return formats.write_density_json(curve, path_stem.with_suffix(".json"))
    return formats.write_density_csv(curve, path_stem.with_suffix(".csv"))


def run(spec: ExperimentSpec, out_dir) -> dict:
    """Run one configuration, write its files, and return its summary record."""
    t0 = time.perf_counter()
    out_dir = Path(out_dir)
    cfg = spec.config
    tag = cfg.tag()
    outputs = set(spec.outputs)
    files = []
    record = {
        "config": cfg.to_dict(), "seed": int(spec.seed), "samples": None,
        "l1": None, "sup": None, "moments": None, "ser": None, "sum_rate": None,
        "normalization_check": None, "quadrature_max_error": None, "bandwidth": None,
    }
    quad_errors = []

    samples = None
    if spec.needs_samples() or outputs & {"ser", "sum_rate"} and spec.samples:
        samples = sample_sinr_batch(cfg, spec.samples, spec.seed)
        record["samples"] = samples.count
        if spec.save_samples:
            files.append(formats.write_samples(samples, out_dir / f"{tag}_samples.csv").name)

    q_lo = q_hi = None
    if samples is not None:
        q_lo, q_hi = default_grid_bounds(samples)
    g_min, g_max, g_pts = spec.grid or (None, None, None)
    grid = GridSpec(g_min if g_min is not None else q_lo,
                    g_max if g_max is not None else q_hi,
                    g_pts or DEFAULT_GRID_POINTS) if "analytic_curve" in outputs or "distance" in outputs else None
    if grid is not None:
        record["grid"] = {"gamma_min": grid.gamma_min, "gamma_max": grid.gamma_max,
                          "points": grid.points}

    analytic = empirical = None
    if grid is not None:
        analytic = f_gamma_curve(cfg, grid, spec.quadrature)
        quad_errors.append(float(np.max(analytic.rel_errors)))
        if "analytic_curve" in outputs:
            files.append(_write_curve(analytic, out_dir / f"{tag}_analytic", spec.fmt).name)
    if samples is not None and outputs & {"empirical_curve", "distance"}:
        empirical = kde(samples, spec.kde)
        record["bandwidth"] = (silverman_bandwidth(samples.samples)
                               if spec.kde.bandwidth == "silverman" else spec.kde.bandwidth)
        if "empirical_curve" in outputs:
            files.append(_write_curve(empirical, out_dir / f"{tag}_empirical", spec.fmt).name)
    if "distance" in outputs:
        floor = q_lo if g_min is None else max(g_min, q_lo)
        dist = compare(analytic, empirical, min_gamma=floor)
        record["l1"], record["sup"] = dist.l1, dist.sup
    if "moments" in outputs:
        record["moments"] = moment_summary(samples)._asdict()

    if analytic is not None or outputs & {"ser", "sum_rate"}:
        mass = normalization(cfg, spec.quadrature)
        record["normalization_check"] = {
            "mass": mass.value, "error": mass.error,
            "curve_trapezoid": analytic.mass() if analytic is not None else None,
        }
        quad_errors.append(mass.error / mass.value)
    if "ser" in outputs:
        mod = spec.modulation
        res = avg_ser(cfg, mod, spec.quadrature, full_output=True)
        mc = None
        if samples is not None:
            mc = mod.alpha_tilde * float(np.mean(q_function(mod.beta_tilde * samples.samples)))
        record["ser"] = {"analytic": res.value, "error": res.error, "monte_carlo": mc,
                         "alpha_tilde": mod.alpha_tilde, "beta_tilde": mod.beta_tilde}
        if res.value > 0:
            quad_errors.append(res.error / res.value)
    if "sum_rate" in outputs:
        res = avg_sum_rate(cfg, spec.quadrature, full_output=True)
        mc = None
        if samples is not None:
            mc = cfg.n_users * float(np.mean(np.log2(1.0 + samples.samples)))
        record["sum_rate"] = {"analytic": res.value, "error": res.error, "monte_carlo": mc}
        quad_errors.append(res.error / res.value)

    record["quadrature_max_error"] = max(quad_errors) if quad_errors else None
    record["files"] = files
    record["runtime_s"] = time.perf_counter() - t0
    return record


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mimo-sinr",
        description="Approximate SINR density of MF-precoded MU-MIMO vs Monte Carlo.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("presets", help="list the figure presets")

    r = sub.add_parser("run", help="run a preset or a custom configuration")
    r.add_argument("--preset", choices=sorted(PRESETS))
    r.add_argument("--n-antennas", type=int, nargs="+")
    r.add_argument("--n-users", type=int)
    r.add_argument("--snr-db", type=float, nargs="+",
                   help="rho^2/sigma_n^2 in dB; sigma_n^2 is fixed to 1")
    r.add_argument("--sigma-h-sq", type=float, default=1.0)
    r.add_argument("--samples", type=int,
                   help=f"Monte Carlo draws (default {DEFAULT_SAMPLES} when an output needs them;"
                        " given explicitly, also adds MC references for ser/sum_rate)")
    r.add_argument("--seed", type=int, default=DEFAULT_SEED)
    r.add_argument("--gamma-min", type=float)
    r.add_argument("--gamma-max", type=float)
    r.add_argument("--gamma-points", type=int, default=DEFAULT_GRID_POINTS)
    r.add_argument("--kde-points", type=int, default=512)
    r.add_argument("--bandwidth", default="silverman",
                   help="'silverman' or a positive number")
    r.add_argument("--rel-tol", type=float, default=QuadratureSettings.rel_tol)
    r.add_argument("--abs-tol", type=float, default=QuadratureSettings.abs_tol)
    r.add_argument("--max-subdivisions", type=int, default=QuadratureSettings.max_subdivisions)
    r.add_argument("--outputs", default=",".join(OUTPUTS),
                   help="comma-separated subset of: " + ", ".join(OUTPUTS))
    r.add_argument("--modulation", choices=sorted(MODULATION_PRESETS), default="bpsk")
    r.add_argument("--alpha", type=float, help="override alpha in alpha*Q(beta*gamma)")
    r.add_argument("--beta", type=float, help="override beta in alpha*Q(beta*gamma)")
    r.add_argument("--save-samples", action="store_true")
    r.add_argument("--out-dir", default="out")
    r.add_argument("--format", choices=("csv", "json"), default="csv")
    return parser


def specs_from_args(args) -> tuple[str | None, list]:
    if args.preset:
        if args.n_antennas or args.n_users or args.snr_db:
            raise UsageError("--preset cannot be combined with --n-antennas/--n-users/--snr-db")
        points = PRESETS[args.preset].points
    else:
        if not (args.n_antennas and args.n_users and args.snr_db is not None):
            raise UsageError("give --preset or all of --n-antennas, --n-users, --snr-db")
        points = [(n, args.n_users, s) for n in args.n_antennas for s in args.snr_db]
    if args.samples is not None and args.samples < 1:
        raise UsageError(f"--samples must be >= 1, got {args.samples}")
    bandwidth = args.bandwidth
    if bandwidth != "silverman":
        try:
            bandwidth = float(bandwidth)
        except ValueError:
            raise UsageError(f"--bandwidth must be 'silverman' or a number, got {bandwidth!r}") from None
    mod = MODULATION_PRESETS[args.modulation]
    if args.alpha is not None or args.beta is not None:
        mod = ModulationParams(mod.alpha_tilde if args.alpha is None else args.alpha,
                               mod.beta_tilde if args.beta is None else args.beta)
    outputs = frozenset(o.strip() for o in args.outputs.split(",") if o.strip())
    common = dict(
        seed=args.seed,
        grid=(args.gamma_min, args.gamma_max, args.gamma_points),
        kde=KdeSettings(bandwidth, args.kde_points),
        quadrature=QuadratureSettings(rel_tol=args.rel_tol, abs_tol=args.abs_tol,
                                      max_subdivisions=args.max_subdivisions),
        outputs=outputs, modulation=mod, fmt=args.format, save_samples=args.save_samples,
    )
    samples = args.samples
    if samples is None:
        wanted = _needs_samples(outputs, common["grid"], args.save_samples)
        samples = DEFAULT_SAMPLES if wanted else None
    specs = [ExperimentSpec(SystemConfig.from_snr_db(n, k, s, args.sigma_h_sq),
                            samples=samples, **common)
             for n, k, s in points]
    return args.preset, specs


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "presets":
        for name, caption, points in list_presets():
            desc = ", ".join(f"(N={n}, K={k}, {s:g} dB)" for n, k, s in points)
            print(f"{name}  {caption}\n      {desc}")
        return EXIT_OK
    try:
        preset, specs = specs_from_args(args)
        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        runs = []
        for spec in specs:
            log.info("running %s", spec.config.tag())
            runs.append(run(spec, out_dir))
        summary = {"preset": preset, "backend": BACKEND, "runs": runs}
        (out_dir / "summary.json").write_text(formats.dumps(summary), encoding="ascii")
    except UsageError as exc:
        print(f"mimo-sinr: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConvergenceError as exc:
        print(f"mimo-sinr: quadrature did not converge: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except OSError as exc:
        print(f"mimo-sinr: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    for r in runs:
        c = r["config"]
        bits = [f"N={c['n_antennas']} K={c['n_users']} snr={c['snr_db']:.3g}dB"]
        if r["l1"] is not None:
            bits.append(f"L1={r['l1']:.4f}")
        if r["sum_rate"] is not None:
            bits.append(f"Rsum={r['sum_rate']['analytic']:.4f}")
        if r["ser"] is not None:
            bits.append(f"SER={r['ser']['analytic']:.4g}")
        print("  ".join(bits))
    print(f"wrote {out_dir / 'summary.json'}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
