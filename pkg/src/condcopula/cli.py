"""Command-line interface: simulate | fit | summarize | predict.

Exit codes: 0 success, 2 validation error, 3 runtime error.

Options may come from flags or from a key-value config file (``--config``,
lines of ``name = value`` with ``#`` comments, names matching the long
flags); explicit flags override file values.

CSV layouts
-----------
dataset:     u,v,x  (pseudo-observations)  or  y1,y2,x  (raw responses)
trace:       iter, n_occupied, w1..wK, occ1..occK, beta1_1..betaK_D
             (K = widest retained sweep; narrower sweeps leave cells empty)
tau_curve:   x, mean, lower95, upper95
components:  iter, n_occupied, w1, w2      (two largest weights per sweep)
predictive:  x, u, v [, y1, y2]            (y columns via the empirical
             quantiles of the reference data when raw responses were fitted)

Every fit directory also receives a ``manifest.json`` (seed, resolved
configuration, package and library versions) sufficient to reproduce the
run bit for bit, and figure files next to each CSV unless ``--no-plots``.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .calibration import CalibrationSpec
from .posterior import (
    component_rho_means,
    component_summary,
    predictive_sample,
    tau_curve,
)
from .pseudo import Dataset, PseudoDataset, clamp_unit, from_pseudo, to_pseudo
from .sampler import ChainTrace, MCMCConfig, PriorConfig, run_chain
from .synth import SimulationPlan, simulate_dataset

_FLOAT_FMT = "%.17g"


def _fmt(value: float) -> str:
    return _FLOAT_FMT % value


# ---------------------------------------------------------------------------
# CSV layer
# ---------------------------------------------------------------------------

def write_dataset_csv(path, columns: dict) -> None:
    names = list(columns)
    rows = zip(*(np.asarray(columns[c]) for c in names))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(names)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def read_dataset_csv(path) -> dict:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ValueError(f"{path}: empty file")
        names = [n.strip().lower() for n in reader.fieldnames]
        rows = list(reader)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    out = {}
    for name, raw in zip(names, zip(*(tuple(r.values()) for r in rows))):
        try:
            out[name] = np.array([float(v) for v in raw])
        except ValueError as exc:
            raise ValueError(f"{path}: non-numeric value in column {name!r}: {exc}")
    return out


def write_trace_csv(path, trace: ChainTrace, dim: int) -> None:
    k = max(len(w) for w in trace.weights)
    header = (["iter", "n_occupied"]
              + [f"w{j + 1}" for j in range(k)]
              + [f"occ{j + 1}" for j in range(k)]
              + [f"beta{j + 1}_{c + 1}" for j in range(k) for c in range(dim)])
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for it, w, occ, atoms, n_occ in zip(trace.iters, trace.weights,
                                            trace.occupancy, trace.atoms,
                                            trace.occupied):
            m = len(w)
            pad = k - m
            row = [str(int(it)), str(int(n_occ))]
            row += [_fmt(v) for v in w] + [""] * pad
            row += [str(int(c)) for c in occ] + [""] * pad
            for j in range(k):
                for c in range(dim):
                    row.append(_fmt(atoms[j, c]) if j < m else "")
            writer.writerow(row)


def read_trace_csv(path) -> tuple[ChainTrace, int]:
    """Rebuild a ChainTrace from its CSV form; returns (trace, atom dim)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty trace file")
        rows = list(reader)
    if not rows:
        raise ValueError(f"{path}: trace has no retained sweeps")
    if header[:2] != ["iter", "n_occupied"]:
        raise ValueError(f"{path}: not a trace file (header {header[:2]})")
    k = sum(1 for name in header if name.startswith("w"))
    n_beta = sum(1 for name in header if name.startswith("beta"))
    if k == 0 or n_beta % k:
        raise ValueError(f"{path}: malformed trace header")
    dim = n_beta // k

    trace = ChainTrace()
    iters, occupied = [], []
    for row in rows:
        iters.append(int(float(row[0])))
        occupied.append(int(float(row[1])))
        w_cells = row[2:2 + k]
        m = sum(1 for c in w_cells if c != "")
        trace.weights.append(np.array([float(c) for c in w_cells[:m]]))
        occ_cells = row[2 + k:2 + 2 * k]
        trace.occupancy.append(np.array([int(float(c)) for c in occ_cells[:m]]))
        beta_cells = row[2 + 2 * k:2 + 2 * k + n_beta]
        atoms = np.array([float(c) for j in range(m)
                          for c in beta_cells[j * dim:(j + 1) * dim]])
        trace.atoms.append(atoms.reshape(m, dim))
    trace.iters = np.asarray(iters, dtype=int)
    trace.occupied = np.asarray(occupied, dtype=int)
    return trace, dim


def write_tau_curve_csv(path, curve) -> None:
    write_dataset_csv(path, {"x": curve.x_grid, "mean": curve.mean,
                             "lower95": curve.lower95, "upper95": curve.upper95})


def write_components_csv(path, trace: ChainTrace, summary) -> None:
    write_dataset_csv(path, {"iter": trace.iters.astype(float),
                             "n_occupied": trace.occupied.astype(float),
                             "w1": summary.weight_first,
                             "w2": summary.weight_second})


# ---------------------------------------------------------------------------
# Config handling
# ---------------------------------------------------------------------------

def load_config_file(path) -> dict:
    values = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'name = value'")
        name, _, value = line.partition("=")
        values[name.strip().replace("-", "_")] = value.strip()
    return values


def _resolve(args: argparse.Namespace, parser: argparse.ArgumentParser) -> None:
    """Fill argparse defaults from a config file; explicit flags win."""
    if not getattr(args, "config", None):
        return
    file_values = load_config_file(args.config)
    for action in parser._actions:
        name = action.dest
        if name in ("help", "config") or name not in file_values:
            continue
        # an explicitly passed flag differs from the default sentinel
        if getattr(args, name) is not action.default:
            continue
        raw = file_values[name]
        if action.type is not None:
            raw = action.type(raw)
        elif isinstance(action.default, bool) or isinstance(action.const, bool):
            raw = raw.lower() in ("1", "true", "yes", "on")
        setattr(args, name, raw)
    unknown = set(file_values) - {a.dest for a in parser._actions}
    if unknown:
        raise ValueError(f"unknown config entries: {sorted(unknown)}")


def _parse_beta(text: str | None, spec: CalibrationSpec):
    if text is None:
        return ()
    try:
        beta = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise ValueError(f"--beta must be comma-separated numbers, got {text!r}")
    if len(beta) != spec.dim:
        raise ValueError(f"--beta needs {spec.dim} values for {spec.family}")
    return beta


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def cmd_simulate(args, parser) -> int:
    _resolve(args, parser)
    spec = CalibrationSpec(args.calibration)
    plan = SimulationPlan(
        family=args.family,
        truth_spec=spec,
        truth_beta=_parse_beta(args.beta, spec),
        n=args.n,
        seed=args.seed,
        covariate_range=(args.x_min, args.x_max),
    )
    pseudo = simulate_dataset(plan)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_dataset_csv(out, {"u": pseudo.u, "v": pseudo.v, "x": pseudo.x})
    meta = {
        "family": plan.family,
        "calibration": plan.truth_spec.family,
        "truth_beta": list(plan.truth_beta),
        "n": plan.n,
        "seed": plan.seed,
        "covariate_range": list(plan.covariate_range),
        "version": __version__,
    }
    meta_path = out.with_suffix(out.suffix + ".meta.json")
    meta_path.write_text(json.dumps(meta, indent=2) + "\n")
    if not args.no_plots:
        from .report import save_dataset_plot
        save_dataset_plot(pseudo.u, pseudo.v, pseudo.x, out.with_suffix(".png"))
    print(f"wrote {out} ({plan.n} rows), metadata {meta_path}")
    return 0


# ---------------------------------------------------------------------------
# fit
# ---------------------------------------------------------------------------

def _ingest(path, standardize: str):
    """Returns (pseudo, reference, x_map) where reference holds raw y
    columns for back-transformation and x_map the applied covariate map."""
    columns = read_dataset_csv(path)
    names = set(columns)
    if {"u", "v", "x"} <= names:
        raw = False
    elif {"y1", "y2", "x"} <= names:
        raw = True
    else:
        raise ValueError(
            f"{path}: need columns (u, v, x) or (y1, y2, x); found {sorted(names)}")
    x = columns["x"]
    n = len(x)
    if n < 10:
        raise ValueError(f"{path}: at least 10 observations required, got {n}")
    for name in names & {"u", "v", "x", "y1", "y2"}:
        if not np.all(np.isfinite(columns[name])):
            raise ValueError(f"{path}: non-finite values in column {name!r}")

    do_std = raw if standardize == "auto" else standardize == "on"
    x_map = None
    if do_std:
        lo, hi = float(x.min()), float(x.max())
        if hi <= lo:
            raise ValueError(f"{path}: covariate is constant; cannot standardize")
        x = -2.0 + 4.0 * (x - lo) / (hi - lo)
        x_map = {"x_min": lo, "x_max": hi, "target": [-2.0, 2.0]}

    if raw:
        data = Dataset(y1=columns["y1"], y2=columns["y2"], x=x)
        pseudo = to_pseudo(data)
        reference = (columns["y1"], columns["y2"])
    else:
        u = clamp_unit(columns["u"], n)
        v = clamp_unit(columns["v"], n)
        pseudo = PseudoDataset(u=u, v=v, x=x)
        reference = None
    return pseudo, reference, x_map


def _fit_one_chain(pseudo, prior, spec, config):
    return run_chain(pseudo, prior, spec, config)


def _write_fit_outputs(outdir: Path, pseudo, reference, trace, spec,
                       args, manifest) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    write_trace_csv(outdir / "trace.csv", trace, spec.dim)

    grid = np.linspace(pseudo.x.min(), pseudo.x.max(), args.tau_grid)
    curve = tau_curve(trace, spec, grid)
    write_tau_curve_csv(outdir / "tau_curve.csv", curve)

    summary = component_summary(trace)
    write_components_csv(outdir / "components.csv", trace, summary)

    rng = np.random.default_rng(manifest["seed"] + 987654321)
    u, v = predictive_sample(trace, spec, pseudo.x, rng)
    pred = {"x": pseudo.x, "u": u, "v": v}
    if reference is not None:
        pred["y1"] = from_pseudo(u, reference[0])
        pred["y2"] = from_pseudo(v, reference[1])
    write_dataset_csv(outdir / "predictive.csv", pred)

    (outdir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")

    if not args.no_plots:
        from .report import (
            save_component_trace_plot,
            save_predictive_plot,
            save_tau_curve_plot,
        )
        save_tau_curve_plot(curve, outdir / "tau_curve.png")
        save_component_trace_plot(summary, trace.iters, outdir / "components.png")
        save_predictive_plot(u, v, outdir / "predictive.png",
                             observed_u=pseudo.u, observed_v=pseudo.v)

    stats = summary.stats
    rho = component_rho_means(trace, spec, pseudo.x)
    print(f"[{outdir.name or '.'}] occupied components: "
          f"median {stats['median']:g}, mean {stats['mean']:.3f}, "
          f"max {stats['max']:g}; "
          f"top-component mean correlations {np.round(rho, 4).tolist()}")


def cmd_fit(args, parser) -> int:
    _resolve(args, parser)
    spec = CalibrationSpec(args.calibration)
    prior = PriorConfig(total_mass=args.total_mass, base_sigma2=args.sigma2)
    pseudo, reference, x_map = _ingest(args.data, args.standardize_x)

    outdir = Path(args.out)
    chain_seeds = [args.seed + i for i in range(args.chains)]
    configs = [MCMCConfig(iterations=args.iters, burn_in=args.burnin,
                          rw_step=args.rw_step, seed=s, thin=args.thin)
               for s in chain_seeds]

    if args.chains > 1:
        with ProcessPoolExecutor(max_workers=min(args.chains, 8)) as pool:
            traces = list(pool.map(_fit_one_chain, [pseudo] * args.chains,
                                   [prior] * args.chains, [spec] * args.chains,
                                   configs))
    else:
        traces = [_fit_one_chain(pseudo, prior, spec, configs[0])]

    for idx, (config, trace) in enumerate(zip(configs, traces)):
        manifest = {
            "command": "fit",
            "input": str(args.data),
            "seed": config.seed,
            "chains": args.chains,
            "chain_index": idx,
            "iterations": config.iterations,
            "burn_in": config.burn_in,
            "thin": config.thin,
            "rw_step": config.rw_step,
            "total_mass": prior.total_mass,
            "sigma2": prior.base_sigma2,
            "calibration": spec.family,
            "standardize_x": x_map,
            "n": pseudo.n,
            "tau_grid": args.tau_grid,
            "version": __version__,
            "numpy": np.__version__,
        }
        target = outdir if args.chains == 1 else outdir / f"chain{idx + 1}"
        _write_fit_outputs(target, pseudo, reference, trace, spec, args, manifest)
    return 0


# ---------------------------------------------------------------------------
# summarize
# ---------------------------------------------------------------------------

def cmd_summarize(args, parser) -> int:
    _resolve(args, parser)
    trace, _ = read_trace_csv(args.trace)
    summary = component_summary(trace)
    stats = summary.stats
    print("occupied components per retained sweep")
    print(f"  min     {stats['min']:g}")
    print(f"  q1      {stats['q1']:g}")
    print(f"  median  {stats['median']:g}")
    print(f"  mean    {stats['mean']:.6g}")
    print(f"  q3      {stats['q3']:g}")
    print(f"  max     {stats['max']:g}")
    out = Path(args.out) if args.out else Path(args.trace).parent / "summary.csv"
    write_dataset_csv(out, {name: np.array([stats[name]])
                            for name in ("min", "q1", "median", "mean", "q3", "max")})
    if not args.no_plots:
        from .report import save_component_trace_plot
        save_component_trace_plot(summary, trace.iters,
                                  out.with_suffix(".png"))
    print(f"wrote {out}")
    return 0


# ---------------------------------------------------------------------------
# predict
# ---------------------------------------------------------------------------

def _calibration_for_trace(args) -> str:
    if args.calibration:
        return args.calibration
    manifest = Path(args.trace).parent / "manifest.json"
    if manifest.exists():
        return json.loads(manifest.read_text())["calibration"]
    raise ValueError("no --calibration given and no manifest.json beside the trace")


def cmd_predict(args, parser) -> int:
    _resolve(args, parser)
    trace, dim = read_trace_csv(args.trace)
    spec = CalibrationSpec(_calibration_for_trace(args))
    if spec.dim != dim:
        raise ValueError(f"trace atoms have dimension {dim}, but calibration "
                         f"{spec.family!r} needs {spec.dim}")

    reference = None
    if args.data:
        columns = read_dataset_csv(args.data)
        if "x" not in columns:
            raise ValueError(f"{args.data}: missing x column")
        x = columns["x"]
        if {"y1", "y2"} <= set(columns):
            reference = (columns["y1"], columns["y2"])
    else:
        x = np.linspace(args.x_min, args.x_max, args.grid)
    if args.samples:
        rng_x = np.random.default_rng(args.seed + 1)
        x = x[rng_x.integers(0, len(x), size=args.samples)]

    rng = np.random.default_rng(args.seed)
    u, v = predictive_sample(trace, spec, x, rng)
    pred = {"x": x, "u": u, "v": v}
    if reference is not None:
        pred["y1"] = from_pseudo(u, reference[0])
        pred["y2"] = from_pseudo(v, reference[1])
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_dataset_csv(out, pred)
    if not args.no_plots:
        from .report import save_predictive_plot
        save_predictive_plot(u, v, out.with_suffix(".png"))
    print(f"wrote {out} ({len(x)} draws)")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="condcopula",
        description="Covariate-dependent copula estimation with Dirichlet "
                    "process mixtures of conditional Gaussian copulas.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key-value config file; flags override it")
        p.add_argument("--no-plots", action="store_true",
                       help="skip figure rendering")

    p_sim = sub.add_parser("simulate", help="generate a synthetic dataset CSV")
    p_sim.add_argument("--family", default="gaussian",
                       help="copula family: gaussian | frank")
    p_sim.add_argument("--calibration", default="quadratic",
                       help="truth calibration family: quadratic | expbump")
    p_sim.add_argument("--beta", default=None,
                       help="truth coefficients, comma separated (default: "
                            "built-in truth for the family)")
    p_sim.add_argument("--n", type=int, default=500)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--x-min", type=float, default=-2.0)
    p_sim.add_argument("--x-max", type=float, default=2.0)
    p_sim.add_argument("--out", "-o", default="dataset.csv")
    common(p_sim)
    p_sim.set_defaults(func=cmd_simulate, parser=p_sim)

    p_fit = sub.add_parser("fit", help="fit the mixture and write summaries")
    p_fit.add_argument("data", help="CSV with columns u,v,x or y1,y2,x")
    p_fit.add_argument("--calibration", default="quadratic")
    p_fit.add_argument("--iters", type=int, default=4000)
    p_fit.add_argument("--burnin", type=int, default=3500)
    p_fit.add_argument("--thin", type=int, default=1)
    p_fit.add_argument("--lambda", dest="total_mass", type=float, default=1.0,
                       help="DP total mass")
    p_fit.add_argument("--sigma2", type=float, default=100.0,
                       help="base measure variance")
    p_fit.add_argument("--rw-step", type=float, default=0.25)
    p_fit.add_argument("--seed", type=int, default=0)
    p_fit.add_argument("--chains", type=int, default=1,
                       help="independent chains (seeds seed, seed+1, ...)")
    p_fit.add_argument("--tau-grid", type=int, default=21,
                       help="points in the Kendall's-tau curve grid")
    p_fit.add_argument("--standardize-x", choices=("auto", "on", "off"),
                       default="auto",
                       help="map the covariate onto [-2, 2] (auto: only for "
                            "raw y1,y2 data)")
    p_fit.add_argument("--out", "-o", default="fit")
    common(p_fit)
    p_fit.set_defaults(func=cmd_fit, parser=p_fit)

    p_sum = sub.add_parser("summarize",
                           help="Table-style statistics of a trace CSV")
    p_sum.add_argument("trace", help="trace.csv from a fit")
    p_sum.add_argument("--out", "-o", default=None)
    common(p_sum)
    p_sum.set_defaults(func=cmd_summarize, parser=p_sum)

    p_pred = sub.add_parser("predict",
                            help="posterior predictive draws from a trace")
    p_pred.add_argument("trace", help="trace.csv from a fit")
    p_pred.add_argument("--calibration", default=None,
                        help="calibration family (default: from manifest)")
    p_pred.add_argument("--data", default=None,
                        help="dataset CSV supplying covariates (and y "
                             "columns for back-transformation)")
    p_pred.add_argument("--grid", type=int, default=21)
    p_pred.add_argument("--x-min", type=float, default=-2.0)
    p_pred.add_argument("--x-max", type=float, default=2.0)
    p_pred.add_argument("--samples", type=int, default=None,
                        help="resample this many covariates before drawing")
    p_pred.add_argument("--seed", type=int, default=0)
    p_pred.add_argument("--out", "-o", default="predictive.csv")
    common(p_pred)
    p_pred.set_defaults(func=cmd_predict, parser=p_pred)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, args.parser)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - runtime failures exit 3
        print(f"runtime error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
