"""Command-line front end.

Subcommands: gen | validate | walk | cover | resist | mix | dichotomy |
report.  Exit codes: 0 success, 2 usage/validation, 3 capacity, 4 numerical
non-convergence.  Every output artifact embeds the tool version and the
effective configuration; identical (config, version) runs produce byte-
identical files at any thread count.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import __version__, analysis, artifacts
from . import lamplighter as ll
from .errors import CapacityError, NumericalError, SpecError
from .generators import (build_from_spec, classify_regime, parse_spec,
                         rough_weights)
from .graph import (check_assumptions, diameter, load_wg_json,
                    save_wg_json, volume_growth_fit)
from .resistance import (ball_cover, faber_krahn_check, laplacian_system,
                         resistance_exponent_fit, resistance_summary,
                         sample_connected_subsets)
from .walks import (WalkKernel, cover_time_distribution, diagonal_decay_fit,
                    exit_time_scaling, tail_fit)


def _load_graph(token: str):
    """SPEC-or-FILE argument: an existing path loads wg-json, anything else
    parses as a generator spec string."""
    path = Path(token)
    if path.exists():
        return load_wg_json(path), None
    spec = parse_spec(token)
    return build_from_spec(spec), spec


def _apply_config_file(args, argv) -> None:
    """Precedence CLI > config file > argparse defaults: a file value is
    used only when the flag was not given on the command line."""
    if not getattr(args, "config", None):
        return
    try:
        file_cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise SpecError(f"cannot read config file {args.config}: {exc}")
    if not isinstance(file_cfg, dict):
        raise SpecError("config file must hold a JSON object")
    given = {tok.split("=", 1)[0] for tok in argv if tok.startswith("--")}
    for key, value in file_cfg.items():
        if key == "config-version":
            continue
        attr = key.replace("-", "_")
        if hasattr(args, attr) and f"--{key}" not in given:
            setattr(args, attr, value)


# ---------------------------------------------------------------------------
# Subcommands


def cmd_gen(args) -> int:
    spec = parse_spec(args.spec)
    g = build_from_spec(spec)
    if args.rough_ce:
        g = rough_weights(g, args.rough_ce, seed=args.rough_seed)
    out = Path(args.output or (spec.describe().replace(":", "_").replace(",", "_") + ".json"))
    save_wg_json(g, out)
    print(f"{spec.describe()}: {g.vertex_count} vertices, {g.edge_count} edges -> {out}")
    return 0


def cmd_validate(args) -> int:
    g = load_wg_json(args.file)
    d_f = args.d_f
    if d_f is None:
        d_f = math.log(3) / math.log(2)
    report = check_assumptions(g, d_f, seed=args.seed)
    payload = {
        "c_e": report.c_e, "p_0": report.p_0, "c_v": report.c_v,
        "d_f": report.d_f, "max_degree": report.max_degree,
        "delta_ratio": report.delta_ratio,
        "ellipticity": report.ellipticity_ok, "p0_condition": report.p0_ok,
        "volume_scaling": report.volume_ok,
    }
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0 if report.all_ok else 2


def cmd_walk(args) -> int:
    g, spec = _load_graph(args.graph)
    cfg = {"config-version": 1, "graph": args.graph,
           "experiment": args.experiment, "seed": args.seed,
           "samples": args.samples}
    outdir = Path(args.output)
    if args.experiment == "volume":
        fit = volume_growth_fit(g, samples=args.centers, seed=args.seed)
        artifacts.write_csv(outdir / "volume.csv", ["center", "r", "volume"],
                            fit.table, cfg)
        print(f"d_f estimate {fit.d_f:.6f} (c_v {fit.c_v:.3f}) -> volume.csv")
    elif args.experiment == "exit":
        kernel = WalkKernel(g, lazy=args.lazy)
        fit = exit_time_scaling(kernel, centers=args.centers, seed=args.seed,
                                samples=args.samples, threads=args.threads)
        artifacts.write_csv(outdir / "exitscale.csv",
                            ["r", "mean_exit", "stderr"], fit.table, cfg)
        print(f"d_w estimate {fit.value:.6f} (r2 {fit.r2:.4f}) -> exitscale.csv")
    elif args.experiment == "heatdiag":
        kernel = WalkKernel(g, lazy=True)
        d_w = args.d_w or 2.0
        t_n = float(diameter(g).value) ** d_w
        x = args.center if args.center is not None else 0
        fit = diagonal_decay_fit(kernel, x, t_n=t_n)
        artifacts.write_csv(outdir / "heatdiag.csv", ["t", "p_tt"], fit.table, cfg)
        print(f"d_s/2 estimate {fit.value:.6f} (r2 {fit.r2:.4f}) -> heatdiag.csv")
    else:
        raise SpecError(f"unknown walk experiment {args.experiment!r}")
    return 0


def cmd_cover(args) -> int:
    g, spec = _load_graph(args.graph)
    kernel = WalkKernel(g, lazy=args.lazy)
    cfg = {"config-version": 1, "graph": args.graph, "seed": args.seed,
           "samples": args.samples, "lazy": args.lazy,
           "start": args.start}
    cover = cover_time_distribution(kernel, args.start, args.samples,
                                    args.seed, threads=args.threads)
    rows = [(i, int(t), int(args.lazy)) for i, t in enumerate(cover.times)]
    outdir = Path(args.output)
    artifacts.write_csv(outdir / "covertime.csv",
                        ["sample_id", "tau_cov", "lazy_flag"], rows, cfg)
    summary = cover.summary()
    if args.d_w:
        t_n = float(diameter(g).value) ** args.d_w
        summary["t_n"] = t_n
        if args.samples >= 1000:
            fit = tail_fit(cover, t_n)
            summary["tail_c0"] = fit.c_0
            summary["tail_r2"] = fit.r2
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def _partial_guard(args, label: str, fn):
    """Run one artifact step; with --allow-partial a capacity error becomes
    a warning instead of exit code 3."""
    try:
        return fn()
    except CapacityError as exc:
        if not getattr(args, "allow_partial", False):
            raise
        print(f"warning: skipped {label}: {exc}", file=sys.stderr)
        return None


def cmd_resist(args) -> int:
    g, spec = _load_graph(args.graph)
    sys_ = laplacian_system(g)
    cfg = {"config-version": 1, "graph": args.graph, "seed": args.seed,
           "pivot-cap": args.pivot_cap, "cg-tol": args.cg_tol,
           "cg-maxiter": args.cg_maxiter}
    outdir = Path(args.output)
    summ = resistance_summary(sys_, pairwise_cap=args.pivot_cap)
    fitted = _partial_guard(args, "resistance exponent", lambda: (
        resistance_exponent_fit(sys_, samples=args.samples, seed=args.seed,
                                cg_tol=args.cg_tol,
                                cg_maxiter=args.cg_maxiter)))
    slope = r2 = None
    if fitted is not None:
        (slope, r2), table = fitted
        artifacts.write_csv(outdir / "resistance.csv",
                            ["x", "y", "d_xy", "reff"], table, cfg)
    subsets = sample_connected_subsets(g, args.fk_subsets, args.fk_max_size,
                                       args.seed)
    d_w = args.d_w or 2.0
    d_f = args.d_f or 2.0
    fk = _partial_guard(args, "Faber-Krahn subsets",
                        lambda: faber_krahn_check(sys_, subsets, d_w, d_f))
    if fk is not None:
        artifacts.write_csv(outdir / "fk.csv",
                            ["subset_id", "size", "mu_S", "lambda1", "product"],
                            fk.rows, cfg)
    cover_rows = []
    for eta in (args.eta_grid or [0.25, 0.5, 1.0]):
        centers = ball_cover(g, float(eta))
        cover_rows.append((float(eta), len(centers)))
    artifacts.write_csv(outdir / "cover.csv", ["eta", "n_centers"],
                        cover_rows, cfg)
    print(json.dumps({
        "r": summ.r, "s_n": summ.s_n, "pair": list(summ.pair),
        "exact": summ.exact, "reff_exponent": slope, "reff_r2": r2,
        "fk_min_product": fk.minimum if fk else None,
    }, indent=2, sort_keys=True))
    return 0


def _write_profile(outdir: Path, name: str, profile, cfg: dict) -> None:
    rows = []
    exact = profile.exact
    lower = profile.lower_envelope()
    upper = profile.upper_envelope()
    for j, t in enumerate(profile.ts):
        rows.append((int(t),
                     float(exact[j]) if exact is not None else None,
                     float(lower[j]) if lower is not None else None,
                     float(upper[j]) if upper is not None else None))
    artifacts.write_csv(outdir / name, ["t", "tv_exact", "tv_lower", "tv_upper"],
                        rows, cfg)


def cmd_mix(args) -> int:
    g, spec = _load_graph(args.graph)
    cfg = {"config-version": 1, "graph": args.graph, "seed": args.seed,
           "samples": args.samples, "exact-cap": args.exact_cap,
           "epsilon-grid": args.epsilon_grid}
    outdir = Path(args.output)
    eps_grid = args.epsilon_grid
    n = g.vertex_count
    summ = resistance_summary(laplacian_system(g))
    d_w = args.d_w
    if d_w is None and spec is not None:
        try:
            d_w = classify_regime(spec).d_w
        except SpecError:
            d_w = None
    d_w = d_w or 2.0
    t_n = float(diameter(g).value) ** d_w
    if 2 ** n * n <= args.exact_cap:
        t_max = args.t_max or max(64, int(8 * summ.s_n))
        prof, cover, tmix = analysis.mixing_profile_exact(
            g, t_max, summ.s_n, eps_grid=eps_grid, seed=args.seed,
            samples=args.samples, threads=args.threads)
    else:
        prof, cover, tmix, _ = analysis.mixing_profile_bounds(
            g, t_n, summ.s_n, samples=args.samples, seed=args.seed,
            eps_grid=eps_grid, threads=args.threads)
    _write_profile(outdir, "tvprofile.csv", prof, cfg)
    half = 0.5 * cover.mean()
    rows = []
    for eps in eps_grid:
        rec = tmix[eps]
        rows.append((float(eps), rec.get("lower"), rec.get("upper"),
                     rec.get("exact"), half, cover.mean()))
    artifacts.write_csv(outdir / "mixing.csv",
                        ["epsilon", "tmix_lower", "tmix_upper", "tmix_exact",
                         "half_cover", "cover_mean"], rows, cfg)
    print(json.dumps({"t_n": t_n, "s_n": summ.s_n,
                      "cover_mean": cover.mean()}, indent=2, sort_keys=True))
    return 0


def cmd_dichotomy(args) -> int:
    levels = [int(x) for x in args.levels.split(",")]
    report = analysis.dichotomy_report(args.family, levels, args.samples,
                                       args.seed, threads=args.threads)
    outdir = Path(args.output)
    profiles = report.pop("profiles", {})
    covers = report.pop("covers", {})
    cfg = report["config"]
    for name, prof in profiles.items():
        safe = name.replace(":", "_").replace(",", "_").replace("=", "")
        _write_profile(outdir, f"tvprofile_{safe}.csv", prof, cfg)
    for name, cover in covers.items():
        safe = name.replace(":", "_").replace(",", "_").replace("=", "")
        rows = [(i, int(t), int(cover.lazy)) for i, t in enumerate(cover.times)]
        artifacts.write_csv(outdir / f"covertime_{safe}.csv",
                            ["sample_id", "tau_cov", "lazy_flag"], rows, cfg)
    artifacts.write_report(outdir / "report.json", report)
    print(f"verdict: {report['verdict']} -> {outdir / 'report.json'}")
    return 0


def cmd_report(args) -> int:
    report = artifacts.read_report(args.file)
    verdict, checks = analysis.dichotomy_verdict(
        report["regime"], report["levels"],
        report.get("checks", {}).get("thresholds"))
    print(f"stored verdict:     {report.get('verdict')}")
    print(f"recomputed verdict: {verdict}")
    if args.check and verdict != report.get("verdict"):
        print("MISMATCH", file=sys.stderr)
        return 2
    return 0


# ---------------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="fractalmix",
        description="Fractal graphs, random walks, and lamplighter mixing")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--threads", type=int, default=None)
        sp.add_argument("--config", default=None,
                        help="JSON config file (CLI flags win)")
        sp.add_argument("--allow-partial", action="store_true",
                        help="turn capacity errors into warnings")

    sp = sub.add_parser("gen", help="generate a graph as wg-json")
    sp.add_argument("spec")
    sp.add_argument("-o", "--output", default=None)
    sp.add_argument("--rough-ce", type=float, default=None,
                    help="seeded rough conductances in [1/c_e, c_e]")
    sp.add_argument("--rough-seed", type=int, default=0)
    sp.set_defaults(fn=cmd_gen)

    sp = sub.add_parser("validate", help="check structural assumptions")
    sp.add_argument("file")
    sp.add_argument("--d-f", type=float, default=None)
    common(sp)
    sp.set_defaults(fn=cmd_validate)

    sp = sub.add_parser("walk", help="walk-exponent experiments")
    sp.add_argument("graph")
    sp.add_argument("--experiment", choices=["volume", "exit", "heatdiag"],
                    required=True)
    sp.add_argument("-o", "--output", default="out")
    sp.add_argument("--samples", type=int, default=10_000)
    sp.add_argument("--centers", type=int, default=20)
    sp.add_argument("--center", type=int, default=None)
    sp.add_argument("--lazy", action="store_true")
    sp.add_argument("--d-w", type=float, default=None)
    common(sp)
    sp.set_defaults(fn=cmd_walk)

    sp = sub.add_parser("cover", help="cover-time distribution")
    sp.add_argument("graph")
    sp.add_argument("-o", "--output", default="out")
    sp.add_argument("--samples", type=int, default=10_000)
    sp.add_argument("--start", type=int, default=0)
    sp.add_argument("--lazy", action="store_true")
    sp.add_argument("--d-w", type=float, default=None,
                    help="nominal walk dimension for the T_N tail fit")
    common(sp)
    sp.set_defaults(fn=cmd_cover)

    sp = sub.add_parser("resist", help="resistance laboratory outputs")
    sp.add_argument("graph")
    sp.add_argument("-o", "--output", default="out")
    sp.add_argument("--samples", type=int, default=400)
    sp.add_argument("--pivot-cap", type=int, default=5000)
    sp.add_argument("--cg-tol", type=float, default=1e-10)
    sp.add_argument("--cg-maxiter", type=int, default=None)
    sp.add_argument("--fk-subsets", type=int, default=200)
    sp.add_argument("--fk-max-size", type=int, default=60)
    sp.add_argument("--eta-grid", type=float, nargs="*", default=None)
    sp.add_argument("--d-w", type=float, default=None)
    sp.add_argument("--d-f", type=float, default=None)
    common(sp)
    sp.set_defaults(fn=cmd_resist)

    sp = sub.add_parser("mix", help="lamplighter TV profile and mixing times")
    sp.add_argument("graph")
    sp.add_argument("-o", "--output", default="out")
    sp.add_argument("--samples", type=int, default=10_000)
    sp.add_argument("--t-max", type=int, default=None)
    sp.add_argument("--exact-cap", type=int, default=ll.EXACT_STATE_CAP)
    sp.add_argument("--epsilon-grid", type=float, nargs="*",
                    default=list(analysis.DEFAULT_EPS_GRID))
    sp.add_argument("--d-w", type=float, default=None)
    common(sp)
    sp.set_defaults(fn=cmd_mix)

    sp = sub.add_parser("dichotomy", help="cutoff-dichotomy experiment")
    sp.add_argument("--family", required=True,
                    help='"gasket", "complete", "torus:d=3", "carpet:L=3,b=1,d=3"')
    sp.add_argument("--levels", required=True, help="comma-separated levels/sizes")
    sp.add_argument("-o", "--output", default="out")
    sp.add_argument("--samples", type=int, default=10_000)
    common(sp)
    sp.set_defaults(fn=cmd_dichotomy)

    sp = sub.add_parser("report", help="recompute a stored verdict")
    sp.add_argument("file")
    sp.add_argument("--check", action="store_true")
    sp.set_defaults(fn=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    if argv is None:
        argv = sys.argv[1:]
    args = parser.parse_args(argv)
    try:
        _apply_config_file(args, argv)
        return args.fn(args)
    except SpecError as exc:
        tag = f" [{exc.condition}]" if exc.condition else ""
        print(f"error{tag}: {exc}", file=sys.stderr)
        return 2
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
