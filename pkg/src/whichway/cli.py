"""Command-line front end.

Every command writes its outputs plus a ``<command>_manifest.json`` into
``--out-dir``.  ``whichway replay <manifest>`` re-runs a manifest and
reproduces the outputs byte for byte.  Thread count (``--workers``) is not
part of the manifest because it does not affect any output.

Exit codes: 0 success, 2 usage or configuration error, 3 too few events
for the requested statistics.
"""
from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

import numpy as np

from . import __version__, analysis, io, svg
from .core import ExperimentConfig
from .errors import ConfigError, StatisticalInsufficiencyError
from .sampler import MODELS, run_experiment

EXIT_USAGE = 2
EXIT_STATISTICS = 3

DEFAULT_SWEEP_THETAS = (0.2, 0.05, 0.01)

_PI_TERM = re.compile(r"^([+-]?)(\d*\.?\d*)\*?pi(?:/(\d+\.?\d*))?$")


def parse_phase(text: str) -> float:
    """Parse a fringe phase such as ``1.5``, ``-pi``, ``2pi/3`` or ``-2*pi/3``."""
    text = text.strip().replace(" ", "")
    try:
        return float(text)
    except ValueError:
        pass
    m = _PI_TERM.match(text)
    if not m:
        raise argparse.ArgumentTypeError(f"cannot parse phase {text!r}")
    sign, factor, divisor = m.groups()
    value = (float(factor) if factor else 1.0) * np.pi / (float(divisor) if divisor else 1.0)
    return -value if sign == "-" else value


def parse_window(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("window must be 'lo,hi'")
    lo, hi = (parse_phase(p) for p in parts)
    if not lo < hi:
        raise argparse.ArgumentTypeError("window needs lo < hi")
    return lo, hi


def parse_thetas(text: str) -> list[float]:
    items = [t for t in text.split(",") if t.strip()]
    if not items:
        raise argparse.ArgumentTypeError("need at least one theta")
    return [float(t) for t in items]


def build_parser() -> argparse.ArgumentParser:
    physics = argparse.ArgumentParser(add_help=False)
    physics.add_argument("--config", type=Path, help="JSON file mirroring ExperimentConfig")
    physics.add_argument("--d", type=float, help="slit separation (default 1)")
    physics.add_argument("--a", type=float, help="slit width of the sinc envelope (default d/4)")
    physics.add_argument("--hbar", type=float, help="reduced Planck constant (default 1)")
    physics.add_argument("--window", type=parse_window, help="fringe-phase window 'lo,hi' (default -pi,pi)")
    physics.add_argument("--ceiling", type=float, default=analysis.DEFAULT_CEILING)
    physics.add_argument("--out-dir", type=Path, default=Path("."))
    physics.add_argument("--svg", action="store_true", help="also write an SVG plot")

    mc = argparse.ArgumentParser(add_help=False)
    mc.add_argument("--n-photons", type=int, default=10**7)
    mc.add_argument("--seed", type=int, default=0)
    mc.add_argument("--bins", type=int, default=100)
    mc.add_argument("--workers", type=int, default=1, help="threads; does not change results")

    est = argparse.ArgumentParser(add_help=False)
    est.add_argument("--confidence", type=float, default=analysis.DEFAULT_CONFIDENCE)
    est.add_argument("--theta-squared", action="store_true", help="normalize by theta^2 instead of sin^2 theta")

    parser = argparse.ArgumentParser(prog="whichway", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"whichway {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analytic", parents=[physics], help="tabulate the analytic curves")
    p.add_argument("--theta", type=float)
    p.add_argument("--n-points", type=int, default=1001)

    p = sub.add_parser("simulate", parents=[physics, mc, est], help="Monte Carlo run and estimates")
    p.add_argument("--theta", type=float)

    p = sub.add_parser("sweep", parents=[physics, mc, est], help="estimates at several thetas")
    p.add_argument("--theta", type=parse_thetas, help="comma separated list (default 0.2,0.05,0.01)")

    p = sub.add_parser("gof", parents=[physics, mc], help="chi-square tests against the coherent model")
    p.add_argument("--theta", type=float)
    p.add_argument("--model", choices=MODELS, default="coherent", help="model used to generate the data")
    p.add_argument("--counts", type=Path, help="test an existing counts JSON instead of simulating")

    p = sub.add_parser("replay", help="re-run a manifest")
    p.add_argument("manifest", type=Path)
    p.add_argument("--out-dir", type=Path)
    p.add_argument("--workers", type=int, default=1)
    return parser


def resolve_config(args) -> ExperimentConfig:
    data = {}
    if args.config is not None:
        data = json.loads(args.config.read_text())
    theta = args.theta if isinstance(args.theta, float) else None
    for key, value in (("theta", theta), ("slit_separation", args.d), ("envelope_width", args.a), ("hbar", args.hbar)):
        if value is not None:
            data[key] = value
    if args.d is not None and args.a is None and "envelope_width" not in data:
        data["envelope_width"] = args.d / 4
    if args.a is not None or args.d is not None or args.hbar is not None:
        # grid derived from the envelope width must follow the overrides
        data.pop("p_grid", None)
    return ExperimentConfig.from_dict(data)


def _params(args) -> dict:
    window = args.window or (-np.pi, np.pi)
    out = {"window": list(window), "ceiling": args.ceiling, "svg": args.svg}
    if args.command == "analytic":
        out["n_points"] = args.n_points
    else:
        out.update(n_photons=args.n_photons, seed=args.seed, bins=args.bins)
    if args.command in ("simulate", "sweep"):
        out.update(confidence=args.confidence, theta_squared=args.theta_squared)
    if args.command == "sweep":
        out["thetas"] = list(args.theta or DEFAULT_SWEEP_THETAS)
    if args.command == "gof":
        out["model"] = args.model
        out["counts"] = str(args.counts) if args.counts else None
    return out


def _write(out_dir: Path, name: str, text: str) -> str:
    (out_dir / name).write_text(text, encoding="utf-8", newline="")
    return name


def cmd_analytic(config, params, out_dir, workers=1):
    prof = analysis.analytic_profile(config, params["window"], params["n_points"], params["ceiling"])
    files = [_write(out_dir, "analytic.csv", io.profile_to_csv(prof))]
    if params["svg"]:
        plot = svg.line_plot(
            [
                {"x": prof.x, "y": prof.pattern, "label": "1 + cos x", "dash": "3,3"},
                {"x": prof.x, "y": prof.eps2, "label": "path fluctuation", "color": "#c0392b"},
            ],
            (prof.x[0], prof.x[-1]),
            (0.0, 4.0),
            xlabel="fringe phase x = d p / hbar",
        )
        files.append(_write(out_dir, "analytic.svg", plot))
    return files, {}


def cmd_simulate(config, params, out_dir, workers=1):
    counts = run_experiment(
        config, params["n_photons"], params["seed"], params["bins"], params["window"], workers=workers
    )
    files = [
        _write(out_dir, "counts.csv", io.counts_to_csv(counts)),
        _write(out_dir, "counts.json", io.counts_to_json(counts)),
    ]
    if config.theta > 0:
        est = analysis.estimate_path_fluctuation(
            counts, params["confidence"], theta_squared=params["theta_squared"], ceiling=params["ceiling"]
        )
        files.append(_write(out_dir, "fluctuation.csv", io.estimates_to_csv(est)))
        if params["svg"]:
            x = np.array([e.bin_center for e in est])
            plot = svg.line_plot(
                [
                    {"x": x, "y": [e.analytic for e in est], "label": "analytic"},
                    {"x": x, "y": [e.eps2_hat for e in est], "label": "Monte Carlo", "points": True,
                     "color": "#2471a3"},
                ],
                tuple(params["window"]),
                (0.0, 4.0),
                xlabel="fringe phase x = d p / hbar",
            )
            files.append(_write(out_dir, "fluctuation.svg", plot))
    return files, {"n_V": int(counts.n_V.sum())}


def cmd_sweep(config, params, out_dir, workers=1):
    rows = analysis.theta_sweep(
        config, params["thetas"], params["n_photons"], params["seed"], params["bins"], params["window"],
        theta_squared=params["theta_squared"], workers=workers,
    )
    summary = analysis.sweep_summary(rows)
    files = [
        _write(out_dir, "sweep.csv", io.sweep_to_csv(rows)),
        _write(out_dir, "sweep.json", io.dumps({"summary": summary, "config": config.to_dict()})),
    ]
    return files, summary


def cmd_gof(config, params, out_dir, workers=1):
    if params["counts"]:
        counts = io.counts_from_json(Path(params["counts"]).read_text())
    else:
        counts = run_experiment(
            config, params["n_photons"], params["seed"], params["bins"], params["window"],
            model=params["model"], workers=workers,
        )
    res = analysis.goodness_of_fit(counts)
    report = {
        "chi2_total": res.chi2_total,
        "dof_total": res.dof_total,
        "p_total": res.p_total,
        "chi2_conditional": res.chi2_conditional,
        "dof_conditional": res.dof_conditional,
        "p_conditional": res.p_conditional,
        "model": counts.model,
        "n_photons": counts.n_photons,
    }
    return [_write(out_dir, "gof.json", io.dumps(report))], report


COMMANDS = {"analytic": cmd_analytic, "simulate": cmd_simulate, "sweep": cmd_sweep, "gof": cmd_gof}


def execute(command, config, params, out_dir: Path, workers: int = 1) -> Path:
    """Run a command, write its outputs and manifest, return the manifest path."""
    out_dir.mkdir(parents=True, exist_ok=True)
    files, summary = COMMANDS[command](config, params, out_dir, workers)
    manifest = {
        "tool": "whichway",
        "version": __version__,
        "command": command,
        "config": config.to_dict(),
        "parameters": params,
        "outputs": files,
    }
    path = out_dir / f"{command}_manifest.json"
    path.write_text(io.dumps(manifest), encoding="utf-8", newline="")
    for key, value in summary.items():
        print(f"{key}: {value}")
    print(f"wrote {', '.join(files)} to {out_dir}")
    return path


def replay(manifest_path: Path, out_dir: Path | None = None, workers: int = 1) -> Path:
    manifest = json.loads(manifest_path.read_text())
    if manifest.get("version") != __version__:
        print(f"warning: manifest written by version {manifest.get('version')}", file=sys.stderr)
    config = ExperimentConfig.from_dict(manifest["config"])
    return execute(manifest["command"], config, manifest["parameters"], out_dir or manifest_path.parent, workers)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "replay":
            replay(args.manifest, args.out_dir, args.workers)
            return 0
        config = resolve_config(args)
        execute(args.command, config, _params(args), args.out_dir, getattr(args, "workers", 1))
    except StatisticalInsufficiencyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STATISTICS
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return 0


if __name__ == "__main__":
    sys.exit(main())
