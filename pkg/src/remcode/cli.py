"""Command-line surface: phase-diagram sweeps, exponent curves, simulation runs.

Every command writes plot-ready CSV (12 significant digits, schema string
on the first comment line) plus a JSON manifest that reproduces the run
byte-for-byte apart from its timestamp.  Exit codes: 0 success, 2 channel
parse error, 3 infeasible grid, 4 work-bound violation.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .channel import Channel, ChannelFormatError, bsc, load_channel, mutual_information_uniform
from .exponents import correct_decoding_exponent, optimize_rho
from .phases import boundary_curves, classify, universal_classify
from .simulate import (
    MODE_BSC_SPECTRUM,
    MODE_ENUMERATE,
    SimConfig,
    WorkBoundError,
    collect_samples,
)


class GridError(ValueError):
    """Grid empty or outside the feasible range for the command."""


@dataclasses.dataclass(frozen=True)
class RunManifest:
    command: str
    parameters: dict
    seed: int | None
    tool_version: str
    timestamp: str

    def write(self, path: Path) -> None:
        path.write_text(json.dumps(dataclasses.asdict(self), indent=2, sort_keys=True) + "\n")


def _manifest(command: str, args: argparse.Namespace, keys: list[str]) -> RunManifest:
    params = {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}
    return RunManifest(
        command=command,
        parameters=params,
        seed=getattr(args, "seed", None),
        tool_version=__version__,
        timestamp=datetime.now(timezone.utc).isoformat(),
    )


def _fmt(v: float) -> str:
    return f"{v:.12g}"


def _parse_grid(spec: str) -> np.ndarray:
    try:
        lo_s, hi_s, steps_s = spec.split(":")
        lo, hi, steps = float(lo_s), float(hi_s), int(steps_s)
    except ValueError as exc:
        raise GridError(f"grid {spec!r} must be lo:hi:steps") from exc
    if steps < 1 or hi < lo:
        raise GridError(f"grid {spec!r} is empty")
    return np.linspace(lo, hi, steps)


def _resolve_channel(args: argparse.Namespace) -> Channel:
    if args.bsc is not None:
        if not 0.0 < args.bsc < 1.0:
            raise ChannelFormatError(f"--bsc needs a crossover in (0, 1), got {args.bsc}")
        return bsc(args.bsc)
    return load_channel(args.channel)


def _write_csv(path: Path, schema: str, header: list[str], rows: list[list[str]]) -> None:
    lines = [f"# schema: {schema}", ",".join(header)]
    lines.extend(",".join(r) for r in rows)
    path.write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# phase-diagram
# ---------------------------------------------------------------------------

def cmd_phase_diagram(args: argparse.Namespace, ch: Channel) -> int:
    rates = _parse_grid(args.rate_grid)
    temps = _parse_grid(args.temp_grid)
    log_nx = ch.log_input_size
    rates = rates[(rates > 0) & (rates < log_nx)]
    temps = temps[temps > 0]
    if rates.size == 0 or temps.size == 0:
        raise GridError("no grid points inside 0 < R < ln|X|, T > 0")
    classifier = universal_classify if args.decoder == "universal" else classify

    point_rows = []
    for r in rates:
        for t in temps:
            pt = classifier(ch, None, float(r), float(t))
            point_rows.append(
                [_fmt(pt.rate), _fmt(pt.temperature), pt.phase,
                 _fmt(pt.f_ferro), _fmt(pt.f_glassy), _fmt(pt.f_para)]
            )
    out = Path(args.out)
    _write_csv(
        out.with_suffix(".points.csv"),
        f"remcode.phase_points.v1 decoder={args.decoder}",
        ["R_nats", "T", "phase", "f_ferro", "f_glassy", "f_para"],
        point_rows,
    )

    mi = mutual_information_uniform(ch)
    boundary_rows = []
    for kind in ("glassy_para", "ferro_para", "ferro_glassy"):
        grid = rates
        if kind == "ferro_para":
            grid = rates[rates < mi - 1e-12]
            if grid.size == 0:
                continue
        curve = boundary_curves(ch, None, kind, grid, decoder=args.decoder)
        boundary_rows.extend(
            [curve.kind, _fmt(r), _fmt(t)] for r, t in curve.samples
        )
    _write_csv(
        out.with_suffix(".boundaries.csv"),
        f"remcode.phase_boundaries.v1 decoder={args.decoder}",
        ["kind", "R_nats", "T"],
        boundary_rows,
    )
    _manifest("phase-diagram", args, ["channel", "bsc", "decoder", "rate_grid", "temp_grid", "out"]).write(
        out.with_suffix(".manifest.json")
    )
    return 0


# ---------------------------------------------------------------------------
# exponents
# ---------------------------------------------------------------------------

def cmd_exponents(args: argparse.Namespace, ch: Channel) -> int:
    rates = _parse_grid(args.rate_grid)
    if rates.size == 0:
        raise GridError("empty rate grid")
    mi = mutual_information_uniform(ch)
    if args.kind == "correct":
        bad = rates[(rates <= mi) | (rates >= ch.log_input_size)]
        if bad.size:
            raise GridError(
                f"correct-decoding exponent needs I(X;Y) < R < ln|X|; offending R: "
                + ", ".join(_fmt(b) for b in bad)
            )
    else:
        bad = rates[(rates < 0) | (rates >= mi)]
        if bad.size:
            raise GridError(
                f"error exponent needs 0 <= R < I(X;Y) = {_fmt(mi)}; offending R: "
                + ", ".join(_fmt(b) for b in bad)
            )

    rows = []
    for r in rates:
        if args.kind == "correct":
            res = correct_decoding_exponent(ch, float(r))
            param = res.aux["beta_r"]
        else:
            res = optimize_rho(ch, float(r))
            param = res.aux["rho"]
        rows.append([_fmt(res.rate), _fmt(res.exponent), _fmt(param), _fmt(res.crosscheck)])
    out = Path(args.out)
    param_name = "beta_r" if args.kind == "correct" else "rho_star"
    _write_csv(
        out.with_suffix(".csv"),
        f"remcode.exponents.v1 kind={args.kind}",
        ["R_nats", "exponent", param_name, "crosscheck"],
        rows,
    )
    _manifest("exponents", args, ["channel", "bsc", "kind", "rate_grid", "out"]).write(
        out.with_suffix(".manifest.json")
    )
    return 0


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def cmd_simulate(args: argparse.Namespace, ch: Channel) -> int:
    cfg = SimConfig(
        n=args.n,
        rate=args.rate,
        beta=args.beta,
        channel=ch,
        trials=args.trials,
        seed=args.seed,
        mode=args.mode,
    )
    samples = collect_samples(cfg)
    out = Path(args.out)

    header = {
        "schema": "remcode.simulate.v1",
        "seed": cfg.seed,
        "n": cfg.n,
        "rate": cfg.rate,
        "beta": cfg.beta,
        "mode": cfg.mode,
        "trials": cfg.trials,
    }
    lines = [json.dumps(header, sort_keys=True)]
    for i, s in enumerate(samples):
        lines.append(
            json.dumps(
                {
                    "trial": i,
                    "f_empirical": s.f_empirical,
                    "log_z_error": s.log_z_error,
                    "log_z_correct": s.log_z_correct,
                    "energy_correct": s.energy_correct,
                    "rank_correct": s.rank_correct,
                    "populated_bins": len(s.bins),
                },
                sort_keys=True,
            )
        )
    out.with_suffix(".jsonl").write_text("\n".join(lines) + "\n")

    values = np.array([s.f_empirical for s in samples])
    stderr = float(values.std(ddof=1) / math.sqrt(values.size)) if values.size > 1 else 0.0
    p10, p50, p90 = (float(np.percentile(values, q)) for q in (10, 50, 90))
    try:
        pt = classify(ch, None, cfg.rate, 1.0 / cfg.beta)
        theory = [_fmt(pt.f_glassy), _fmt(pt.f_para), pt.phase]
    except ValueError:
        theory = ["nan", "nan", "undefined"]
    _write_csv(
        out.with_suffix(".csv"),
        f"remcode.simulate_summary.v1 seed={cfg.seed}",
        ["n", "R_nats", "beta", "trials", "f_mean", "f_stderr", "f_p10", "f_p50", "f_p90",
         "theory_f_glassy", "theory_f_para", "theory_phase"],
        [[str(cfg.n), _fmt(cfg.rate), _fmt(cfg.beta), str(values.size),
          _fmt(float(values.mean())), _fmt(stderr), _fmt(p10), _fmt(p50), _fmt(p90)] + theory],
    )
    _manifest(
        "simulate", args, ["channel", "bsc", "mode", "n", "rate", "beta", "trials", "epsilon", "out"]
    ).write(out.with_suffix(".manifest.json"))
    return 0


# ---------------------------------------------------------------------------
# parser / entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="remcode",
        description="Decoding phase diagrams, coding exponents, and random-codebook simulation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_channel_args(p: argparse.ArgumentParser) -> None:
        grp = p.add_mutually_exclusive_group(required=True)
        grp.add_argument("--channel", help="channel JSON file")
        grp.add_argument("--bsc", type=float, help="BSC crossover probability")

    p_phase = sub.add_parser("phase-diagram", help="classify a (rate, T) grid and emit boundaries")
    add_channel_args(p_phase)
    p_phase.add_argument("--decoder", choices=["map", "universal"], default="map")
    p_phase.add_argument("--rate-grid", default="0.05:0.65:25", help="lo:hi:steps, endpoints included")
    p_phase.add_argument("--temp-grid", default="0.1:2.0:25", help="lo:hi:steps, endpoints included")
    p_phase.add_argument("--out", required=True, help="output path stem")
    p_phase.set_defaults(func=cmd_phase_diagram)

    p_exp = sub.add_parser("exponents", help="correct-decoding or error exponent over a rate grid")
    add_channel_args(p_exp)
    p_exp.add_argument("--kind", choices=["correct", "error"], required=True)
    p_exp.add_argument("--rate-grid", required=True, help="lo:hi:steps, endpoints included")
    p_exp.add_argument("--out", required=True)
    p_exp.set_defaults(func=cmd_exponents)

    p_sim = sub.add_parser("simulate", help="random-codebook spectrum campaign")
    add_channel_args(p_sim)
    p_sim.add_argument("--mode", choices=[MODE_ENUMERATE, MODE_BSC_SPECTRUM], required=True)
    p_sim.add_argument("--n", type=int, required=True, help="block length")
    p_sim.add_argument("--rate", type=float, required=True, help="rate in nats")
    p_sim.add_argument("--beta", type=float, required=True, help="inverse temperature")
    p_sim.add_argument("--trials", type=int, default=100)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--epsilon", type=float, default=0.1, help="slack for event analyses")
    p_sim.add_argument("--out", required=True)
    p_sim.set_defaults(func=cmd_simulate)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        ch = _resolve_channel(args)
    except (ChannelFormatError, OSError) as exc:
        print(f"remcode: channel error: {exc}", file=sys.stderr)
        return 2
    try:
        return args.func(args, ch)
    except GridError as exc:
        print(f"remcode: infeasible grid: {exc}", file=sys.stderr)
        return 3
    except WorkBoundError as exc:
        print(f"remcode: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
