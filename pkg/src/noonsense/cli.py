"""Command-line interface.

Commands: ``probe``, ``probs``, ``fisher``, ``simulate``, ``table1``.
Exit codes: 0 success, 2 configuration/specification error, 3 numerical error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .config import ExperimentConfig, VisibilitySpec, load
from .errors import NumericalError, SingularInformationError, SpecError
from .estimation import estimate_scan, mle_estimate_joint, sample_counts
from .fisher import (FisherKind, FisherMatrix, bounds, cfim_batch, db_gain, format_table, qfim,
                     reference_lines, scalar_fisher_scan, table1)
from .measurement import FringeModel

log = logging.getLogger("noonsense")

SIG = 12


def fmt(x) -> str:
    return f"{float(x):.{SIG}g}"


def _round(obj):
    """Recursively round floats to 12 significant digits for JSON output."""
    if isinstance(obj, float):
        return float(fmt(obj)) if math.isfinite(obj) else str(obj)
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _round(obj.tolist())
    if isinstance(obj, np.generic):
        return _round(obj.item())
    return obj


def _header(cfg: ExperimentConfig, command: str) -> dict:
    return {"command": command, "version": __version__, "config": cfg.to_dict(), "seed": cfg.seed}


class Output:
    """Writes files under ``--out`` or, without it, prints them to stdout."""

    def __init__(self, out: Optional[str]):
        self.dir = Path(out) if out else None
        if self.dir is not None:
            self.dir.mkdir(parents=True, exist_ok=True)

    def write(self, name: str, text: str) -> None:
        if self.dir is None:
            sys.stdout.write(text if text.endswith("\n") else text + "\n")
        else:
            (self.dir / name).write_text(text, encoding="utf-8")
            log.info("wrote %s", self.dir / name)

    def json(self, name: str, payload: dict) -> None:
        self.write(name, json.dumps(_round(payload), indent=2, sort_keys=False) + "\n")

    def csv(self, name: str, header: dict, columns: list, rows: list) -> None:
        buf = io.StringIO()
        buf.write("# " + json.dumps(_round(header), sort_keys=True) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([fmt(x) if isinstance(x, (float, np.floating)) else x for x in row])
        self.write(name, buf.getvalue())


# -- commands -----------------------------------------------------------------------------


def cmd_probe(cfg: ExperimentConfig, out: Output, args) -> None:
    state = cfg.probe_spec.build()
    payload = _header(cfg, "probe")
    payload.update({"mode_count": state.mode_count, "kets": len(state),
                    "amplitudes": state.to_records()})
    out.json("probe.json", payload)


def cmd_probs(cfg: ExperimentConfig, out: Output, args) -> None:
    model = cfg.model()
    phis = np.array(cfg.scan.values())
    P = model.along_scan(phis)
    columns = [f"phi{j + 1}" for j in range(cfg.d)] + model.labels
    rows = [[phi] * cfg.d + list(p) for phi, p in zip(phis, P)]
    header = _header(cfg, "probs")
    if isinstance(model, FringeModel):
        header["max_renormalization"] = float(
            model.renormalization(np.repeat(phis[:, None], cfg.d, axis=1)).max())
    out.csv("probs.csv", header, columns, rows)


def _table1_payload(cfg: ExperimentConfig, d: int, N: int) -> tuple:
    rows = table1(d, N)
    return format_table(rows), [r.to_dict() for r in rows]


def cmd_table1(cfg: ExperimentConfig, out: Output, args) -> None:
    text, rows = _table1_payload(cfg, cfg.d, cfg.N)
    payload = _header(cfg, "table1")
    payload["rows"] = rows
    out.write("table1.txt", text)
    if out.dir is not None:
        out.json("table1.json", payload)


def cmd_fisher(cfg: ExperimentConfig, out: Output, args) -> None:
    if getattr(args, "table1", False):
        return cmd_table1(cfg, out, args)
    model = cfg.model()
    network = cfg.network()
    nu = network.nu
    phis = np.linspace(cfg.scan.start, cfg.scan.stop, cfg.fisher_points)
    fi = scalar_fisher_scan(model, phis, nu, cfg.step)
    if np.isnan(fi).all():
        raise SingularInformationError("Fisher matrix is singular at every scan point")
    best = int(np.nanargmax(fi))
    F_best = FisherMatrix(cfim_batch(model.probabilities, np.full((1, cfg.d), phis[best]), cfg.step)[0],
                          FisherKind.CLASSICAL)
    crb = bounds(F_best, nu, 1, cfg.N, cfg.probe_spec.kind)
    qcrb = bounds(qfim(cfg.probe_spec.build()), nu, 1, cfg.N, cfg.probe_spec.kind)
    payload = _header(cfg, "fisher")
    payload.update({
        "crb": crb.to_dict(),
        "qcrb": qcrb.to_dict(),
        "cfim_at_max": F_best.entries.tolist(),
        "phi_at_max": float(phis[best]),
        "max_fisher": float(fi[best]),
        "min_fisher": float(np.nanmin(fi)),
        "db_gain": db_gain(float(fi[best]), cfg.N),
        "fisher_variation": float(np.nanmax(fi) - np.nanmin(fi)),
    })
    out.json("fisher.json", payload)
    out.csv("fisher.csv", _header(cfg, "fisher"), ["phi", "fisher", "db_gain"],
            [[p, f, db_gain(f, cfg.N)] for p, f in zip(phis, fi)])


def cmd_simulate(cfg: ExperimentConfig, out: Output, args) -> None:
    model = cfg.model()
    phis = cfg.scan.values()
    points = estimate_scan(model, phis, cfg.mu, cfg.bootstrap, cfg.seed, cfg.domain,
                           cfg.parametric, args.threads)
    columns = ["phi_true", "phi_est", "std_bootstrap", "std_crb", "std_sql", "std_hs"]
    rows = [[p.phi_true, p.phi_est, p.bootstrap_std, p.crb_std, p.sql_std, p.hs_std] for p in points]
    joint = None
    if cfg.mode == "joint":
        joint = []
        for i, phi in enumerate(phis):
            counts = sample_counts(model.along_scan(phi), cfg.mu, (cfg.seed, 0, i))
            joint.append(mle_estimate_joint(counts, model, cfg.domain, cfg.network().nu).to_dict())
        columns.append("phi_est_joint")
        rows = [r + [j["phi_est"]] for r, j in zip(rows, joint)]
    sql, hs = reference_lines(cfg.N, cfg.mu)
    payload = _header(cfg, "simulate")
    payload.update({
        "points": [p.__dict__ for p in points],
        "reference": {"std_sql": sql, "std_hs": hs},
        "best_bootstrap_std": min(p.bootstrap_std for p in points),
    })
    if joint is not None:
        payload["joint"] = joint
    out.json("simulate.json", payload)
    out.csv("simulate.csv", _header(cfg, "simulate"), columns, rows)


COMMANDS = {"probe": cmd_probe, "probs": cmd_probs, "fisher": cmd_fisher,
            "simulate": cmd_simulate, "table1": cmd_table1}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML experiment configuration")
    common.add_argument("--seed", type=int, help="unsigned 64-bit master seed")
    common.add_argument("--out", help="output directory (default: print to stdout)")
    common.add_argument("--threads", type=int, default=1,
                        help="worker threads, 0 = auto; never changes results")
    common.add_argument("--kind", help="probe kind: mn, sn or 2002")
    common.add_argument("--d", type=int, help="number of nodes")
    common.add_argument("--n", type=int, dest="N", help="total photon number")
    common.add_argument("--mu", type=int, help="measurements per scan point")
    common.add_argument("--bootstrap", type=int, help="bootstrap resamples")
    common.add_argument("--start", type=float, help="scan start (rad)")
    common.add_argument("--stop", type=float, help="scan stop (rad)")
    common.add_argument("--points", type=int, help="scan points")
    common.add_argument("--visibility", help="'measured', 'none', or a uniform value in [0, 1]")
    common.add_argument("--mode", choices=["scalar", "joint"], help="estimator mode")
    common.add_argument("--parametric", action="store_true", default=None,
                        help="parametric bootstrap from the fitted model")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="noonsense", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("probe", parents=[common], help="dump a probe state as JSON")
    sub.add_parser("probs", parents=[common], help="outcome probabilities over the scan (CSV)")
    fisher = sub.add_parser("fisher", parents=[common], help="Fisher information and bounds")
    fisher.add_argument("--table1", action="store_true", help="emit the probe comparison table")
    sub.add_parser("simulate", parents=[common], help="sampling, MLE and bootstrap over the scan")
    sub.add_parser("table1", parents=[common], help="probe comparison table")
    return parser


def resolve_config(args) -> ExperimentConfig:
    cfg = load(args.config) if args.config else ExperimentConfig()
    vis = cfg.visibility
    if args.visibility is not None:
        v = args.visibility.strip().lower()
        if v == "none":
            vis = None
        elif v == "measured":
            vis = VisibilitySpec(preset="measured")
        else:
            try:
                vis = VisibilitySpec(uniform=float(v))
            except ValueError:
                raise SpecError(f"--visibility must be measured, none or a number, got {v!r}") from None
    kind = args.kind
    if kind is None and (args.d is not None or args.N is not None) and cfg.kind == "2002":
        kind = "mn"
    cfg = cfg.override(kind=kind, d=args.d, N=args.N, mu=args.mu, bootstrap=args.bootstrap,
                       seed=args.seed, start=args.start, stop=args.stop, points=args.points,
                       mode=args.mode, parametric=args.parametric)
    if args.visibility is not None:
        cfg = replace(cfg, visibility=vis)
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.threads < 0:
            raise SpecError("--threads must be non-negative")
        cfg = resolve_config(args)
        COMMANDS[args.command](cfg, Output(args.out), args)
    except SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
