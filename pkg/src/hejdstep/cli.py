"""Command-line front end: price, table, greeks, roots, verify.

Exit codes: 0 success, 2 configuration errors, 3 numerical errors.  JSON
output embeds the run manifest; csv/text written to --out gets a sibling
<out>.manifest.json; csv/text on stdout omits the manifest.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

from . import __version__
from .config import parse_config
from .errors import ConfigError, HejdStepError
from .inversion import QUANTITIES, gs_weights, price_summary, price_time_domain
from .manifest import build_manifest
from .montecarlo import PathConfig, mc_euro_step_price, verify_duality
from .roots import find_roots
from .tables import TABLE_IDS, build_table

_PRICE_QUANTITIES = QUANTITIES + ("all",)


def _write_output(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def _emit(payload: dict, manifest, fmt: str, out: str | None, text_lines: list[str]) -> None:
    """Route results to the requested format with the manifest policy above."""
    if fmt == "json":
        doc = dict(payload)
        doc["manifest"] = json.loads(manifest.to_json())
        _write_output(json.dumps(doc, indent=2, sort_keys=True), out)
        return
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(payload.keys())
        writer.writerow(payload.values())
        body = buf.getvalue()
    else:
        body = "\n".join(text_lines) + "\n"
    _write_output(body, out)
    if out:
        Path(str(out) + ".manifest.json").write_text(manifest.to_json())


def _cmd_price(args: argparse.Namespace) -> int:
    model, spec = parse_config(args.config)
    cfg = gs_weights(args.gs_order)
    if args.quantity == "all":
        summary = price_summary(model, spec, args.t, args.x, cfg)
        payload = {
            "euro": summary["euro"],
            "amer": summary["amer"],
            "eep": summary["eep"],
            "eep_pct": summary["eep_pct"],
            "dc_pct": summary["dc_pct"],
        }
        text = [
            f"euro    {summary['euro']:.3f}",
            f"amer    {summary['amer']:.3f}",
            f"eep     {summary['eep']:.3f}",
            f"eep%    {summary['eep_pct']:.2f}",
            f"dc%     {summary['dc_pct']:.2f}",
        ]
    else:
        value = price_time_domain(model, spec, args.t, args.x, args.quantity, cfg)
        payload = {"quantity": args.quantity, "value": value}
        text = [f"{args.quantity}  {value:.3f}"]
    manifest = build_manifest(
        "price", __version__, args.gs_order, model, spec,
        t=args.t, x=args.x, quantity=args.quantity, format=args.format,
    )
    _emit(payload, manifest, args.format, args.out, text)
    return 0


def _cmd_table(args: argparse.Namespace) -> int:
    cfg = gs_weights(args.gs_order)
    result = build_table(args.table_id, cfg)
    manifest = build_manifest(
        "table", __version__, args.gs_order, None, None, table_id=args.table_id
    )
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(result.header)
    for row in result.rows:
        writer.writerow(["" if isinstance(v, float) and math.isnan(v) else repr(v) if isinstance(v, float) else v for v in row])
    _write_output(buf.getvalue(), args.out)
    if args.out:
        Path(str(args.out) + ".manifest.json").write_text(manifest.to_json())
    return 0


def _cmd_greeks(args: argparse.Namespace) -> int:
    model, spec = parse_config(args.config)
    cfg = gs_weights(args.gs_order)
    if args.x_lo >= args.x_hi:
        raise ConfigError("need x_lo < x_hi")
    if args.n < 3:
        raise ConfigError("need at least 3 grid points")

    def surface(mdl, sp):
        price = lambda s: price_time_domain(mdl, sp, args.t, s, args.quantity, cfg)
        rows = []
        for i in range(args.n):
            x = args.x_lo + (args.x_hi - args.x_lo) * i / (args.n - 1)
            h = args.bump * x
            f0, fp, fm = price(x), price(x + h), price(x - h)
            rows.append((x, f0, (fp - fm) / (2.0 * h), (fp - 2.0 * f0 + fm) / (h * h)))
        return rows

    rows = surface(model, spec)
    if args.diff_against:
        model2, spec2 = parse_config(args.diff_against)
        rows2 = surface(model2, spec2)
        rows = [
            (x1, v1 - v2, d1 - d2, g1 - g2)
            for (x1, v1, d1, g1), (_, v2, d2, g2) in zip(rows, rows2)
        ]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("x", "value", "delta", "gamma"))
    for row in rows:
        writer.writerow([repr(v) for v in row])
    manifest = build_manifest(
        "greeks", __version__, args.gs_order, model, spec,
        t=args.t, x_lo=args.x_lo, x_hi=args.x_hi, n=args.n,
        quantity=args.quantity, bump=args.bump, diff_against=args.diff_against,
    )
    _write_output(buf.getvalue(), args.out)
    if args.out:
        Path(str(args.out) + ".manifest.json").write_text(manifest.to_json())
    return 0


def _cmd_roots(args: argparse.Namespace) -> int:
    model, _spec = parse_config(args.config)
    roots = find_roots(model, args.alpha)
    xi, eta = model.up_rates, model.down_rates
    rows = []
    for s, beta in enumerate(roots.betas):
        lo = 0.0 if s == 0 else xi[s - 1]
        hi = xi[s] if s < model.m else math.inf
        rows.append({"root": beta, "kind": "beta", "index": s + 1, "bracket_lo": lo, "bracket_hi": hi})
    for u, gamma in enumerate(roots.gammas):
        hi = 0.0 if u == 0 else -eta[u - 1]
        lo = -eta[u] if u < model.n else -math.inf
        rows.append({"root": gamma, "kind": "gamma", "index": u + 1, "bracket_lo": lo, "bracket_hi": hi})
    manifest = build_manifest("roots", __version__, 0, model, _spec, alpha=args.alpha)
    if args.format == "json":
        doc = {"alpha": roots.alpha, "max_residual": roots.max_residual, "roots": rows,
               "manifest": json.loads(manifest.to_json())}
        _write_output(json.dumps(doc, indent=2, sort_keys=True), args.out)
        return 0
    lines = [f"roots of Phi(theta) = {roots.alpha} (max residual {roots.max_residual:.3e})"]
    for row in rows:
        lines.append(
            f"  {row['kind']}[{row['index']}] = {row['root']:.12g}"
            f"   bracket ({row['bracket_lo']:.6g}, {row['bracket_hi']:.6g})"
        )
    _write_output("\n".join(lines) + "\n", args.out)
    if args.out:
        Path(str(args.out) + ".manifest.json").write_text(manifest.to_json())
    return 0


def _cmd_verify(args: argparse.Namespace) -> int:
    model, spec = parse_config(args.config)
    cfg = PathConfig(n_paths=args.paths, dt=args.dt, seed=args.seed)
    engine = price_time_domain(model, spec, args.t, args.x, "euro", gs_weights(args.gs_order))
    mc = mc_euro_step_price(model, spec, args.t, args.x, cfg)
    z_engine = (mc.value - engine) / mc.std_error if mc.std_error > 0 else math.inf
    duality = verify_duality(model, spec, args.t, args.x, cfg)
    payload = {
        "engine_euro": engine,
        "mc_euro": mc.value,
        "mc_se": mc.std_error,
        "z_engine_vs_mc": z_engine,
        "duality_call": duality.call.value,
        "duality_put": duality.dual_put.value,
        "duality_pooled_se": duality.pooled_se,
        "z_duality": duality.z_score,
    }
    manifest = build_manifest(
        "verify", __version__, args.gs_order, model, spec,
        t=args.t, x=args.x, paths=args.paths, dt=args.dt, seed=args.seed,
    )
    text = [
        f"engine euro        {engine:.6f}",
        f"mc euro            {mc.value:.6f}  (se {mc.std_error:.6f})",
        f"deviation          {z_engine:+.2f} se",
        f"duality call       {duality.call.value:.6f}",
        f"duality dual put   {duality.dual_put.value:.6f}",
        f"duality deviation  {duality.z_score:+.2f} pooled se",
    ]
    _emit(payload, manifest, args.format, args.out, text)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hejdstep",
        description="Geometric down-and-out step call pricing under hyper-exponential jump-diffusion",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_format=True):
        p.add_argument("--gs-order", type=int, default=7, help="inversion order (1..10)")
        p.add_argument("--out", default=None, help="write output to this file")
        if with_format:
            p.add_argument("--format", choices=("text", "json", "csv"), default="text")

    p = sub.add_parser("price", help="price one contract")
    p.add_argument("config")
    p.add_argument("--t", type=float, required=True, help="time to maturity (years)")
    p.add_argument("--x", type=float, required=True, help="spot price")
    p.add_argument("--quantity", choices=_PRICE_QUANTITIES, default="euro")
    add_common(p)
    p.set_defaults(func=_cmd_price)

    p = sub.add_parser("table", help="reproduce a built-in reference grid (CSV)")
    p.add_argument("table_id", type=int, choices=TABLE_IDS)
    add_common(p, with_format=False)
    p.set_defaults(func=_cmd_table)

    p = sub.add_parser("greeks", help="emit (x, value, delta, gamma) CSV over a spot grid")
    p.add_argument("config")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--x-lo", type=float, required=True)
    p.add_argument("--x-hi", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--quantity", choices=QUANTITIES, default="euro")
    p.add_argument("--bump", type=float, default=1e-3, help="relative spot bump")
    p.add_argument("--diff-against", default=None, help="subtract this config's surface")
    add_common(p, with_format=False)
    p.set_defaults(func=_cmd_greeks)

    p = sub.add_parser("roots", help="roots of Phi(theta) = alpha with their brackets")
    p.add_argument("config")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_roots)

    p = sub.add_parser("verify", help="Monte-Carlo cross-check and duality report")
    p.add_argument("config")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--paths", type=int, default=100_000)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=0)
    add_common(p)
    p.set_defaults(func=_cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    fmt = getattr(args, "format", "text")
    try:
        return args.func(args)
    except ConfigError as exc:
        _report_error(exc, fmt, code=2)
        return 2
    except (HejdStepError, ValueError) as exc:
        _report_error(exc, fmt, code=3)
        return 3


def _report_error(exc: Exception, fmt: str, code: int) -> None:
    if fmt == "json":
        doc = {"error": {"type": type(exc).__name__, "message": str(exc), "exit_code": code}}
        sys.stdout.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    else:
        sys.stderr.write(f"error: {exc}\n")


if __name__ == "__main__":
    raise SystemExit(main())
