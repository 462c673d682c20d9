"""Command line driver: ``reskern <subcommand> --config cfg.json [--out PATH]``."""

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from . import experiments as ex

DESCRIPTIONS = {
    "eval": "Kernel values. CSV columns: index, gpk, ntk, gpk_normalized, ntk_normalized.",
    "gram": "Normalized Gram matrix of sampled or given multi-sphere points. CSV: one row per point.",
    "eig": "Eigenvalues of the one-convolution kernels. CSV columns: kernel, pattern, k, lambda, "
           "tolerance. The slope-fit summary goes to <out>.json (stderr without --out).",
    "cond": "Condition numbers over depth. CSV columns: L, kernel_kind, rho_actual, rho_lower, "
            "rho_upper, epsilon, b, l1_gap.",
    "mc-validate": "Monte Carlo check of the analytic kernels. JSON report; exit status 1 "
                   "when any |z-score| exceeds z_threshold.",
    "erf": "Effective receptive field of Theta_Eq. CSV columns: pixel, offset, erf, raw_norm.",
    "depth-limit": "Deviation from t_1 with alpha = L^-gamma. CSV columns: L, alpha, "
                   "gpk_deviation, ntk_deviation.",
}


class ConfigError(Exception):
    pass


def _format_validation(err: ValidationError) -> str:
    lines = []
    for e in err.errors():
        loc = ".".join(str(part) for part in e["loc"])
        msg = e["msg"].removeprefix("Value error, ")
        lines.append(f"{loc}: {msg}" if loc else msg)
    return "; ".join(lines)


def load_config(kind: str, path: str | None, seed: int | None):
    data = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config {path}: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
    if seed is not None:
        data["seed"] = seed
    try:
        return ex.CONFIGS[kind].model_validate(data)
    except ValidationError as e:
        raise ConfigError(_format_validation(e)) from e


def _num(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def _csv_text(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _num(v) for k, v in row.items()})
    return buf.getvalue()


def _json_text(obj) -> str:
    def default(o):
        if isinstance(o, np.generic):
            return o.item()
        if isinstance(o, np.ndarray):
            return o.tolist()
        raise TypeError(type(o).__name__)
    return json.dumps(obj, indent=2, default=default) + "\n"


def _emit(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def run(kind: str, cfg, out: str | None, threads: int) -> int:
    if kind == "eval":
        _emit(_csv_text(ex.run_eval(cfg)), out)
    elif kind == "gram":
        a = ex.run_gram(cfg)
        rows = [{"i": i, **{str(j): a[i, j] for j in range(len(a))}} for i in range(len(a))]
        _emit(_csv_text(rows), out)
    elif kind == "eig":
        rows, summary = ex.run_eig(cfg)
        _emit(_csv_text(rows), out)
        if out is None:
            sys.stderr.write(_json_text(summary))
        else:
            Path(out).with_suffix(".json").write_text(_json_text(summary))
    elif kind == "cond":
        _emit(_csv_text(ex.run_cond(cfg)), out)
    elif kind == "mc-validate":
        report = ex.run_mc_validate(cfg, threads)
        _emit(_json_text(report), out)
        return 0 if report["passed"] else 1
    elif kind == "erf":
        _emit(_csv_text(ex.run_erf(cfg)), out)
    elif kind == "depth-limit":
        _emit(_csv_text(ex.run_depth_limit(cfg)), out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reskern", description="Kernels of convolutional residual networks.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in DESCRIPTIONS.items():
        p = sub.add_parser(name, help=text.split(".")[0], description=text)
        p.add_argument("--config", help="JSON file of settings; omitted keys use defaults")
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--threads", type=int, default=1, help="worker threads (default 1)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads < 1:
        print("reskern: config error: threads: must be >= 1", file=sys.stderr)
        return 2
    try:
        cfg = load_config(args.command, args.config, args.seed)
        return run(args.command, cfg, args.out, args.threads)
    except (ConfigError, ValueError) as e:
        print(f"reskern: config error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
