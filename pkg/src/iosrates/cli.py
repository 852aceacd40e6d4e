"""Command-line interface.

Subcommands: ``specs``, ``ios``, ``dist``, ``rates``, ``rdd`` and ``knn``.
Results go to stdout or to ``--out``; a results file is always accompanied
by ``<out>.manifest.json`` holding the run config, library versions, seed and
wall time.  ``--config`` replays a config or a manifest.

Exit codes: 0 success, 2 invalid input, 1 runtime failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import platform
import sys
import time
import warnings
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from . import __version__
from . import dgp as _dgp
from .dist import joint_distance_bound, joint_distance_exact, marginal_distance
from .ios import extract, extract_two_sided
from .knn import (cdf_estimator, mean_estimator, normality_diagnostic, parse_statistic,
                  quantile_estimator)
from .rates import (growth_threshold_study, joint_rate_fit, log_correction_profile,
                    marginal_rate_fit, rows_to_csv)
from .rdd import GrowthRateWarning, permutation_test, q_rule, size_power_simulation

OUT_DIR_ENV = "IOSRATES_OUT_DIR"

__all__ = ["RunConfig", "run", "main", "build_parser"]


class UsageError(Exception):
    """Invalid command line or config; maps to exit code 2."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


# ---------------------------------------------------------------------------
# run configs


@dataclass
class RunConfig:
    """A serializable description of one CLI invocation."""

    command: list[str]
    options: dict[str, Any] = field(default_factory=dict)
    seed: int = 0
    out: str | None = None
    threads: int | None = None
    tolerances: dict[str, float] = field(default_factory=dict)

    FIELDS = ("command", "options", "seed", "out", "threads", "tolerances")

    def to_json(self) -> dict:
        return {
            "command": list(self.command),
            "options": dict(self.options),
            "seed": self.seed,
            "out": self.out,
            "threads": self.threads,
            "tolerances": dict(self.tolerances),
        }

    @classmethod
    def from_json(cls, doc: dict) -> "RunConfig":
        if "config" in doc and "command" not in doc:
            doc = doc["config"]
        unknown = set(doc) - set(cls.FIELDS)
        if unknown:
            raise UsageError(f"unknown config fields: {', '.join(sorted(unknown))}")
        if "command" not in doc:
            raise UsageError("config needs a command")
        return cls(
            command=list(doc["command"]),
            options=dict(doc.get("options", {})),
            seed=int(doc.get("seed", 0)),
            out=doc.get("out"),
            threads=doc.get("threads"),
            tolerances=dict(doc.get("tolerances", {})),
        )

    def to_argv(self) -> list[str]:
        argv = list(self.command)
        for key, val in self.options.items():
            flag = "--" + key.replace("_", "-")
            if isinstance(val, bool):
                if val:
                    argv.append(flag)
            elif isinstance(val, list):
                argv.append(flag)
                argv.extend(str(v) for v in val)
            elif val is not None:
                argv.extend([flag, str(val)])
        if self.seed is not None:
            argv.extend(["--seed", str(self.seed)])
        if self.out is not None:
            argv.extend(["--out", self.out])
        if self.threads is not None:
            argv.extend(["--threads", str(self.threads)])
        for key, val in self.tolerances.items():
            argv.extend(["--" + key.replace("_", "-"), str(val)])
        return argv


# ---------------------------------------------------------------------------
# output helpers


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def _json_text(obj) -> str:
    # json writes floats with repr: shortest round-trip form, at most 17 digits
    return json.dumps(_plain(obj), indent=2, sort_keys=True, allow_nan=True) + "\n"


def _csv_text(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)
                              for v in row))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# handlers return (text, extension)


def _load(path: str) -> _dgp.Dataset:
    try:
        return _dgp.read_csv(path)
    except FileNotFoundError as exc:
        raise UsageError(f"input file not found: {path}") from exc


def _point(text: str) -> list[float]:
    return [float(v) for v in str(text).split(",")]


def _spec(ident: str) -> _dgp.DgpSpec:
    try:
        return _dgp.get_spec(ident)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from exc


def cmd_specs(a):
    if a.action == "list":
        return "\n".join(sorted(_dgp.registry())) + "\n", "txt"
    if not a.id:
        raise UsageError("specs show needs an id")
    return _json_text(_dgp.spec_to_json(_spec(a.id))), "json"


def cmd_ios(a):
    data = _load(a.input)
    res = extract(data, _point(a.x0), a.k)
    return _json_text(res.to_dict()), "json"


def cmd_dist(a):
    spec = _spec(a.spec)
    if a.action == "marginal":
        if a.r is None:
            raise UsageError("dist marginal needs --r")
        est = marginal_distance(spec, a.r, a.metric)
    else:
        if a.n is None or a.k is None:
            raise UsageError("dist joint needs --n and --k")
        engine = "bound" if a.bound else "exact"
        est = (joint_distance_bound if engine == "bound" else joint_distance_exact)(
            spec, a.n, a.k, a.metric)
    return _json_text({"value": est.value, "err": est.err, "method": est.method}), "json"


def cmd_rates(a):
    spec = _spec(a.spec)
    if a.action == "marginal":
        hi = a.r_max if a.r_max is not None else min(spec.r_tilde, 0.1)
        grid = np.geomspace(a.r_min, hi, a.points)
        fit = marginal_rate_fit(spec, a.metric, grid, tolerance=a.tolerance, threads=a.threads)
        return rows_to_csv(fit.rows), "csv"
    n_grid = [2**e for e in range(a.n_min_exp, a.n_max_exp + 1, a.n_step)]
    gammas = a.gamma or [0.5]
    if a.action == "joint":
        rows = []
        for g in gammas:
            sched = [(n, max(1, int(n**g * (1 + 1e-12)))) for n in n_grid]
            fit = joint_rate_fit(spec, a.metric, sched, engine="bound" if a.bound else "exact",
                                 tolerance=a.tolerance, threads=a.threads)
            rows.extend(fit.rows)
        return rows_to_csv(rows), "csv"
    if a.action == "profile":
        rep = log_correction_profile(spec)
        rows = [{"scale": r, "n": None, "k": None, "distance": tv, "err": 0.0, "method": "profile"}
                for r, tv in zip(rep["r"], rep["tv"])]
        return rows_to_csv(rows), "csv"
    study = growth_threshold_study(spec, gammas, n_grid, a.metric, threads=a.threads)
    rows = [r for v in study["gammas"].values() for r in v["rows"]]
    return rows_to_csv(rows), "csv"


def cmd_rdd(a):
    if a.action == "test":
        data = _load(a.input)
        q = a.q if a.q is not None else q_rule(data.n, a.gamma, a.c)
        if a.pooled:
            s_n = extract(data, [a.cutoff], 2 * q).s_n
        else:
            s_n = extract_two_sided(data, a.cutoff, q).s_n
        res = permutation_test(s_n, alpha=a.alpha, max_exact=a.exact_max, n_random=a.perms,
                               seed=a.seed)
        return _json_text(res.to_dict()), "json"
    left, right = _spec(a.left), _spec(a.right or a.left)
    rep = size_power_simulation(left, right, a.n, a.gamma, a.c, a.reps, a.alpha, a.seed,
                                n_random=a.perms, max_exact=a.exact_max, threads=a.threads)
    rows = list(zip(rep["rep"], rep["statistic"], rep["p_value"]))
    return _csv_text(("rep", "statistic", "p"), rows), "csv"


def cmd_knn(a):
    if a.action == "estimate":
        data = _load(a.input)
        name, arg = parse_statistic(a.stat)
        s = extract(data, _point(a.x0), a.k).s_n
        if name == "mean":
            val = mean_estimator(s).tolist()
        elif name == "cdf":
            val = [cdf_estimator(s[:, 0], arg)]
        else:
            val = [quantile_estimator(s[:, 0], arg)]
        return _json_text({"estimate": val, "k": a.k, "stat": a.stat}), "json"
    spec = _spec(a.spec)
    if a.k is None:
        if a.gamma is None:
            raise UsageError("knn normality needs --k or --gamma")
        k = max(1, int(a.n ** a.gamma * (1 + 1e-12)))
    else:
        k = a.k
    name, arg = parse_statistic(a.stat)
    if name == "quantile":
        raise UsageError("normality diagnostics support mean and cdf only")
    rep = normality_diagnostic(spec, name, a.n, k, a.reps, a.seed, t=arg, threads=a.threads)
    return _json_text(rep.to_dict()), "json"


# ---------------------------------------------------------------------------
# parser


def _common(p):
    p.add_argument("--out", help="results file (default: stdout or $%s)" % OUT_DIR_ENV)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="iosrates", description="Induced order statistics toolkit")
    parser.add_argument("--config", help="JSON run config or manifest to replay")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="group", parser_class=_Parser)

    p = sub.add_parser("specs", help="list or show registered data-generating processes")
    p.add_argument("action", choices=["list", "show"])
    p.add_argument("id", nargs="?")
    _common(p)
    p.set_defaults(func=cmd_specs)

    p = sub.add_parser("ios", help="extract induced order statistics")
    p.add_argument("action", choices=["extract"])
    p.add_argument("--input", required=True)
    p.add_argument("--x0", required=True, help="comma-separated point")
    p.add_argument("--k", type=int, required=True)
    _common(p)
    p.set_defaults(func=cmd_ios)

    p = sub.add_parser("dist", help="marginal and joint distances")
    p.add_argument("action", choices=["marginal", "joint"])
    p.add_argument("--spec", required=True)
    p.add_argument("--metric", choices=["h", "tv"], default="h")
    p.add_argument("--r", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--exact", action="store_true")
    g.add_argument("--bound", action="store_true")
    _common(p)
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("rates", help="rate fits and growth-threshold study")
    p.add_argument("action", choices=["marginal", "joint", "threshold", "profile"])
    p.add_argument("--spec", required=True)
    p.add_argument("--metric", choices=["h", "tv"], default="h")
    p.add_argument("--gamma", type=float, nargs="+")
    p.add_argument("--r-min", type=float, default=1e-3)
    p.add_argument("--r-max", type=float)
    p.add_argument("--points", type=int, default=8)
    p.add_argument("--n-min-exp", type=int, default=9)
    p.add_argument("--n-max-exp", type=int, default=15)
    p.add_argument("--n-step", type=int, default=1)
    p.add_argument("--bound", action="store_true", help="use the mixture bound engine")
    p.add_argument("--tolerance", type=float, default=0.05)
    _common(p)
    p.set_defaults(func=cmd_rates)

    p = sub.add_parser("rdd", help="RDD covariate-balance permutation test")
    p.add_argument("action", choices=["test", "simulate"])
    p.add_argument("--input")
    p.add_argument("--cutoff", type=float, default=0.0)
    p.add_argument("--q", type=int)
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--exact-max", type=int, default=200_000)
    p.add_argument("--perms", type=int, default=9_999)
    p.add_argument("--pooled", action="store_true",
                   help="take the 2q pooled nearest neighbours and split them in sample order")
    p.add_argument("--left")
    p.add_argument("--right")
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--reps", type=int, default=1000)
    _common(p)
    p.set_defaults(func=cmd_rdd)

    p = sub.add_parser("knn", help="IOS estimators and normality diagnostics")
    p.add_argument("action", choices=["estimate", "normality"])
    p.add_argument("--input")
    p.add_argument("--x0", default="0")
    p.add_argument("--k", type=int)
    p.add_argument("--stat", default="mean")
    p.add_argument("--spec")
    p.add_argument("--n", type=int, default=10_000)
    p.add_argument("--gamma", type=float)
    p.add_argument("--reps", type=int, default=1000)
    _common(p)
    p.set_defaults(func=cmd_knn)
    return parser


def _validate(a):
    if a.group == "ios" and a.k is None:
        raise UsageError("--k is required")
    if a.group == "rdd" and a.action == "test" and not a.input:
        raise UsageError("rdd test needs --input")
    if a.group == "rdd" and a.action == "simulate" and not a.left:
        raise UsageError("rdd simulate needs --left")
    if a.group == "knn" and a.action == "estimate" and (not a.input or a.k is None):
        raise UsageError("knn estimate needs --input and --k")
    if a.group == "knn" and a.action == "normality" and not a.spec:
        raise UsageError("knn normality needs --spec")
    if a.threads is None:
        a.threads = os.cpu_count() or 1


_NON_OPTIONS = {"group", "action", "id", "func", "config", "seed", "out", "threads"}


def _write(text: str, ext: str, a, config: RunConfig, started: float) -> None:
    out = a.out
    if out is None and os.environ.get(OUT_DIR_ENV) and a.group != "specs":
        name = "_".join([a.group, a.action]) + "." + ext
        out = os.path.join(os.environ[OUT_DIR_ENV], name)
    if out is None:
        sys.stdout.write(text)
        return
    os.makedirs(os.path.dirname(os.path.abspath(out)), exist_ok=True)
    with open(out, "w", newline="\n") as fh:
        fh.write(text)
    import scipy
    import sklearn

    config.out = out
    manifest = {
        "config": config.to_json(),
        "seed": config.seed,
        "versions": {
            "iosrates": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "scikit-learn": sklearn.__version__,
        },
        "wall_time_s": time.perf_counter() - started,
        "threads": a.threads,
        "outputs": {out: hashlib.sha256(text.encode()).hexdigest()},
    }
    with open(out + ".manifest.json", "w", newline="\n") as fh:
        fh.write(_json_text(manifest))


def run(argv: Sequence[str] | None = None) -> int:
    """Run the CLI and return the exit code."""
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    started = time.perf_counter()
    try:
        a = parser.parse_args(argv)
        if a.config:
            try:
                with open(a.config) as fh:
                    cfg = RunConfig.from_json(json.load(fh))
            except (OSError, json.JSONDecodeError) as exc:
                raise UsageError(f"cannot read config: {exc}") from exc
            a = parser.parse_args(cfg.to_argv())
        if a.group is None:
            parser.print_usage(sys.stderr)
            return 2
        _validate(a)
        config = RunConfig(command=[a.group, a.action] + ([a.id] if getattr(a, "id", None) else []),
                           options={k: v for k, v in vars(a).items()
                                    if k not in _NON_OPTIONS and v is not None and v is not False},
                           seed=a.seed, out=a.out, threads=a.threads)
        with warnings.catch_warnings():
            warnings.simplefilter("always", GrowthRateWarning)
            text, ext = a.func(a)
        _write(text, ext, a, config, started)
        return 0
    except UsageError as exc:
        print(f"iosrates: error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:
        return int(exc.code or 0)
    except (ValueError, KeyError) as exc:
        print(f"iosrates: invalid input: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"iosrates: failed: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())
