"""Command-line front end: one subcommand per experiment family, deterministic
JSON/CSV emission, and golden-file verification.

Artifacts always embed the full effective configuration, which is what
`verify` re-executes for byte-exact comparison.  Randomized checks use the
Mersenne Twister (random.Random) seeded from --seed.
"""

from __future__ import annotations

import argparse
import io
import random
import sys
import warnings

from . import arith, contourlab, intervals, sdexpand
from .errors import AccuracyError, CapacityError, DomainError, ToolkitError

__all__ = ["main", "run_command", "render_json", "render_csv"]

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_ACCURACY = 3
EXIT_GOLDEN = 4


# ----------------------------------------------------------------------------
# Deterministic rendering
# ----------------------------------------------------------------------------

def _fmt_float(x: float) -> str:
    if x != x or x in (float("inf"), float("-inf")):
        raise ValueError("non-finite value in artifact")
    return format(x, ".17g")


def _render(obj, out: list) -> None:
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(_fmt_float(obj))
    elif isinstance(obj, str):
        out.append('"' + obj.replace("\\", "\\\\").replace('"', '\\"') + '"')
    elif isinstance(obj, dict):
        out.append("{")
        for i, key in enumerate(sorted(obj)):
            if i:
                out.append(",")
            _render(str(key), out)
            out.append(":")
            _render(obj[key], out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, v in enumerate(obj):
            if i:
                out.append(",")
            _render(v, out)
        out.append("]")
    else:
        raise TypeError(f"cannot render {type(obj)!r}")


def render_json(obj) -> str:
    """Sorted keys, floats at 17 significant digits (round-trip exact)."""
    out: list[str] = []
    _render(obj, out)
    return "".join(out) + "\n"


def render_csv(fields, rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(fields) + "\n")
    for row in rows:
        cells = []
        for f in fields:
            v = row[f]
            if isinstance(v, float):
                cells.append(_fmt_float(v))
            else:
                cells.append(str(v))
        buf.write(",".join(cells) + "\n")
    return buf.getvalue()


# ----------------------------------------------------------------------------
# Command runners (config dict in, artifact dict out)
# ----------------------------------------------------------------------------

def _parse_t_grid(spec: str):
    if spec == "default":
        return list(intervals.DEFAULT_T_GRID)
    return [float(x) for x in spec.split(",") if x.strip()]


def _law_artifact(config: dict, report: intervals.LawReport) -> dict:
    return {
        "command": config["command"],
        "config": config,
        "summary": {
            "count": report.count,
            "sup_error": report.sup_error,
        },
        "records": report.records(),
    }


def run_sieve(config: dict) -> dict:
    limit = int(config["limit"])
    if limit > 10**7:
        raise CapacityError("sieve table emission capped at 1e7")
    sieve = arith.build_sieve(limit)
    rows = []
    for n in range(2, limit + 1):
        fac = arith.factorize(n, sieve)
        tau = 1
        for _, e in fac:
            tau *= e + 1
        mu = 0 if any(e > 1 for _, e in fac) else (-1) ** len(fac)
        rows.append(
            {
                "n": n,
                "spf": int(sieve.spf[n]),
                "tau": tau,
                "mu": mu,
                "squarefull": int(all(e >= 2 for _, e in fac)),
                "two_squares": int(arith.is_sum_two_squares(n, sieve)),
            }
        )
    return {"command": "sieve", "config": config, "records": rows}


def run_ddt(config: dict) -> dict:
    report = intervals.ddt_mean(int(config["x"]), tuple(config["t_grid"]))
    return _law_artifact(config, report)


def run_beta(config: dict) -> dict:
    indicator = config["indicator"]
    kappa1 = 2.0 if indicator == "squarefull" else 1.0
    spec = intervals.IntervalSpec(
        x=int(config["x"]), theta=float(config["theta"]), kappa1=kappa1
    )
    report = intervals.weighted_fn_mean(indicator, spec, tuple(config["t_grid"]))
    return _law_artifact(config, report)


def run_count(config: dict) -> dict:
    indicator = config["indicator"]
    lo, hi = int(config["lo"]), int(config["hi"])
    if indicator == "squarefull":
        count = len(intervals.enumerate_squarefull(lo, hi))
    elif indicator == "two_squares":
        count = intervals.count_two_squares(lo, hi)
    else:
        raise DomainError(f"unknown indicator {indicator!r}")
    return {
        "command": "count",
        "config": config,
        "records": [{"indicator": indicator, "lo": lo, "hi": hi, "count": count}],
    }


def _app_spec(config: dict) -> sdexpand.SeriesSpec:
    app = config["app"]
    if app == "squarefull":
        return sdexpand.squarefull_series_spec()
    if app == "two_squares":
        return sdexpand.two_squares_series_spec(int(config.get("prime_limit", 10**5)))
    raise DomainError(f"unknown application {app!r}")


def run_expand(config: dict) -> dict:
    spec = _app_spec(config)
    coeffs = sdexpand.expansion_coeffs(spec, order=int(config["order"]))
    return {
        "command": "expand",
        "config": config,
        "spec": spec.describe(),
        "lambda0_closed_form": _c2l(sdexpand.lambda0_closed_form(spec)),
        "records": coeffs.records(),
    }


def _c2l(z: complex) -> list:
    return [z.real, z.imag]


def run_main_term(config: dict) -> dict:
    spec = _app_spec(config)
    x = float(config["x"])
    y = x ** float(config["theta"])
    order = int(config["order"])
    coeffs = sdexpand.expansion_coeffs(spec, order=max(order, 4))
    result = sdexpand.main_term(spec, x, y, order, coeffs=coeffs)
    return {
        "command": "main_term",
        "config": config,
        "spec": spec.describe(),
        "records": [
            {
                "x": x,
                "y": y,
                "order": order,
                "value_re": result.value.real,
                "value_im": result.value.imag,
                "y_prime": result.y_prime,
                "envelope": result.envelope,
                "envelope_label": result.envelope_label,
            }
        ],
    }


def run_contour(config: dict) -> dict:
    cfg = contourlab.ContourConfig(
        T=float(config["T"]),
        epsilon=float(config["epsilon"]),
        C0=float(config["C0"]),
        c0=float(config["c0"]),
        Aprime=int(config["Aprime"]),
        psi=float(config["psi"]),
        eta=float(config["eta"]),
        grid_density=int(config["grid_density"]),
        nj_cap=int(config["nj_cap"]),
    )
    spec = sdexpand.SeriesSpec(
        kappa=arith.KappaVector((1.0,)),
        z=(1.0 + 0j,),
        w=(1.0 + 0j,),
        chis=(arith.quadratic_character(int(config["chi_modulus"])),),
        name="contour",
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        report = contourlab.contour_report(cfg, spec)
    report["command"] = "contour"
    report["config"] = config
    return report


def run_bombieri(config: dict) -> dict:
    rng = random.Random(int(config["seed"]))
    instances = int(config["instances"])
    max_n = int(config["max_n"])
    max_set = int(config["max_set"])
    sigma_min = float(config["sigma_min"])
    violations = 0
    for _ in range(instances):
        n = rng.randint(1, max_n)
        a = [complex(rng.gauss(0, 1), rng.gauss(0, 1)) for _ in range(n)]
        npts = rng.randint(1, max_set)
        pts = [
            complex(sigma_min + rng.random(), (rng.random() - 0.5) * 100.0)
            for _ in range(npts)
        ]
        if not contourlab.bombieri_check(pts, a):
            violations += 1
    return {
        "command": "bombieri",
        "config": config,
        "records": [
            {
                "instances": instances,
                "violations": violations,
                "all_hold": violations == 0,
            }
        ],
    }


COMMANDS = {
    "sieve": run_sieve,
    "ddt": run_ddt,
    "beta": run_beta,
    "count": run_count,
    "main_term": run_main_term,
    "expand": run_expand,
    "contour": run_contour,
    "bombieri": run_bombieri,
}

_CSV_FIELDS = {
    "sieve": ("n", "spf", "tau", "mu", "squarefull", "two_squares"),
    "ddt": intervals.RECORD_FIELDS,
    "beta": intervals.RECORD_FIELDS,
    "count": ("indicator", "lo", "hi", "count"),
    "expand": ("ell", "g_re", "g_im", "lambda_re", "lambda_im"),
    "main_term": (
        "x",
        "y",
        "order",
        "value_re",
        "value_im",
        "y_prime",
        "envelope",
        "envelope_label",
    ),
}


def run_command(config: dict) -> dict:
    return COMMANDS[config["command"]](config)


def _emit(artifact: dict, config: dict, out_path: str | None) -> bytes:
    if config["format"] == "json":
        text = render_json(artifact)
    else:
        fields = _CSV_FIELDS.get(config["command"])
        if fields is None:
            raise DomainError(
                f"command {config['command']!r} has no CSV representation"
            )
        text = render_csv(fields, artifact["records"])
    data = text.encode()
    if out_path and out_path != "-":
        with open(out_path, "wb") as fh:
            fh.write(data)
    else:
        sys.stdout.write(text)
    return data


# ----------------------------------------------------------------------------
# Argument parsing
# ----------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="sdlab",
        description="Short-interval arithmetic statistics toolkit",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--output", default="-", help="output path, '-' = stdout")
        sp.add_argument("--format", choices=("json", "csv"), default="json")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument(
            "--golden", default=None, help="byte-compare the artifact to this file"
        )

    sp = sub.add_parser("sieve", help="factor table with indicator columns")
    sp.add_argument("--limit", type=int, required=True)
    common(sp)

    sp = sub.add_parser("ddt", help="Cesaro mean of F_n against the arcsine law")
    sp.add_argument("--x", type=float, required=True)
    sp.add_argument("--t-grid", default="default")
    common(sp)

    sp = sub.add_parser("beta", help="indicator-weighted F_n means vs beta law")
    sp.add_argument("--indicator", choices=("squarefull", "two_squares"), required=True)
    sp.add_argument("--x", type=float, required=True)
    sp.add_argument("--theta", type=float, required=True)
    sp.add_argument("--t-grid", default="default")
    common(sp)

    sp = sub.add_parser("count", help="exact indicator counts in a window")
    sp.add_argument("--indicator", choices=("squarefull", "two_squares"), required=True)
    sp.add_argument("--lo", type=float, required=True)
    sp.add_argument("--hi", type=float, required=True)
    common(sp)

    sp = sub.add_parser("main-term", help="predicted short-interval main term")
    sp.add_argument("--app", choices=("squarefull", "two_squares"), required=True)
    sp.add_argument("--x", type=float, required=True)
    sp.add_argument("--theta", type=float, required=True)
    sp.add_argument("--order", type=int, default=0)
    sp.add_argument("--prime-limit", type=int, default=10**5)
    common(sp)

    sp = sub.add_parser("expand", help="expansion coefficient table")
    sp.add_argument("--app", choices=("squarefull", "two_squares"), required=True)
    sp.add_argument("--order", type=int, default=8)
    sp.add_argument("--prime-limit", type=int, default=10**5)
    common(sp)

    sp = sub.add_parser("contour", help="box grid, classes, contour, envelopes")
    sp.add_argument("--T", type=float, required=True)
    sp.add_argument("--epsilon", type=float, default=0.05)
    sp.add_argument("--C0", type=float, default=1.0)
    sp.add_argument("--c0", type=float, default=1.0)
    sp.add_argument("--aprime", type=int, default=10)
    sp.add_argument("--psi", type=float, default=2.4)
    sp.add_argument("--eta", type=float, default=9.0)
    sp.add_argument("--grid-density", type=int, default=8)
    sp.add_argument("--nj-cap", type=int, default=10**6)
    sp.add_argument("--chi-modulus", type=int, default=4)
    common(sp)

    sp = sub.add_parser("bombieri", help="randomized mean-value inequality check")
    sp.add_argument("--instances", type=int, default=1000)
    sp.add_argument("--max-n", type=int, default=50)
    sp.add_argument("--max-set", type=int, default=10)
    sp.add_argument("--sigma-min", type=float, default=1.2)
    common(sp)

    sp = sub.add_parser("verify", help="re-run a golden artifact's config and diff")
    sp.add_argument("--golden", required=True)
    return p


def _config_from_args(args) -> dict:
    cmd = args.command.replace("-", "_")
    config = {
        "command": cmd,
        "format": args.format,
        "seed": args.seed,
    }
    if cmd == "sieve":
        config["limit"] = args.limit
    elif cmd == "ddt":
        config["x"] = int(args.x)
        config["t_grid"] = _parse_t_grid(args.t_grid)
    elif cmd == "beta":
        config["indicator"] = args.indicator
        config["x"] = int(args.x)
        config["theta"] = args.theta
        config["t_grid"] = _parse_t_grid(args.t_grid)
    elif cmd == "count":
        config["indicator"] = args.indicator
        config["lo"] = int(args.lo)
        config["hi"] = int(args.hi)
    elif cmd == "main_term":
        config["app"] = args.app
        config["x"] = args.x
        config["theta"] = args.theta
        config["order"] = args.order
        config["prime_limit"] = args.prime_limit
    elif cmd == "expand":
        config["app"] = args.app
        config["order"] = args.order
        config["prime_limit"] = args.prime_limit
    elif cmd == "contour":
        config.update(
            T=args.T,
            epsilon=args.epsilon,
            C0=args.C0,
            c0=args.c0,
            Aprime=args.aprime,
            psi=args.psi,
            eta=args.eta,
            grid_density=args.grid_density,
            nj_cap=args.nj_cap,
            chi_modulus=args.chi_modulus,
        )
    elif cmd == "bombieri":
        config.update(
            instances=args.instances,
            max_n=args.max_n,
            max_set=args.max_set,
            sigma_min=args.sigma_min,
        )
    return config


def _parse_golden(path: str) -> dict:
    import json

    with open(path, "rb") as fh:
        return json.loads(fh.read().decode())


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_VALIDATION if exc.code else EXIT_OK
    try:
        if args.command == "verify":
            golden = _parse_golden(args.golden)
            config = golden["config"]
            artifact = run_command(config)
            produced = render_json(artifact).encode()
            with open(args.golden, "rb") as fh:
                expected = fh.read()
            if produced != expected:
                sys.stderr.write("golden mismatch\n")
                return EXIT_GOLDEN
            sys.stdout.write("golden match\n")
            return EXIT_OK
        config = _config_from_args(args)
        artifact = run_command(config)
        produced = _emit(artifact, config, args.output)
        if args.golden:
            with open(args.golden, "rb") as fh:
                expected = fh.read()
            if produced != expected:
                sys.stderr.write("golden mismatch\n")
                return EXIT_GOLDEN
        return EXIT_OK
    except AccuracyError as exc:
        sys.stderr.write(f"accuracy error: {exc}\n")
        return EXIT_ACCURACY
    except (ToolkitError, ValueError, OSError, KeyError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
