"""Experiment driver: subcommands, seeded parallel execution, CSV/JSON output.

Every output CSV starts with metadata lines

    # supoly=<version>
    # generator=philox4x64
    # config=<canonical JSON of the run configuration>

followed by a fixed header row.  The config line alone is enough to
regenerate the file byte-for-byte (wall-clock lives only in the JSON
summary).  Files are written to `<name>.partial` and renamed into place on
success, so an interrupted run never leaves a truncated final file.

Exit status: 0 success, 2 configuration error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .ensemble import (
    GENERATOR_ID,
    MEASUREMENT_OFFSET,
    EnsembleSpec,
    SUPolynomial,
    evaluate_normalized,
    sample_trial,
    trial_stream,
    write_coefficient_dump,
)
from .errors import SupolyError
from .holes import (
    _fit_line,
    deviation_counts,
    fit_decay_exponent,
    fit_omega_exponent,
    hole_hits,
    omega_lower_bound,
)
from .mobius import (
    build_basis_transform,
    shifted_value_normalized,
    transform_coefficients,
    unitarity_defect,
)
from .zeros import counting_jensen, expected_counting, roots_m1, sphere_log_average

_ENV_OUTPUT_DIR = "SUPOLY_OUTPUT_DIR"


def _f17(x: float) -> str:
    return f"{float(x):.17g}"


def _json_17g(obj) -> str:
    """Canonical JSON with floats at 17 significant digits."""
    if isinstance(obj, dict):
        items = sorted(obj.items())
        return "{" + ",".join(f"{json.dumps(k)}:{_json_17g(v)}" for k, v in items) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(_json_17g(v) for v in obj) + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        return _f17(obj)
    if isinstance(obj, (int, str)):
        return json.dumps(obj)
    raise TypeError(f"unserializable value: {obj!r}")


def _config_json(config: dict) -> str:
    """Compact, sorted, round-trippable config echo for the CSV header."""
    return json.dumps(config, sort_keys=True, separators=(",", ":"))


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return _f17(v)
    return str(v)


def _write_atomic(path: str, text: str) -> None:
    partial = path + ".partial"
    with open(partial, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(partial, path)


def _write_csv(path: str, config: dict, header: list, rows: list) -> None:
    lines = [
        f"# supoly={__version__}",
        f"# generator={GENERATOR_ID}",
        f"# config={_config_json(config)}",
        ",".join(header),
    ]
    lines.extend(",".join(_cell(v) for v in row) for row in rows)
    _write_atomic(path, "\n".join(lines) + "\n")


def _write_json(path: str, payload: dict) -> None:
    _write_atomic(path, _json_17g(payload) + "\n")


def _output_path(args, default_name: str) -> str:
    if args.output:
        return args.output
    base = os.environ.get(_ENV_OUTPUT_DIR, ".")
    return os.path.join(base, default_name)


def _parse_n_list(text: str) -> list:
    """`a:b:step` inclusive range, comma list, or a single integer."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"N-list must be a:b:step, got {text!r}")
        a, b, step = (int(p) for p in parts)
        if step <= 0 or b < a:
            raise ValueError(f"bad N-list range {text!r}")
        return list(range(a, b + 1, step))
    if "," in text:
        return [int(p) for p in text.split(",") if p != ""]
    return [int(text)]


def _parse_r_list(text: str) -> list:
    return [float(p) for p in text.split(",") if p != ""]


def _chunks(total: int, threads: int):
    chunk = max(1, math.ceil(total / max(1, 4 * threads)))
    return [(s, min(chunk, total - s)) for s in range(0, total, chunk)]


def _map_chunks(total: int, threads: int, worker):
    """Apply worker(start, count) over trial chunks; ordered results.

    Per-trial streams make every worker result independent of the
    partition, so the thread count never changes the merged output.
    """
    parts = _chunks(total, threads)
    if threads <= 1:
        return [worker(s, n) for s, n in parts]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        futs = [ex.submit(worker, s, n) for s, n in parts]
        return [f.result() for f in futs]


def _add_common(p, *, trials=None, needs_r=False):
    p.add_argument("--m", type=int, default=1, help="number of complex variables")
    p.add_argument("--N", type=str, default=None, help="degree, or a:b:step sweep")
    p.add_argument("--seed", type=int, default=0, help="64-bit master seed")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    p.add_argument("--output", type=str, default=None, help="output file path")
    if needs_r:
        p.add_argument("--r", type=str, default="1.0", help="radius, or comma list")
    if trials is not None:
        p.add_argument("--trials", type=int, default=trials)


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="supoly",
        description="Experiments on Gaussian SU(m+1) polynomial ensembles.",
    )
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("sample", help="write a coefficient dump for trial 0")
    _add_common(p)

    p = sub.add_parser("roots", help="roots of the trial-0 polynomial (m=1)")
    _add_common(p)

    p = sub.add_parser("counting", help="per-trial zero counts, exact and Jensen")
    _add_common(p, trials=100, needs_r=True)
    p.add_argument("--samples", type=int, default=10_000,
                   help="sphere samples per Jensen average; 0 skips Jensen")
    p.add_argument("--kappa", type=float, default=1.05)

    p = sub.add_parser("sphere-avg", help="sphere averages of log |psi|")
    _add_common(p, trials=1, needs_r=True)
    p.add_argument("--samples", type=int, default=10_000)

    p = sub.add_parser("hole-mc", help="Monte Carlo hole probabilities")
    _add_common(p, trials=10_000, needs_r=True)
    p.add_argument("--N-list", dest="n_list", type=str, default=None,
                   help="a:b:step sweep (alias for --N)")

    p = sub.add_parser("omega-bound", help="exact certificate lower bounds")
    _add_common(p, needs_r=True)
    p.add_argument("--N-list", dest="n_list", type=str, default=None)
    p.add_argument("--fit", action="store_true",
                   help="fit the decay exponent over the N sweep")

    p = sub.add_parser("fit-exponent", help="hole-MC sweep over N plus decay fit")
    _add_common(p, trials=10_000, needs_r=True)
    p.add_argument("--N-list", dest="n_list", type=str, default=None)

    p = sub.add_parser("deviation", help="counting-deviation frequencies")
    _add_common(p, trials=10_000, needs_r=True)
    p.add_argument("--N-list", dest="n_list", type=str, default=None)
    p.add_argument("--Delta", dest="delta", type=float, default=0.2)

    p = sub.add_parser("invariance-check", help="basis-transform invariance report")
    _add_common(p, trials=100)
    p.add_argument("--zeta", type=str, default="0.3j", help="complex parameter")
    p.add_argument("--samples", type=int, default=100,
                   help="random points for the pointwise identity")

    p = sub.add_parser("fit-report", help="decay fit from an existing points CSV")
    p.add_argument("points_file", type=str)

    return ap


def _resolve_n_values(args) -> list:
    text = getattr(args, "n_list", None) or args.N
    if text is None:
        raise ValueError("--N (or --N-list) is required")
    values = _parse_n_list(text)
    if sorted(set(values)) != values:
        raise ValueError("N values must be strictly increasing")
    return values


def _spec(args, n: int) -> EnsembleSpec:
    return EnsembleSpec(m=args.m, N=n, seed=args.seed)


def _cmd_sample(args) -> int:
    ns = _resolve_n_values(args)
    if len(ns) != 1:
        raise ValueError("sample takes a single --N")
    out = _output_path(args, "sample.txt")
    spec = _spec(args, ns[0])
    psi = sample_trial(spec, 0)
    partial = out + ".partial"
    write_coefficient_dump(psi, partial)
    os.replace(partial, out)
    _write_json(out + ".json", {
        "command": "sample", "config": _cfg(args, N=ns[0]),
        "version": __version__, "generator": GENERATOR_ID,
        "path": out, "coefficients": spec.dimension,
    })
    return 0


def _cmd_roots(args) -> int:
    ns = _resolve_n_values(args)
    if len(ns) != 1:
        raise ValueError("roots takes a single --N")
    config = _cfg(args, N=ns[0])
    spec = _spec(args, ns[0])
    rs = roots_m1(sample_trial(spec, 0))
    out = _output_path(args, "roots.csv")
    rows = [
        (i, z.real, z.imag, abs(z), res)
        for i, (z, res) in enumerate(zip(rs.roots, rs.residuals))
    ]
    _write_csv(out, config, ["index", "re", "im", "abs", "residual"], rows)
    _write_json(out + ".json", {
        "command": "roots", "config": config, "version": __version__,
        "generator": GENERATOR_ID, "n_roots": len(rs.roots),
        "degree_deficit": rs.degree_deficit,
        "max_residual": float(rs.residuals.max()) if len(rs.roots) else 0.0,
    })
    return 0


def _cmd_counting(args) -> int:
    ns = _resolve_n_values(args)
    rs = _parse_r_list(args.r)
    if len(ns) != 1 or len(rs) != 1:
        raise ValueError("counting takes a single --N and a single --r")
    n, r = ns[0], rs[0]
    if args.trials < 1:
        raise ValueError("--trials must be >= 1")
    config = _cfg(args, N=n, r=r)
    spec = _spec(args, n)
    use_exact = args.m == 1
    use_jensen = args.samples > 0

    def worker(start, count):
        exact = deviation_counts(spec, r, start, count) if use_exact else None
        out = []
        for i in range(count):
            t = start + i
            nj = se = None
            if use_jensen:
                est = counting_jensen(
                    sample_trial(spec, t), r, args.kappa, args.samples,
                    trial_stream(args.seed, t, offset=MEASUREMENT_OFFSET),
                )
                nj, se = est.value, est.stat_error
            ne = int(exact[i]) if use_exact else None
            out.append((args.m, n, r, t, ne, nj, se, args.kappa))
        return out

    rows = [row for part in _map_chunks(args.trials, args.threads, worker) for row in part]
    out = _output_path(args, "counting.csv")
    _write_csv(out, config,
               ["m", "N", "r", "trial", "n_exact", "n_jensen", "stat_error", "kappa"],
               rows)
    summary = {
        "command": "counting", "config": config, "version": __version__,
        "generator": GENERATOR_ID, "rows": len(rows),
        "expected_counting": expected_counting(n, r),
    }
    if use_exact:
        summary["mean_n_exact"] = float(np.mean([row[4] for row in rows]))
    if use_jensen:
        summary["mean_n_jensen"] = float(np.mean([row[5] for row in rows]))
    summary["wall_clock_s"] = _elapsed()
    _write_json(out + ".json", summary)
    return 0


def _cmd_sphere_avg(args) -> int:
    ns = _resolve_n_values(args)
    radii = _parse_r_list(args.r)
    if len(ns) != 1:
        raise ValueError("sphere-avg takes a single --N")
    n = ns[0]
    config = _cfg(args, N=n, r_list=radii)
    spec = _spec(args, n)
    rows = []
    for t in range(args.trials):
        psi = sample_trial(spec, t)
        stream = trial_stream(args.seed, t, offset=MEASUREMENT_OFFSET)
        for r in radii:
            sa = sphere_log_average(psi, r, args.samples, stream)
            rows.append((args.m, n, r, t, sa.samples, sa.mean_log_abs, sa.stderr))
    out = _output_path(args, "sphere-avg.csv")
    _write_csv(out, config,
               ["m", "N", "r", "trial", "samples", "mean_log_abs", "stderr"], rows)
    _write_json(out + ".json", {
        "command": "sphere-avg", "config": config, "version": __version__,
        "generator": GENERATOR_ID, "rows": len(rows), "wall_clock_s": _elapsed(),
    })
    return 0


def _hole_rows(args, ns, radii):
    rows = []
    for n in ns:
        spec = _spec(args, n)
        for r in radii:
            hits = sum(_map_chunks(
                args.trials, args.threads,
                lambda s, c, spec=spec, r=r: hole_hits(spec, r, s, c),
            ))
            p = hits / args.trials
            se = math.sqrt(p * (1.0 - p) / args.trials)
            rows.append((args.m, n, r, args.trials, hits, p, se))
    return rows


def _cmd_hole_mc(args) -> int:
    ns = _resolve_n_values(args)
    radii = _parse_r_list(args.r)
    if args.trials < 1:
        raise ValueError("--trials must be >= 1")
    config = _cfg(args, N_list=ns, r_list=radii)
    rows = _hole_rows(args, ns, radii)
    out = _output_path(args, "hole-mc.csv")
    _write_csv(out, config,
               ["m", "N", "r", "trials", "hits", "p_hat", "stderr"], rows)
    _write_json(out + ".json", {
        "command": "hole-mc", "config": config, "version": __version__,
        "generator": GENERATOR_ID,
        "estimates": [
            {"m": m, "N": n, "r": r, "trials": tr, "hits": h,
             "p_hat": p, "stderr": se}
            for m, n, r, tr, h, p, se in rows
        ],
        "wall_clock_s": _elapsed(),
    })
    return 0


def _cmd_omega_bound(args) -> int:
    ns = _resolve_n_values(args)
    radii = _parse_r_list(args.r)
    if len(radii) != 1:
        raise ValueError("omega-bound takes a single --r")
    r = radii[0]
    config = _cfg(args, N_list=ns, r=r, fit=args.fit)
    bounds = [omega_lower_bound(_spec(args, n), r) for n in ns]
    rows = [(args.m, b.spec.N, r, b.log_prob) for b in bounds]
    for _, n, rr, lp in rows:
        print(f"{args.m} {n} {_f17(rr)} {_f17(lp)}")
    out = _output_path(args, "omega-bound.csv")
    _write_csv(out, config, ["m", "N", "r", "log_prob"], rows)
    summary = {
        "command": "omega-bound", "config": config, "version": __version__,
        "generator": GENERATOR_ID,
        "bounds": [{"m": args.m, "N": n, "r": rr, "log_prob": lp}
                   for _, n, rr, lp in rows],
    }
    if args.fit:
        fit = fit_omega_exponent(bounds)
        summary["fit"] = {
            "beta": fit.beta, "log_c": fit.log_c,
            "residual_rms": fit.residual_rms,
            "reference_exponent": args.m + 1,
        }
    summary["wall_clock_s"] = _elapsed()
    _write_json(out + ".json", summary)
    return 0


def _cmd_fit_exponent(args) -> int:
    ns = _resolve_n_values(args)
    radii = _parse_r_list(args.r)
    if len(radii) != 1:
        raise ValueError("fit-exponent takes a single --r")
    if len(ns) < 3:
        raise ValueError("fit-exponent needs at least 3 N values")
    config = _cfg(args, N_list=ns, r=radii[0])
    rows = _hole_rows(args, ns, radii)
    out = _output_path(args, "fit-exponent.csv")
    _write_csv(out, config,
               ["m", "N", "r", "trials", "hits", "p_hat", "stderr"], rows)

    points = []
    skipped = []
    for _, n, _, _, _, p, _ in rows:
        if 0.0 < p < 1.0:
            points.append((n, p))
        else:
            skipped.append(n)
            print(f"warning: skipping N={n} with p_hat={p} outside (0,1)",
                  file=sys.stderr)
    if len(points) < 3:
        raise SupolyError(
            f"only {len(points)} usable points after exclusions; need 3"
        )
    fit = fit_decay_exponent(points)
    _write_json(out + ".json", {
        "command": "fit-exponent", "config": config, "version": __version__,
        "generator": GENERATOR_ID,
        "estimates": [
            {"m": m, "N": n, "r": r, "trials": tr, "hits": h,
             "p_hat": p, "stderr": se}
            for m, n, r, tr, h, p, se in rows
        ],
        "skipped_N": skipped,
        "fit": {"beta": fit.beta, "log_c": fit.log_c,
                "residual_rms": fit.residual_rms,
                "reference_exponent": args.m + 1},
        "wall_clock_s": _elapsed(),
    })
    return 0


def _cmd_deviation(args) -> int:
    ns = _resolve_n_values(args)
    radii = _parse_r_list(args.r)
    if len(radii) != 1:
        raise ValueError("deviation takes a single --r")
    r = radii[0]
    if not (0.0 < args.delta < 1.0):
        raise ValueError("--Delta must lie in (0, 1)")
    config = _cfg(args, N_list=ns, r=r, Delta=args.delta)
    rows = []
    for n in ns:
        spec = _spec(args, n)
        mean = expected_counting(n, r)
        parts = _map_chunks(
            args.trials, args.threads,
            lambda s, c, spec=spec: deviation_counts(spec, r, s, c),
        )
        counts = np.concatenate(parts)
        viol = int((np.abs(counts - mean) > args.delta * n).sum())
        rows.append((args.m, n, r, args.delta, args.trials, viol,
                     viol / args.trials))
    out = _output_path(args, "deviation.csv")
    _write_csv(out, config,
               ["m", "N", "r", "Delta", "trials", "violations", "frequency"],
               rows)
    _write_json(out + ".json", {
        "command": "deviation", "config": config, "version": __version__,
        "generator": GENERATOR_ID,
        "frequencies": [{"N": n, "violations": v, "frequency": f}
                        for _, n, _, _, _, v, f in rows],
        "wall_clock_s": _elapsed(),
    })
    return 0


def _cmd_invariance_check(args) -> int:
    ns = _resolve_n_values(args)
    if len(ns) != 1:
        raise ValueError("invariance-check takes a single --N")
    n = ns[0]
    try:
        zeta = complex(args.zeta.strip())
    except ValueError as exc:
        raise ValueError(f"cannot parse --zeta {args.zeta!r}") from exc
    config = _cfg(args, N=n, zeta=[zeta.real, zeta.imag])
    spec = _spec(args, n)
    fwd = build_basis_transform(spec, zeta)
    bwd = build_basis_transform(spec, -zeta)
    u_defect = unitarity_defect(fwd)
    comp = bwd.matrix @ fwd.matrix
    comp_defect = float(np.abs(comp - comp[0, 0] * np.eye(spec.dimension)).max())

    stream = trial_stream(args.seed, 0, offset=MEASUREMENT_OFFSET)
    l2_worst = 0.0
    point_worst = 0.0
    for t in range(args.trials):
        g = stream.standard_normal(2 * spec.dimension)
        ap = (g[0::2] + 1j * g[1::2]) * math.sqrt(0.5)
        a = transform_coefficients(fwd, ap)
        l2_worst = max(l2_worst, abs(np.linalg.norm(a) / np.linalg.norm(ap) - 1.0))
    g = stream.standard_normal(2 * spec.dimension)
    ap = (g[0::2] + 1j * g[1::2]) * math.sqrt(0.5)
    psi = SUPolynomial(spec, transform_coefficients(fwd, ap))
    for _ in range(args.samples):
        zpt = stream.standard_normal(2 * spec.m)
        z = zpt[0::2] + 1j * zpt[1::2]
        if spec.m == 1:
            z = complex(z[0])
        lhs = evaluate_normalized(psi, z)
        rhs = shifted_value_normalized(spec, zeta, ap, z)
        point_worst = max(point_worst,
                          abs(lhs - rhs) / max(abs(rhs), 1e-300))
    rows = [(args.m, n, f"{zeta.real:.17g}{zeta.imag:+.17g}j",
             u_defect, comp_defect, l2_worst, point_worst, args.samples)]
    out = _output_path(args, "invariance-check.csv")
    _write_csv(out, config,
               ["m", "N", "zeta", "unitarity_defect", "compose_defect",
                "l2_rel_worst", "pointwise_rel_worst", "points"], rows)
    _write_json(out + ".json", {
        "command": "invariance-check", "config": config,
        "version": __version__, "generator": GENERATOR_ID,
        "unitarity_defect": u_defect, "compose_defect": comp_defect,
        "l2_rel_worst": l2_worst, "pointwise_rel_worst": point_worst,
        "unitary_ok": bool(u_defect < 1e-8),
        "pointwise_ok": bool(point_worst < 1e-8),
        "wall_clock_s": _elapsed(),
    })
    return 0


def _cmd_fit_report(args) -> int:
    """Decay fit from a points CSV: (N, p_hat) rows, or (N, log_prob) rows.

    A log_prob column (certificate output) is fitted without forming
    p = exp(log_prob), so bounds beneath the double-precision floor still
    contribute.  Rows outside the valid domain are skipped with a warning.
    """
    try:
        with open(args.points_file, encoding="utf-8") as fh:
            lines = [ln.rstrip("\n") for ln in fh]
    except OSError as exc:
        raise ValueError(f"cannot read {args.points_file}: {exc}") from exc
    body = [ln for ln in lines if ln and not ln.startswith("#")]
    if not body:
        raise ValueError("points file has no header row")
    header = body[0].split(",")
    if "N" not in header:
        raise ValueError("points file needs an N column")
    n_col = header.index("N")
    p_col = lp_col = None
    if "p_hat" in header:
        p_col = header.index("p_hat")
    elif "p" in header:
        p_col = header.index("p")
    elif "log_prob" in header:
        lp_col = header.index("log_prob")
    else:
        raise ValueError("points file needs a p_hat, p, or log_prob column")
    m_col = header.index("m") if "m" in header else None

    points = []
    log_points = []
    m_seen = None
    for ln in body[1:]:
        parts = ln.split(",")
        if len(parts) != len(header):
            raise ValueError(f"malformed CSV row: {ln!r}")
        n = int(parts[n_col])
        if m_col is not None and m_seen is None:
            m_seen = int(parts[m_col])
        if p_col is not None:
            p = float(parts[p_col])
            if 0.0 < p < 1.0:
                points.append((n, p))
            else:
                print(f"warning: skipping N={n} with p={p} outside (0,1)",
                      file=sys.stderr)
        else:
            lp = float(parts[lp_col])
            if lp < 0.0:
                log_points.append((n, lp))
            else:
                print(f"warning: skipping N={n} with log_prob={lp} >= 0",
                      file=sys.stderr)
    if p_col is not None:
        if len(points) < 3:
            raise ValueError(f"need at least 3 usable rows, got {len(points)}")
        fit = fit_decay_exponent(points)
        beta, log_c, rms = fit.beta, fit.log_c, fit.residual_rms
    else:
        if len(log_points) < 3:
            raise ValueError(f"need at least 3 usable rows, got {len(log_points)}")
        x = np.log([n for n, _ in log_points])
        y = np.log([-lp for _, lp in log_points])
        beta, log_c, rms = _fit_line(x, y)
    ref = (m_seen if m_seen is not None else 1) + 1
    print(f"beta={_f17(beta)}")
    print(f"log_c={_f17(log_c)}")
    print(f"residual_rms={_f17(rms)}")
    print(f"reference_exponent={ref}")
    return 0


def _cfg(args, **extra) -> dict:
    """Config echo for output headers.

    Thread count and output path are deliberately left out: neither affects
    file content (worker results merge in trial order), and including them
    would break byte-identity of reruns under different --threads.
    """
    config = {"command": args.subcommand, "m": args.m, "seed": args.seed}
    for key in ("trials", "samples", "kappa"):
        if hasattr(args, key):
            config[key] = getattr(args, key)
    config.update(extra)
    return config


_T0 = time.monotonic()


def _elapsed() -> float:
    return time.monotonic() - _T0


_DISPATCH = {
    "sample": _cmd_sample,
    "roots": _cmd_roots,
    "counting": _cmd_counting,
    "sphere-avg": _cmd_sphere_avg,
    "hole-mc": _cmd_hole_mc,
    "omega-bound": _cmd_omega_bound,
    "fit-exponent": _cmd_fit_exponent,
    "deviation": _cmd_deviation,
    "invariance-check": _cmd_invariance_check,
    "fit-report": _cmd_fit_report,
}


def config_to_argv(config: dict) -> list:
    """Rebuild a command line from a CSV `# config=` echo."""
    argv = [config["command"]]
    scalar_flags = {
        "m": "--m", "seed": "--seed", "trials": "--trials",
        "samples": "--samples", "kappa": "--kappa", "Delta": "--Delta",
        "N": "--N", "r": "--r",
    }
    for key, flag in scalar_flags.items():
        if key in config:
            argv.extend([flag, repr(config[key])])
    if "N_list" in config:
        ns = config["N_list"]
        if len(ns) == 1:
            argv.extend(["--N", str(ns[0])])
        else:
            argv.extend(["--N-list", ",".join(str(n) for n in ns)])
    if "r_list" in config:
        argv.extend(["--r", ",".join(repr(v) for v in config["r_list"])])
    if "zeta" in config:
        re, im = config["zeta"]
        argv.extend(["--zeta", f"{re!r}{im:+}j"])
    if config.get("fit"):
        argv.append("--fit")
    return argv


def main(argv=None) -> int:
    global _T0
    _T0 = time.monotonic()
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    try:
        return _DISPATCH[args.subcommand](args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SupolyError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
