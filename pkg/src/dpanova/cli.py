"""Command-line front end: ``dpanova {analyze,power,nulldist,synth}``.

Exit status is 0 on success, 2 on bad input or flags, 1 on internal errors.

A fixed ``--seed`` makes the privacy noise reproducible. That is what you
want in tests, and it is unsafe on real sensitive data, where a reused seed
reuses the noise. Leave ``--seed`` off in that case: an entropy seed is drawn
and echoed in the report. Each ``analyze`` run spends the epsilon it reports,
and the tool keeps no record across runs.
"""
import argparse
import csv
import io
import json
import math
import secrets
import sys
import traceback

from . import __version__
from . import rng as _rng
from .anova import Dataset, validate_dataset
from .errors import DPAnovaError, InvalidParameter, MalformedHeader, MalformedRow
from .mechanism import PrivacyParams, PrivateAnovaResult, parse_epsilon, private_anova
from .nulldist import DEFAULT_SIMS, p_value_for_result
from .sim import (
    PRESETS,
    TRUNCATION_MODE,
    EffectSpec,
    PowerConfig,
    VarianceMode,
    default_n_grid,
    export_null_comparison,
    generate_dataset,
    power_curve,
    tail_fraction,
)

REPORT_KEYS = ("ssa_hat", "sse_hat", "f_hat", "p_value", "sigma2_used", "epsilon",
               "n", "k", "null_sims", "seed", "tool_version")


def parse_csv(stream) -> Dataset:
    """Read a ``group,value`` CSV from a byte or text stream."""
    data = stream.read()
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8-sig")
        except UnicodeDecodeError as exc:
            raise MalformedHeader(f"input is not UTF-8: {exc}") from None
    reader = csv.reader(io.StringIO(data))
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != ["group", "value"]:
        raise MalformedHeader(f"expected header 'group,value', got {header!r}")
    rows = []
    for record in reader:
        line = reader.line_num
        if not record or record == [""]:
            continue
        if len(record) != 2:
            raise MalformedRow(line, f"expected 2 fields, got {len(record)}")
        label, value = record
        if not label:
            raise MalformedRow(line, "empty group label")
        try:
            rows.append((label, float(value)))
        except ValueError:
            raise MalformedRow(line, f"value {value!r} is not a number") from None
    return validate_dataset(rows)


def format_float(x: float) -> str:
    """Shortest round-trip decimal, with ``inf``/``-inf`` spelled out."""
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(float(x))


def _epsilon_json(eps: float):
    return "inf" if math.isinf(eps) else eps


def _float_list(text, what):
    items = [t.strip() for t in text.split(",") if t.strip()]
    if not items:
        raise InvalidParameter(f"{what} is empty")
    try:
        return [float(t) for t in items]
    except ValueError:
        raise InvalidParameter(f"{what} must be comma-separated numbers, got {text!r}") from None


def _int_list(text, what):
    items = [t.strip() for t in text.split(",") if t.strip()]
    if not items:
        raise InvalidParameter(f"{what} is empty")
    out = []
    for t in items:
        try:
            out.append(int(float(t)) if float(t).is_integer() else int(t))
        except ValueError:
            raise InvalidParameter(f"{what} must be comma-separated integers, got {text!r}") from None
    return out


def _epsilon_list(text):
    items = [t.strip() for t in text.split(",") if t.strip()]
    if not items:
        raise InvalidParameter("epsilon list is empty")
    return [parse_epsilon(t) for t in items]


def _effect(args) -> EffectSpec:
    if args.preset and (args.means or args.sd is not None):
        raise InvalidParameter("use either --preset or --means/--sd, not both")
    if args.preset:
        return PRESETS[args.preset]
    if not args.means or args.sd is None:
        raise InvalidParameter("give --preset, or both --means and --sd")
    return EffectSpec(tuple(_float_list(args.means, "--means")), args.sd)


def _open_out(path):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w", newline="", encoding="utf-8"), True


def _positive(value, flag):
    if value < 1:
        raise InvalidParameter(f"{flag} must be at least 1, got {value}")


def cmd_analyze(args) -> dict:
    if args.input is None or args.input == "-":
        dataset = parse_csv(sys.stdin.buffer)
    else:
        with open(args.input, "rb") as fh:
            dataset = parse_csv(fh)
    params = PrivacyParams(parse_epsilon(args.epsilon))
    _positive(args.null_sims, "--null-sims")
    if args.expected_k is not None and dataset.k != args.expected_k:
        raise InvalidParameter(f"data has k={dataset.k} groups, expected {args.expected_k}")
    seed = args.seed if args.seed is not None else secrets.randbits(63)

    release = private_anova(dataset, params, _rng.substream(_rng.stream_key(seed, 0), 0))
    del dataset  # everything below is post-processing of the release
    pv = p_value_for_result(release, args.null_sims, _rng.stream_key(seed, 1),
                            workers=args.workers)
    report = {
        "ssa_hat": release.ssa_hat,
        "sse_hat": release.sse_hat,
        "f_hat": release.f_hat,
        "p_value": pv.p,
        "sigma2_used": pv.sigma2_used,
        "epsilon": _epsilon_json(release.epsilon),
        "n": release.n,
        "k": release.k,
        "null_sims": pv.sims,
        "seed": seed,
        "tool_version": __version__,
    }
    sys.stdout.write(json.dumps(report) + "\n")
    return report


def report_release(report: dict) -> PrivateAnovaResult:
    """Rebuild the released result from a parsed report."""
    eps = math.inf if report["epsilon"] == "inf" else float(report["epsilon"])
    n, k = int(report["n"]), int(report["k"])
    f_hat = PrivateAnovaResult.assemble_f(report["ssa_hat"], report["sse_hat"], n, k)
    return PrivateAnovaResult(report["ssa_hat"], report["sse_hat"], f_hat, eps, n, k)


def cmd_power(args):
    effect = _effect(args)
    if args.n_grid is None:
        n_grid = default_n_grid(effect.k)
    else:
        n_grid = _int_list(args.n_grid, "--n-grid")
    cfg = PowerConfig(
        effect=effect,
        n_grid=tuple(n_grid),
        epsilons=tuple(_epsilon_list(args.epsilons)),
        reps=args.reps,
        alpha=args.alpha,
        null_sims=args.null_sims,
        variance_mode=VarianceMode.parse(args.variance_mode),
        seed=args.seed,
    )

    def progress(pt):
        if args.verbose:
            print(f"n={pt.n} epsilon={format_float(pt.epsilon)} power={pt.power}",
                  file=sys.stderr)

    points = power_curve(cfg, workers=args.workers, progress=progress)
    out, close = _open_out(args.out)
    try:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["n", "epsilon", "reps", "power"])
        for pt in points:
            writer.writerow([pt.n, format_float(pt.epsilon), pt.reps, format_float(pt.power)])
    finally:
        if close:
            out.close()
    if args.meta:
        meta = {
            "means": list(effect.group_means),
            "sd": effect.group_sd,
            "truncation": TRUNCATION_MODE,
            "alpha": cfg.alpha,
            "null_sims": cfg.null_sims,
            "variance_mode": str(cfg.variance_mode),
            "seed": cfg.seed,
            "tool_version": __version__,
        }
        with open(args.meta, "w", encoding="utf-8") as fh:
            json.dump(meta, fh, indent=2)
            fh.write("\n")
    return points


def cmd_nulldist(args):
    _positive(args.sims, "--sims")
    table = export_null_comparison(args.n, args.k, args.sigma2, _epsilon_list(args.epsilons),
                                   args.sims, args.seed, workers=args.workers)
    out, close = _open_out(args.out)
    try:
        out.write("epsilon,f_hat\n")
        for eps, draws in table:
            tag = format_float(eps)
            out.write("".join(f"{tag},{format_float(x)}\n" for x in draws))
    finally:
        if close:
            out.close()
    summary = []
    if args.threshold is not None:
        for eps, draws in table:
            frac = tail_fraction(draws, args.threshold)
            summary.append((eps, frac))
            print(f"summary epsilon={format_float(eps)} threshold={format_float(args.threshold)} "
                  f"fraction={format_float(frac)}", file=sys.stderr)
    return summary


def cmd_synth(args):
    effect = _effect(args)
    stream = _rng.substream(_rng.stream_key(args.seed, 2), 0)
    dataset = generate_dataset(effect, args.n, stream)
    out, close = _open_out(args.out)
    try:
        out.write("group,value\n")
        for label, value in dataset.rows():
            out.write(f"{label},{value:.17g}\n")
    finally:
        if close:
            out.close()
    return dataset


def _add_effect_flags(p):
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--means", help="comma-separated group means in [0,1]")
    p.add_argument("--sd", type=float, help="common group standard deviation")


def _add_workers(p):
    p.add_argument("--workers", type=int, default=1,
                   help="threads for Monte-Carlo work; output does not depend on it")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dpanova", description="Differentially private one-way ANOVA.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="private F test on a group,value CSV")
    p.add_argument("--input", help="CSV path (default: stdin)")
    p.add_argument("--epsilon", required=True, help="privacy parameter, or 'inf'")
    p.add_argument("--seed", type=int, help="noise seed; omit on real data")
    p.add_argument("--null-sims", type=int, default=DEFAULT_SIMS)
    p.add_argument("--expected-k", type=int, help="fail unless the data has this many groups")
    _add_workers(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("power", help="power table over an (n, epsilon) grid")
    _add_effect_flags(p)
    p.add_argument("--n-grid", help="comma-separated sizes (default: 10..1e6 log grid)")
    p.add_argument("--epsilons", default="inf,1,0.1,0.01")
    p.add_argument("--reps", type=int, default=1000)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--null-sims", type=int, default=DEFAULT_SIMS)
    p.add_argument("--variance-mode", default="estimated", help="'estimated' or 'known:FLOAT'")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.add_argument("--meta", help="write run metadata as JSON to this path")
    p.add_argument("-v", "--verbose", action="store_true")
    _add_workers(p)
    p.set_defaults(func=cmd_power)

    p = sub.add_parser("nulldist", help="null F-hat samples per epsilon")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--sigma2", type=float, required=True)
    p.add_argument("--epsilons", required=True)
    p.add_argument("--sims", type=int, default=DEFAULT_SIMS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threshold", type=float,
                   help="print the share of draws >= this value per epsilon (stderr)")
    p.add_argument("--out", help="CSV path (default: stdout)")
    _add_workers(p)
    p.set_defaults(func=cmd_nulldist)

    p = sub.add_parser("synth", help="synthetic group,value CSV")
    _add_effect_flags(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.func(args)
    except DPAnovaError as exc:
        print(f"dpanova: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"dpanova: error: {exc}", file=sys.stderr)
        return 2
    except Exception:  # noqa: BLE001
        traceback.print_exc()
        return 1
    sys.stdout.flush()
    return 0


if __name__ == "__main__":
    sys.exit(main())
