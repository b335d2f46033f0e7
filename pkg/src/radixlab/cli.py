"""Command-line front end: ``theory``, ``run`` and ``density`` subcommands.

Exit status is 0 on success, 1 on any error (usage errors included) and 2
when a run finished but more than 1% of its trials had to be redrawn.

Result files are byte-identical for identical flags and seed.  Wall-clock
timestamps therefore never go into them; they live in the sidecar
``<out>.manifest.json`` written next to every ``--out`` file.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from typing import Sequence

from . import __version__, rand
from .experiments import ExperimentConfig, ExperimentResult, Kind, density_report, run
from .numsys import InvalidSpec, LogSystemSpec, SystemSpec, parse_system, split_system_list
from .simarith import context_for
from .theory import sig3, ratio_table

REDRAW_LIMIT = 0.01
EXIT_OK, EXIT_ERROR, EXIT_QUALITY = 0, 1, 2


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; here 2 means a quality warning."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


@dataclass
class RunManifest:
    command: list[str]
    config: dict
    seed: int
    generator: str = rand.GENERATOR
    version: str = __version__
    redraws: int = 0
    started: str = ""
    finished: str = ""

    def deterministic(self) -> dict:
        d = asdict(self)
        del d["started"], d["finished"]
        return d


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


# -- number formatting -----------------------------------------------------

def _g(x: float, digits: int) -> str:
    if not math.isfinite(x):
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return f"{x:.{digits}g}"


def _json_float(x: float):
    # 17 significant digits survive the round trip for any double
    return float(_g(float(x), 17)) if math.isfinite(x) else None


def _markdown(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    lines = ["| " + " | ".join(header) + " |", "|" + "|".join("---" for _ in header) + "|"]
    lines += ["| " + " | ".join(r) + " |" for r in rows]
    return "\n".join(lines) + "\n"


def _csv(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


# -- renderers ---------------------------------------------------------------

def render_theory(fmt: str) -> str:
    rows = ratio_table()
    if fmt == "json":
        return _json({"rows": [
            {"k": r.k, "p": r.p, "beta": r.beta, "f1": _json_float(r.f1),
             "f2": _json_float(r.f2), "f1_3sf": sig3(r.f1), "f2_3sf": sig3(r.f2)}
            for r in rows
        ]})
    header = ["k", "p", "beta", "f1", "f2"]
    body = [[str(r.k), str(r.p), str(r.beta), sig3(r.f1), sig3(r.f2)] for r in rows]
    return _markdown(header, body) if fmt == "md" else _csv(header, body)


def render_run(result: ExperimentResult, fmt: str, manifest: RunManifest) -> str:
    specs = {d["name"]: d["spec"] for d in result.config.describe()["systems"]}
    if fmt == "json":
        return _json({
            "manifest": manifest.deterministic(),
            "systems": [
                {"system": s.name, "spec": specs[s.name],
                 "beta": _json_float(s.beta), "se_beta": _json_float(s.se_beta),
                 "gamma": _json_float(s.gamma), "se_gamma": _json_float(s.se_gamma)}
                for s in result.stats
            ],
        })
    if fmt == "md":
        header = ["system", "beta", "gamma", "se_gamma"]
        body = [[s.name, _g(s.beta, 4), _g(s.gamma, 4), _g(s.se_gamma, 2)] for s in result.stats]
        cfg = result.config
        title = f"{cfg.kind.value}, n={cfg.n}, m={cfg.m}, seed={cfg.master_seed}"
        if cfg.positive_only:
            title += ", positive"
        return f"{title}\n\n" + _markdown(header, body)
    header = ["system", "spec", "beta", "se_beta", "gamma", "se_gamma"]
    body = [[s.name, specs[s.name], _g(s.beta, 17), _g(s.se_beta, 17),
             _g(s.gamma, 17), _g(s.se_gamma, 17)] for s in result.stats]
    return _csv(header, body)


def render_density(report, fmt: str) -> str:
    centers = report.centers
    emp = report.empirical_density
    theo = report.theoretical_density
    z = report.z_scores
    if fmt == "json":
        return _json({
            "system": report.system, "k": report.k, "u": report.u,
            "samples": report.samples,
            "rms": _json_float(report.rms), "rms_theory": _json_float(report.rms_theory),
            "mean": _json_float(report.mean), "se_mean": _json_float(report.se_mean),
            "bins": [
                {"center": _json_float(c), "count": int(n), "empirical": _json_float(e),
                 "theoretical": _json_float(t), "z": _json_float(zz)}
                for c, n, e, t, zz in zip(centers, report.counts, emp, theo, z)
            ],
        })
    header = ["center", "count", "empirical_density", "theoretical_density", "z"]
    if fmt == "md":
        body = [[_g(c, 4), str(int(n)), _g(e, 4), _g(t, 4), _g(zz, 2)]
                for c, n, e, t, zz in zip(centers, report.counts, emp, theo, z)]
        head = (f"{report.system}: rms {_g(report.rms, 4)} (theory {_g(report.rms_theory, 4)}),"
                f" mean {_g(report.mean, 3)} +- {_g(report.se_mean, 2)}")
        return f"{head}\n\n" + _markdown(header, body)
    body = [[_g(c, 17), str(int(n)), _g(e, 17), _g(t, 17), _g(zz, 17)]
            for c, n, e, t, zz in zip(centers, report.counts, emp, theo, z)]
    return _csv(header, body)


# -- commands ----------------------------------------------------------------

def _emit(text: str, out: str | None, manifest: RunManifest | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    with open(out, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    if manifest is not None:
        with open(out + ".manifest.json", "w", encoding="utf-8") as fh:
            fh.write(_json(asdict(manifest)))


def resolve_systems(text: str | None) -> list:
    if text is None:
        return None
    contexts = []
    for item in split_system_list(text):
        spec = parse_system(item)
        contexts.append(context_for(spec, spec.name or item))
    names = [c.name for c in contexts]
    if len(set(names)) != len(names):
        raise CliError(f"duplicate systems in {text!r}")
    return contexts


def cmd_theory(args) -> int:
    started = _now()
    text = render_theory(args.format)
    manifest = RunManifest(args.argv, {"command": "theory"}, 0, started=started, finished=_now())
    _emit(text, args.out, manifest)
    return EXIT_OK


def cmd_run(args) -> int:
    kwargs = dict(kind=Kind(args.kind), n=args.n, m=args.m, master_seed=args.seed,
                  positive_only=args.positive)
    systems = resolve_systems(args.systems)
    if systems is not None:
        kwargs["systems"] = systems
    try:
        config = ExperimentConfig(**kwargs)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    started = _now()
    result = run(config, jobs=args.jobs)
    manifest = RunManifest(args.argv, config.describe(), args.seed, redraws=result.redraws,
                           started=started, finished=_now())
    _emit(render_run(result, args.format, manifest), args.out, manifest)
    if result.redraws > REDRAW_LIMIT * config.m:
        print(f"warning: {result.redraws} redraws in {config.m} trials", file=sys.stderr)
        return EXIT_QUALITY
    return EXIT_OK


def cmd_density(args) -> int:
    spec = parse_system(args.system)
    if isinstance(spec, LogSystemSpec) or not isinstance(spec, SystemSpec):
        raise CliError("density needs a floating-point system, not a logarithmic one")
    if args.samples < 1 or args.bins < 1:
        raise CliError("need --samples >= 1 and --bins >= 1")
    started = _now()
    report = density_report(spec, args.samples, args.bins, args.seed, name=spec.name or args.system)
    config = {"command": "density", "system": str(spec), "samples": args.samples,
              "bins": args.bins}
    manifest = RunManifest(args.argv, config, args.seed, started=started, finished=_now())
    _emit(render_density(report, args.format), args.out, manifest)
    return EXIT_OK


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="radixlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, default="md"):
        p.add_argument("--format", choices=("md", "csv", "json"), default=default)
        p.add_argument("--out", help="output file (default: standard output)")

    p = sub.add_parser("theory", help="worst-case and rms error ratios")
    common(p)
    p.set_defaults(func=cmd_theory)

    p = sub.add_parser("run", help="run a Monte Carlo experiment")
    p.add_argument("kind", choices=[k.value for k in Kind])
    p.add_argument("--n", type=_positive_int, required=True, help="problem size")
    p.add_argument("--m", type=_positive_int, required=True, help="number of trials")
    p.add_argument("--systems", help="comma list of names (S0..S5, S4T) or inline specs")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=_positive_int, default=1)
    p.add_argument("--positive", action="store_true", help="sums of positive terms only")
    common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("density", help="histogram of representation errors")
    p.add_argument("--system", default="S2")
    p.add_argument("--samples", type=int, default=10**6)
    p.add_argument("--bins", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    common(p, default="csv")
    p.set_defaults(func=cmd_density)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    args.argv = argv
    try:
        return args.func(args)
    except (CliError, InvalidSpec, ArithmeticError, OSError, ValueError) as exc:
        print(f"radixlab: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
