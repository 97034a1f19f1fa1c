"""Command-line front end: ``geoinv {table,gif,realrad,moment} [input]``.

Exit codes: 0 success, 2 usage, 3 parse error, 4 infeasible moment problem,
5 iteration limit (``--kmax`` or ``--max-iter``), 6 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass

import numpy as np

from .involutive import DEFAULT_KMAX, GifLimitError, annotate_table, gif
from .moment import InfeasibleMomentProblem, build_moment_problem, moment_labels
from .polycore import PolySystem, extract_generators, format_polynomial, monomial_basis
from .polyio import Document, ParseError, parse_document
from .realradical import DEFAULT_MAX_ITER, RealRadicalLimitError, display_generators, gif_mmtx, simplify_report
from .sdp import SdpConvergenceError, SdpOptions, UnstableRankError, generic_point
from .subspace import DEFAULT_EPS, DimensionTable

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_INFEASIBLE = 4
EXIT_LIMIT = 5
EXIT_NUMERIC = 6

DIGITS = 7
COMMANDS = ("table", "gif", "realrad", "moment")


@dataclass(frozen=True)
class RunConfig:
    command: str
    input: str = "-"
    tol: float = DEFAULT_EPS
    kmax: int | None = None
    seed: int = 0
    max_iter: int = DEFAULT_MAX_ITER
    format: str = "text"
    output: str | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if not 0.0 < self.tol <= 1e-2:
            raise ValueError(f"tolerance must lie in (0, 1e-2], got {self.tol}")
        if self.format not in ("text", "json"):
            raise ValueError(f"unknown format {self.format!r}")

    @property
    def effective_kmax(self) -> int:
        if self.kmax is not None:
            return self.kmax
        return 3 if self.command == "table" else DEFAULT_KMAX

    def to_dict(self) -> dict:
        return {"command": self.command, "input": self.input, "tol": self.tol, "kmax": self.effective_kmax,
                "seed": self.seed, "max_iter": self.max_iter, "format": self.format}


def _g(x) -> float:
    """Round to the display precision so text and structured output agree."""
    return float(f"{x:.{DIGITS}g}")


def _polys(P: PolySystem, names) -> list[str]:
    return [format_polynomial(p, names, DIGITS) for p in P]


# -- commands ----------------------------------------------------------------

def _table_payload(table: DimensionTable) -> dict:
    return table.to_dict()


def cmd_table(doc: Document, cfg: RunConfig) -> tuple[dict, str]:
    from .subspace import dimension_table

    table = dimension_table(doc.system, cfg.effective_kmax, cfg.tol)
    table = annotate_table(doc.system, table, cfg.tol, cfg.seed)
    data = _table_payload(table)
    text = table.render() + "\n\n* involutive   + involutive and inclusion-certified"
    return data, text


def cmd_gif(doc: Document, cfg: RunConfig) -> tuple[dict, str]:
    res = gif(doc.system, cfg.tol, cfg.effective_kmax, cfg.seed)
    c = res.candidate
    gens = _polys(display_generators(res.kernel), doc.varnames)
    residual = _g(c.inclusion_residual) if c.inclusion_residual is not None else None
    data = {
        "k": c.k, "l": c.ell, "degree": c.degree, "dim": c.dim,
        "generators": gens, "inclusion_residual": residual,
        "symbol_frame": c.symbol.frame if c.symbol else None,
        "seed": res.seed, "table": _table_payload(res.table),
    }
    lines = [
        f"candidate: k={c.k} l={c.ell} degree={c.degree} dim={c.dim}",
        f"inclusion residual: {residual}",
        f"generators ({len(gens)}):",
        *[f"  {g}" for g in gens],
        "",
        res.table.render(),
    ]
    return data, "\n".join(lines)


def cmd_realrad(doc: Document, cfg: RunConfig) -> tuple[dict, str]:
    res = gif_mmtx(doc.system, cfg.tol, cfg.seed, cfg.max_iter, cfg.effective_kmax, varnames=doc.varnames)
    trace = res.trace
    report = simplify_report(res.generators, cfg.tol, res.degree, doc.varnames)
    gens = _polys(res.generators, doc.varnames)
    data = {"generators": gens, "degree": res.degree, "trace": trace.to_dict(), "report": report.to_dict()}
    lines = [f"real-radical candidate ({len(gens)} generators, degree {res.degree}):", *[f"  {g}" for g in gens], "",
             "rounds:"]
    for rd in trace.rounds:
        lines.append(f"  {rd.index}: gif k={rd.gif_k} l={rd.gif_ell} degree={rd.gif_degree} d={rd.d}"
                     f"  moment size={rd.moment_size} r={rd.r}")
    lines.append(f"status: {trace.status}; confirm: {json.dumps(trace.confirm, sort_keys=True)}")
    lines += ["", "lower-degree generators:", report.render()]
    return data, "\n".join(lines)


def cmd_moment(doc: Document, cfg: RunConfig) -> tuple[dict, str]:
    Mp = build_moment_problem(doc.system, eps=cfg.tol)
    sol = generic_point(Mp, cfg.seed, SdpOptions(max_iter=max(cfg.max_iter, 200)))
    labels = moment_labels(Mp, doc.varnames)
    kgens = _polys(extract_generators(sol.kernel, monomial_basis(Mp.nvars, Mp.degree)), doc.varnames)
    data = {
        "size": sol.size, "rank": sol.rank, "kernel_dim": sol.kernel.dim,
        "lambda_min": _g(sol.lambda_min), "free_moments": dict(zip(labels, [_g(v) for v in sol.y])),
        "kernel_generators": kgens, "faces": sol.faces, "restart_ranks": list(sol.restart_ranks),
        "seed": sol.seed,
    }
    lines = [f"moment matrix {sol.size}x{sol.size}: rank {sol.rank}, kernel dim {sol.kernel.dim}",
             f"lambda_min: {data['lambda_min']}", "free moments:"]
    lines += [f"  {k} = {v}" for k, v in data["free_moments"].items()]
    lines += [f"kernel generators ({len(kgens)}):", *[f"  {g}" for g in kgens]]
    return data, "\n".join(lines)


_DISPATCH = {"table": cmd_table, "gif": cmd_gif, "realrad": cmd_realrad, "moment": cmd_moment}


def _header(cfg: RunConfig) -> str:
    return "# geoinv " + " ".join(f"{k}={v}" for k, v in cfg.to_dict().items())


def run(cfg: RunConfig, stdin=None, stdout=None, stderr=None) -> int:
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        if cfg.input == "-":
            text = stdin.read()
        else:
            with open(cfg.input, encoding="utf-8") as fh:
                text = fh.read()
    except OSError as exc:
        print(f"error: cannot read {cfg.input}: {exc}", file=stderr)
        return EXIT_USAGE
    try:
        doc = parse_document(text)
        data, body = _DISPATCH[cfg.command](doc, cfg)
    except ParseError as exc:
        print(f"parse error: {exc}", file=stderr)
        return EXIT_PARSE
    except InfeasibleMomentProblem as exc:
        print(f"infeasible: {exc}", file=stderr)
        return EXIT_INFEASIBLE
    except GifLimitError as exc:
        print(f"limit: {exc}\n{exc.table.render()}", file=stderr)
        return EXIT_LIMIT
    except RealRadicalLimitError as exc:
        print(f"limit: {exc}", file=stderr)
        return EXIT_LIMIT
    except (UnstableRankError, SdpConvergenceError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=stderr)
        return EXIT_NUMERIC
    if cfg.format == "json":
        out = json.dumps({"config": cfg.to_dict(), "variables": list(doc.varnames), "result": data},
                         indent=2, sort_keys=True) + "\n"
    else:
        out = _header(cfg) + "\n" + body + "\n"
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8") as fh:
            fh.write(out)
    else:
        stdout.write(out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="geoinv", description="Geometric involutive bases and real-radical candidates.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("input", nargs="?", default="-", help="system file ('-' or omitted: stdin)")
    ap.add_argument("--tol", type=float, default=DEFAULT_EPS, help="relative rank tolerance (default 1e-8)")
    ap.add_argument("--kmax", type=int, default=None, help="largest prolongation order (table: 3, otherwise 10)")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER, help="GIF/moment rounds for realrad")
    ap.add_argument("--format", choices=("text", "json"), default="text")
    ap.add_argument("--output", default=None, help="write the result here instead of stdout")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = RunConfig(args.command, args.input, args.tol, args.kmax, args.seed, args.max_iter, args.format, args.output)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
