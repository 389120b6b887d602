"""Command-line front end: ``chebdyn <command> ...``.

Exit status is 0 on success, 1 when an audit or check fails, and 2 on
invalid input. JSON reports go to stdout unless ``--out`` is given and
always embed the configuration defaults they ran with.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .config import DEFAULTS
from .degree import degree_audit, make_corpus, predicted_degree
from .dynamics import AttractorSet, connectivity_evidence
from .errors import ChebdynError
from .fixed_points import extraneous_via_L, find_fixed_points, format_table
from .lambda_family import SWEEP_COLUMNS, c_lambda, p_lambda, sweep_csv, sweep_rows
from .poly import Polynomial

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
COMMANDS = ("degree", "fixed-points", "lambda-report", "audit", "render", "sweep", "reproduce-figures")
CHECK_NAMES = tuple(SWEEP_COLUMNS[4:])


class InputError(ValueError):
    """Raised for malformed command-line input."""


# --------------------------------------------------------------------------
# input parsing


def _num(text: str) -> complex:
    text = text.strip().replace("−", "-").replace(" ", "")
    try:
        return complex(text.replace("i", "j"))
    except ValueError as exc:
        raise InputError(f"not a number: {text!r}") from exc


def parse_poly(text: str) -> Polynomial:
    """JSON array of coefficients, ascending degree, each a number or an ``[re, im]`` pair."""
    try:
        data = json.loads(text.replace("−", "-"))
    except json.JSONDecodeError as exc:
        raise InputError(f"--poly is not valid JSON: {exc}") from exc
    if not isinstance(data, list) or not data:
        raise InputError("--poly must be a non-empty JSON array")
    try:
        return Polynomial.from_json(data)
    except (TypeError, ValueError) as exc:
        raise InputError(f"bad coefficient in --poly: {exc}") from exc


def parse_roots(text: str) -> Polynomial:
    """``"1:2,-2:1"`` means ``(z-1)^2 (z+2)``; a missing multiplicity means 1."""
    spec = []
    for part in text.split(","):
        if not part.strip():
            continue
        loc, _, mult = part.partition(":")
        try:
            k = int(mult) if mult.strip() else 1
        except ValueError as exc:
            raise InputError(f"bad multiplicity in --roots: {part!r}") from exc
        if k < 1:
            raise InputError(f"multiplicity must be positive: {part!r}")
        spec.append((_num(loc), k))
    if not spec:
        raise InputError("--roots is empty")
    return Polynomial.from_roots(spec)


def parse_grid(text: str) -> list[float]:
    """``a:b:n`` is ``n`` evenly spaced values from ``a`` to ``b`` inclusive."""
    parts = text.replace("−", "-").split(":")
    try:
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
    except (IndexError, ValueError) as exc:
        raise InputError("--lambda-grid must look like a:b:n") from exc
    if len(parts) != 3 or n < 1:
        raise InputError("--lambda-grid must look like a:b:n with n >= 1")
    return [float(x) for x in np.linspace(a, b, n)]


@dataclass(frozen=True)
class JobConfig:
    command: str
    poly: Polynomial | None = None
    lam: complex | None = None
    tol: float = DEFAULTS.root_tol
    center: complex | None = None
    width: float = 8.0
    pixels: tuple[int, int] = (800, 800)
    budget: int = DEFAULTS.budget
    parabolic_budget: int = DEFAULTS.parabolic_budget
    workers: int = 1
    out: Path | None = None
    out_dir: Path | None = None
    grid: tuple[float, ...] = ()
    checks: tuple[str, ...] = CHECK_NAMES
    corpus: int = 0
    seed: int = 0
    fmt: str = "json"
    plot: Path | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise InputError(f"unknown command {self.command!r}")
        if self.workers < 1:
            raise InputError("--workers must be >= 1")
        if self.budget < 1 or self.parabolic_budget < 1:
            raise InputError("budgets must be positive")
        if self.tol <= 0:
            raise InputError("--tol must be positive")
        if self.width <= 0 or min(self.pixels) < 1:
            raise InputError("viewport needs positive width and pixel counts")
        needs_input = {"fixed-points", "audit", "render"}
        if self.command in needs_input and self.poly is None and self.lam is None:
            raise InputError(f"{self.command} needs --poly, --roots or --lambda")
        if self.command == "degree" and self.poly is None and self.corpus < 1:
            raise InputError("degree needs --poly, --roots or --corpus N")
        if self.command == "lambda-report" and self.lam is None:
            raise InputError("lambda-report needs --lambda")
        if self.command == "sweep" and not self.grid:
            raise InputError("sweep needs --lambda-grid")
        unknown = set(self.checks) - set(CHECK_NAMES)
        if unknown:
            raise InputError(f"unknown checks {sorted(unknown)}; choose from {', '.join(CHECK_NAMES)} or all")

    def polynomial(self) -> Polynomial:
        return p_lambda(self.lam) if self.poly is None else self.poly

    def input_dict(self) -> dict:
        if self.poly is not None:
            return {"poly": self.poly.to_json()}
        if self.lam is not None:
            return {"lambda": [self.lam.real, self.lam.imag]}
        return {}


# --------------------------------------------------------------------------
# output helpers


def _envelope(cfg: JobConfig, result) -> dict:
    return {"command": cfg.command, "version": __version__, "input": cfg.input_dict(),
            "config": DEFAULTS.as_dict(), "result": result}


def _emit_json(cfg: JobConfig, data: dict) -> None:
    text = json.dumps(data, indent=2, sort_keys=False) + "\n"
    if cfg.out is None:
        sys.stdout.write(text)
    else:
        cfg.out.write_text(text)


def _emit_text(cfg: JobConfig, text: str) -> None:
    if cfg.out is None:
        sys.stdout.write(text)
    else:
        cfg.out.write_text(text)


def _pt(z: complex):
    return "inf" if np.isinf(abs(z)) else [z.real, z.imag]


# --------------------------------------------------------------------------
# commands


def cmd_degree(cfg: JobConfig) -> int:
    if cfg.poly is not None:
        b = predicted_degree(cfg.poly, cfg.tol)
        _emit_json(cfg, _envelope(cfg, asdict(b)))
        return EXIT_OK if b.agrees else EXIT_FAIL
    from .plotting import degree_audit_figure

    report = degree_audit(make_corpus(cfg.corpus, cfg.seed), cfg.tol, cfg.workers)
    out_dir = cfg.out_dir or Path(".")
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "degree_audit.csv").write_text(report.to_csv())
    (out_dir / "degree_audit.jsonl").write_text(report.to_jsonl())
    degree_audit_figure(report, out_dir / "degree_audit.png")
    data = _envelope(cfg, report.summary())
    data["input"] = {"corpus": cfg.corpus, "seed": cfg.seed}
    data["artifacts"] = ["degree_audit.csv", "degree_audit.jsonl", "degree_audit.png"]
    _emit_json(cfg, data)
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_fixed_points(cfg: JobConfig) -> int:
    p = cfg.polynomial()
    records = find_fixed_points(p, cfg.tol)
    extr_fp = sum(r.multiplicity for r in records if r.extraneous)
    extr_L = extraneous_via_L(p, cfg.tol)
    if cfg.fmt == "table":
        _emit_text(cfg, format_table(records))
    else:
        _emit_json(cfg, _envelope(cfg, {
            "fixed_points": [r.to_dict() for r in records],
            "multiplicity_sum": sum(r.multiplicity for r in records),
            "extraneous_via_L": [_pt(z) for z in extr_L],
        }))
    return EXIT_OK if extr_fp == len(extr_L) else EXIT_FAIL


def cmd_lambda_report(cfg: JobConfig) -> int:
    rec = c_lambda(cfg.lam)
    _emit_json(cfg, _envelope(cfg, rec.to_dict()))
    return EXIT_OK if rec.passed else EXIT_FAIL


def cmd_audit(cfg: JobConfig) -> int:
    report = connectivity_evidence(cfg.polynomial(), cfg.parabolic_budget)
    _emit_json(cfg, _envelope(cfg, report))
    return EXIT_OK if report["verdict"] == "EVIDENCE-CONSISTENT" else EXIT_FAIL


def _render_one(p: Polynomial, vp, path: Path, budget: int, parabolic_budget: int, workers: int,
                extra: dict | None = None, rotation: bool = False) -> dict:
    from .render import encode_image, render_basins, rotation_check, sha256, symmetry_check, write_sidecar

    grid = render_basins(p, vp, budget, parabolic_budget, workers)
    encode_image(grid, path)
    checks = {}
    if vp.symmetric_about_real_axis and p.has_real_coefficients():
        checks["real_axis_symmetry"] = symmetry_check(grid)
    if rotation:
        checks["rotation_3"] = rotation_check(p, grid, 3)
    info = dict(extra or {})
    info["checks"] = checks
    info["poly"] = p.to_json()
    sidecar = write_sidecar(grid, path, extra=info)
    return {"image": path.name, "sidecar": sidecar.name, "sha256": sha256(path),
            "counts": {str(k): v for k, v in grid.counts().items()}, "checks": checks}


def cmd_render(cfg: JobConfig) -> int:
    from .render import Viewport

    p = cfg.polynomial()
    center = cfg.center if cfg.center is not None else 0j
    vp = Viewport(center, cfg.width, *cfg.pixels)
    out = cfg.out or Path("basins.png")
    info = _render_one(p, vp, out, cfg.budget, cfg.parabolic_budget, cfg.workers, extra=cfg.input_dict())
    sys.stdout.write(json.dumps(info, indent=2) + "\n")
    ok = all(c["verdict"] == "PASS" for c in info["checks"].values())
    return EXIT_OK if ok else EXIT_FAIL


def cmd_sweep(cfg: JobConfig) -> int:
    rows = sweep_rows(cfg.grid, cfg.workers)
    _emit_text(cfg, sweep_csv(rows))
    if cfg.plot is not None:
        from .plotting import sweep_plot

        sweep_plot(rows, cfg.plot)
    ok = all(r[c] for r in rows for c in cfg.checks)
    return EXIT_OK if ok else EXIT_FAIL


def figure_jobs(pixels: int = 800) -> list[dict]:
    """The canonical renders: three values of lambda, full frame and zoom, plus two polynomials."""
    jobs = []
    for lam, tag in ((-1.0, "m1"), (0.0, "0"), (1.0, "1")):
        z0 = -1.0 / np.sqrt(5.0 - lam)
        jobs.append({"name": f"lambda_{tag}_full", "lambda": lam, "center": 0j, "width": 8.0})
        jobs.append({"name": f"lambda_{tag}_zoom", "lambda": lam, "center": complex(z0, 0.0), "width": 0.6})
    jobs.append({"name": "z3_minus_1", "roots": "z^3-1", "center": 0j, "width": 4.0, "rotation": True})
    jobs.append({"name": "double_root", "roots": "1:2,-2:1", "center": complex(-0.5, 0.0), "width": 6.0})
    for j in jobs:
        j["pixels"] = pixels
    return jobs


def _job_poly(job: dict) -> Polynomial:
    if "lambda" in job:
        return p_lambda(job["lambda"])
    if job["roots"] == "z^3-1":
        return Polynomial([-1, 0, 0, 1])
    return parse_roots(job["roots"])


def reproduce_figures(out_dir: Path, workers: int = 1, pixels: int = 800, budget: int | None = None,
                      parabolic_budget: int | None = None) -> dict:
    """Render every canonical figure into ``out_dir`` and write ``manifest.json``."""
    from .render import Viewport

    budget = DEFAULTS.budget if budget is None else budget
    parabolic_budget = DEFAULTS.parabolic_budget if parabolic_budget is None else parabolic_budget
    out_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    for job in figure_jobs(pixels):
        p = _job_poly(job)
        vp = Viewport(job["center"], job["width"], job["pixels"], job["pixels"])
        extra = {"figure": job["name"]}
        if "lambda" in job:
            extra["lambda"] = job["lambda"]
        info = _render_one(p, vp, out_dir / f"{job['name']}.png", budget, parabolic_budget, workers,
                           extra=extra, rotation=job.get("rotation", False))
        info.update({"name": job["name"], "viewport": vp.to_dict()})
        entries.append(info)
    manifest = {"version": __version__, "budget": budget, "parabolic_budget": parabolic_budget,
                "config": DEFAULTS.as_dict(), "figures": entries}
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest


def cmd_reproduce(cfg: JobConfig) -> int:
    manifest = reproduce_figures(cfg.out_dir or Path("figures"), cfg.workers, cfg.pixels[0],
                                 cfg.budget, cfg.parabolic_budget)
    ok = all(c["verdict"] == "PASS" for f in manifest["figures"] for c in f["checks"].values())
    sys.stdout.write(json.dumps({"images": [f["image"] for f in manifest["figures"]],
                                 "manifest": "manifest.json", "checks_passed": ok}, indent=2) + "\n")
    return EXIT_OK if ok else EXIT_FAIL


DISPATCH = {
    "degree": cmd_degree,
    "fixed-points": cmd_fixed_points,
    "lambda-report": cmd_lambda_report,
    "audit": cmd_audit,
    "render": cmd_render,
    "sweep": cmd_sweep,
    "reproduce-figures": cmd_reproduce,
}


# --------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chebdyn", description="Chebyshev root-finding maps and their dynamics.")
    parser.add_argument("--version", action="version", version=f"chebdyn {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def poly_args(sp, with_lambda: bool = True):
        g = sp.add_mutually_exclusive_group()
        g.add_argument("--poly", help='coefficients, ascending degree, e.g. "[[-1,0],[0,0],[0,0],[1,0]]"')
        g.add_argument("--roots", help='roots with multiplicities, e.g. "1:2,-2:1"')
        if with_lambda:
            g.add_argument("--lambda", dest="lam", help="use p_lambda for this multiplier (real or complex)")

    def common(sp):
        sp.add_argument("--tol", type=float, default=DEFAULTS.root_tol, help="root clustering tolerance")
        sp.add_argument("--workers", type=int, default=1)
        sp.add_argument("--out", type=Path, help="output file (default: stdout)")

    sp = sub.add_parser("degree", help="predicted vs actual degree of C_p, or a corpus audit")
    poly_args(sp, with_lambda=False)
    sp.add_argument("--corpus", type=int, default=0, help="audit a generated corpus of this size")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out-dir", type=Path, help="directory for the corpus CSV, JSONL and figure")
    common(sp)

    sp = sub.add_parser("fixed-points", help="fixed points of C_p with multipliers")
    poly_args(sp)
    sp.add_argument("--format", dest="fmt", choices=("json", "table"), default="json")
    common(sp)

    sp = sub.add_parser("lambda-report", help="full record for C_lambda")
    sp.add_argument("--lambda", dest="lam", required=True)
    common(sp)

    sp = sub.add_parser("audit", help="critical-orbit, unboundedness and pole-boundary probes")
    poly_args(sp)
    sp.add_argument("--parabolic-budget", type=int, default=DEFAULTS.parabolic_budget)
    common(sp)

    sp = sub.add_parser("render", help="basin-of-attraction PNG plus sidecar JSON")
    poly_args(sp)
    sp.add_argument("--center", default="0")
    sp.add_argument("--width", type=float, default=8.0)
    sp.add_argument("--pixels", type=int, nargs="+", default=[800], help="N or NX NY")
    sp.add_argument("--budget", type=int, default=DEFAULTS.budget)
    sp.add_argument("--parabolic-budget", type=int, default=DEFAULTS.parabolic_budget)
    common(sp)

    sp = sub.add_parser("sweep", help="lemma-bound checks over a grid of lambda")
    sp.add_argument("--lambda-grid", required=True, help="a:b:n")
    sp.add_argument("--checks", default="all", help=f"all or comma-separated from {', '.join(CHECK_NAMES)}")
    sp.add_argument("--plot", type=Path, help="also write a PNG plot")
    common(sp)

    sp = sub.add_parser("reproduce-figures", help="render the canonical figures with a hashed manifest")
    sp.add_argument("--out-dir", type=Path, default=Path("figures"))
    sp.add_argument("--pixels", type=int, nargs="+", default=[800])
    sp.add_argument("--budget", type=int, default=DEFAULTS.budget)
    sp.add_argument("--parabolic-budget", type=int, default=DEFAULTS.parabolic_budget)
    sp.add_argument("--workers", type=int, default=1)
    return parser


def config_from_args(ns: argparse.Namespace) -> JobConfig:
    poly = None
    if getattr(ns, "poly", None):
        poly = parse_poly(ns.poly)
    elif getattr(ns, "roots", None):
        poly = parse_roots(ns.roots)
    lam = _num(ns.lam) if getattr(ns, "lam", None) else None
    if lam is not None and lam.imag == 0:
        lam = complex(lam.real, 0.0)
    pixels = tuple(getattr(ns, "pixels", [800]))
    if len(pixels) == 1:
        pixels = pixels * 2
    if len(pixels) != 2:
        raise InputError("--pixels takes one or two integers")
    checks = CHECK_NAMES
    if getattr(ns, "checks", "all") != "all":
        checks = tuple(c.strip() for c in ns.checks.split(",") if c.strip())
    return JobConfig(
        command=ns.command, poly=poly, lam=lam, tol=getattr(ns, "tol", DEFAULTS.root_tol),
        center=_num(ns.center) if getattr(ns, "center", None) else None,
        width=getattr(ns, "width", 8.0), pixels=pixels,
        budget=getattr(ns, "budget", DEFAULTS.budget),
        parabolic_budget=getattr(ns, "parabolic_budget", DEFAULTS.parabolic_budget),
        workers=getattr(ns, "workers", 1), out=getattr(ns, "out", None), out_dir=getattr(ns, "out_dir", None),
        grid=tuple(parse_grid(ns.lambda_grid)) if getattr(ns, "lambda_grid", None) else (),
        checks=checks, corpus=getattr(ns, "corpus", 0), seed=getattr(ns, "seed", 0),
        fmt=getattr(ns, "fmt", "json"), plot=getattr(ns, "plot", None),
    )


def run(cfg: JobConfig) -> int:
    return DISPATCH[cfg.command](cfg)


_VALUE_OPTIONS = ("--lambda-grid", "--lambda", "--center")


def _join_negative_values(argv: Sequence[str]) -> list[str]:
    """Let ``--lambda-grid -1:1:41`` through; argparse would read ``-1:1:41`` as a flag."""
    out: list[str] = []
    it = iter(argv)
    for tok in it:
        if tok in _VALUE_OPTIONS:
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(_join_negative_values(sys.argv[1:] if argv is None else argv))
    try:
        cfg = config_from_args(ns)
    except InputError as exc:
        parser.error(str(exc))  # exits with status 2
    try:
        return run(cfg)
    except (InputError, ChebdynError, ValueError) as exc:
        sys.stderr.write(f"chebdyn {cfg.command}: {type(exc).__name__}: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
