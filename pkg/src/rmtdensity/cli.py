"""Command-line front end: plot-ready CSV/JSON tables.

Exit status 0 on success, 2 on invalid input, 3 when a numerical routine
fails to converge.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .bulk import bulk_expansion
from .edge import edge_expansion
from .exactdens import EnsembleSpec, raw_support, scaled_density
from .linstat import PRESETS, linear_statistic, preset, smoothed_prediction
from .matching import match_report
from .mcsample import empirical_density, sample_spectra
from .specfun import ConvergenceError

COMMANDS = ("density", "edge-compare", "bulk-compare", "match-report", "moments", "mc", "fig1")
ENSEMBLES = ("goe", "gue", "gse", "loe", "lue", "lse")
EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3
FIG1 = {"ensemble": "lse", "n": 20, "alpha": 0.5, "grid": (-4.0, 4.0, 161)}


class ValidationError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    ensemble: str = "gue"
    n: int = 8
    alpha: float = 0.0
    scaling: str | None = None
    grid: tuple | None = None
    order: int | None = None
    form: str | None = None
    a: str = "x2"
    chiral: bool = False
    n_grid: tuple = (64, 256, 1024)
    seed: int = 0
    samples: int = 1000
    bins: int = 40
    output: str | None = None
    format: str = "csv"
    warnings: list = field(default_factory=list)

    def spec(self, scaling=None) -> EnsembleSpec:
        return EnsembleSpec.from_name(self.ensemble, self.n, self.alpha, scaling or self.scaling or "raw")

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("warnings")
        return d


@dataclass
class Table:
    columns: list
    data: dict

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in zip(*(np.atleast_1d(self.data[c]) for c in self.columns)):
            w.writerow([format(float(v), ".17g") for v in row])
        return buf.getvalue()

    def to_results(self) -> dict:
        return {c: [float(v) for v in np.atleast_1d(self.data[c])] for c in self.columns}


def parse_csv(text: str) -> Table:
    rows = list(csv.reader(io.StringIO(text)))
    cols = rows[0]
    body = np.array([[float(v) for v in r] for r in rows[1:]]).reshape(len(rows) - 1, len(cols))
    return Table(cols, {c: body[:, j] for j, c in enumerate(cols)})


# ---------------------------------------------------------------------------
# parsing and validation
# ---------------------------------------------------------------------------

def parse_grid(text: str) -> tuple:
    """'start:stop:count' with inclusive endpoints."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ValidationError(f"grid must be start:stop:count, got {text!r}")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ValidationError(f"grid must be start:stop:count, got {text!r}") from None
    return start, stop, count


def _grid(cfg: RunConfig, default) -> np.ndarray:
    start, stop, count = cfg.grid or default
    return np.linspace(start, stop, count)


def validate(cfg: RunConfig) -> None:
    if cfg.command not in COMMANDS:
        raise ValidationError(f"unknown command {cfg.command!r}")
    if cfg.grid is not None:
        start, stop, count = cfg.grid
        if count < 2:
            raise ValidationError("grid count must be at least 2")
        if not start < stop:
            raise ValidationError("grid start must be below stop")
    if cfg.format not in ("csv", "json"):
        raise ValidationError("format must be csv or json")
    if cfg.command == "fig1":
        return
    if cfg.ensemble not in ENSEMBLES:
        raise ValidationError(f"unknown ensemble {cfg.ensemble!r}")
    try:
        cfg.spec()
    except ValueError as exc:
        raise ValidationError(str(exc)) from None
    if cfg.command == "match-report" and cfg.ensemble in ("goe", "loe") and any(n % 2 for n in cfg.n_grid):
        raise ValidationError("beta = 1 needs even N in --n-grid")
    if cfg.command == "moments" and cfg.a not in PRESETS:
        raise ValidationError(f"--a must be one of {sorted(PRESETS)}")
    if cfg.command == "mc" and (cfg.samples < 2 or cfg.bins < 10):
        raise ValidationError("mc needs --samples >= 2 and --bins >= 10")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _default_grid(spec: EnsembleSpec) -> tuple:
    if spec.scaling == "edge":
        return (-4.0, 4.0, 161)
    if spec.scaling == "bulk":
        return (-1.2, 1.2, 241) if spec.family == "gaussian" else (0.0, 1.2, 241)
    lo, hi = raw_support(spec)
    return (lo, hi, 401)


def cmd_density(cfg: RunConfig):
    spec = cfg.spec()
    x = _grid(cfg, _default_grid(spec))
    name = {"raw": "x", "bulk": "X", "edge": "xi"}[spec.scaling]
    return Table([name, "exact"], {name: x, "exact": np.atleast_1d(scaled_density(spec, x))})


def cmd_edge_compare(cfg: RunConfig):
    spec = cfg.spec("edge")
    xi = _grid(cfg, (-4.0, 4.0, 161))
    exact = np.atleast_1d(scaled_density(spec, xi))
    exp = edge_expansion(cfg.ensemble, xi, cfg.n, cfg.alpha, form=cfg.form or "paper")
    total = exp.total if cfg.order is None else sum(
        t.value for t in exp.terms if t.order <= cfg.order)
    if (cfg.form or "paper") == "paper" and cfg.ensemble in ("gue", "goe", "gse"):
        cfg.warnings.append("printed Gaussian edge terms (form=paper); use --form corrected "
                            "for the terms the exact density converges to")
    return Table(["xi", "exact", "expansion", "residual"],
                 {"xi": xi, "exact": exact, "expansion": total, "residual": exact - total})


def cmd_bulk_compare(cfg: RunConfig):
    spec = cfg.spec("bulk")
    default = (-0.9, 0.9, 181) if spec.family == "gaussian" else (0.05, 0.95, 181)
    X = _grid(cfg, default)
    exact = np.atleast_1d(scaled_density(spec, X)) / cfg.n
    try:
        exp = bulk_expansion(cfg.ensemble, X, cfg.n, cfg.alpha, max_order=cfg.order)
    except ValueError as exc:
        raise ValidationError(str(exc)) from None
    return Table(["X", "exact", "expansion", "residual"],
                 {"X": X, "exact": exact, "expansion": exp.total, "residual": exact - exp.total})


def cmd_match_report(cfg: RunConfig):
    xi = _grid(cfg, (-10.0, -4.0, 4))
    rep = match_report(cfg.spec("edge"), xi, cfg.n_grid, form=cfg.form or "corrected")
    if np.any(rep.flagged):
        cfg.warnings.append("some residual fits have R^2 < 0.9 or are undefined")
    for t in rep.known_tensions:
        cfg.warnings.append(f"known tension ({t.source}): {t.ensemble} {t.label}")
    return rep


def cmd_moments(cfg: RunConfig):
    spec = cfg.spec("bulk")
    a = preset(cfg.a)
    if cfg.chiral and spec.family != "laguerre":
        raise ValidationError("--chiral needs a Laguerre ensemble")
    chiral = cfg.chiral
    stat = linear_statistic(spec, a, chiral=chiral)
    rows = {"statistic": stat}
    if spec.family == "gaussian" or chiral:
        pred = smoothed_prediction(spec, a)
        rows["smoothed_prediction"] = pred
        rows["difference"] = stat - pred
    return rows


def cmd_mc(cfg: RunConfig):
    spec = cfg.spec(cfg.scaling or "bulk")
    try:
        samples = sample_spectra(spec, cfg.seed, cfg.samples)
    except ValueError as exc:
        raise ValidationError(str(exc)) from None
    rng = None if cfg.grid is None else (cfg.grid[0], cfg.grid[1])
    bins = cfg.bins if cfg.grid is None else cfg.grid[2] - 1
    tab = empirical_density(samples, max(bins, 10), rng)
    data = {"x": tab.abscissae, **tab.columns, "exact": tab.exact}
    return Table(["x", "count", "density", "stderr"], data), tab


def fig1_table(grid=None) -> Table:
    start, stop, count = grid or FIG1["grid"]
    xi = np.linspace(start, stop, count)
    spec = EnsembleSpec.from_name(FIG1["ensemble"], FIG1["n"], FIG1["alpha"], "edge")
    exact = np.atleast_1d(scaled_density(spec, xi))
    asym = edge_expansion(FIG1["ensemble"], xi, FIG1["n"], FIG1["alpha"]).total
    return Table(["xi", "exact", "asymptotic"], {"xi": xi, "exact": exact, "asymptotic": asym})


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------

def _emit(cfg: RunConfig, payload) -> str:
    if cfg.format == "csv":
        if isinstance(payload, Table):
            return payload.to_csv()
        if isinstance(payload, dict):
            return "quantity,value\n" + "".join(f"{k},{float(v):.17g}\n" for k, v in payload.items())
        # match report
        rows = ["xi,N,residual"]
        for i, x in enumerate(payload.xi_grid):
            for j, n in enumerate(payload.n_grid):
                rows.append(f"{float(x):.17g},{int(n)},{float(payload.residuals[i][j]):.17g}")
        return "\n".join(rows) + "\n"
    if isinstance(payload, Table):
        results = payload.to_results()
    elif isinstance(payload, dict):
        results = {k: float(v) for k, v in payload.items()}
    else:
        results = json.loads(payload.to_json())
    env = {"tool_version": __version__, "config": cfg.to_dict(), "results": results,
           "warnings": list(cfg.warnings)}
    return json.dumps(env, indent=2, allow_nan=True) + "\n"


def run(cfg: RunConfig, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        validate(cfg)
        if cfg.command == "density":
            payload = cmd_density(cfg)
        elif cfg.command == "edge-compare":
            payload = cmd_edge_compare(cfg)
        elif cfg.command == "bulk-compare":
            payload = cmd_bulk_compare(cfg)
        elif cfg.command == "match-report":
            payload = cmd_match_report(cfg)
        elif cfg.command == "moments":
            payload = cmd_moments(cfg)
        elif cfg.command == "mc":
            table, full = cmd_mc(cfg)
            payload = Table(["x", "count", "density", "stderr", "exact"], table.data) \
                if cfg.format == "json" else table
        else:
            payload = fig1_table(cfg.grid)
        text = _emit(cfg, payload)
    except ConvergenceError as exc:
        print(f"error: numerical non-convergence: {exc}", file=stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_INVALID
    if cfg.output:
        with open(cfg.output, "w") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    for w in cfg.warnings:
        print(f"warning: {w}", file=stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rmtdensity", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--ensemble", default="gue", type=str.lower)
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--scaling", choices=("raw", "bulk", "edge"))
    p.add_argument("--grid", help="start:stop:count, endpoints inclusive")
    p.add_argument("--order", type=float, help="highest expansion order kept")
    p.add_argument("--form", choices=("paper", "corrected"), help="printed or corrected Gaussian edge terms "
                   "(default: paper for edge-compare, corrected for match-report)")
    p.add_argument("--a", default="x2", help="test function for moments: " + ", ".join(sorted(PRESETS)))
    p.add_argument("--chiral", action="store_true", help="moments of the chiral ensemble (Laguerre only)")
    p.add_argument("--n-grid", default="64,256,1024", help="comma-separated N values for match-report")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--bins", type=int, default=40)
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    return p


def _join_grid(argv):
    # "--grid -1:1:201" would otherwise be read as an option
    out = []
    it = iter(argv)
    for tok in it:
        if tok == "--grid":
            nxt = next(it, None)
            out.append(tok if nxt is None else f"--grid={nxt}")
        else:
            out.append(tok)
    return out


def config_from_args(argv=None) -> RunConfig:
    argv = sys.argv[1:] if argv is None else list(argv)
    ns = build_parser().parse_args(_join_grid(argv))
    try:
        n_grid = tuple(int(v) for v in ns.n_grid.split(","))
    except ValueError:
        raise ValidationError(f"--n-grid must be comma-separated integers, got {ns.n_grid!r}") from None
    grid = parse_grid(ns.grid) if ns.grid else None
    order = ns.order
    if order is not None and float(order).is_integer():
        order = int(order)
    return RunConfig(command=ns.command, ensemble=ns.ensemble, n=ns.n, alpha=ns.alpha,
                     scaling=ns.scaling, grid=grid, order=order, form=ns.form, a=ns.a,
                     chiral=ns.chiral, n_grid=n_grid, seed=ns.seed, samples=ns.samples,
                     bins=ns.bins, output=ns.out, format=ns.format)


def main(argv=None) -> int:
    try:
        cfg = config_from_args(argv)
    except SystemExit as exc:        # argparse usage errors
        return EXIT_INVALID if exc.code else EXIT_OK
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
