"""Command-line front end.

Every subcommand resolves its configuration from built-in defaults, an
optional ``key = value`` file (``--config``) and explicit flags, in that
order of precedence.  Output files start with ``#`` comment lines that
echo the resolved configuration and the package version; the creation
time sits on its own comment line so that bodies are reproducible.

Exit codes: 0 success, 2 invalid input, 3 resource budget exceeded,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .errors import BudgetExceededError, InvalidInputError, NumericalError

EXIT_OK, EXIT_INVALID, EXIT_BUDGET, EXIT_NUMERICAL = 0, 2, 3, 4


# ------------------------------------------------------------ value parsing


def int_list(text) -> tuple[int, ...]:
    if isinstance(text, (list, tuple)):
        return tuple(int(x) for x in text)
    parts = [x for x in str(text).replace(",", " ").split() if x]
    if not parts:
        raise argparse.ArgumentTypeError("expected a list of integers")
    try:
        return tuple(int(x) for x in parts)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected integers, got {text!r}") from exc


def bool_value(text) -> bool:
    if isinstance(text, bool):
        return text
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def complex_value(text) -> complex:
    if isinstance(text, complex):
        return text
    try:
        return complex(str(text).replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected a complex number, got {text!r}") from exc


def optional_int_list(text):
    return None if str(text).strip().lower() in ("", "none") else int_list(text)


def read_config(path) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment; dashes in keys become underscores."""
    out = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise InvalidInputError(f"cannot read config {path}: {exc}") from exc
    for k, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidInputError(f"{path}:{k}: expected 'key = value'")
        key, value = (x.strip() for x in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


# ------------------------------------------------------------ commands
# Each command declares (key, type, default, help); flags are --key.

COMMON = [
    ("out", str, ".", "output directory"),
    ("prefix", str, "", "file name prefix"),
    ("threads", int, 0, "worker threads (0 = machine parallelism)"),
]

OPTIONS = {
    "census": [
        ("L", int, 4, "number of sites"),
        ("n", int, 1, "bosons per site"),
        ("split", bool_value, True, "also write the per-magnetization split"),
        ("max_rows", int, 20_000, "largest number of diagrams"),
    ],
    "spectrum": [
        ("irrep", int_list, None, "p q [r]: SU(3) irrep pathway"),
        ("symmetric", int_list, None, "L n: permutation-symmetric sector"),
        ("antisymmetric", int_list, None, "n_1,...,n_L: antisymmetric sector"),
        ("fock", int_list, None, "n_1,...,n_L: broken-permutation Fock sector"),
        ("M", int_list, (0,), "magnetization(s), comma separated"),
        ("h", float, 1.0, "field"),
        ("g1", float, 1.7, "coupling g1"),
        ("g2", float, 1.0, "coupling g2"),
        ("unfold", str, "polynomial", "polynomial or local_window"),
        ("degree", int, 7, "polynomial unfolding degree"),
        ("window", int, 10, "local_window half width"),
        ("trim", float, 0.05, "fraction of levels trimmed at each edge"),
        ("bins", int, 40, "histogram bins on [0, 4]"),
        ("max_dim", int, 12_000, "largest dense sector"),
        ("write_matrix", bool_value, False, "also export the sector matrix"),
    ],
    "classical": [
        ("alpha", float, 0.4, "p / L"),
        ("beta", float, 0.3, "q / L"),
        ("n", float, 1.0, "bosons per site"),
        ("gamma1", complex_value, complex(4 / np.sqrt(21)), "coherent parameter gamma1"),
        ("gamma2", complex_value, complex(2 / np.sqrt(21)), "coherent parameter gamma2"),
        ("gamma3", complex_value, complex(1j / np.sqrt(21)), "coherent parameter gamma3"),
        ("h", float, 1.0, "field"),
        ("g1", float, 2.0, "coupling g1"),
        ("g2", float, 0.4, "coupling g2"),
        ("R", int, 20, "ensemble size"),
        ("eps", float, 1e-7, "perturbation scale"),
        ("t_end", float, 1000.0, "final time (divided by n unless scale_time is off)"),
        ("scale_time", bool_value, True, "run to t_end / n"),
        ("n_out", int, 4001, "output grid points"),
        ("tol", float, 1e-10, "integration tolerance"),
        ("seed", int, 0, "RNG seed"),
        ("model", str, "power", "fit model: power or linear"),
        ("fit_window", str, "auto", "t1,t2 or auto"),
    ],
    "effective-rep": [
        ("cartan", int_list, None, "h_1,h_2,...: columns with exactly a rows"),
        ("n", int, 1, "bosons per site"),
        ("L", int, 0, "number of sites (0 = inferred)"),
    ],
    "fock-enum": [
        ("n", int_list, None, "n_1,...,n_L"),
        ("M", int, 0, "magnetization"),
    ],
}


def _option_table(command):
    return {key: (typ, default) for key, typ, default, _ in COMMON + OPTIONS[command]}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="su3sectors", description="Symmetry-resolved SU(3) atom simulations.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for command, options in OPTIONS.items():
        p = sub.add_parser(command)
        p.add_argument("--config", default=None, help="key = value configuration file")
        for key, typ, default, help_ in COMMON + options:
            nargs = "+" if typ is int_list else None
            p.add_argument(f"--{key.replace('_', '-')}", dest=key, type=str if nargs else typ, nargs=nargs,
                           default=argparse.SUPPRESS, help=f"{help_} (default {default})")
    return parser


def resolve_config(command: str, args: argparse.Namespace) -> dict:
    table = _option_table(command)
    cfg = {key: default for key, (_, default) in table.items()}
    given = vars(args)
    raw = read_config(given["config"]) if given.get("config") else {}
    for key, value in raw.items():
        if key not in table:
            raise InvalidInputError(f"unknown config key {key!r} for {command}")
        cfg[key] = value
    for key, value in given.items():
        if key in table:
            cfg[key] = " ".join(value) if isinstance(value, list) else value
    for key, (typ, _) in table.items():
        value = cfg[key]
        if value is None or (isinstance(value, str) and typ is not str and value.lower() == "none"):
            cfg[key] = None
            continue
        try:
            cfg[key] = typ(value)
        except (argparse.ArgumentTypeError, ValueError) as exc:
            raise InvalidInputError(f"bad value for {key}: {exc}") from exc
    return cfg


def _jsonable(cfg: dict) -> dict:
    out = {}
    for k, v in cfg.items():
        if isinstance(v, complex):
            out[k] = f"{v.real!r}{v.imag:+}j"
        elif isinstance(v, tuple):
            out[k] = list(v)
        else:
            out[k] = v
    return out


class Output:
    """Writes result files with the shared header convention."""

    def __init__(self, command: str, cfg: dict):
        self.command = command
        self.cfg = cfg
        self.dir = Path(cfg["out"])
        self.dir.mkdir(parents=True, exist_ok=True)
        self.written: list[str] = []

    def path(self, name: str) -> Path:
        return self.dir / f"{self.cfg['prefix']}{name}"

    def header_lines(self) -> list[str]:
        return [
            f"# su3sectors {__version__} {self.command}",
            "# config: " + json.dumps(_jsonable(self.cfg), sort_keys=True),
            "# created: " + datetime.now(timezone.utc).isoformat(timespec="seconds"),
        ]

    def csv(self, name: str, columns, rows, extra_header=()) -> Path:
        path = self.path(name)
        with open(path, "w", newline="") as fh:
            for line in self.header_lines():
                fh.write(line + "\n")
            for line in extra_header:
                fh.write(f"# {line}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(columns)
            w.writerows(rows)
        self.written.append(str(path))
        return path

    def json(self, name: str, payload: dict) -> Path:
        path = self.path(name)
        doc = {"version": __version__, "command": self.command, "config": _jsonable(self.cfg),
               "created": datetime.now(timezone.utc).isoformat(timespec="seconds")}
        doc.update(payload)
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
        self.written.append(str(path))
        return path


def _fmt(x: float) -> str:
    return repr(float(x))


def _threads(cfg) -> int:
    return cfg["threads"] or os.cpu_count() or 1


# ------------------------------------------------------------ census


def cmd_census(cfg: dict, out: Output) -> dict:
    from .sectors import fragmentation_report

    census = fragmentation_report(cfg["L"], cfg["n"], split_by_M=cfg["split"], max_rows=cfg["max_rows"])
    rows = [["-".join(map(str, r.diagram.rows)), r.p, r.q, r.r, r.specht_dim, r.weyl_dim] for r in census.rows]
    out.csv("census.csv", ["lambda", "p", "q", "r", "specht_dim", "weyl_dim"], rows)
    if cfg["split"]:
        split = [row + [M, size] for row, r in zip(rows, census.rows) for M, size in r.by_M.items()]
        out.csv("census_by_M.csv", ["lambda", "p", "q", "r", "specht_dim", "weyl_dim", "M", "subsector_dim"], split)
    summary = {
        "L": census.L, "n": census.n, "local_dimension": census.d, "n_sectors": census.n_sectors,
        "total_dimension": census.total_dimension, "expected_dimension": census.expected_dimension,
        "largest_sector": census.largest_sector,
        "largest_subsector": census.largest_subsector if cfg["split"] else None,
    }
    out.json("census.json", summary)
    return summary


# ------------------------------------------------------------ spectrum


def _spectrum_matrix(cfg: dict, M: int):
    from .hamiltonian import HamiltonianParams, build_fock_sector_hamiltonian, build_su3_sector_hamiltonian
    from .sectors import antisymmetric_sector_basis, fock_sector_basis, symmetric_sector_basis

    params = HamiltonianParams(cfg["h"], cfg["g1"], cfg["g2"])
    chosen = [k for k in ("irrep", "symmetric", "antisymmetric", "fock") if cfg[k] is not None]
    if len(chosen) != 1:
        raise InvalidInputError("select exactly one of --irrep, --symmetric, --antisymmetric, --fock")
    kind, value = chosen[0], cfg[chosen[0]]
    if kind == "irrep":
        if len(value) not in (2, 3):
            raise InvalidInputError("--irrep takes p q [r]")
        return build_su3_sector_hamiltonian(*value, M=M, params=params, max_dim=cfg["max_dim"])
    if kind == "symmetric":
        if len(value) != 2:
            raise InvalidInputError("--symmetric takes L n")
        basis = symmetric_sector_basis(value[0], value[1], M)
    elif kind == "antisymmetric":
        basis = antisymmetric_sector_basis(value, M)
    else:
        basis = fock_sector_basis(value, M)
    return build_fock_sector_hamiltonian(basis, params, max_dim=cfg["max_dim"])


def _one_spectrum(cfg: dict, M: int):
    from .spectral import analyze, diagonalize

    sm = _spectrum_matrix(cfg, M)
    e = diagonalize(sm.matrix, descriptor=sm.description)
    res = analyze(e, cfg["unfold"], cfg["degree"], cfg["window"], cfg["trim"], cfg["bins"], label=sm.description)
    return sm, res


def cmd_spectrum(cfg: dict, out: Output) -> dict:
    from .hamiltonian import write_matrix
    from .spectral import R_GOE, R_POISSON

    Ms = cfg["M"]
    with ThreadPoolExecutor(max_workers=min(_threads(cfg), len(Ms))) as pool:
        results = list(pool.map(lambda m: _one_spectrum(cfg, m), Ms))
    summaries = []
    for M, (sm, res) in zip(Ms, results):
        tag = f"_M{M}" if len(Ms) > 1 else ""
        out.csv(f"eigenvalues{tag}.csv", ["index", "energy"], [[k, _fmt(x)] for k, x in enumerate(res.eigenvalues)],
                [f"sector: {sm.description}"])
        centres, density = res.histogram
        out.csv(f"histogram{tag}.csv", ["s", "P(s)"], [[_fmt(c), _fmt(p)] for c, p in zip(centres, density)],
                [f"sector: {sm.description}"])
        if cfg["write_matrix"]:
            write_matrix(sm, out.path(f"matrix{tag}.txt"))
            out.written.append(str(out.path(f"matrix{tag}.txt")))
        summary = res.summary()
        summary["M"] = M
        summary["reference_r"] = {"goe": R_GOE, "poisson": R_POISSON}
        if res.unfolded_spacings.size:
            summary["closest_reference"] = "wigner-dyson" if res.ks_wd < res.ks_poisson else "poisson"
            summary["rigid"] = bool(summary["picket_fraction"] >= 0.6 and res.ks_wd > 0.2 and res.ks_poisson > 0.2)
        summaries.append(summary)
    payload = summaries[0] if len(summaries) == 1 else {"sectors": summaries}
    out.json("spectrum.json", payload)
    return payload


# ------------------------------------------------------------ classical


def cmd_classical(cfg: dict, out: Output) -> dict:
    from .classical import MONITOR_NAMES, CoherentParams, ensemble_divergence, lyapunov_fit, monitor_series
    from .hamiltonian import HamiltonianParams

    cp = CoherentParams(cfg["gamma1"], cfg["gamma2"], cfg["gamma3"], cfg["alpha"], cfg["beta"], cfg["n"])
    params = HamiltonianParams(cfg["h"], cfg["g1"], cfg["g2"])
    if cfg["n_out"] < 3 or cfg["t_end"] <= 0:
        raise InvalidInputError("need n_out >= 3 and t_end > 0")
    t_end = cfg["t_end"] / cfg["n"] if cfg["scale_time"] else cfg["t_end"]
    t = np.linspace(0.0, t_end, cfg["n_out"])
    series = ensemble_divergence(cp, params, cfg["R"], cfg["eps"], t, seed=cfg["seed"], tol=cfg["tol"],
                                 threads=cfg["threads"] or None)
    mon = monitor_series(series.reference, params)
    rows = [[_fmt(t[k]), _fmt(series.delta_r[k])] + [_fmt(mon[name][k]) for name in MONITOR_NAMES]
            for k in range(len(t))]
    out.csv("divergence.csv", ["t", "delta_r"] + list(MONITOR_NAMES), rows,
            ["monitor columns follow ensemble member 0"])
    payload = {"alpha": cp.alpha, "beta": cp.beta, "n": cp.n, "physical": cp.physical, "R": series.R,
               "eps": series.eps, "delta_r0": float(series.delta_r[0]), "monitor_drift": series.monitors,
               "lambda": None, "stderr": None, "window": None}
    window = None
    if cfg["fit_window"].strip().lower() != "auto":
        try:
            window = tuple(float(x) for x in cfg["fit_window"].split(","))
        except ValueError as exc:
            raise InvalidInputError(f"fit_window must be 'auto' or 't1,t2', got {cfg['fit_window']!r}") from exc
        if len(window) != 2:
            raise InvalidInputError("fit_window needs two times")
    try:
        fit = lyapunov_fit(series, window, model=cfg["model"])
    except (InvalidInputError, NumericalError) as exc:
        if window is not None or cfg["model"] not in ("power", "linear"):
            raise
        payload["fit_error"] = str(exc)
    else:
        payload.update({"lambda": fit.lyapunov, "stderr": fit.stderr, "window": list(fit.window),
                        "r2_linear": fit.r2_linear, "model": fit.model, "kappa": fit.kappa,
                        "lambda_over_n": fit.lyapunov / cp.n})
    out.json("fit.json", payload)
    return payload


# ------------------------------------------------------------ small queries


def cmd_effective_rep(cfg: dict, out: Output) -> dict:
    from .hamiltonian import CartanVector, effective_rep

    if cfg["cartan"] is None:
        raise InvalidInputError("--cartan is required")
    cartan = CartanVector(cfg["cartan"])
    L = cfg["L"] or cartan.n_sites
    p, q, r = effective_rep(cartan, cfg["n"], L)
    print(f"p* = {p}  q* = {q}  r* = {r}")
    print(f"check: p* + 2q* + 3r* = {p + 2 * q + 3 * r} = nL = {cfg['n'] * L}")
    return {"p": p, "q": q, "r": r, "n": cfg["n"], "L": L}


def cmd_fock_enum(cfg: dict, out: Output) -> dict:
    from .sectors import enumerate_fock_tables

    if cfg["n"] is None:
        raise InvalidInputError("--n is required")
    tables = enumerate_fock_tables(cfg["n"], cfg["M"])
    print(f"# n = {list(cfg['n'])}, M = {cfg['M']}: {len(tables)} tables (rows are sites, columns modes 1 2 3)")
    for k, table in enumerate(tables):
        print(f"table {k}")
        for row in table:
            print("  " + " ".join(str(x) for x in row))
    return {"count": len(tables)}


COMMANDS = {
    "census": cmd_census,
    "spectrum": cmd_spectrum,
    "classical": cmd_classical,
    "effective-rep": cmd_effective_rep,
    "fock-enum": cmd_fock_enum,
}
WRITES_FILES = {"census", "spectrum", "classical"}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args.command, args)
        if cfg["threads"] < 0:
            raise InvalidInputError("threads must be >= 0")
        if cfg["threads"]:
            from .classical import set_threads

            set_threads(cfg["threads"])
        out = Output(args.command, cfg) if args.command in WRITES_FILES else None
        COMMANDS[args.command](cfg, out)
    except BudgetExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (InvalidInputError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if out is not None:
        for path in out.written:
            print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
