"""Command-line front end.

Exit status: 0 on success, 1 on a computation error (a JSON record goes to
standard error), 2 on a usage error.  Output column names and JSON keys are
frozen in ``output_schema.json``.  Integrator tolerances default to
``HILL_RTOL`` / ``HILL_ATOL`` when those environment variables are set.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from importlib import resources

import numpy as np

from . import herglotz, oracles, spectrum
from .discriminant import discriminant_grid, h_plus_minus, weyl_matrix
from .errors import HillError, _jsonable
from .fundamental import IntegratorOptions
from .potential import load_potential, potential_bounds

SCHEMA = json.loads(resources.files("hill").joinpath("output_schema.json").read_text())
SCHEMA_VERSION = SCHEMA["schema_version"]
XIS = ((1, 0), (0, 1), (1, 1), (1, -1), (2, 1))


@dataclass(frozen=True)
class RunConfig:
    command: str
    potential: str
    lambda_min: float | None = None
    lambda_max: float | None = None
    grid: int = 200
    n_bands: int = 3
    n: int = 5
    z: tuple = ()
    method: str = "both"
    rtol: float | None = None
    atol: float | None = None
    fmt: str = "json"
    output: str | None = None
    jobs: int = 1

    def options(self) -> IntegratorOptions:
        base = IntegratorOptions.from_env()
        return IntegratorOptions(rel_tol=self.rtol or base.rel_tol, abs_tol=self.atol or base.abs_tol,
                                 max_steps=base.max_steps)


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hill", description="Spectral analysis of Hill's equation -u'' + Q u = lambda u.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, formats=("csv", "json"), default="json"):
        sp.add_argument("--potential", required=True, help="JSON potential file")
        sp.add_argument("--format", dest="fmt", choices=formats, default=default)
        sp.add_argument("--output", help="write to this file instead of standard output")
        sp.add_argument("--rtol", type=float, help="integrator relative tolerance (env HILL_RTOL)")
        sp.add_argument("--atol", type=float, help="integrator absolute tolerance (env HILL_ATOL)")
        sp.add_argument("--jobs", type=int, default=1, help="worker processes for grids")
        return sp

    sp = common(sub.add_parser("bands", help="band edges, gaps and Dirichlet table"))
    sp.add_argument("--n-bands", type=int, default=3)
    sp = common(sub.add_parser("dirichlet", help="Dirichlet eigenvalues"))
    sp.add_argument("--n", type=int, default=5, help="number of eigenvalues")
    sp = common(sub.add_parser("discriminant", help="discriminant on a real grid"))
    sp.add_argument("--lambda-min", type=float, required=True)
    sp.add_argument("--lambda-max", type=float, required=True)
    sp.add_argument("--grid", type=int, default=200)
    sp = common(sub.add_parser("verify", help="Herglotz, (m, n) pair and residue checks"))
    sp.add_argument("--lambda-max", type=float, required=True)
    sp = common(sub.add_parser("weyl", help="Weyl matrix and h+- at complex points"))
    sp.add_argument("--z", type=complex, action="append", required=True,
                    help="complex point such as 2+3j (repeatable)")
    sp = common(sub.add_parser("oracle-compare", help="band edges against Bloch and FD oracles"))
    sp.add_argument("--n-bands", type=int, default=2)
    sp.add_argument("--method", choices=("bloch", "fd", "both"), default="both")
    return p


def parse_args(argv) -> RunConfig:
    parser = _parser()
    ns = parser.parse_args(argv)
    cfg = RunConfig(
        command=ns.command, potential=ns.potential,
        lambda_min=getattr(ns, "lambda_min", None), lambda_max=getattr(ns, "lambda_max", None),
        grid=getattr(ns, "grid", 200), n_bands=getattr(ns, "n_bands", 3), n=getattr(ns, "n", 5),
        z=tuple(getattr(ns, "z", None) or ()), method=getattr(ns, "method", "both"),
        rtol=ns.rtol, atol=ns.atol, fmt=ns.fmt, output=ns.output, jobs=ns.jobs,
    )
    problems = []
    if cfg.lambda_min is not None and cfg.lambda_max is not None and not cfg.lambda_min < cfg.lambda_max:
        problems.append("--lambda-min must be smaller than --lambda-max")
    if cfg.grid < 2:
        problems.append("--grid must be at least 2")
    if cfg.jobs < 1:
        problems.append("--jobs must be at least 1")
    if cfg.n_bands < 1 or cfg.n < 1:
        problems.append("counts must be positive")
    for tol in (cfg.rtol, cfg.atol):
        if tol is not None and not tol > 0:
            problems.append("tolerances must be positive")
    if problems:
        parser.error("; ".join(problems))
    return cfg


# ---------------------------------------------------------------------------
# commands; each returns (json_result, csv_tables) in original units
# ---------------------------------------------------------------------------

def _bands(Q, cfg, opts):
    bs = spectrum.band_edges(Q, cfg.n_bands, opts).scaled(Q.energy_scale)
    gaps = {g.index: g for g in bs.gaps}
    rows = []
    for b in bs.bands:
        g = gaps.get(b.index + 1)
        rows.append([b.index, b.alpha, b.beta, g.width if g else None, g.closed if g else None,
                     g.closure_type if g else None])
    drows = [[d.index, d.mu, d.delta_at_mu, d.delta_p_at_mu, d.delta_pp_at_mu] for d in bs.dirichlet]
    return bs.to_dict(), {"bands": rows, "dirichlet": drows}


def _dirichlet(Q, cfg, opts):
    T = Q.energy_scale
    rows = []
    for mu in spectrum.dirichlet_eigenvalues(Q, cfg.n, opts):
        cls = spectrum.classify_gap(Q, mu, opts)
        rows.append([mu.index, mu.mu / T, mu.s1_derivative * T**1.5, mu.delta_at_mu,
                     mu.delta_p_at_mu * T, mu.delta_pp_at_mu * T**2, cls.closed, cls.closure_type])
    cols = SCHEMA["commands"]["dirichlet"]["csv_columns"]
    return {"rows": [dict(zip(cols, r)) for r in rows]}, {"": rows}


def _discriminant(Q, cfg, opts):
    T = Q.energy_scale
    data = discriminant_grid(Q, cfg.lambda_min * T, cfg.lambda_max * T, cfg.grid, opts, jobs=cfg.jobs)
    data = data * np.array([1 / T, 1.0, T, T**2, math.sqrt(T)])
    cols = SCHEMA["commands"]["discriminant"]["csv_columns"]
    rows = data.tolist()
    return {"columns": cols, "rows": rows}, {"": rows}


def _weyl(Q, cfg, opts):
    T = Q.energy_scale
    z = np.array(cfg.z, dtype=complex) * T
    W = weyl_matrix(Q, z, opts, on_singular="raise")
    hp = h_plus_minus(Q, z, 1, opts)
    hm = h_plus_minus(Q, z, -1, opts)
    scale = 1.0 / math.sqrt(T)
    rows = []
    for i, zi in enumerate(cfg.z):
        vals = [W.m11[i], W.m12[i], W.m21[i], W.m22[i], hp[i], hm[i]]
        row = [zi.real, zi.imag]
        for v in vals:
            row += [v.real * scale, v.imag * scale]
        rows.append(row)
    return {"columns": SCHEMA["commands"]["weyl"]["csv_columns"], "rows": rows}, {"": rows}


def _verify(Q, cfg, opts):
    T = Q.energy_scale
    qmin, _ = potential_bounds(Q)
    hi = cfg.lambda_max * T
    if not hi > qmin - 5:
        raise HillError("--lambda-max lies below the rectangle's left edge", lambda_max=cfg.lambda_max)
    rect = herglotz.GridSpec(qmin - 5, hi)
    funcs = {"h_plus": lambda z: h_plus_minus(Q, z, 1, opts, on_singular="nan"),
             "h_minus": lambda z: h_plus_minus(Q, z, -1, opts, on_singular="nan")}
    for xi in XIS:
        funcs[f"form_{xi[0]}_{xi[1]}"] = (lambda v: lambda z: weyl_matrix(
            Q, z, opts, on_singular="nan").quadratic_form(np.array(v, dtype=complex)))(xi)
    reports = {k: herglotz.verify_herglotz(f, rect).to_dict() for k, f in funcs.items()}

    mus = []
    count = 4
    while True:
        mus = spectrum.dirichlet_eigenvalues(Q, count, opts)
        if mus[-1].mu > hi:
            break
        count *= 2
    inside = [m for m in mus if m.mu < hi]
    lemma = {}
    for conv in ("weyl", "negated"):
        mh, nh = herglotz.principal_instance(Q, conv, opts)
        lemma[conv] = herglotz.lemma2_suite(mh, nh, (qmin - 5, hi), -2.0, 2.0, [m.mu for m in inside]).to_dict()
    residues = herglotz.hill_residues(Q, inside, opts) if inside else []
    result = {
        "rectangle": {"re": [(qmin - 5) / T, cfg.lambda_max], "im": [rect.im_min / T, rect.im_max / T],
                      "internal": _jsonable(rect.__dict__)},
        "herglotz": reports, "lemma2": lemma, "residues": residues,
    }
    residue_ok = all(r["consistent"] for r in residues)
    result["passed"] = {"herglotz": all(r["verdict"] == "pass" for r in reports.values()),
                        "lemma2_weyl": lemma["weyl"]["passed"], "lemma2_negated": lemma["negated"]["passed"],
                        "residues": residue_ok}
    rows = [[f"herglotz:{k}", r["verdict"] == "pass", f"min_im={r['min_signed_imag']:.3e}"]
            for k, r in reports.items()]
    for conv, rep in lemma.items():
        for item, v in rep["items"].items():
            rows.append([f"lemma2_{conv}:{item}", v["passed"], f"checked={v['checked']}"])
    rows.append(["residues", residue_ok, f"count={len(residues)}"])
    return result, {"": rows}


def _oracle_compare(Q, cfg, opts):
    T = Q.energy_scale
    bs = spectrum.band_edges(Q, cfg.n_bands, opts)
    ref = [(b.alpha, b.beta) for b in bs.bands]
    methods = ("bloch", "fd") if cfg.method == "both" else (cfg.method,)
    rows, worst = [], {}
    for m in methods:
        edges = oracles.bloch_band_edges(Q, cfg.n_bands) if m == "bloch" else oracles.fd_band_edges(Q, cfg.n_bands)
        worst[m] = 0.0
        for n, (r, o) in enumerate(zip(ref, edges)):
            for name, rv, ov in (("alpha", r[0], o[0]), ("beta", r[1], o[1])):
                d = abs(rv - ov) / T
                worst[m] = max(worst[m], d)
                rows.append([m, n, name, rv / T, ov / T, d])
    cols = SCHEMA["commands"]["oracle-compare"]["csv_columns"]
    return {"rows": [dict(zip(cols, r)) for r in rows], "max_defect": worst}, {"": rows}


COMMANDS = {"bands": _bands, "dirichlet": _dirichlet, "discriminant": _discriminant,
            "verify": _verify, "weyl": _weyl, "oracle-compare": _oracle_compare}


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def _csv_text(command, tables) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    spec = SCHEMA["commands"][command]
    headers = spec.get("csv_tables") or {"": spec["csv_columns"]}
    first = True
    for name, cols in headers.items():
        if not first:
            buf.write("\n")
        first = False
        w.writerow(cols)
        for row in tables[name]:
            w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def render(cfg: RunConfig, Q, result, tables) -> str:
    if cfg.fmt == "csv":
        return _csv_text(cfg.command, tables)
    doc = {"schema_version": SCHEMA_VERSION, "command": cfg.command, "potential": Q.to_document(),
           "energy_scale": Q.energy_scale, "result": _jsonable(result)}
    return json.dumps(doc, indent=1, allow_nan=True) + "\n"


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        cfg = parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        Q = load_potential(cfg.potential)
        opts = cfg.options()
        result, tables = COMMANDS[cfg.command](Q, cfg, opts)
        text = render(cfg, Q, result, tables)
    except HillError as exc:
        stderr.write(json.dumps(exc.to_dict()) + "\n")
        return 1
    except (OSError, ValueError, ArithmeticError) as exc:
        stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc), "diagnostics": {}}) + "\n")
        return 1
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return 0


def main() -> None:
    sys.exit(run(sys.argv[1:]))
