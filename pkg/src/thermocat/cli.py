"""Command-line front end: one JSON problem spec in, one CSV or JSON table out."""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .catalysis import (
    CompositeContext,
    ceto_set_fixed_catalyst,
    composite_beta_order,
    cooling_scan,
    ceto2_scan,
    qubit_anchor_library,
    recombine,
    tensor,
    trajectory_report,
    ALPHAS,
)
from .core import (
    ThermalContext,
    barycentric,
    beta_order,
    format_order,
    free_energy_delta,
    is_tightly_thermomajorised,
    thermo_curve,
    thermomajorises,
)
from .errors import BudgetExceeded, NotMember, PreconditionViolated, ThermocatError
from .reach import (
    eto_extreme_points,
    gibbs_stochastic_feasible,
    mto_extreme_candidates,
    to_extreme_points,
)
from .swaps import SwapSequence, TwoLevelProcess
from .unitary import decompose

EXIT_OK, EXIT_SPEC, EXIT_PRECONDITION, EXIT_BUDGET = 0, 2, 3, 4
EXACT_SCAN_POINTS = 25


class SpecError(Exception):
    pass


@dataclass
class ProblemSpec:
    energies: np.ndarray
    beta: float
    state: np.ndarray | None
    catalyst: dict | None = None
    target: np.ndarray | None = None
    options: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)
    base: Path = Path(".")

    @property
    def ctx(self) -> ThermalContext:
        return ThermalContext.at(self.energies, self.beta)

    @property
    def digest(self) -> str:
        return hashlib.sha256(json.dumps(self.raw, sort_keys=True).encode()).hexdigest()


def load_spec(path: str, need_state: bool = True) -> ProblemSpec:
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise SpecError(f"cannot read spec: {exc}") from exc
    if not isinstance(raw, dict):
        raise SpecError("spec must be a JSON object")
    try:
        energies = np.asarray(raw["energies"], dtype=float)
        beta = float(raw.get("beta", 1.0))
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecError(f"bad energies/beta: {exc}") from exc
    if energies.ndim != 1 or energies.size == 0 or not np.all(np.isfinite(energies)):
        raise SpecError("energies must be a non-empty list of numbers")
    if np.any(np.diff(energies) < 0):
        raise SpecError("energies must be sorted non-decreasing")
    if not beta > 0:
        raise SpecError("beta must be positive")
    spec = ProblemSpec(energies, beta, None, raw.get("catalyst"), None, raw.get("options", {}), raw, Path(path).parent)
    ctx = spec.ctx
    for key in ("state", "target"):
        if key in raw:
            try:
                setattr(spec, key, ctx.check(raw[key]))
            except (TypeError, ValueError) as exc:
                raise SpecError(f"bad {key}: {exc}") from exc
    if need_state and spec.state is None:
        raise SpecError("spec needs a 'state'")
    if not isinstance(spec.options, dict):
        raise SpecError("options must be an object")
    return spec


def fmt(x) -> str:
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.12g}"


def _num(x):
    if isinstance(x, (np.floating, float)):
        return float(fmt(x)) if math.isfinite(x) else fmt(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.ndarray):
        return [_num(v) for v in x.tolist()]
    if isinstance(x, (list, tuple)):
        return [_num(v) for v in x]
    if isinstance(x, dict):
        return {k: _num(v) for k, v in x.items()}
    return x


def _meta(spec: ProblemSpec, command: str) -> dict:
    return {"tool": "thermocat", "version": __version__, "command": command, "spec_sha256": spec.digest}


def emit_json(spec: ProblemSpec, command: str, payload: dict) -> str:
    doc = {"meta": _meta(spec, command), **_num(payload)}
    return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def emit_csv(spec: ProblemSpec, command: str, header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    meta = _meta(spec, command)
    buf.write(f"# {meta['tool']} {meta['version']} {command}\n# spec_sha256 {meta['spec_sha256']}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


# ---------------------------------------------------------------- commands


def _drop_collinear(xy: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    keep = [0]
    for i in range(1, len(xy) - 1):
        a, b, c = xy[keep[-1]], xy[i], xy[i + 1]
        cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        if abs(cross) > tol:
            keep.append(i)
    keep.append(len(xy) - 1)
    return xy[keep]


def cmd_curve(spec: ProblemSpec) -> str:
    ctx = spec.ctx
    curve = thermo_curve(spec.state, ctx)
    n = int(spec.options.get("samples", 11))
    rows = [["elbow", x, y] for x, y in _drop_collinear(curve.elbows)]
    rows += [["sample", x, y] for x, y in curve.sample(n)]
    return emit_csv(spec, "curve", ["kind", "x", "y"], rows)


def cmd_extremes(spec: ProblemSpec, kind: str) -> str:
    ctx = spec.ctx
    opts = spec.options
    if kind == "to":
        rset = to_extreme_points(spec.state, ctx)
    elif kind == "eto":
        kw = {}
        if "l_max" in opts:
            kw["l_max"] = int(opts["l_max"])
        rset = eto_extreme_points(spec.state, ctx, **kw)
    else:
        rset = mto_extreme_candidates(spec.state, ctx)
    rows = []
    for i, v in enumerate(rset.vertices):
        row = {"populations": v, "beta_order": format_order(beta_order(v, ctx)), "provenance": rset.describe(i)}
        if ctx.dim == 3:
            row["barycentric"] = list(barycentric(v))
        rows.append(row)
    payload = {"class": rset.kind, "exact": rset.exact, "note": rset.note, "vertices": rows}
    if ctx.dim == 3:
        payload["source_barycentric"] = list(barycentric(spec.state))
    return emit_json(spec, "extremes", payload)


def cmd_majorize(spec: ProblemSpec) -> str:
    if spec.target is None:
        raise SpecError("majorize needs a 'target'")
    ctx = spec.ctx
    p, q = spec.state, spec.target
    maj = thermomajorises(p, q, ctx)
    payload = {
        "thermomajorises": maj,
        "gibbs_stochastic_feasible": gibbs_stochastic_feasible(p, q, ctx),
        "tight": is_tightly_thermomajorised(p, q, ctx) if maj else False,
        "free_energy": {
            fmt(a): [free_energy_delta(a, p, ctx), free_energy_delta(a, q, ctx)] for a in (0.0, 0.5, 1.0, 2.0, math.inf)
        },
    }
    return emit_json(spec, "majorize", payload)


def _catalyst(spec: ProblemSpec) -> dict:
    cat = spec.catalyst
    if not isinstance(cat, dict) or "distribution" not in cat:
        raise SpecError("catalysis needs a 'catalyst' object with a 'distribution'")
    return cat


def _parse_sequence(items, cc: CompositeContext) -> SwapSequence:
    index = {lab: i for i, lab in enumerate(cc.labels)}
    procs = []
    for item in items:
        try:
            a, b = index[str(item[0])], index[str(item[1])]
            lam = float(item[2]) if len(item) > 2 else 1.0
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            raise SpecError(f"bad sequence entry {item!r}") from exc
        procs.append(TwoLevelProcess.make(a, b, lam, cc.ctx))
    return SwapSequence(tuple(procs), cc.dim)


def _trajectory_rows(record, cc: CompositeContext):
    labels = cc.labels
    header = ["step", "process"] + [f"r[{l}]" for l in labels]
    header += [f"system[{i + 1}]" for i in range(cc.system.dim)]
    header += [f"catalyst[{i + 1}]" for i in range(cc.catalyst.dim)]
    for part in ("system", "catalyst", "total"):
        header += [f"dF{fmt(a)}_{part}" for a in ALPHAS]
    header.append("mutual_information")
    rows = []
    for s in record.steps:
        row = [fmt(s.position), s.label, *s.state, *s.system, *s.catalyst]
        for part in ("system", "catalyst", "total"):
            row += [s.free_energy[part][a] for a in ALPHAS]
        row.append(s.mutual_information)
        rows.append(row)
    return header, rows


def cmd_catalysis(spec: ProblemSpec) -> str:
    ctx = spec.ctx
    cat = _catalyst(spec)
    opts = spec.options
    level = int(opts.get("level", 1)) - 1
    dist = cat["distribution"]
    if dist == "scan":
        if int(cat.get("dim", 2)) != 2:
            raise SpecError("scans are over qubit catalysts")
        n = int(opts.get("grid_points", 1001))
        grid = np.linspace(0.0, 1.0, n)
        exact = bool(opts.get("exact", n <= EXACT_SCAN_POINTS))
        cc = CompositeContext.degenerate(ctx, 2)
        library = None if exact else qubit_anchor_library(spec.state, cc)
        scan = ceto2_scan(spec.state, ctx, grid, level, library)
        header = ["c1"] + [f"q[{i + 1}]" for i in range(ctx.dim)] + ["objective"]
        rows = [[c1, *q, v] for c1, q, v in zip(scan.grid, scan.optima, scan.values)]
        return emit_csv(spec, "catalysis-scan", header, rows)
    c = np.asarray(dist, dtype=float)
    cc = CompositeContext.degenerate(ctx, c.size)
    try:
        c = cc.catalyst.check(c)
    except ValueError as exc:
        raise SpecError(f"bad catalyst: {exc}") from exc
    x = tensor(spec.state, c, cc)
    if "sequence" in opts:
        seq = _parse_sequence(opts["sequence"], cc)
    else:
        cset = ceto_set_fixed_catalyst(spec.state, c, cc)
        if spec.target is not None:
            q = spec.target
            cert = cset.membership(q)
            if cert is None:
                raise NotMember("target is not reachable with this catalyst")
        else:
            opt = cset.min_level(level)
            q, cert = opt.state, opt.certificate
        seqs = [cset.composite.sequence(i) for i in cert.indices]
        rec = recombine(seqs, x, tensor(q, c, cc), cc.ctx, tol=1e-8) if all(seqs) else None
        if rec is None:
            raise PreconditionViolated("the supporting sequences could not be merged into one sequence")
        seq = rec.sequence
    record = trajectory_report(x, seq, cc, n_grid=2)
    header, rows = _trajectory_rows(record, cc)
    text = emit_csv(spec, "catalysis-trajectory", header, rows)
    order = composite_beta_order(x, cc)[1]
    return text + f"# initial composite beta-order {order}\n# sequence {seq.notation(cc.labels)}\n"


def cmd_cooling(spec: ProblemSpec) -> str:
    opts = spec.options
    try:
        beta_h = float(opts["beta_h"])
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecError("cooling needs options.beta_h") from exc
    dims = [int(d) for d in opts.get("dims", [1, 2])]
    res = cooling_scan(
        beta_h,
        spec.beta,
        spec.energies,
        dims,
        mode=str(opts.get("mode", "auto")),
        resolution=int(opts.get("resolution", 4)),
        tol=float(opts.get("tol", 1e-4)),
        seed=int(opts.get("seed", 0)),
    )
    rows = [["TO", "-", "limit", res.beta_to, "", 1], ["ETO", 1, "limit", res.beta_eto, "1", 1]]
    for d in sorted(res.dims):
        dim = res.dims[d]
        for kind, r in (("best", dim.best), ("worst", dim.worst)):
            rows.append(["CETO", d, kind, r.beta, " ".join(fmt(v) for v in r.catalyst), int(dim.exact)])
    return emit_csv(spec, "cooling", ["class", "catalyst_dim", "kind", "beta_c", "catalyst", "exact"], rows)


def _load_matrix(path: Path) -> np.ndarray:
    try:
        text = path.read_text()
    except OSError as exc:
        raise SpecError(f"cannot read matrix: {exc}") from exc
    try:
        if path.suffix.lower() == ".json":
            doc = json.loads(text)
            if isinstance(doc, dict):
                m = np.asarray(doc["real"], dtype=float) + 1j * np.asarray(doc.get("imag", 0.0), dtype=float)
            else:
                m = np.asarray(doc, dtype=float)
        else:
            rows = [r for r in csv.reader(io.StringIO(text)) if r and not r[0].startswith("#")]
            m = np.array([[complex(v.strip().replace(" ", "")) for v in r] for r in rows])
    except (KeyError, ValueError, TypeError) as exc:
        raise SpecError(f"bad matrix file: {exc}") from exc
    return np.asarray(m, dtype=complex)


def cmd_decompose(spec: ProblemSpec) -> str:
    name = spec.raw.get("matrix_file")
    if not name:
        raise SpecError("decompose needs 'matrix_file'")
    u = _load_matrix(spec.base / name)
    h0 = spec.energies
    if u.shape != (h0.size, h0.size):
        raise SpecError(f"matrix shape {u.shape} does not match {h0.size} energies")
    dec = decompose(u, h0)
    factors = [
        {"levels": [f.a + 1, f.b + 1], "real": f.block.real, "imag": f.block.imag} for f in dec.factors
    ]
    payload = {
        "factors": factors,
        "phases": {"real": dec.phases.real, "imag": dec.phases.imag},
        "blocks": [[i + 1 for i in b] for b in dec.blocks],
        "factor_bound": dec.bound,
        "reconstruction_error": float(np.max(np.abs(dec.reconstruct() - u))),
    }
    return emit_json(spec, "decompose", payload)


# ---------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="thermocat", description=__doc__)
    parser.add_argument("--version", action="version", version=f"thermocat {__version__}")
    parser.add_argument("--threads", type=int, default=1, help="worker cap (computations are single-threaded)")
    parser.add_argument("-o", "--output", help="write to this file instead of stdout")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("curve", "majorize", "catalysis", "cooling", "decompose"):
        sub.add_parser(name).add_argument("spec")
    ext = sub.add_parser("extremes")
    ext.add_argument("spec")
    ext.add_argument("--class", dest="kind", choices=("to", "eto", "mto"), default="eto")
    return parser


def run(args) -> str:
    need_state = args.command not in ("cooling", "decompose")
    spec = load_spec(args.spec, need_state=need_state)
    if args.command == "curve":
        return cmd_curve(spec)
    if args.command == "extremes":
        return cmd_extremes(spec, args.kind)
    if args.command == "majorize":
        return cmd_majorize(spec)
    if args.command == "catalysis":
        return cmd_catalysis(spec)
    if args.command == "cooling":
        return cmd_cooling(spec)
    return cmd_decompose(spec)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = run(args)
    except SpecError as exc:
        print(f"spec error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    except (PreconditionViolated, NotMember) as exc:
        print(f"precondition violated: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except ThermocatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
