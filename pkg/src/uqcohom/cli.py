"""Command-line entry point: ``uqcohom {h1,h2,recurrence,verify-rep,triples,nogo}``."""

import argparse
import csv
import io
import sys
import time
from dataclasses import asdict, dataclass

import numpy as np

from . import __version__
from .errors import (
    CohomologyError,
    CrossCheckFailed,
    EliminationFailed,
    NoConvergenceWithinBudget,
    RecurrenceOverflow,
    SpanShortfall,
    UnsupportedGPCase,
)
from .one_cocycles import cocycle_null_space, h1_dimension
from .pipeline import (
    COMPUTED,
    PipelineConfig,
    compute_h2,
    decay_ratio,
    nogo_experiment,
    select_triples,
    verify_independence,
)
from .q_recurrence import (
    RecurrenceParams,
    g_limit,
    gp_probe,
    is_square_summable,
    ratio_limit,
    run_recurrence,
)
from .representations import (
    epsilon_rep,
    infdim_rep,
    keyrep,
    random_block_unitary_rep,
    relation_residuals,
    suq2_generators,
    suq2_relation_residuals,
)
from .serialize import atomic_write, dumps
from .spectrum import build_spectrum, is_geometric_triple
from .spectrum import DEFAULT_GROUPING_TOL, DEFAULT_GP_TOL

SCHEMA = 1

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_CROSSCHECK = 2
EXIT_UNSUPPORTED = 3
EXIT_SHORTFALL = 4
EXIT_OVERFLOW = 5
EXIT_ELIMINATION = 6
EXIT_NUMERICAL = 7

DEFAULTS = {
    "q": None,
    "seed": 0,
    "sv_tol": 1e-10,
    "gp_tol": DEFAULT_GP_TOL,
    "tail_tol": 1e-10,
    "grouping_tol": DEFAULT_GROUPING_TOL,
    "max_samples": 12,
    "truncation_cap": 400,
    "out": None,
    "csv": None,
    "timing": False,
    "a": None,
    "b": None,
    "K": 200,
    "kind": "epsilon",
    "m": 2,
    "N": 100,
    "M": None,
    "tol": 1e-12,
    "samples": 50,
    "nogo_samples": 10,
}


@dataclass(frozen=True)
class RunConfig:
    q_diag: tuple
    grouping_tol: float
    gp_tol: float
    sv_tol: float
    tail_tol: float
    seed: int
    max_samples: int
    truncation_cap: int
    output_path: str | None

    def __post_init__(self):
        for name in ("grouping_tol", "gp_tol", "sv_tol", "tail_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    def pipeline(self):
        return PipelineConfig(
            seed=self.seed, max_samples=self.max_samples, sv_tol=self.sv_tol,
            tail_tol=self.tail_tol, truncation_cap=self.truncation_cap, gp_tol=self.gp_tol,
        )

    def to_json(self):
        d = asdict(self)
        d["q_diag"] = list(self.q_diag)
        return d


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(EXIT_INPUT)


def _float_list(text):
    return [float(x) for x in str(text).split(",") if x.strip()]


def read_config(path):
    """Flat ``key = value`` file; ``#`` starts a comment; hyphens and underscores are equivalent."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key, val = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = val
    return out


def _coerce(key, value):
    if value is None:
        return None
    if key in ("seed", "max_samples", "truncation_cap", "K", "m", "N", "M", "samples", "nogo_samples"):
        return int(value)
    if key in ("sv_tol", "gp_tol", "tail_tol", "grouping_tol", "a", "b", "tol"):
        return float(value)
    if key == "timing":
        return value if isinstance(value, bool) else str(value).lower() in ("1", "true", "yes")
    return value


def build_parser():
    p = _Parser(prog="uqcohom", description="Hochschild cohomology of U_Q^+ at finite truncation.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--q", help="diagonal of Q as a comma list (a single float for recurrence)")
        sp.add_argument("--config", help="flat key=value file; command-line flags take precedence")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--sv-tol", type=float)
        sp.add_argument("--gp-tol", type=float)
        sp.add_argument("--tail-tol", type=float)
        sp.add_argument("--grouping-tol", type=float)
        sp.add_argument("--max-samples", type=int)
        sp.add_argument("--truncation-cap", type=int)
        sp.add_argument("--out", help="write the JSON report here (atomically)")
        return sp

    common(sub.add_parser("h1", help="first cohomology dimension"))
    h2 = common(sub.add_parser("h2", help="certified basis of the second cohomology"))
    h2.add_argument("--nogo-samples", type=int)
    h2.add_argument("--timing", action="store_true", default=None,
                    help="include wall-clock timings (makes output non-deterministic)")
    rec = common(sub.add_parser("recurrence", help="run the three-term recurrence"))
    rec.add_argument("--a", type=float)
    rec.add_argument("--b", type=float)
    rec.add_argument("--K", type=int)
    rec.add_argument("--csv", help="write (k, b_k, ratio, g_k) rows here instead of stdout")
    vr = common(sub.add_parser("verify-rep", help="relation residuals of a representation"))
    vr.add_argument("--kind", choices=["epsilon", "random", "keyrep", "infdim"])
    vr.add_argument("--m", type=int)
    vr.add_argument("--N", type=int)
    vr.add_argument("--M", type=int)
    vr.add_argument("--tol", type=float)
    common(sub.add_parser("triples", help="triple selection for four or more blocks"))
    ng = common(sub.add_parser("nogo", help="partial traces of finite-dimensional cup products"))
    ng.add_argument("--samples", type=int)
    return p


def resolve(args):
    """Merge command-line values over the config file over built-in defaults."""
    file_vals = read_config(args.config) if getattr(args, "config", None) else {}
    out = {}
    for key, default in DEFAULTS.items():
        val = getattr(args, key, None)
        if val is None:
            val = _coerce(key, file_vals.get(key, default))
        out[key] = val
    return out


def _run_config(opts):
    if opts["q"] is None:
        raise ValueError("--q is required")
    return RunConfig(
        q_diag=tuple(_float_list(opts["q"])),
        grouping_tol=opts["grouping_tol"],
        gp_tol=opts["gp_tol"],
        sv_tol=opts["sv_tol"],
        tail_tol=opts["tail_tol"],
        seed=opts["seed"],
        max_samples=opts["max_samples"],
        truncation_cap=opts["truncation_cap"],
        output_path=opts["out"],
    )


def _header(command, config):
    return {"schema": SCHEMA, "version": __version__, "command": command, "config": config}


def _emit(report, out_path, stdout):
    text = dumps(report)
    if out_path:
        atomic_write(out_path, text)
    stdout.write(text)


def cmd_h1(opts, stdout):
    cfg = _run_config(opts)
    S = build_spectrum(cfg.q_diag, cfg.grouping_tol)
    report = _header("h1", cfg.to_json())
    report.update({"n": S.n, "mults": list(S.mults), "values": list(S.values)})
    try:
        dim = h1_dimension(S, cfg.sv_tol)
        basis, cert = cocycle_null_space(epsilon_rep(S), cfg.sv_tol)
        report.update({
            "h1_dimension": dim,
            "nullspace_crosscheck": {"dimension": int(basis.shape[0]), "agrees": True,
                                     "gap": cert.gap, "cutoff": cert.cutoff},
        })
        code = EXIT_OK
    except CrossCheckFailed as exc:
        report.update({"h1_dimension": None, "nullspace_crosscheck": {"agrees": False, "message": str(exc)}})
        code = EXIT_CROSSCHECK
    _emit(report, cfg.output_path, stdout)
    return code


def cmd_h2(opts, stdout):
    cfg = _run_config(opts)
    S = build_spectrum(cfg.q_diag, cfg.grouping_tol)
    report = _header("h2", cfg.to_json())
    timing = {}
    t0 = time.perf_counter()
    try:
        result = compute_h2(S, cfg.pipeline())
    except SpanShortfall as exc:
        report.update({"status": "SpanShortfall", "achieved_rank": exc.achieved_rank,
                       "target_rank": exc.target_rank, "message": str(exc)})
        _emit(report, cfg.output_path, stdout)
        return EXIT_SHORTFALL
    timing["assemble"] = time.perf_counter() - t0
    report.update(result.to_json())
    if result.status != COMPUTED:
        p2 = S.values[1] / S.values[0]
        report["gp_probe"] = gp_probe(p2, (50, 100, 200))
        _emit(report, cfg.output_path, stdout)
        return EXIT_UNSUPPORTED
    t0 = time.perf_counter()
    try:
        report["independence"] = verify_independence(result, S).to_json()
    except EliminationFailed as exc:
        report["independence"] = {"ok": False, "message": str(exc),
                                  "trace_table": np.abs(exc.trace_table).tolist()}
        _emit(report, cfg.output_path, stdout)
        return EXIT_ELIMINATION
    timing["independence"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    report["nogo"] = nogo_experiment(S, opts["nogo_samples"], cfg.seed, sv_tol=cfg.sv_tol).to_json()
    timing["nogo"] = time.perf_counter() - t0
    if opts["timing"]:
        report["timing"] = timing
    _emit(report, cfg.output_path, stdout)
    return EXIT_OK


def _fmt(x):
    return np.format_float_scientific(x, precision=16, unique=False)


def cmd_recurrence(opts, stdout):
    for key in ("q", "a", "b"):
        if opts[key] is None:
            raise ValueError(f"--{key} is required")
    params = RecurrenceParams(q=float(opts["q"]), a=opts["a"], b=opts["b"])
    run = run_recurrence(params, opts["K"])
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["k", "b_k", "ratio", "g_k"])
    ratios = run.ratios
    for k in range(run.K + 1):
        writer.writerow([k, _fmt(run.b_seq[k]), _fmt(ratios[k - 1]) if k else "", _fmt(run.g_seq[k])])
    try:
        est, k_reached = ratio_limit(params, 1e-6, max(run.K, 5000))
        converged = True
    except NoConvergenceWithinBudget as exc:
        est, k_reached, converged = exc.estimate, exc.k_reached, False
    summary = {
        "schema": SCHEMA,
        "version": __version__,
        "command": "recurrence",
        "config": {"q": params.q, "a": params.a, "b": params.b, "K": run.K},
        "ratio_limit_estimate": est,
        "ratio_converged": converged,
        "k_reached": k_reached,
        "max_ab": params.dominant,
        "g_limit": g_limit(params),
        "square_summable": is_square_summable(params),
        "product_identity_residual": run.product_identity_residual(),
    }
    if opts["csv"]:
        atomic_write(opts["csv"], buf.getvalue())
        _emit(summary, opts["out"], stdout)
    else:
        stdout.write(buf.getvalue())
        stdout.write("# " + dumps(summary, indent=0).replace("\n", "") + "\n")
        if opts["out"]:
            atomic_write(opts["out"], dumps(summary))
    return EXIT_OK


def cmd_verify_rep(opts, stdout):
    kind = opts["kind"]
    report = _header("verify-rep", {"kind": kind, "q": opts["q"], "m": opts["m"], "N": opts["N"],
                                     "M": opts["M"], "seed": opts["seed"], "tol": opts["tol"]})
    if kind in ("epsilon", "random"):
        cfg = _run_config(opts)
        S = build_spectrum(cfg.q_diag, cfg.grouping_tol)
        R = epsilon_rep(S) if kind == "epsilon" else random_block_unitary_rep(S, opts["m"], cfg.seed)
    else:
        diag = _float_list(opts["q"]) if opts["q"] is not None else [1.0, 0.64, 0.25]
        if len(diag) != 3:
            raise ValueError("keyrep/infdim need a three-entry --q")
        S0 = build_spectrum(diag, opts["grouping_tol"])
        q = float(np.sqrt(S0.values[2]))
        p = float(np.sqrt(S0.values[1]))
        R = (keyrep if kind == "keyrep" else infdim_rep)(p, q, opts["N"])
        report["suq2"] = suq2_relation_residuals(suq2_generators(q, opts["N"]))
    res = relation_residuals(R, opts["M"])
    worst = max(res.values())
    report.update({"d": R.d, "m": R.m, "rep_kind": R.kind,
                   "compression": R.buffer if opts["M"] is None else opts["M"],
                   "residuals": res, "max_residual": worst, "passed": bool(worst <= opts["tol"])})
    _emit(report, opts["out"], stdout)
    return EXIT_OK if worst <= opts["tol"] else EXIT_CROSSCHECK


def cmd_triples(opts, stdout):
    cfg = _run_config(opts)
    S = build_spectrum(cfg.q_diag, cfg.grouping_tol)
    sel = select_triples(S, cfg.gp_tol)
    report = _header("triples", cfg.to_json())
    report.update({"values": list(S.values), **sel.to_json()})
    report["details"] = [
        {"triple": list(t),
         "geometric": is_geometric_triple(*(S.values[b] for b in t), rel_tol=cfg.gp_tol),
         "decay_ratio": decay_ratio([S.values[b] for b in t])}
        for t in sel.triples
    ]
    _emit(report, cfg.output_path, stdout)
    return EXIT_OK


def cmd_nogo(opts, stdout):
    cfg = _run_config(opts)
    S = build_spectrum(cfg.q_diag, cfg.grouping_tol)
    rep = nogo_experiment(S, opts["samples"], cfg.seed, sv_tol=cfg.sv_tol)
    report = _header("nogo", cfg.to_json())
    report.update(rep.to_json())
    _emit(report, cfg.output_path, stdout)
    return EXIT_OK if rep.passed else EXIT_CROSSCHECK


COMMANDS = {
    "h1": cmd_h1,
    "h2": cmd_h2,
    "recurrence": cmd_recurrence,
    "verify-rep": cmd_verify_rep,
    "triples": cmd_triples,
    "nogo": cmd_nogo,
}


def main(argv=None, stdout=None):
    stdout = stdout or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        opts = resolve(args)
        return COMMANDS[args.command](opts, stdout)
    except UnsupportedGPCase as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except SpanShortfall as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SHORTFALL
    except RecurrenceOverflow as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OVERFLOW
    except EliminationFailed as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ELIMINATION
    except CrossCheckFailed as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CROSSCHECK
    except (ValueError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except CohomologyError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
