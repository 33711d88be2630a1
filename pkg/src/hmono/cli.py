"""Configuration-driven experiment runner.

Usage::

    hmono SCENARIO [--config PATH] [--seed N] [--out DIR] [--quad-nodes N] [options]
    hmono --config PATH            # scenario taken from [run] scenario
    hmono --print-defaults

Every scenario writes ``<out>/<scenario>.tsv`` (one header line naming the
columns, then rows) and ``<out>/<scenario>.summary.txt`` (key=value lines).
Both start with ``#`` provenance lines carrying the tool version and a
hash of the resolved configuration. Exit status: 0 when every check
passes, 1 when a check fails, 2 for usage errors, 3 for crashes.
"""

import argparse
import configparser
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .cost_kernel import CostFunction, ellipticity_bounds
from .estimates import AffineFrame, BallSpec, green_identity_residual, linfty_bound, profile_table
from .exceptions import ControlFailureError, GeneratorRejectedError, HMonoError, InputError
from .lemma_suite import (j_lower_constant, verify_gap_sandwich, verify_j_lower,
                          verify_j_single_sandwich)
from .monotone_core import QuadratureSpec, check_map_monotone, load_sampled_map, save_sampled_map
from .regularity import (bd_inequality_values, dh_composition_t11_probe, direction_set,
                         holder_profile, make_bump_family, sample_centers,
                         tkp_profile)
from .transport_gen import Density, make_generator_map, make_negative_map

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_CRASH = 0, 1, 2, 3

SCENARIOS = ("verify-lemmas", "check-monotone", "ot-generate", "estimate-linfty",
             "holder-scan", "bd-check", "tkp-scan", "green-check")

# section -> key -> (default, description)
DEFAULTS = {
    "run": {
        "scenario": ("", "one of: " + ", ".join(SCENARIOS)),
        "seed": ("0", "seed for every random choice"),
        "out": ("hmono-out", "output directory"),
    },
    "cost": {
        "n": ("2", "dimension"),
        "p": ("3", "exponent p >= 2"),
        "matrix": ("", "optional SPD matrix, rows separated by ';' (anisotropic cost)"),
    },
    "map": {
        "source": ("generator", "generator | file"),
        "path": ("", "map file for source = file"),
        "kind": ("ot_grid", "identity | translation | scaling | ot_grid | reflection | shuffled_ot"),
        "box_min": ("0,0", "lower box corner"),
        "box_max": ("1,1", "upper box corner"),
        "shape": ("16,16", "nodes per axis"),
        "density": ("gaussian", "ot_grid target: gaussian | uniform | two_bump"),
        "sigma": ("0.15", "target width"),
        "jitter": ("0.1", "target jitter in grid spacings"),
        "shift": ("0.1,0", "translation vector"),
        "factor": ("0.5", "scaling factor"),
        "max_points": ("512", "cap on assignment size"),
    },
    "quadrature": {
        "nodes_1d": ("64", "Gauss-Legendre nodes per axis for lemma integrals"),
        "tolerance": ("1e-10", "agreement tolerance between integral paths"),
        "max_nodes": ("256", "cap for node doubling"),
    },
    "verify-lemmas": {
        "p_grid": ("2,2.5,3,4", "exponents"),
        "samples": ("100", "random inputs per exponent"),
    },
    "check-monotone": {
        "pair_budget": ("1000000", "exhaustive up to this many pairs, sampled beyond"),
    },
    "ot-generate": {
        "pair_budget": ("2000000", "pairs used to certify the generated map"),
    },
    "estimate-linfty": {
        "A": ("fit", "affine part: 'fit', inline rows 'a,b;c,d', or a file"),
        "b": ("", "translation: inline 'b1,b2' or a file (ignored for A = fit)"),
        "x0": ("0.5,0.5", "ball center"),
        "R": ("0.4", "ball radius"),
        "beta": ("0.5", "inner radius fraction"),
        "p": ("", "exponent of the estimate (defaults to cost p)"),
        "C": ("1", "calibration constant"),
        "profile_points": ("64", "rows of the (r, H(r)) table"),
    },
    "holder-scan": {
        "centers": ("50", "number of seeded centers"),
        "r_max": ("0.3", "largest radius"),
        "r_min": ("0.12", "smallest radius (needs 2(n+1) nodes in its ball)"),
        "radii": ("6", "number of geometric radii"),
        "min_slope": ("-0.05", "Holder ratios must not trend below this slope"),
        "min_fraction": ("0.9", "fraction of centers that must pass"),
    },
    "tkp-scan": {
        "target": ("map", "map (T) or dh (Dh(x - Tx))"),
        "k": ("1", "order"),
        "q": ("inf", "integrability (inf for sup)"),
        "little": ("false", "test t^{k,q} instead of T^{k,q}"),
        "centers": ("20", "number of seeded centers"),
        "r_max": ("0.3", "largest radius"),
        "r_min": ("0.12", "smallest radius (needs 2(n+1) nodes in its ball)"),
        "radii": ("6", "number of geometric radii"),
        "min_fraction": ("0.9", "fraction of centers that must classify"),
    },
    "bd-check": {
        "bumps": ("20", "number of bumps"),
        "tolerance": ("1e-6", "allowed negativity relative to bump mass"),
        "expect": ("nonnegative", "nonnegative | negative (for negative controls)"),
    },
    "green-check": {
        "n": ("3", "dimension"),
        "y": ("0.1,-0.2,0.3", "center"),
        "radii": ("0.5,1", "radii"),
        "nodes": ("16", "nodes for exact cases"),
        "refine_nodes": ("3", "coarse nodes of the refinement test (doubled once)"),
        "min_reduction": ("2.5", "required residual reduction under refinement"),
    },
}


class UsageError(Exception):
    pass


# -- config -------------------------------------------------------------------


def defaults_text():
    lines = []
    for sec, keys in DEFAULTS.items():
        lines.append(f"[{sec}]")
        for k, (v, doc) in keys.items():
            lines.append(f"# {doc}")
            lines.append(f"{k} = {v}")
        lines.append("")
    return "\n".join(lines)


def _read_file(path):
    text = Path(path).read_text(encoding="utf-8")
    if text.lstrip().startswith("{"):
        return {s: {k: str(v) for k, v in d.items()} for s, d in json.loads(text).items()}
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    cp.read_string(text)
    return {s: dict(cp[s]) for s in cp.sections()}


def resolve_config(args):
    cfg = {s: {k: v for k, (v, _) in keys.items()} for s, keys in DEFAULTS.items()}
    if args.config:
        try:
            loaded = _read_file(args.config)
        except (OSError, configparser.Error, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        for sec, kv in loaded.items():
            if sec not in cfg:
                raise UsageError(f"unknown config section [{sec}]")
            for k, v in kv.items():
                if k not in cfg[sec]:
                    raise UsageError(f"unknown key '{k}' in section [{sec}]")
                cfg[sec][k] = v
    if args.scenario:
        cfg["run"]["scenario"] = args.scenario
    if args.seed is not None:
        cfg["run"]["seed"] = str(args.seed)
    if args.out is not None:
        cfg["run"]["out"] = args.out
    if args.quad_nodes is not None:
        cfg["quadrature"]["nodes_1d"] = str(args.quad_nodes)
    sc = cfg["run"]["scenario"]
    if sc not in SCENARIOS:
        raise UsageError(f"[run] scenario: expected one of {', '.join(SCENARIOS)}, got {sc!r}")
    for k, v in vars(args).items():
        if k.startswith("opt_") and v is not None:
            cfg[sc][k[4:]] = str(v)
    return cfg


def config_hash(cfg):
    # the output directory does not influence results
    core = {s: d for s, d in cfg.items()}
    core["run"] = {k: v for k, v in cfg["run"].items() if k != "out"}
    return hashlib.sha256(json.dumps(core, sort_keys=True).encode()).hexdigest()


class Params:
    """Typed access to one config section with field-level errors."""

    def __init__(self, cfg, section):
        self.sec, self.d = section, cfg[section]

    def _raw(self, key):
        return self.d[key].strip()

    def _fail(self, key, what):
        raise UsageError(f"[{self.sec}] {key}: {what}, got {self.d[key]!r}")

    def str(self, key):
        return self._raw(key)

    def float(self, key):
        try:
            return float(self._raw(key))
        except ValueError:
            self._fail(key, "expected a number")

    def int(self, key):
        try:
            return int(self._raw(key))
        except ValueError:
            self._fail(key, "expected an integer")

    def bool(self, key):
        v = self._raw(key).lower()
        if v not in ("true", "false", "1", "0", "yes", "no"):
            self._fail(key, "expected true or false")
        return v in ("true", "1", "yes")

    def vector(self, key):
        try:
            return np.array([float(t) for t in self._raw(key).replace(" ", "").split(",") if t])
        except ValueError:
            self._fail(key, "expected comma separated numbers")

    def matrix(self, key):
        raw = self._raw(key)
        try:
            if os.path.isfile(raw):
                return np.atleast_2d(np.loadtxt(raw))
            return np.array([[float(t) for t in row.split(",")] for row in raw.split(";")])
        except ValueError:
            self._fail(key, "expected rows 'a,b;c,d' or a matrix file")


def build_cost(cfg):
    c = Params(cfg, "cost")
    p = c.float("p")
    try:
        if c.str("matrix"):
            return CostFunction.anisotropic(c.matrix("matrix"), p)
        return CostFunction.isotropic(c.int("n"), p)
    except InputError as exc:
        raise UsageError(f"[cost] {exc}") from None


def build_map(cfg, cost, seed):
    m = Params(cfg, "map")
    if m.str("source") == "file":
        if not m.str("path"):
            raise UsageError("[map] path: required when source = file")
        try:
            return load_sampled_map(m.str("path"))
        except OSError as exc:
            raise UsageError(f"[map] path: {exc}") from None
    if m.str("source") != "generator":
        m._fail("source", "expected generator or file")
    try:
        shape = tuple(int(s) for s in m.vector("shape"))
    except (TypeError, ValueError):
        m._fail("shape", "expected integers")
    grid = (m.vector("box_min"), m.vector("box_max"), shape)
    kind = m.str("kind")
    density = Density(m.str("density"), sigma=m.float("sigma"))
    common = dict(density=density, jitter=m.float("jitter"), seed=seed,
                  max_points=m.int("max_points"))
    if kind in ("reflection", "shuffled_ot"):
        return make_negative_map(kind, cost, grid, **common)
    return make_generator_map(kind, cost, grid, shift=m.vector("shift"), factor=m.float("factor"),
                              **common)


# -- output -------------------------------------------------------------------


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.ndarray, list, tuple)):
        return " ".join(_fmt(x) for x in np.ravel(v))
    return str(v)


class Reporter:
    def __init__(self, out, scenario, cfg):
        self.out, self.scenario = Path(out), scenario
        # provenance lives in the summary so tables keep a single header line
        self.header = [f"hmono_version={__version__}", f"config_sha256={config_hash(cfg)}",
                       f"scenario={scenario}"]
        self.out.mkdir(parents=True, exist_ok=True)

    def table(self, rows, name=None, columns=None):
        path = self.out / f"{name or self.scenario}.tsv"
        if columns is None:
            columns = []
            for r in rows:
                columns += [k for k in r if k not in columns]
        lines = ["\t".join(columns)]
        lines += ["\t".join(_fmt(r.get(c, "")) for c in columns) for r in rows]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    def summary(self, record):
        path = self.out / f"{self.scenario}.summary.txt"
        lines = self.header + [f"{k}={_fmt(v)}" for k, v in record.items()]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path


# -- scenarios ----------------------------------------------------------------


def run_verify_lemmas(cfg, rep, seed, cost):
    s = Params(cfg, "verify-lemmas")
    q = Params(cfg, "quadrature")
    quad = QuadratureSpec(q.int("nodes_1d"), q.float("tolerance"), q.int("max_nodes"))
    n = cost.dimension
    rng = np.random.default_rng(seed)
    rows = []
    for p in s.vector("p_grid"):
        iso = CostFunction.isotropic(n, float(p))
        lam, Lam = ellipticity_bounds(iso)
        _, delta0 = j_lower_constant(float(p))
        for _ in range(s.int("samples")):
            scale = np.exp(rng.uniform(-2, 2, size=2))
            v1, v2 = (rng.normal(size=(2, n)).T * scale).T
            for r in (verify_j_lower(v1, v2, 0.5 * delta0, float(p), quad),
                      verify_j_single_sandwich(v1, v2, float(p)),
                      verify_gap_sandwich(iso, v1, v2, lam, Lam)):
                rec = r.to_record()
                rows.append({"lemma_id": rec["lemma_id"], "p": float(p),
                             "quad_value": rec["quad_value"], "bound": rec["bound"],
                             "margin": rec["margin"], "passed": rec["passed"]})
    rep.table(rows)
    summary = {"rows": len(rows), "failures": sum(not r["passed"] for r in rows)}
    for lid in sorted({r["lemma_id"] for r in rows}):
        summary[f"worst_margin_{lid}"] = min(r["margin"] for r in rows if r["lemma_id"] == lid)
    summary["passed"] = summary["failures"] == 0
    return summary


def run_check_monotone(cfg, rep, seed, cost):
    budget = Params(cfg, "check-monotone").int("pair_budget")
    try:
        smap = build_map(cfg, cost, seed)
    except ControlFailureError as exc:
        # a negative control that unexpectedly passes is still a map to report on
        smap = None
        report = exc.report
    except GeneratorRejectedError as exc:
        smap, report = None, exc.report
    if smap is not None:
        report = check_map_monotone(cost, smap, pair_budget=budget, seed=seed)
    rec = report.to_record()
    rep.table([rec])
    return rec


def run_ot_generate(cfg, rep, seed, cost):
    budget = Params(cfg, "ot-generate").int("pair_budget")
    try:
        smap = build_map(cfg, cost, seed)
    except GeneratorRejectedError as exc:
        rec = exc.report.to_record()
        rep.table([rec])
        return rec
    save_sampled_map(rep.out / "map.txt", smap)
    report = check_map_monotone(cost, smap, pair_budget=budget, seed=seed)
    n = smap.dimension
    rows = [{**{f"x{k + 1}": x[k] for k in range(n)}, **{f"T{k + 1}": t[k] for k in range(n)}}
            for x, t in zip(smap.points, smap.values)]
    rep.table(rows)
    return {"nodes": len(rows), "map_file": "map.txt", **report.to_record()}


def run_estimate_linfty(cfg, rep, seed, cost):
    s = Params(cfg, "estimate-linfty")
    smap = build_map(cfg, cost, seed)
    n = smap.dimension
    x0, R = s.vector("x0"), s.float("R")
    if x0.size != n:
        s._fail("x0", f"expected {n} coordinates")
    p = s.float("p") if s.str("p") else cost.exponent
    if s.str("A") == "fit":
        frame = AffineFrame.fit(smap, x0, R)
    else:
        A = s.matrix("A")
        b = s.vector("b") if s.str("b") else np.zeros(n)
        if A.shape != (n, n) or b.size != n:
            raise UsageError(f"[estimate-linfty] A must be {n}x{n} and b of length {n}")
        frame = AffineFrame(A, b)
    report = linfty_bound(smap, frame, BallSpec(x0, R, s.float("beta")), p, s.float("C"))
    table = profile_table(report, count=s.int("profile_points"))
    rep.table([{"r": r, "H": h} for r, h in table])
    rec = report.to_record()
    rec["passed"] = rec.pop("holds")
    return rec


def _profile_row(kind, prof):
    return {"probe": kind, "center": prof.center, "radii": prof.radii, "ratios": prof.ratios,
            "rate": prof.fitted_rate, "classification": prof.classification}


def _centers(smap, s, seed):
    r_max, r_min = s.float("r_max"), s.float("r_min")
    if not 0 < r_min < r_max:
        s._fail("r_min", "expected 0 < r_min < r_max")
    radii = r_max * np.logspace(0.0, np.log10(r_min / r_max), s.int("radii"))
    return sample_centers(smap, r_max, s.int("centers"), seed), radii


def run_holder_scan(cfg, rep, seed, cost):
    s = Params(cfg, "holder-scan")
    smap = build_map(cfg, cost, seed)
    idx, radii = _centers(smap, s, seed)
    rows, ok_h, ok_d = [], 0, 0
    for k in idx:
        hp = holder_profile(smap, int(k), cost.exponent, radii)
        dp = dh_composition_t11_probe(cost, smap, int(k), radii)
        good = hp.fitted_rate >= s.float("min_slope")
        ok_h += good
        ok_d += dp.bounded
        rows += [{**_profile_row("holder", hp), "passed": good},
                 {**_profile_row("dh_t11", dp), "passed": dp.bounded}]
    rep.table(rows)
    frac_h, frac_d = ok_h / len(idx), ok_d / len(idx)
    need = s.float("min_fraction")
    return {"centers": len(idx), "holder_fraction": frac_h, "dh_t11_fraction": frac_d,
            "passed": frac_h >= need and frac_d >= need}


def run_tkp_scan(cfg, rep, seed, cost):
    s = Params(cfg, "tkp-scan")
    smap = build_map(cfg, cost, seed)
    idx, radii = _centers(smap, s, seed)
    target = s.str("target")
    if target == "map":
        data = None
    elif target == "dh":
        data = cost.grad(smap.points - smap.values)
    else:
        s._fail("target", "expected map or dh")
    rows = []
    for k in idx:
        prof = tkp_profile(smap, int(k), s.float("k"), s.float("q"), radii,
                           little=s.bool("little"), data=data)
        rows.append({**_profile_row(target, prof), "passed": prof.bounded})
    rep.table(rows)
    frac = sum(r["passed"] for r in rows) / len(rows)
    return {"centers": len(rows), "classified_fraction": frac,
            "passed": frac >= s.float("min_fraction")}


def run_bd_check(cfg, rep, seed, cost):
    s = Params(cfg, "bd-check")
    smap = build_map(cfg, cost, seed)
    bumps = make_bump_family(smap, s.int("bumps"), seed)
    tol = s.float("tolerance")
    rows = []
    for xi in direction_set(smap.dimension):
        vals, masses = bd_inequality_values(cost, smap, xi, bumps)
        for j, (v, m) in enumerate(zip(vals, masses)):
            rows.append({"bump": j, "bump_center": bumps[j].center, "xi": xi, "value": v,
                         "mass": m, "normalized": v / m, "passed": v >= -tol * m})
    rep.table(rows)
    worst = min(rows, key=lambda r: r["normalized"])
    expect = s.str("expect")
    if expect == "nonnegative":
        passed = all(r["passed"] for r in rows)
    elif expect == "negative":
        passed = worst["value"] < 0
    else:
        s._fail("expect", "expected nonnegative or negative")
    return {"evaluations": len(rows), "min_value": worst["value"],
            "min_normalized": worst["normalized"], "expect": expect, "passed": passed}


def _green_cases(y):
    def quad(x):
        return np.sum((x - y) ** 2, axis=1)

    def smooth(x):
        return np.exp(0.9 * x[:, 0] - 0.4 * x[:, 1]) * (1 + x[:, 2] ** 2)

    def smooth_lap(x):
        e = np.exp(0.9 * x[:, 0] - 0.4 * x[:, 1])
        return e * (0.97 * (1 + x[:, 2] ** 2) + 2.0)

    n = y.size
    a = np.linspace(1.0, -0.5, n)
    return {
        "constant": (lambda x: np.full(len(x), 2.5), lambda x: np.zeros(len(x))),
        "linear": (lambda x: 0.3 + x @ a, lambda x: np.zeros(len(x))),
        "quadratic": (quad, lambda x: np.full(len(x), 2.0 * n)),
        "smooth": (smooth, smooth_lap),
    }


def run_green_check(cfg, rep, seed, cost):
    s = Params(cfg, "green-check")
    n = s.int("n")
    y = s.vector("y")
    if y.size != n:
        s._fail("y", f"expected {n} coordinates")
    cases = _green_cases(y)
    rows = []
    for r in s.vector("radii"):
        for name in ("constant", "linear", "quadratic"):
            v, lap = cases[name]
            res = green_identity_residual(v, y, r, lap, s.int("nodes"))
            tol = 1e-3 * r**2 if name == "quadratic" else 1e-9
            rows.append({"case": name, "r": r, "nodes": s.int("nodes"), "residual": res,
                         "tolerance": tol, "passed": res <= tol})
        v, lap = cases["smooth"]
        m = s.int("refine_nodes")
        coarse = green_identity_residual(v, y, r, lap, m)
        fine = green_identity_residual(v, y, r, lap, 2 * m)
        reduction = coarse / fine if fine > 0 else float("inf")
        rows.append({"case": "smooth", "r": r, "nodes": m, "residual": coarse, "tolerance": "",
                     "passed": ""})
        rows.append({"case": "smooth", "r": r, "nodes": 2 * m, "residual": fine,
                     "reduction": reduction, "passed": reduction >= s.float("min_reduction")})
    rep.table(rows, columns=["case", "r", "nodes", "residual", "tolerance", "reduction", "passed"])
    checked = [r for r in rows if r["passed"] != ""]
    return {"checks": len(checked), "failures": sum(not r["passed"] for r in checked),
            "worst_residual": max(r["residual"] for r in rows),
            "passed": all(r["passed"] for r in checked)}


RUNNERS = {
    "verify-lemmas": run_verify_lemmas,
    "check-monotone": run_check_monotone,
    "ot-generate": run_ot_generate,
    "estimate-linfty": run_estimate_linfty,
    "holder-scan": run_holder_scan,
    "bd-check": run_bd_check,
    "tkp-scan": run_tkp_scan,
    "green-check": run_green_check,
}


def run(cfg):
    """Run the configured scenario; returns the exit status."""
    sc = cfg["run"]["scenario"]
    seed = Params(cfg, "run").int("seed")
    rep = Reporter(cfg["run"]["out"], sc, cfg)
    try:
        cost = build_cost(cfg)
        summary = RUNNERS[sc](cfg, rep, seed, cost)
    except (UsageError, HMonoError, ValueError) as exc:
        rep.summary({"error": type(exc).__name__, "message": str(exc).replace("\n", " "),
                     "passed": False})
        raise UsageError(str(exc)) from None
    rep.summary(summary)
    return EXIT_OK if summary.get("passed", False) else EXIT_FAILED


# -- argument parsing ---------------------------------------------------------

SCENARIO_FLAGS = {
    "verify-lemmas": [("--p-grid", "p_grid"), ("--samples", "samples")],
    "estimate-linfty": [("--A", "A"), ("--b", "b"), ("--x0", "x0"), ("--R", "R"),
                        ("--beta", "beta"), ("--p", "p"), ("--C", "C")],
    "check-monotone": [("--pair-budget", "pair_budget")],
    "ot-generate": [("--pair-budget", "pair_budget")],
    "holder-scan": [("--centers", "centers"), ("--r-max", "r_max"),
                    ("--r-min", "r_min")],
    "tkp-scan": [("--target", "target"), ("--k", "k"), ("--q", "q"), ("--little", "little"),
                 ("--centers", "centers"), ("--r-max", "r_max"), ("--r-min", "r_min")],
    "bd-check": [("--bumps", "bumps"), ("--expect", "expect")],
    "green-check": [("--radii", "radii"), ("--nodes", "nodes")],
}


def _common(parser, top):
    d = argparse.SUPPRESS if not top else None
    parser.add_argument("--config", metavar="PATH", default=d, help="INI or JSON config file")
    parser.add_argument("--seed", type=int, default=d, help="random seed")
    parser.add_argument("--out", metavar="DIR", default=d, help="output directory")
    parser.add_argument("--quad-nodes", type=int, default=d, metavar="N",
                        help="Gauss-Legendre nodes per axis")
    parser.add_argument("--map", dest="map_path", default=d, metavar="PATH",
                        help="read the map from a file")


def make_parser():
    parser = argparse.ArgumentParser(prog="hmono", description="h-monotone map experiments")
    parser.add_argument("--version", action="version", version=f"hmono {__version__}")
    parser.add_argument("--print-defaults", action="store_true",
                        help="print the default configuration and exit")
    _common(parser, True)
    sub = parser.add_subparsers(dest="scenario", metavar="SCENARIO")
    for name in SCENARIOS:
        sp = sub.add_parser(name, help=f"run the {name} scenario")
        _common(sp, False)
        for flag, key in SCENARIO_FLAGS.get(name, []):
            sp.add_argument(flag, dest=f"opt_{key}", default=None,
                            help=DEFAULTS[name][key][1])
    return parser


def main(argv=None):
    parser = make_parser()
    args = parser.parse_args(argv)
    if args.print_defaults:
        sys.stdout.write(defaults_text())
        return EXIT_OK
    try:
        cfg = resolve_config(args)
        if getattr(args, "map_path", None):
            cfg["map"]["source"], cfg["map"]["path"] = "file", args.map_path
        status = run(cfg)
    except UsageError as exc:
        print(f"hmono: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001 - crash must be distinguishable from a failed check
        print(f"hmono: crash: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CRASH
    print(f"{cfg['run']['scenario']}: {'PASS' if status == EXIT_OK else 'FAIL'} "
          f"(reports in {cfg['run']['out']})")
    return status


if __name__ == "__main__":
    sys.exit(main())
