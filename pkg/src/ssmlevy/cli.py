"""Command-line front end: ``ssmlevy <command> [options]``.

Every command writes ``results.csv`` (header plus one row per grid point,
17 significant digits) and ``summary.json`` into ``--out-dir``.

Exit codes: 0 success, 1 malformed configuration, 2 regime violation,
3 failed check, 4 inconclusive numerical certificate.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import acceptance, divisibility as dv, transforms as tr
from .eigenfunction_series import c_theta, eigenfunction, eval_N
from .errors import ConfigError, InversionUnstable, SSMError
from .levy_exponent import from_spec
from .montecarlo import (
    PathConfig,
    esscher_weighted_estimate,
    estimate_fpt_laplace,
    rivero_moment,
    rivero_reference,
    run_paths,
    sample_sigma_infty,
    write_paths_csv,
)

EXIT_OK, EXIT_CONFIG, EXIT_REGIME, EXIT_CHECK, EXIT_INCONCLUSIVE = 0, 1, 2, 3, 4
GRID_KEYS = ("u", "z", "x", "q", "lam", "a", "A", "y", "t")


@dataclass
class RunConfig:
    command: str
    family: dict
    alpha: float | None = None
    grids: dict = field(default_factory=dict)
    tol: float = 1e-9
    mc: dict = field(default_factory=dict)
    out_dir: str = "."
    options: dict = field(default_factory=dict)

    def grid(self, key, default=None):
        vals = self.grids.get(key)
        if vals is None:
            if default is None:
                raise ConfigError(f"missing grid {key!r} (use --{key})")
            vals = default
        vals = [float(v) for v in np.atleast_1d(vals)]
        if not vals:
            raise ConfigError(f"grid {key!r} is empty")
        return vals


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])


def _family_from_args(ns):
    spec = {}
    if ns.config:
        src = ns.config
        try:
            if os.path.exists(src):
                with open(src) as fh:
                    doc = json.load(fh)
            else:
                doc = json.loads(src)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        fam = doc.get("family")
        if isinstance(fam, dict):
            spec = dict(fam)
        elif isinstance(fam, str):
            spec = {k: v for k, v in doc.items() if k not in ("alpha",) + GRID_KEYS}
        else:
            raise ConfigError("config: missing field 'family'")
        for k in ("alpha",) + GRID_KEYS:
            if k in doc and getattr(ns, k, None) is None:
                setattr(ns, k, doc[k])
    if ns.family:
        spec["family"] = {"brownian": "brownian_drift"}.get(ns.family, ns.family)
    for k in ("gamma", "sigma", "rho", "c", "beta", "gamma_shift"):
        v = getattr(ns, k, None)
        if v is not None:
            spec[k] = v
    if "family" not in spec:
        raise ConfigError("no family given (use --family or --config)")
    return spec


def _default_alpha(exp):
    return 2.0 if exp.family == "brownian_drift" else getattr(exp, "rho", 1.0)


def build_config(ns) -> RunConfig:
    # the family parser also copies alpha and grids from --config into ns
    fam = _family_from_args(ns) if ns.command not in ("suite",) else {}
    grids = {k: getattr(ns, k) for k in GRID_KEYS if getattr(ns, k, None) is not None}
    mc = {k: getattr(ns, k) for k in ("paths", "seed", "eps", "h", "threads") if getattr(ns, k, None) is not None}
    skip = set(grids) | set(mc) | {"command", "config", "family", "alpha", "tol", "out_dir", "gamma", "sigma", "rho",
                                   "c", "beta", "gamma_shift"}
    opts = {k: v for k, v in vars(ns).items() if v is not None and k not in skip}
    if ns.tol is not None and not ns.tol > 0:
        raise ConfigError("tolerance 'tol' must be > 0")
    return RunConfig(ns.command, fam, ns.alpha, grids, ns.tol or 1e-9, mc, ns.out_dir, opts)


# -- commands ---------------------------------------------------------------

def _exp_alpha(cfg):
    exp = from_spec(cfg.family)
    alpha = float(cfg.alpha) if cfg.alpha is not None else _default_alpha(exp)
    if not alpha > 0:
        raise ConfigError("alpha must be > 0")
    return exp, alpha


def cmd_eval_psi(cfg):
    exp = from_spec(cfg.family)
    rows = [(u, exp.psi(u), exp.dpsi(u)) for u in cfg.grid("u")]
    return ["u", "psi", "dpsi"], rows, {}, EXIT_OK


def cmd_eval_I(cfg):
    exp, alpha = _exp_alpha(cfg)
    e = eigenfunction(exp, alpha)
    rows = []
    for z in cfg.grid("z"):
        lv = e.log_I(z)
        rows.append((z, math.exp(lv) if lv < 709 else math.inf, lv))
    return ["z", "I", "log_I"], rows, {"alpha": alpha}, EXIT_OK


def cmd_eval_N(cfg):
    exp, alpha = _exp_alpha(cfg)
    rows = [(x, eval_N(exp, alpha, x, mode=cfg.options.get("mode") or "best")) for x in cfg.grid("x")]
    return ["x", "N"], rows, {"alpha": alpha}, EXIT_OK


def cmd_c_theta(cfg):
    exp, alpha = _exp_alpha(cfg)
    p = c_theta(exp, alpha, cfg.options.get("mode") or "product")
    rows = [(p.theta, p.theta_alpha, p.beta, p.l_beta, p.C_theta, p.error_estimate, p.method_tag)]
    return ["theta", "theta_over_alpha", "beta", "l_beta", "C_theta", "error_estimate", "method"], rows, \
        {"alpha": alpha, "rv_estimated": p.rv_estimated}, EXIT_OK


def cmd_fpt(cfg):
    exp, alpha = _exp_alpha(cfg)
    rows = []
    for lam in cfg.grid("lam", [0.0]):
        for q in cfg.grid("q"):
            for a in cfg.grid("a"):
                for x in cfg.grid("x"):
                    v = tr.fpt_up_laplace(exp, alpha, q, x, a) if lam == 0 else \
                        tr.fpt_joint_laplace(exp, alpha, q, lam, x, a)
                    rows.append((lam, q, x, a, v))
    return ["lam", "q", "x", "a", "value"], rows, {"alpha": alpha}, EXIT_OK


def cmd_expfun(cfg):
    exp, alpha = _exp_alpha(cfg)
    rows = [(q, tr.expfun_laplace(exp, alpha, q)) for q in cfg.grid("q")]
    return ["q", "value"], rows, {"alpha": alpha}, EXIT_OK


def cmd_entrance(cfg):
    exp, alpha = _exp_alpha(cfg)
    which = cfg.options.get("which") or "dual"
    rows = [(q, y, tr.entrance_law_laplace(exp, alpha, q, y, which)) for q in cfg.grid("q") for y in cfg.grid("y")]
    return ["q", "y", "value"], rows, {"alpha": alpha, "which": which}, EXIT_OK


def cmd_hartman(cfg):
    exp, alpha = _exp_alpha(cfg)
    rows = []
    for lam in cfg.grid("lam"):
        for a in cfg.grid("a"):
            for A in cfg.grid("A"):
                rows.append((lam, a, A, tr.hartman_ratio(exp, alpha, lam, a, A)))
    return ["lam", "a", "A", "value"], rows, {"alpha": alpha}, EXIT_OK


def cmd_wolfe(cfg):
    exp, alpha = _exp_alpha(cfg)
    rows = []
    for q in cfg.grid("q"):
        phi = tr.wolfe_levy_exponent(exp, alpha, q)
        rows.append((q, phi, math.exp(-phi), tr.id_laplace(exp, alpha, q, "combined")))
    return ["q", "phi_L", "exp_minus_phi_L", "combined"], rows, {"alpha": alpha}, EXIT_OK


_TARGETS = ("inv-I", "exp-phi", "product", "N", "hartman", "selfdecomp")


def cmd_check_divisibility(cfg):
    exp, alpha = _exp_alpha(cfg)
    targets = cfg.options.get("target") or ["all"]
    if "all" in targets:
        targets = ["inv-I", "exp-phi", "product", "selfdecomp", "N" if exp.mean < 0 else "hartman"]
    grid = cfg.grid("q", list(dv.log_grid()))
    order = int(cfg.options.get("order") or 6)
    reps = []
    for t in targets:
        if t == "inv-I":
            rep = dv.complete_monotonicity_check(lambda q: tr.selfdecomp_laplace(exp, alpha, q), grid, order, t)
        elif t == "exp-phi":
            rep = dv.complete_monotonicity_check(lambda q: tr.id_laplace(exp, alpha, q), grid, order, t)
        elif t == "product":
            rep = dv.complete_monotonicity_check(lambda q: tr.id_laplace(exp, alpha, q, "combined"), grid, order, t)
        elif t == "N":
            rep = dv.complete_monotonicity_check(lambda q: eval_N(exp, alpha, q), grid, order, t)
        elif t == "hartman":
            a, A = cfg.grid("a", [1.0])[0], cfg.grid("A", [2.0])[0]
            rep = dv.complete_monotonicity_check(lambda lam: tr.hartman_ratio(exp, alpha, lam, a, A), grid, order, t)
        elif t == "selfdecomp":
            rep = dv.selfdecomp_check(exp, alpha, grid=grid, order_max=order)
        else:
            raise ConfigError(f"unknown divisibility target {t!r}; choose from {_TARGETS}")
        reps.append(rep)
    rows = [(r.target, n, m, r.verdict) for r in reps for n, m in sorted(r.margins.items())]
    verdicts = {r.target: r.verdict for r in reps}
    code = EXIT_OK
    if "fail" in verdicts.values():
        code = EXIT_CHECK
    elif "inconclusive" in verdicts.values():
        code = EXIT_INCONCLUSIVE
    extra = {"verdicts": verdicts, "warnings": [w for r in reps for w in r.warnings], "alpha": alpha}
    return ["target", "order", "min_margin", "verdict"], rows, extra, code


def cmd_invert(cfg):
    exp, alpha = _exp_alpha(cfg)
    ts = cfg.grid("t", list(np.geomspace(0.02, 40.0, 60)))
    degree = int(cfg.options.get("degree") or 32)
    try:
        grid = dv.laplace_invert(dv.mp_selfdecomp_transform(exp, alpha), ts, degree=degree)
    except InversionUnstable as exc:
        return ["t", "density", "error"], [], {"error": str(exc)}, EXIT_INCONCLUSIVE
    mode, verdict = dv.unimodality_check(grid)
    rows = list(zip(grid.t, grid.density, grid.error))
    code = {"pass": EXIT_OK, "fail": EXIT_CHECK}.get(verdict, EXIT_INCONCLUSIVE)
    return ["t", "density", "error"], rows, {"mass": grid.mass, "mode": mode, "unimodal": verdict,
                                            "method": grid.method, "alpha": alpha}, code


def cmd_mc_verify(cfg):
    exp, alpha = _exp_alpha(cfg)
    mc = dict(cfg.mc)
    pcfg = PathConfig(exp, paths=int(mc.get("paths", 100_000)), seed=int(mc.get("seed", 0)),
                      eps=float(mc.get("eps", 0.03)), h=float(mc.get("h", 0.02)), threads=mc.get("threads"))
    what = cfg.options.get("what")
    k = 3.0
    rows = []
    if what in ("fpt", "joint"):
        lams = cfg.grid("lam", [0.0]) if what == "joint" else [0.0]
        for lam in lams:
            for q in cfg.grid("q"):
                for a in cfg.grid("a"):
                    for x in cfg.grid("x"):
                        est = estimate_fpt_laplace(pcfg, alpha, q, x, a, lam=lam)
                        ref = tr.fpt_up_laplace(exp, alpha, q, x, a) if lam == 0 else \
                            tr.fpt_joint_laplace(exp, alpha, q, lam, x, a)
                        rows.append((f"lam={lam} q={q} x={x} a={a}", est.value, est.se, ref))
        if cfg.options.get("per_path_csv"):
            x, a = cfg.grid("x")[0], cfg.grid("a")[0]
            run = run_paths(pcfg, alpha, math.log(x), math.log(a))
            write_paths_csv(os.path.join(cfg.out_dir, "paths.csv"), run)
    elif what == "expfun":
        qs = cfg.grid("q")
        _, ests = sample_sigma_infty(pcfg, alpha, qs=qs)
        rows = [(f"q={q}", ests[q].value, ests[q].se, eval_N(exp, alpha, q)) for q in qs]
    elif what == "rivero":
        est = rivero_moment(pcfg, alpha)
        rows = [("rivero", est.value, est.se, rivero_reference(exp, alpha, c_theta(exp, alpha, "best").C_theta))]
    elif what == "esscher":
        g = float(cfg.options.get("esscher_gamma") or 0.0)
        for q in cfg.grid("q"):
            for a in cfg.grid("a"):
                for x in cfg.grid("x"):
                    est = esscher_weighted_estimate(pcfg, alpha, g, lambda hit, s, T, xe, q=q: np.where(
                        hit, np.exp(-q * s), 0.0), x, a, q=q)
                    ref = tr.fpt_up_laplace(exp.esscher(g), alpha, q, x, a)
                    rows.append((f"gamma={g} q={q} x={x} a={a} ess={est.ess:.6g}", est.value, est.se, ref))
    else:
        raise ConfigError(f"unknown mc-verify target {what!r}")
    out = [(c, v, se, ref, abs(v - ref), k * se, abs(v - ref) <= k * se) for c, v, se, ref in rows]
    ok = all(r[-1] for r in out)
    return ["case", "mc", "se", "analytic", "abs_diff", "tolerance", "pass"], out, \
        {"paths": pcfg.paths, "seed": pcfg.seed, "eps": pcfg.eps, "h": pcfg.h, "alpha": alpha}, \
        EXIT_OK if ok else EXIT_CHECK


def cmd_family_info(cfg):
    exp = from_spec(cfg.family)
    theta = exp.cramer_root
    beta, l_beta, est = exp.regular_variation
    rows = [("family", exp.family), ("mean", exp.mean), ("theta", theta if theta is not None else ""),
            ("drift_b", exp.b), ("sigma", exp.sigma), ("has_jumps", exp._has_jumps),
            ("rv_beta", beta), ("rv_l_beta", l_beta), ("rv_estimated", est)]
    if cfg.alpha is not None:
        try:
            exp.check_admissible(float(cfg.alpha))
            rows.append(("admissible_at_alpha", True))
        except SSMError:
            rows.append(("admissible_at_alpha", False))
    return ["key", "value"], rows, {"spec": exp.to_spec() if exp.family != "custom" else cfg.family}, EXIT_OK


def cmd_suite(cfg):
    only = cfg.options.get("only")
    mc = cfg.mc
    results = acceptance.run_suite(only=only, seed=int(mc.get("seed", acceptance.DEFAULT_SEED)),
                                   paths=int(mc.get("paths", 100_000)), threads=mc.get("threads"))
    rows = [r for res in results for r in res.rows]
    extra = {"criteria": [r.summary() for r in results]}
    code = EXIT_OK if all(r.passed for r in results) else EXIT_CHECK
    return acceptance.CSV_HEADER, rows, extra, code


COMMANDS = {
    "eval-psi": cmd_eval_psi, "eval-I": cmd_eval_I, "eval-N": cmd_eval_N, "c-theta": cmd_c_theta,
    "fpt": cmd_fpt, "expfun": cmd_expfun, "entrance": cmd_entrance, "hartman": cmd_hartman,
    "wolfe": cmd_wolfe, "check-divisibility": cmd_check_divisibility, "invert": cmd_invert,
    "mc-verify": cmd_mc_verify, "family-info": cmd_family_info, "suite": cmd_suite,
}


def _add_common(p):
    g = p.add_argument_group("family")
    g.add_argument("--config", help="JSON file or inline JSON with a 'family' spec and optional grids")
    g.add_argument("--family", choices=["brownian", "brownian_drift", "stable", "pochhammer", "custom"])
    for k in ("gamma", "sigma", "rho", "c", "beta", "gamma-shift"):
        g.add_argument(f"--{k}", type=float)
    p.add_argument("--alpha", type=float)
    for k in GRID_KEYS:
        p.add_argument(f"--{k}", type=float, nargs="+")
    p.add_argument("--tol", type=float)
    p.add_argument("--out-dir", default=".")


def make_parser():
    ap = _Parser(prog="ssmlevy", description="Eigenfunctions and transforms of positive self-similar "
                                             "Markov processes with no positive jumps.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        _add_common(p)
        if name in ("eval-N", "c-theta"):
            p.add_argument("--mode", choices=["product", "ratio_estimate", "best"])
        if name == "entrance":
            p.add_argument("--which", choices=["dual", "dual_theta"])
        if name == "check-divisibility":
            p.add_argument("--target", nargs="+", choices=list(_TARGETS) + ["all"])
            p.add_argument("--order", type=int)
        if name == "invert":
            p.add_argument("--degree", type=int)
        if name in ("mc-verify", "suite"):
            p.add_argument("--paths", type=int)
            p.add_argument("--seed", type=int)
            p.add_argument("--threads", type=int)
        if name == "mc-verify":
            p.add_argument("what", choices=["fpt", "joint", "expfun", "rivero", "esscher"])
            p.add_argument("--eps", type=float)
            p.add_argument("--h", type=float)
            p.add_argument("--esscher-gamma", type=float)
            p.add_argument("--per-path-csv", action="store_true")
        if name == "suite":
            p.add_argument("--only", type=int, nargs="+", choices=sorted(acceptance.CRITERIA))
    return ap


def run(argv=None) -> int:
    t0 = time.perf_counter()
    try:
        ns = make_parser().parse_args(argv)
        cfg = build_config(ns)
        os.makedirs(cfg.out_dir, exist_ok=True)
        header, rows, extra, code = COMMANDS[cfg.command](cfg)
    except SSMError as exc:
        print(f"ssmlevy: error: {exc}", file=sys.stderr)
        return exc.exit_code
    write_csv(os.path.join(cfg.out_dir, "results.csv"), header, rows)
    summary = {"command": cfg.command, "exit_code": code, "config": asdict(cfg), "rows": len(rows),
               "runtime_s": time.perf_counter() - t0, **extra}
    with open(os.path.join(cfg.out_dir, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True, default=str)
    if cfg.command != "suite":
        sys.stdout.write(",".join(header) + "\n")
        for r in rows:
            sys.stdout.write(",".join(_fmt(v) for v in r) + "\n")
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
