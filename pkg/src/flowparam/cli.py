"""Batch front end.

Four commands over one flat configuration surface:

  terms  -- serialize the term corpus and run the fast structural audit
  scan   -- threshold scan CSV plus a gnuplot script
  probe  -- shell-decay reports per term as CSV
  check  -- golden-corpus regression plus the verification suite

Configuration is a key = value text file; every key can also be given as
a --key command-line override.  Exit codes: 0 success, 1 failed audit or
verification, 2 configuration error.  For a fixed configuration and seed
all file outputs are byte-identical across reruns.
"""

from __future__ import annotations

import argparse
import importlib.resources
import math
import os
import sys
from dataclasses import dataclass, fields

import numpy as np

from . import checks as checks_mod
from .kinematics import EpsMetricConfig, FourMomentum, ScaleWindow
from .termbuilder import (RenormConditions, build_gamma_terms, dump_terms,
                          offshell_zero)
from . import evaluator as ev


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    mass: float = 1.0
    coupling: float = 1.0
    xi: float = 1e-4
    eps_list: tuple = (0.016, 0.008, 0.004)
    big_m: float = 2.0
    nu_max: int = 8
    loop_order: int = 1
    n_external: int = 4
    b1: float = 0.0
    b2: float = 0.0
    c1: complex = 0j
    c2: complex = 0j
    auto_match: bool = True
    channel: str = "s"
    s_values: tuple = ()      # empty selects the default threshold bracket
    momenta: tuple = ()       # explicit external momenta, overrides channel
    k0: float = 0.7
    budget: int = 2_000_000
    seed: int = 11
    workers: int = 1
    out: str = "runs"
    checks: tuple = ()        # subset of verification names for `check`
    golden_dir: str = ""      # default: the packaged golden corpus

    def rc(self):
        return RenormConditions(g=self.coupling, b1=self.b1, b2=self.b2,
                                c1=self.c1, c2=self.c2)


def _parse_floats(text):
    items = [p.strip() for p in text.split(",") if p.strip()]
    return tuple(float(p) for p in items)


def _parse_momenta(text):
    out = []
    for block in text.split(";"):
        block = block.strip()
        if not block:
            continue
        comps = _parse_floats(block)
        if len(comps) != 4:
            raise ValueError(f"momentum needs 4 components: {block!r}")
        out.append(FourMomentum(*comps))
    return tuple(out)


def _parse_bool(text):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_names(text):
    return tuple(p.strip() for p in text.split(",") if p.strip())


_PARSERS = {
    "mass": float, "coupling": float, "xi": float, "big_m": float,
    "k0": float, "nu_max": int, "loop_order": int, "n_external": int,
    "budget": int, "seed": int, "workers": int,
    "b1": float, "b2": float, "c1": complex, "c2": complex,
    "auto_match": _parse_bool, "channel": str, "out": str,
    "golden_dir": str, "eps_list": _parse_floats, "s_values": _parse_floats,
    "momenta": _parse_momenta, "checks": _parse_names,
}


def load_config(path=None, overrides=()):
    """Build a RunConfig from an optional key = value file plus override
    pairs; raises ConfigError on unknown keys, bad values, or violated
    invariants, before any computation starts."""
    values = {}

    def absorb(key, raw, where):
        key = key.strip()
        if key not in _PARSERS:
            raise ConfigError(f"unknown configuration key {key!r} ({where})")
        try:
            values[key] = _PARSERS[key](raw.strip())
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r} ({where}): {exc}")

    if path is not None:
        try:
            with open(path, "r", encoding="ascii") as fh:
                lines = fh.readlines()
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}")
        for i, line in enumerate(lines, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {i} is not key = value: {line!r}")
            key, raw = line.split("=", 1)
            absorb(key, raw, f"{path}:{i}")
    for key, raw in overrides:
        absorb(key, raw, "command line")

    cfg = RunConfig(**values)
    _validate(cfg)
    return cfg


def _validate(cfg):
    if not cfg.mass > 0:
        raise ConfigError("mass must be positive")
    if not cfg.xi > 0:
        raise ConfigError("xi must be positive")
    if not cfg.big_m > 1:
        raise ConfigError("big_m must exceed 1")
    if not cfg.eps_list:
        raise ConfigError("eps_list must not be empty")
    if any(e <= 0 for e in cfg.eps_list):
        raise ConfigError("eps_list entries must be positive")
    if list(cfg.eps_list) != sorted(cfg.eps_list, reverse=True):
        raise ConfigError("eps_list must be strictly decreasing")
    if len(set(cfg.eps_list)) != len(cfg.eps_list):
        raise ConfigError("eps_list must be strictly decreasing")
    if cfg.nu_max < 1:
        raise ConfigError("nu_max must be at least 1")
    if cfg.loop_order not in (0, 1, 2):
        raise ConfigError("loop_order must be 0, 1 or 2")
    if cfg.n_external not in (2, 4):
        raise ConfigError("n_external must be 2 or 4")
    if cfg.channel != "s":
        raise ConfigError("only the timelike channel path is implemented")
    if any(s <= 0 for s in cfg.s_values):
        raise ConfigError("s_values must be positive invariants")
    if cfg.budget < 1000:
        raise ConfigError("budget below the minimal quadrature resolution")
    if cfg.seed < 0:
        raise ConfigError("seed must be non-negative")
    if cfg.workers < 1:
        raise ConfigError("workers must be at least 1")
    if cfg.momenta:
        if len(cfg.momenta) != cfg.n_external:
            raise ConfigError(f"expected {cfg.n_external} explicit momenta, "
                              f"got {len(cfg.momenta)}")
        comps = [sum(getattr(p, c) for p in cfg.momenta)
                 for c in ("e", "px", "py", "pz")]
        scale = max(abs(getattr(p, c)) for p in cfg.momenta
                    for c in ("e", "px", "py", "pz"))
        if max(abs(c) for c in comps) > 1e-9 * max(scale, 1.0):
            raise ConfigError("explicit momenta do not conserve "
                              "total momentum")
    known = {name for name, _, _ in checks_mod.ALL_CHECKS}
    unknown = [n for n in cfg.checks if n not in known]
    if unknown:
        raise ConfigError(f"unknown check names: {unknown}")


def _fmt(value):
    if value is None:
        return "NA"
    return "%.17g" % value


def _write_lines(path, lines):
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        for line in lines:
            fh.write(line + "\n")


def _default_bracket(cfg):
    s4 = 4.0 * cfg.mass * cfg.mass
    grid = sorted({s4 * (1.0 + sgn * d)
                   for d in (0.1, 0.05, 0.02, 0.01) for sgn in (1.0, -1.0)})
    return tuple(grid)


def _probe_momenta(cfg):
    if cfg.momenta:
        return cfg.momenta[:cfg.n_external - 1]
    s = cfg.s_values[0] if cfg.s_values else 5.0 * cfg.mass * cfg.mass
    return ev.scan_momenta(s, cfg.k0)


# ---------------------------------------------------------------------------
# commands

def cmd_terms(cfg):
    n, l = cfg.n_external, cfg.loop_order
    terms = build_gamma_terms(n, l)
    os.makedirs(cfg.out, exist_ok=True)
    dump_terms(terms, os.path.join(cfg.out, f"terms_n{n}_l{l}.json"))

    worst_eig, worst_rel, n_forms = checks_mod._psd_homog(terms, 200, cfg.seed)
    split_fails = []
    counts = [0, 0, 0]
    for t in terms:
        if t.s:
            checks_mod._fit_split_slopes(t, split_fails, counts)
    psd_ok = worst_eig >= -1e-10
    hom_ok = worst_rel <= 1e-12
    split_ok = not split_fails
    lines = [
        f"corpus (n={n}, l={l}): {len(terms)} terms, {n_forms} with "
        "window parameters",
        f"psd-min-eig: {worst_eig:.3e} {'PASS' if psd_ok else 'FAIL'}",
        f"homogeneity-defect: {worst_rel:.3e} {'PASS' if hom_ok else 'FAIL'}",
        f"scaling-split: {len(split_fails)} failures "
        f"{'PASS' if split_ok else 'FAIL'}",
    ]
    if n == 2:
        flag = ("identically zero" if offshell_zero(n, l)
                else "nonvanishing")
        lines.append(f"offshell-part: {flag}")
    _write_lines(os.path.join(cfg.out, "terms_audit.txt"), lines)
    for line in lines:
        print(line)
    return 0 if (psd_ok and hom_ok and split_ok) else 1


_SCAN_HEADER = "s,eps,re,im,err_est,extrapolated_re,extrapolated_im"


def cmd_scan(cfg):
    s_values = cfg.s_values or _default_bracket(cfg)
    rows = ev.continuity_scan(s_values, cfg.eps_list, cfg.rc(), cfg.mass,
                              cfg.xi, k0=cfg.k0, budget=cfg.budget,
                              workers=cfg.workers, auto_match=cfg.auto_match)
    os.makedirs(cfg.out, exist_ok=True)
    lines = [_SCAN_HEADER]
    for r in rows:
        lines.append(",".join([
            _fmt(r["s"]), _fmt(r["eps"]), _fmt(r["re"]), _fmt(r["im"]),
            _fmt(r["err_est"]), _fmt(r["extrapolated_re"]),
            _fmt(r["extrapolated_im"]),
        ]))
    _write_lines(os.path.join(cfg.out, "scan.csv"), lines)

    plot = [
        "set datafile separator \",\"",
        "set datafile missing \"NA\"",
        "set key top left",
        "set xlabel \"s\"",
        "set ylabel \"four-point value\"",
    ]
    series = []
    for e in cfg.eps_list:
        tag = _fmt(e)
        short = "%g" % e
        series.append(f"\"scan.csv\" using ($2=={tag}?$1:1/0):3 "
                      f"with linespoints title \"re eps={short}\"")
        series.append(f"\"scan.csv\" using ($2=={tag}?$1:1/0):4 "
                      f"with linespoints title \"im eps={short}\"")
    if len(cfg.eps_list) >= 3:
        tag = _fmt(cfg.eps_list[-1])
        series.append(f"\"scan.csv\" using ($2=={tag}?$1:1/0):6 "
                      "with lines title \"re extrapolated\"")
        series.append(f"\"scan.csv\" using ($2=={tag}?$1:1/0):7 "
                      "with lines title \"im extrapolated\"")
    plot.append("plot \\")
    plot.extend(f"  {s}, \\" for s in series[:-1])
    plot.append(f"  {series[-1]}")
    _write_lines(os.path.join(cfg.out, "scan.gp"), plot)
    print(f"scan: {len(rows)} rows over {len(s_values)} invariants")
    return 0


_PROBE_HEADER = ("term,nu,d1_boundary,d1_deriv,d1_delta,d2,"
                 "mu_measured,mu_bound,partial_sum,decay")


def _probe_decay(reports, big_m):
    pts = [(r.nu, r.total) for r in reports if r.total > 0.0]
    if len(pts) < 2:
        return None
    x = np.array([nu * math.log(big_m) for nu, _ in pts])
    y = np.log(np.array([v for _, v in pts]))
    slope = float(np.polyfit(x, y, 1)[0])
    return slope <= -1.0 / 3.0 + 0.05


def cmd_probe(cfg):
    terms = build_gamma_terms(cfg.n_external, cfg.loop_order)
    momenta = _probe_momenta(cfg)
    cfg_eps = EpsMetricConfig(cfg.eps_list[-1], cfg.mass)
    shell = ev.ShellConfig(big_m=cfg.big_m, nu_max=cfg.nu_max, seed=cfg.seed)
    rc = cfg.rc()
    lines = [_PROBE_HEADER]
    probed = 0
    for idx, term in enumerate(terms):
        try:
            reports = ev.domain_split_probe(term, momenta, rc, cfg_eps,
                                            cfg.xi, shell)
        except ValueError:
            continue   # parameter-free or interpolated terms have no boards
        probed += 1
        decay = _probe_decay(reports, cfg.big_m)
        mark = "NA" if decay is None else ("PASS" if decay else "FAIL")
        for r in reports:
            lines.append(",".join([
                str(idx), str(r.nu), _fmt(r.d1_boundary), _fmt(r.d1_deriv),
                _fmt(r.d1_delta), _fmt(r.d2), _fmt(r.mu_measured),
                _fmt(r.mu_bound), _fmt(r.partial_sum), mark,
            ]))
    os.makedirs(cfg.out, exist_ok=True)
    _write_lines(os.path.join(cfg.out, "probe.csv"), lines)
    print(f"probe: {probed} terms x {cfg.nu_max} shells")
    return 0


_GOLDEN_PAIRS = ((4, 0), (4, 1), (2, 1), (2, 2), (4, 2))


def _golden_bytes(cfg, fname):
    if cfg.golden_dir:
        with open(os.path.join(cfg.golden_dir, fname), "rb") as fh:
            return fh.read()
    res = importlib.resources.files(__package__) / "golden" / fname
    return res.read_bytes()


def _golden_regression(cfg, tmpdir):
    """Rebuild every locked corpus and compare byte-for-byte against the
    golden serialization."""
    report = []
    ok = True
    for n, l in _GOLDEN_PAIRS:
        fname = f"terms_n{n}_l{l}.json"
        path = os.path.join(tmpdir, fname)
        dump_terms(build_gamma_terms(n, l), path)
        with open(path, "rb") as fh:
            fresh = fh.read()
        try:
            golden = _golden_bytes(cfg, fname)
        except (OSError, FileNotFoundError):
            report.append(f"golden-corpus({n},{l}) FAIL: "
                          "golden file missing")
            ok = False
            continue
        if fresh == golden:
            report.append(f"golden-corpus({n},{l}) PASS")
        else:
            report.append(f"golden-corpus({n},{l}) FAIL: "
                          "serialized corpus deviates from the locked file")
            ok = False
    return ok, report


def cmd_check(cfg):
    import tempfile
    os.makedirs(cfg.out, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        golden_ok, lines = _golden_regression(cfg, tmp)
    for line in lines:
        print(line)
    results = checks_mod.run_suite(cfg.checks or None, workers=cfg.workers)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{r.name} {status} ({r.seconds:.1f}s): {r.detail}")
        lines.append(f"{r.name} {status}: {r.detail}")
    _write_lines(os.path.join(cfg.out, "check_report.txt"), lines)
    failed = (not golden_ok) or any(not r.passed for r in results)
    return 1 if failed else 0


# ---------------------------------------------------------------------------
# argument handling

_COMMANDS = {
    "terms": cmd_terms,
    "scan": cmd_scan,
    "probe": cmd_probe,
    "check": cmd_check,
}


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="flowparam",
        description="parametric vertex functions: corpus, scans, probes, "
                    "verification")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None,
                       help="key = value configuration file")
        for f in fields(RunConfig):
            p.add_argument(f"--{f.name}", default=None, metavar="VALUE")
    return parser


def main(argv=None):
    args = _build_parser().parse_args(argv)
    overrides = [(f.name, getattr(args, f.name))
                 for f in fields(RunConfig)
                 if getattr(args, f.name) is not None]
    try:
        cfg = load_config(args.config, overrides)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    return _COMMANDS[args.command](cfg)


if __name__ == "__main__":
    sys.exit(main())
