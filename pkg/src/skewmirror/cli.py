"""Command-line front end: ``skew-mirror <command> [options]``.

Exit codes: 0 pass, 1 verification failure, 2 configuration or parse
error, 3 numerical-ambiguity abort.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from . import acceptance, fukaya, mfact, sklyanin
from .acceptance import Pipeline, _jsonable
from .linalg import AmbiguityError
from .novikov import (
    DerivativeConvention,
    ThetaParams,
    normalized_coeffs,
    theta_coeffs,
    theta_prime_coeffs,
)

SCHEMA = "skew-mirror/1"
EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_AMBIGUOUS = 0, 1, 2, 3
# residuals below this are floating-point noise at the sizes used here
FLOAT_FLOOR = 1e-12

DEFAULTS = {
    "t": 0.2, "s": 0.13, "q0": 0.25, "K": 6, "degree_cap": 6, "tol": 1e-10,
    "k_window": 3, "cache_dir": None, "seed": 0, "output": "text", "fault_inject": None,
}
CASTS = {
    "t": float, "s": float, "q0": float, "K": int, "degree_cap": int, "tol": float,
    "k_window": int, "cache_dir": str, "seed": int, "output": str, "fault_inject": str,
}


class ConfigError(ValueError):
    pass


@dataclass
class Config:
    theta: ThetaParams
    degree_cap: int = 6
    tol: float = 1e-10
    k_window: int = 3
    cache_dir: str | None = None
    seed: int = 0
    output: str = "text"
    fault_inject: str | None = None

    def inputs(self) -> dict:
        return {
            **self.theta.to_dict(), "degree_cap": self.degree_cap, "tol": self.tol,
            "k_window": self.k_window, "seed": self.seed, "fault_inject": self.fault_inject,
        }


def read_config_file(path) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected key = value")
        key, val = (p.strip() for p in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in CASTS:
            raise ConfigError(f"{path}:{n}: unknown key {key!r}")
        out[key] = val
    return out


def make_config(args) -> Config:
    raw = dict(DEFAULTS)
    if args.config:
        raw.update(read_config_file(args.config))
    for key in CASTS:
        val = getattr(args, key, None)
        if val is not None:
            raw[key] = val
    try:
        vals = {k: (CASTS[k](v) if v is not None else None) for k, v in raw.items()}
        theta = ThetaParams(vals["t"], vals["s"], vals["q0"], vals["K"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if vals["degree_cap"] < 4:
        raise ConfigError("degree_cap must be >= 4")
    if not 0 < vals["tol"] < 1e-3:
        raise ConfigError("tol must lie in (0, 1e-3)")
    if vals["k_window"] < 1:
        raise ConfigError("k_window must be >= 1")
    if vals["output"] not in ("json", "text"):
        raise ConfigError("output must be json or text")
    if vals["fault_inject"] is not None:
        try:
            acceptance.perturbed_relations((1, 1, 1), vals["fault_inject"])
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    return Config(theta, vals["degree_cap"], vals["tol"], vals["k_window"], vals["cache_dir"],
                  vals["seed"], vals["output"], vals["fault_inject"])


@dataclass
class Report:
    command: str
    inputs: dict
    outputs: dict = field(default_factory=dict)
    residuals: dict = field(default_factory=dict)
    solution_dims: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    passed: bool = True

    def residual(self, name: str, value: float, tol: float, floor_ok: bool = True) -> bool:
        """Record a residual against its tolerance.  A value above ``tol``
        but within FLOAT_FLOOR is a warning when tol is below that floor."""
        value = float(value)
        ok = value <= tol
        if not ok and floor_ok and tol < FLOAT_FLOOR and value <= FLOAT_FLOOR:
            self.warnings.append(f"ambiguous: {name} = {value:.3e} exceeds tol {tol:g} "
                                 "but lies under the floating-point floor")
            ok = True
        self.residuals[name] = {"value": value, "tol": tol, "ok": ok}
        self.passed = self.passed and ok
        return ok

    def to_json(self) -> dict:
        return _jsonable({
            "schema": SCHEMA, "command": self.command, "inputs": self.inputs,
            "outputs": self.outputs, "residuals": self.residuals,
            "solution_dims": self.solution_dims, "warnings": self.warnings,
            "timings": self.timings, "passed": self.passed,
        })

    def to_text(self) -> str:
        lines = [f"{self.command}: {'PASS' if self.passed else 'FAIL'}"]
        for k, v in self.outputs.items():
            lines.append(f"  {k}: {_short(v)}")
        for k, v in self.residuals.items():
            lines.append(f"  residual {k}: {v['value']:.3e} (tol {v['tol']:g})")
        for k, v in self.solution_dims.items():
            lines.append(f"  solution dim {k}: {v}")
        for w in self.warnings:
            lines.append(f"  warning: {w}")
        return "\n".join(lines)


def _short(v) -> str:
    if isinstance(v, complex):
        return f"{v.real:.12g}{v.imag:+.12g}i"
    if isinstance(v, (list, tuple)) and v and isinstance(v[0], complex):
        return "(" + ", ".join(_short(z) for z in v) + ")"
    if isinstance(v, (dict, list)):
        s = json.dumps(_jsonable(v))
        return s if len(s) < 200 else s[:197] + "..."
    return str(v)


def _tol_warnings(cfg: Config, rep: Report):
    if cfg.tol < FLOAT_FLOOR:
        rep.warnings.append(f"tol {cfg.tol:g} is below the floating-point floor {FLOAT_FLOOR:g}; "
                            "residual comparisons near it are ambiguous")


def _pipeline(cfg: Config) -> Pipeline:
    return Pipeline(cfg.theta, cfg.degree_cap, cfg.cache_dir, cfg.seed, cfg.fault_inject)


def _certified_diff(theta: ThetaParams) -> tuple[float, float]:
    nxt = ThetaParams(theta.t, theta.s, theta.q0, theta.K + 1)
    diff = max(abs(u - v) for u, v in zip(theta_coeffs(theta), theta_coeffs(nxt)))
    return diff, 2 * theta.tail_bound


def cmd_params(cfg: Config) -> Report:
    rep = Report("params", cfg.inputs())
    a, b, c = theta_coeffs(cfg.theta)
    prime = theta_prime_coeffs(cfg.theta, DerivativeConvention.DT)
    scale = max(abs(z) for z in prime) or 1.0
    rep.outputs["abc"] = [a, b, c]
    rep.outputs["normalized_abc"] = list(normalized_coeffs(cfg.theta))
    rep.outputs["prime_ratio"] = [z / scale for z in prime]
    rep.outputs["tail_bound"] = cfg.theta.tail_bound
    diff, bound = _certified_diff(cfg.theta)
    rep.outputs["K_vs_K+1_difference"] = diff
    flags = []
    if abs(c) <= 1e-12 * abs(a) and abs(a + b) <= 1e-12 * abs(a):
        flags.append("commutative: c = 0 and a + b = 0")
    rep.outputs["flags"] = flags
    # adding terms below one ulp can still move the last bit
    ulp = 4 * sys.float_info.epsilon * max(abs(a), abs(b), abs(c))
    rep.residual("truncation", diff, max(bound, ulp), floor_ok=False)
    return rep


def cmd_central(cfg: Config) -> Report:
    rep = Report("central", cfg.inputs())
    pipe = _pipeline(cfg)
    W = pipe.W
    rep.outputs["abc"] = list(pipe.abc)
    rep.outputs["W"] = str(W.element)
    rep.outputs["ratio"] = list(W.ratio)
    rep.outputs["trivial_directions"] = [list(v) for v in W.trivial]
    rep.outputs["flags"] = W.flags
    rep.solution_dims["full_nullity"] = W.nullity
    rep.solution_dims["ansatz_nullity"] = W.ansatz_nullity
    rep.residual("centrality", W.residual, cfg.tol)
    return rep


def cmd_mf(cfg: Config, which: str = "L") -> Report:
    rep = Report("mf", {**cfg.inputs(), "which": which})
    pipe = _pipeline(cfg)
    mf = pipe.L if which == "L" else pipe.Lprime
    s1 = pipe.s1
    rep.outputs["matrix_factorization"] = mf.to_json()
    rep.outputs["pattern_ok"] = mf.pattern_ok
    rep.outputs["s2_norm_before_gauge"] = s1.s2_norm
    rep.outputs["newton_steps"] = s1.newton_steps
    rep.solution_dims["homotopy_general"] = s1.general_dim
    rep.solution_dims["homotopy"] = s1.solution_dim
    rep.residual("homotopy", s1.residual, max(cfg.tol, mfact.MF_TOL))
    res = mfact.verify_mf(pipe.check_algebra, mf)
    for k, v in res.items():
        rep.residual(k, v, mfact.MF_TOL)
    if not mf.pattern_ok:
        rep.passed = False
    src, tgt = (pipe.L, pipe.Lprime) if which == "L" else (pipe.Lprime, pipe.L)
    names = ("p", "q", "r") if which == "L" else ("p'", "q'", "r'")
    maps = {}
    for name in names:
        deg, fix0, fix1 = mfact.morphism_pattern(name)
        cm = mfact.solve_chain_map(pipe.A, src, tgt, (fix0, fix1), deg, name)
        maps[name] = {"degree": deg, "not_nullhomotopic": cm.nontrivial}
        rep.solution_dims[f"chain_map {name}"] = cm.solution_dim
        rep.residual(f"chain_map {name}", cm.residual, mfact.MF_TOL)
        rep.passed = rep.passed and cm.nontrivial
    rep.outputs["morphisms"] = maps
    return rep


def cmd_resolve(cfg: Config, target: str = "k", depth: int = 6) -> Report:
    rep = Report("resolve", {**cfg.inputs(), "target": target, "depth": depth})
    pipe = _pipeline(cfg)
    B = pipe.B
    rep.outputs["dim_B"] = [B.dim(d) for d in range(B.degree_cap + 1)]
    if target == "k":
        res = mfact.resolve_k_over_B(B, pipe.s0, pipe.s1, depth=depth, max_degree=min(5, B.degree_cap))
        rep.outputs["twists"] = res.twists()
        rep.outputs["homology"] = {f"{n},{d}": v for (n, d), v in sorted(res.homology.items())}
        nonzero = {k: v for k, v in rep.outputs["homology"].items() if v}
        rep.passed = nonzero == {"0,0": 1}
        rep.residual("composites", max(res.composite_residuals), mfact.COMPOSITE_TOL)
    elif target == "cone":
        cone = mfact.cone_phi(B, pipe.s0, pipe.s1, depth=max(depth - 1, 3))
        rep.outputs["row_residuals"] = cone.row_residuals
        rep.outputs["row1_not_nullhomotopic"] = cone.row_residuals[0] >= 1e-3
        rep.passed = cone.row_residuals[0] >= 1e-3
        rep.residual("chain", cone.chain_residual, mfact.MF_TOL)
        for i, r in enumerate(cone.row_residuals[1:], 2):
            rep.residual(f"row{i}_nullhomotopy", r, mfact.MF_TOL)
    elif target == "B1":
        b1 = mfact.resolve_B1(B, pipe.s0, pipe.s1, depth=min(depth, 4), max_degree=min(3, B.degree_cap - 1))
        rep.outputs["augmentation_ranks"] = b1.augmentation_ranks
        rep.outputs["expected"] = b1.expected
        rep.outputs["homology"] = {f"{n},{d}": v for (n, d), v in sorted(b1.complex.homology.items())}
        rep.passed = b1.augmentation_ranks == b1.expected and not any(b1.complex.homology.values())
    else:
        raise ConfigError(f"unknown target {target!r}")
    return rep


def cmd_fukaya(cfg: Config) -> Report:
    rep = Report("fukaya", cfg.inputs())
    # decimal inputs are read as the nearest small rational
    t = Fraction(str(cfg.theta.t)).limit_denominator(10**9)
    s = Fraction(str(cfg.theta.s)).limit_denominator(10**9)
    lines = fukaya.build_reference(t, s)
    fams = {c: fukaya.enumerate_triangles(lines, c, cfg.k_window, t) for c in "abc"}
    everything = [tr for fam in fams.values() for tr in fam]
    a0 = fukaya.fitted_base_area(everything, t)
    rep.outputs["base_area"] = fukaya.frac_str(a0)
    rep.outputs["triangles"] = fukaya.triangle_report(everything)
    rep.outputs["area_ratios"] = {
        c: [fukaya.frac_str(tr.lattice_area / a0) for tr in sorted(fam, key=lambda x: x.lattice_area)]
        for c, fam in fams.items()
    }
    rep.outputs["holonomy_ladder"] = {c: sorted({fukaya.frac_str(d) for d in fukaya.holonomy_ladder(fam)})
                                      for c, fam in fams.items()}
    cmp_ = fukaya.compare_with_theta(t, s, cfg.theta.q0, cfg.k_window, cfg.theta.K)
    rep.outputs["normalization"] = cmp_.normalization
    for c in "abc":
        rep.residual(f"series_{c}", cmp_.relative_error[c], cmp_.bound[c], floor_ok=False)
    return rep


def cmd_verify_all(cfg: Config) -> Report:
    rep = Report("verify-all", cfg.inputs())
    _tol_warnings(cfg, rep)
    pipe = Pipeline(acceptance.GENERIC, max(cfg.degree_cap, 6), cfg.cache_dir, cfg.seed, cfg.fault_inject)
    results = acceptance.run_all(pipe)
    rep.outputs["criteria"] = [r.to_json() for r in results]
    rep.timings = {f"criterion_{r.number}": r.seconds for r in results}
    for r in (r for r in results if r.passed):
        for name, val in r.values.items():
            if isinstance(val, float) and ("residual" in name or "error" in name) and val > cfg.tol:
                rep.warnings.append(f"ambiguous: criterion {r.number} {name} = {val:.3e} "
                                    f"passes its stated tolerance but exceeds tol {cfg.tol:g}")
    rep.passed = acceptance.all_passed(results)
    rep.outputs["summary"] = [r.line() for r in results]
    if any(r.note.startswith("ambiguity") for r in results if not r.passed):
        rep.outputs["ambiguous"] = True
    return rep


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value config file")
    common.add_argument("--t", type=float)
    common.add_argument("--s", type=float)
    common.add_argument("--q0", type=float)
    common.add_argument("--K", type=int)
    common.add_argument("--degree-cap", dest="degree_cap", type=int)
    common.add_argument("--tol", type=float)
    common.add_argument("--k-window", dest="k_window", type=int)
    common.add_argument("--json", dest="output", action="store_const", const="json")
    common.add_argument("--cache-dir", dest="cache_dir")
    common.add_argument("--seed", type=int)
    common.add_argument("--fault-inject", dest="fault_inject", metavar="RELATION",
                        help="perturb relation X, Y or Z by 1e-3 when verifying")

    parser = argparse.ArgumentParser(prog="skew-mirror", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("params", parents=[common], help="theta coefficients and derivative ratio")
    sub.add_parser("central", parents=[common], help="central cubic W")
    p = sub.add_parser("mf", parents=[common], help="matrix factorizations and morphisms")
    p.add_argument("--which", choices=["L", "Lprime"], default="L")
    p = sub.add_parser("resolve", parents=[common], help="resolutions over B")
    p.add_argument("--target", choices=["k", "cone", "B1"], default="k")
    p.add_argument("--depth", type=int, default=6)
    sub.add_parser("fukaya", parents=[common], help="triangle counts on the torus")
    sub.add_parser("verify-all", parents=[common], help="run the acceptance suite")
    return parser


def run(argv=None) -> tuple[int, Report | None, str]:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return (EXIT_CONFIG if exc.code else EXIT_OK), None, ""
    try:
        cfg = make_config(args)
    except ConfigError as exc:
        return EXIT_CONFIG, None, f"config error: {exc}"
    t0 = time.perf_counter()
    try:
        if args.command == "params":
            rep = cmd_params(cfg)
        elif args.command == "central":
            rep = cmd_central(cfg)
        elif args.command == "mf":
            rep = cmd_mf(cfg, args.which)
        elif args.command == "resolve":
            rep = cmd_resolve(cfg, args.target, args.depth)
        elif args.command == "fukaya":
            rep = cmd_fukaya(cfg)
        else:
            rep = cmd_verify_all(cfg)
    except AmbiguityError as exc:
        return EXIT_AMBIGUOUS, None, f"numerical ambiguity: {exc}"
    except (sklyanin.CentralityError, mfact.VerificationError, fukaya.PatternError) as exc:
        return EXIT_FAIL, None, f"verification failed: {exc}"
    except ValueError as exc:  # includes WindowError and DegreeCapError
        return EXIT_CONFIG, None, f"config error: {exc}"
    if args.command != "verify-all":
        _tol_warnings(cfg, rep)
    rep.timings.setdefault("total", time.perf_counter() - t0)
    if rep.passed:
        code = EXIT_OK
    elif rep.outputs.get("ambiguous"):
        code = EXIT_AMBIGUOUS
    else:
        code = EXIT_FAIL
    text = json.dumps(rep.to_json(), sort_keys=True, indent=2) if cfg.output == "json" else rep.to_text()
    if args.command == "verify-all" and cfg.output == "text":
        text = "\n".join(rep.outputs["summary"] + [w for w in rep.warnings]) + "\n" + ("ALL PASS" if rep.passed else "FAILED")
    return code, rep, text


def main(argv=None) -> int:
    code, rep, text = run(argv)
    if text:
        print(text, file=sys.stdout if rep is not None else sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
