"""``gamma-pm``: batch front end for the experiment suites.

Every command accepts its parameters as flags or through ``--config
file.json`` (a flat object whose keys are the flag names with underscores;
file values override flags).  Exit status is 0 on success, 2 on invalid
input and 3 on numerical non-convergence; errors are printed to stderr as
one JSON object.
"""
from __future__ import annotations

import argparse
from dataclasses import dataclass, field
import csv
import hashlib
import json
import math
import os
import sys

import numpy as np

from .errors import (ConvergenceError, DivergenceError, DomainError, GammaPMError,
                     GeometryError, ResolutionError, StiffnessError)

COMMANDS = ("profile", "gamma1d", "gamma2d", "density", "slicing", "flow")
SHAPES = ("halfplane", "disk")
FLOW_INITS = ("ramp", "sine", "constant")
FLOW_BCS = ("periodic", "neumann")

# name: (type, default, required)
PARAMS = {
    "profile": {"a": (float, None, True), "s": (float, None, True), "n": (int, 512, False),
                "out": (str, None, False)},
    "gamma1d": {"a": (float, 0.0, False), "s": (float, None, True), "nus": (list, None, True),
                "L": (float, 1.0, False), "phi": (str, None, False), "out": (str, None, False)},
    "gamma2d": {"shape": (str, None, True), "nu": (float, None, True), "n": (int, 512, False),
                "radius": (float, 0.3, False), "phi": (str, "perona-malik", False),
                "out": (str, None, False)},
    "density": {"input": (str, None, True), "eps": (float, None, True),
                "delta": (float, None, True), "theta": (str, "sqrt", False),
                "samples": (int, 200, False), "seed": (int, 0, False), "out": (str, None, False)},
    "slicing": {"input": (str, None, True), "xi": (list, None, True), "nlines": (int, 256, False),
                "g": (str, "constant", False), "out": (str, None, False)},
    "flow": {"n": (int, 1024, False), "nu": (float, None, True), "T": (float, None, True),
             "bc": (str, "periodic", False), "init": (str, "ramp", False),
             "dt_max": (float, 1e-2, False), "snapshot_every": (int, 100, False),
             "dim": (int, 1, False), "phi": (str, "perona-malik", False),
             "out": (str, None, False)},
}


class ValidationError(GammaPMError):
    def __init__(self, violations):
        super().__init__("; ".join(violations))
        self.violations = violations


@dataclass
class ExperimentConfig:
    command: str
    parameters: dict = field(default_factory=dict)
    seed: int = 0
    output_path: str | None = None

    def canonical(self):
        return json.dumps({"command": self.command, "parameters": self.parameters,
                           "seed": self.seed}, sort_keys=True, default=str)

    def hash(self):
        return hashlib.sha256(self.canonical().encode()).hexdigest()[:16]


def thread_cap():
    raw = os.environ.get("GAMMA_PM_THREADS")
    if raw is None:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _parse_list(v):
    if isinstance(v, str):
        return [float(x) for x in v.split(",") if x.strip()]
    return [float(x) for x in v]


def _coerce(kind, value):
    if value is None:
        return None
    if kind is list:
        return _parse_list(value)
    if kind is int:
        if isinstance(value, float) and not value.is_integer():
            raise ValueError(f"{value} is not an integer")
        return int(value)
    return kind(value)


def _in_unit(name, v, out):
    if not (isinstance(v, (int, float)) and 0.0 < v <= 1.0):
        out.append(f"{name}={v}: nu must lie in (0,1]")


def with_defaults(config):
    """Copy of ``config`` with unset optional parameters at their defaults."""
    spec = PARAMS[config.command]
    params = {k: d for k, (_, d, req) in spec.items() if not req and k != "out"}
    params.update({k: v for k, v in config.parameters.items() if v is not None})
    return ExperimentConfig(config.command, params, config.seed, config.output_path)


def validate_config(config):
    """List of violations, each naming the field, its value and the constraint."""
    out = []
    if config.command not in COMMANDS:
        return [f"command={config.command}: must be one of {', '.join(COMMANDS)}"]
    spec = PARAMS[config.command]
    p = with_defaults(config).parameters
    for name in p:
        if name not in spec:
            out.append(f"{name}={p[name]}: unknown parameter for {config.command}")
    for name, (_, _, required) in spec.items():
        if required and p.get(name) is None:
            out.append(f"{name}: required parameter is missing (--{name.replace('_', '-')})")
    if out:
        return out
    g = p.get
    if "a" in spec and g("a") is not None and not (0.0 <= g("a") < 1.0):
        out.append(f"a={g('a')}: growth exponent must satisfy a in [0,1)")
    if "s" in spec and g("s") is not None and not (math.isfinite(g("s")) and g("s") >= 0):
        out.append(f"s={g('s')}: must be finite and >= 0")
    if config.command == "profile" and g("n") < 32:
        out.append(f"n={g('n')}: profile grids need n >= 32")
    if config.command == "gamma1d":
        if not g("nus"):
            out.append("nus: need at least one value")
        for v in g("nus") or []:
            _in_unit("nus", v, out)
        if not g("L") > 0:
            out.append(f"L={g('L')}: must be > 0")
    if config.command in ("gamma2d", "flow"):
        _in_unit("nu", g("nu"), out)
    if config.command == "gamma2d":
        if g("shape") not in SHAPES:
            out.append(f"shape={g('shape')}: must be one of {', '.join(SHAPES)}")
        if g("n") < 8:
            out.append(f"n={g('n')}: must be >= 8")
        if not (0 < g("radius") < 0.5):
            out.append(f"radius={g('radius')}: must lie in (0, 0.5)")
    if config.command in ("gamma1d", "gamma2d", "flow") and g("phi") is not None:
        try:
            parse_phi(g("phi"), g("a") or 0.0)
        except (DomainError, ValueError) as exc:
            out.append(f"phi={g('phi')}: {exc}")
    if config.command in ("density", "slicing"):
        if not os.path.isfile(g("input")):
            out.append(f"input={g('input')}: file not found")
    if config.command == "density":
        if not g("eps") > 0:
            out.append(f"eps={g('eps')}: must be > 0")
        if not g("delta") > 0:
            out.append(f"delta={g('delta')}: must be > 0")
        elif g("eps") > 0 and g("eps") > g("delta") / 8 * (1 + 1e-12):
            out.append(f"eps={g('eps')}: must satisfy eps <= delta/8")
        if g("samples") < 50:
            out.append(f"samples={g('samples')}: must be >= 50")
        try:
            from .functions import JumpCost
            JumpCost.from_spec(g("theta"))
        except (DomainError, ValueError) as exc:
            out.append(f"theta={g('theta')}: {exc}")
    if config.command == "slicing":
        xi = g("xi")
        if len(xi) != 2 or not np.linalg.norm(xi) > 0:
            out.append(f"xi={xi}: must be a nonzero 2-vector")
        if g("nlines") < 16:
            out.append(f"nlines={g('nlines')}: must be >= 16")
        if g("g") != "constant":
            try:
                parse_g(g("g"))
            except ValueError as exc:
                out.append(f"g={g('g')}: {exc}")
    if config.command == "flow":
        if g("dim") != 1:
            out.append(f"dim={g('dim')}: only the 1D flow is available")
        if g("bc") not in FLOW_BCS:
            out.append(f"bc={g('bc')}: must be one of {', '.join(FLOW_BCS)}")
        if g("init") not in FLOW_INITS:
            out.append(f"init={g('init')}: must be one of {', '.join(FLOW_INITS)}")
        if not g("T") > 0:
            out.append(f"T={g('T')}: must be > 0")
        if not g("dt_max") > 0:
            out.append(f"dt_max={g('dt_max')}: must be > 0")
        if isinstance(g("nu"), float) and 0 < g("nu") <= 1 and g("n") < 8 / g("nu"):
            out.append(f"n={g('n')}: need at least 8 nodes per nu, n >= {math.ceil(8 / g('nu'))}")
    return out


def parse_phi(spec, a=0.0):
    """``perona-malik``, ``saturating``, ``power:a`` or ``power:a:smoothing``."""
    from .functions import GrowthFunction
    if isinstance(spec, dict):
        return GrowthFunction.from_json(spec)
    if spec is None:
        return GrowthFunction.perona_malik() if a == 0 else GrowthFunction.power(a)
    if spec == "perona-malik":
        return GrowthFunction.perona_malik()
    if spec == "saturating":
        return GrowthFunction.power(0.0, 1.0)
    if spec.startswith("power:"):
        parts = spec.split(":")[1:]
        if len(parts) == 1:
            return GrowthFunction.power(float(parts[0]))
        return GrowthFunction.power(float(parts[0]), float(parts[1]))
    raise ValueError("expected perona-malik, saturating or power:a[:smoothing]")


def parse_g(spec):
    """``constant``, ``poly:i,j,c;i,j,c...`` or ``rect:x0,y0,x1,y1``."""
    from .limit import ConstantG, PolynomialG, RectIndicatorG
    if spec == "constant":
        return ConstantG()
    if spec.startswith("poly:"):
        coeffs = {}
        for term in spec[5:].split(";"):
            i, j, c = term.split(",")
            coeffs[(int(i), int(j))] = float(c)
        return PolynomialG(coeffs)
    if spec.startswith("rect:"):
        r = [float(v) for v in spec[5:].split(",")]
        if len(r) != 4:
            raise ValueError("rect needs four numbers")
        return RectIndicatorG(r)
    raise ValueError("expected constant, poly:i,j,c;... or rect:x0,y0,x1,y1")


# -- output ---------------------------------------------------------------------

def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


def dumps(obj):
    return json.dumps(_clean(obj), sort_keys=True, indent=2)


def write_json(path, obj):
    with open(path, "w") as fh:
        fh.write(dumps(obj) + "\n")


def write_csv(path, header, rows, config):
    with open(path, "w", newline="") as fh:
        fh.write(f"# config-hash {config.hash()}\n")
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(v)) for v in r])


def _sibling(path, suffix):
    root, _ = os.path.splitext(path)
    return root + suffix


# -- commands -------------------------------------------------------------------

def run_profile(cfg):
    from .functions import jump_exponent
    from .profile import solve_profile
    p = cfg.parameters
    sol = solve_profile(p["a"], p["s"], p["n"])
    expo = jump_exponent(p["a"])
    sigma = sol.energy / p["s"] ** expo if p["s"] > 0 else math.nan
    summary = {"a": p["a"], "s": p["s"], "eta": sol.eta, "energy": sol.energy,
               "sigmaEstimate": sigma, "exponent": expo, "n": p["n"],
               "configHash": cfg.hash()}
    if cfg.output_path:
        t = sol.psi.coords(0)
        write_csv(cfg.output_path, ["t", "psi", "psi'", "psi''"],
                  zip(t, sol.psi.values, sol.slope, sol.curvature), cfg)
        write_json(_sibling(cfg.output_path, ".json"), summary)
    return summary


def run_gamma1d(cfg):
    from .energy import minimize_fnu_1d
    from .functions import jump_exponent
    from .profile import solve_profile
    p = cfg.parameters
    phi = parse_phi(p["phi"], p["a"])
    target = solve_profile(phi.a, p["s"]).energy if p["s"] > 0 else 0.0
    rows, runs = [], []
    for nu in p["nus"]:
        rep = minimize_fnu_1d(p["s"], p["L"], nu, phi)
        e = rep.energy
        rows.append((nu, e.total, e.hessian_term, e.gradient_term, rep.tv, target))
        runs.append({"nu": nu, "energy": e.total, "hessianTerm": e.hessian_term,
                     "gradientTerm": e.gradient_term, "tv": rep.tv, "gradNorm": rep.grad_norm,
                     "iterations": rep.iterations})
    if cfg.output_path:
        write_csv(cfg.output_path, ["nu", "energy", "hessianTerm", "gradientTerm", "tv",
                                    "sigmaTarget"], rows, cfg)
    return {"a": phi.a, "s": p["s"], "phi": phi.to_json(), "sigmaTarget": target,
            "exponent": jump_exponent(phi.a), "runs": runs, "configHash": cfg.hash()}


def run_gamma2d(cfg):
    from . import geometry as geo
    from .energy import build_recovery_2d, fnu_2d
    from .profile import solve_profile
    p = cfg.parameters
    phi = parse_phi(p["phi"])
    prof = solve_profile(phi.a, 1.0)
    n = p["n"]
    if p["shape"] == "halfplane":
        d = lambda X, Y: geo.halfplane_signed_distance(X, Y, (1.0, 0.0), 0.5)
        length = 1.0
    else:
        r = p["radius"]
        d = lambda X, Y: geo.disk_signed_distance(X, Y, (0.5, 0.5), r)
        length = 2.0 * math.pi * r
    u = build_recovery_2d(prof, p["nu"], signed_distance=d, shape=(n, n))
    e = fnu_2d(u, p["nu"], phi)
    target = prof.energy * length
    summary = {"shape": p["shape"], "nu": p["nu"], "n": n, "phi": phi.to_json(),
               "energy": e.total, "hessianTerm": e.hessian_term,
               "gradientTerm": e.gradient_term, "target": target,
               "relativeError": e.total / target - 1.0, "sigma": prof.energy,
               "interfaceLength": length, "configHash": cfg.hash()}
    if cfg.output_path:
        u.save(cfg.output_path)
        write_json(_sibling(cfg.output_path, ".summary.json"), summary)
    return summary


def _load_partition(path):
    from .partition import PiecewiseConstant1D, PiecewisePolyFunction
    with open(path) as fh:
        data = json.load(fh)
    if data.get("dim") == 1:
        return PiecewiseConstant1D(data["breakpoints"], data["values"], tuple(data["interval"]))
    return PiecewisePolyFunction.from_json(data)


def run_density(cfg):
    from .density import averaged_inequality_check, polytope_approximate
    from .functions import JumpCost
    from .partition import extend_constant
    p = cfg.parameters
    theta = JumpCost.from_spec(p["theta"])
    u = _load_partition(p["input"])
    eps = p["eps"]
    need = 2.0 * math.sqrt(2.0) * eps
    x0, y0, x1, y1 = u.core
    X0, Y0, X1, Y1 = u.domain
    if min(x0 - X0, y0 - Y0, X1 - x1, Y1 - y1) < need:
        if u.core != u.domain:
            raise DomainError("the input margin is narrower than 2 sqrt(2) eps")
        u = extend_constant(u, 1.25 * need)
    avg = averaged_inequality_check(u, eps, theta, p["samples"], p["seed"], thread_cap())
    rep = polytope_approximate(u, p["delta"], eps, theta, p["seed"])
    out = {"meanD": avg.mean_d, "stdErr": avg.std_err, "e0": avg.e0,
           "averagedHolds": bool(avg.mean_d <= avg.e0 + 3 * avg.std_err),
           "theta": theta.to_json(), "samples": p["samples"], "seed": p["seed"],
           "configHash": cfg.hash()}
    out.update(rep.to_json())
    out["energyBound"] = rep.energy_bound
    if cfg.output_path:
        write_json(cfg.output_path, out)
    return out


def run_slicing(cfg):
    from .limit import slicing_identity_check, total_jump_mass
    p = cfg.parameters
    u = _load_partition(p["input"])
    xi = np.asarray(p["xi"], dtype=float)
    xi = xi / np.linalg.norm(xi)
    lhs, rhs = slicing_identity_check(u, xi, parse_g(p["g"]), p["nlines"])
    mass = total_jump_mass(u)
    out = {"xi": xi, "nlines": p["nlines"], "g": p["g"], "lhs": lhs, "rhs": rhs,
           "absError": abs(lhs - rhs), "bound": 2.0 * mass / p["nlines"],
           "totalJumpMass": mass, "configHash": cfg.hash()}
    if cfg.output_path:
        write_json(cfg.output_path, out)
    return out


def flow_initial(init, n, bc):
    from .flow import periodic_ramp, ramp
    from .grid import GridFunction
    periodic = bc == "periodic"
    x = np.arange(n) / n if periodic else np.linspace(0.0, 1.0, n)
    if init == "ramp":
        v = periodic_ramp(x) if periodic else ramp(x)
    elif init == "sine":
        v = np.sin(2.0 * np.pi * x)
    else:
        v = np.ones(n)
    return GridFunction((0.0, 1.0), v, periodic=periodic)


def run_flow(cfg):
    from .flow import detect_plateaus, flow_run, plateau_coverage
    p = cfg.parameters
    phi = parse_phi(p["phi"])
    u0 = flow_initial(p["init"], p["n"], p["bc"])
    run = flow_run(u0, p["T"], p["nu"], phi, p["bc"], p["snapshot_every"], dt_max=p["dt_max"])
    st = run.state
    pc = detect_plateaus(st.u, 1.0)
    e = np.array([v for _, v in st.energy_history])
    out = {"T": st.t, "accepted": st.accepted, "rejected": st.rejected,
           "energyInitial": float(e[0]), "energyFinal": float(e[-1]),
           "maxEnergyIncrease": float(np.max(np.diff(e))) if e.size > 1 else 0.0,
           "meanInitial": float(np.mean(u0.values)), "meanFinal": float(np.mean(st.u.values)),
           "plateaus": [pl.__dict__ for pl in pc.plateaus], "plateauCoverage": plateau_coverage(pc),
           "configHash": cfg.hash()}
    if cfg.output_path:
        x = u0.coords(0)
        rows = [(t, xi, ui) for t, vals in run.snapshots for xi, ui in zip(x, vals)]
        write_csv(cfg.output_path, ["t", "x", "u"], rows, cfg)
        rows = [(t, tot, hs, gr) for (t, tot), (hs, gr) in zip(st.energy_history, st.parts_history)]
        write_csv(_sibling(cfg.output_path, ".energy.csv"),
                  ["t", "total", "hessianTerm", "gradientTerm"], rows, cfg)
    return out


RUNNERS = {"profile": run_profile, "gamma1d": run_gamma1d, "gamma2d": run_gamma2d,
           "density": run_density, "slicing": run_slicing, "flow": run_flow}


def run_experiment(config):
    """Validate and execute; returns (exit status, summary or error dict)."""
    violations = validate_config(config)
    if violations:
        return 2, {"error": "validation", "violations": violations}
    config = with_defaults(config)
    try:
        return 0, RUNNERS[config.command](config)
    except (ConvergenceError, DivergenceError, StiffnessError) as exc:
        return 3, {"error": type(exc).__name__, "message": str(exc)}
    except (DomainError, ResolutionError, GeometryError) as exc:
        return 2, {"error": type(exc).__name__, "message": str(exc)}


def build_parser():
    ap = argparse.ArgumentParser(prog="gamma-pm", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name, spec in PARAMS.items():
        sp = sub.add_parser(name)
        for key, (kind, _, _) in spec.items():
            flag = "--" + key.replace("_", "-")
            sp.add_argument(flag, dest=key, type=str, default=None)
        sp.add_argument("--config", default=None)
    return ap


def config_from_args(ns):
    spec = PARAMS[ns.command]
    raw = {k: getattr(ns, k) for k in spec if getattr(ns, k) is not None}
    if ns.config:
        with open(ns.config) as fh:
            file_cfg = json.load(fh)
        file_cfg.pop("command", None)
        raw.update(file_cfg)
    params, bad = {}, []
    for key, (kind, default, _) in spec.items():
        v = raw.get(key, default)
        try:
            params[key] = _coerce(kind, v)
        except (TypeError, ValueError):
            bad.append(f"{key}={v}: expected {kind.__name__}")
    for key in raw:
        if key not in spec:
            params[key] = raw[key]
    out = params.pop("out", None)
    seed = params.get("seed", 0) or 0
    return ExperimentConfig(ns.command, params, int(seed), out), bad


def main(argv=None):
    ap = build_parser()
    ns = ap.parse_args(argv)
    try:
        cfg, bad = config_from_args(ns)
    except (OSError, json.JSONDecodeError) as exc:
        print(dumps({"error": "config", "message": str(exc)}), file=sys.stderr)
        return 2
    if bad:
        print(dumps({"error": "validation", "violations": bad}), file=sys.stderr)
        return 2
    status, result = run_experiment(cfg)
    if status:
        print(dumps(result), file=sys.stderr)
    else:
        print(dumps(result))
    return status


if __name__ == "__main__":
    sys.exit(main())
