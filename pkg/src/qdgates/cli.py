"""Command-line front end.

    qdgates coeffs --g 2.4 --ks 0.2
    qdgates simulate --gate cnot --input dd
    qdgates fidelity --gate toffoli --g 2.4 --ks 0.2
    qdgates sweep --quantity F_CNOT --resolution 31 --out fcnot.csv --format csv
    qdgates presets

Exit codes: 0 success, 2 usage error (bad flags, unparsable input or
config), 3 domain error (parameters the physics rejects).
"""

from __future__ import annotations

import argparse
import cmath
import csv
import io
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__, presets
from .cavity import CavityParams, InvalidParameterError, coefficients, feasibility
from .circuits import build, run, spin_state_label
from .metrics import QUANTITIES, average_fidelity, efficiency, sweep
from .state import InvalidCoefficientsError, spin_basis

OUTPUT_DIR_ENV = "QDGATES_OUTPUT_DIR"
GATES = ("cnot", "toffoli")
COMMANDS = ("coeffs", "simulate", "fidelity", "efficiency", "sweep", "presets")
FORMATS = ("json", "text", "csv")


class UsageError(Exception):
    pass


# configuration -----------------------------------------------------------------

@dataclass(frozen=True)
class RunConfig:
    """Everything a command needs; serializes to canonical JSON."""

    command: str = "coeffs"
    gate: str = "cnot"
    params: CavityParams = field(default_factory=lambda: CavityParams(2.4, 0.2, 0.1))
    preset: Optional[str] = None
    mode: str = "ideal"
    input: str = "uu"
    alpha: Optional[float] = None
    method: str = "auto"
    alpha_samples: int = 256
    quantity: str = "F_CNOT"
    g_range: tuple = (0.0, 3.0)
    ks_range: tuple = (0.0, 1.0)
    resolution: int = 101
    jobs: int = 1
    format: str = "json"
    precision: int = 6

    def __post_init__(self):
        checks = [
            (self.command in COMMANDS, f"unknown command {self.command!r}"),
            (self.gate in GATES, f"gate must be one of {GATES}"),
            (self.mode in ("ideal", "lossy"), "mode must be 'ideal' or 'lossy'"),
            (self.method in ("auto", "closed_form", "simulation"),
             "method must be auto, closed_form or simulation"),
            (self.quantity in QUANTITIES, f"quantity must be one of {QUANTITIES}"),
            (self.format in FORMATS, f"format must be one of {FORMATS}"),
            (1 <= self.precision <= 17, "precision must be between 1 and 17"),
            (self.resolution >= 1, "resolution must be positive"),
            (self.jobs >= 1, "jobs must be positive"),
            (self.alpha_samples >= 64, "alpha samples must be at least 64"),
            (len(self.g_range) == 2 and len(self.ks_range) == 2, "ranges need two values"),
        ]
        for ok, message in checks:
            if not ok:
                raise UsageError(message)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["params"] = self.params.as_dict()
        d["g_range"] = list(self.g_range)
        d["ks_range"] = list(self.ks_range)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        d = dict(d)
        if "params" in d:
            p = d["params"]
            if not isinstance(p, dict):
                raise UsageError("params must be an object")
            try:
                d["params"] = CavityParams(**p)
            except TypeError as exc:
                raise UsageError(f"bad params: {exc}") from None
        for key in ("g_range", "ks_range"):
            if key in d:
                d[key] = tuple(float(v) for v in d[key])
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise UsageError(f"config is not valid JSON: {exc}") from None
        if not isinstance(d, dict):
            raise UsageError("config must be a JSON object")
        return cls.from_dict(d)


def parse_input(text: str, n_spins: int, alpha: Optional[float] = None) -> np.ndarray:
    """Spin register from a basis label (``"ud"``), per-spin amplitude pairs
    (``"1,0;0.6,0.8j"``) or ``"superposition"``: every control in
    (up + down)/sqrt(2) and the target in cos(alpha) up + sin(alpha) down."""
    text = text.strip()
    if text == "superposition":
        if alpha is None:
            raise UsageError("input 'superposition' needs --alpha")
        factors = [(math.sqrt(0.5), math.sqrt(0.5))] * (n_spins - 1) + [(math.cos(alpha), math.sin(alpha))]
    elif text in spin_basis(n_spins):
        vector = np.zeros(2 ** n_spins, dtype=complex)
        vector[spin_basis(n_spins).index(text)] = 1.0
        return vector
    else:
        factors = []
        for chunk in text.split(";"):
            parts = chunk.split(",")
            if len(parts) != 2:
                raise UsageError(f"cannot parse spin input {text!r}")
            try:
                factors.append(tuple(complex(p.strip().replace(" ", "")) for p in parts))
            except ValueError:
                raise UsageError(f"cannot parse amplitudes {chunk!r}") from None
    if len(factors) != n_spins:
        raise UsageError(f"input describes {len(factors)} spins, gate needs {n_spins}")
    vector = np.array([1.0 + 0j])
    for a, b in factors:
        vector = np.kron(vector, np.array([a, b], dtype=complex))
    norm = np.linalg.norm(vector)
    if not norm > 0:
        raise UsageError("input state has zero norm")
    return vector / norm


# number formatting -----------------------------------------------------------

def _num(x: float, precision: int) -> float:
    x = float(x)
    if not math.isfinite(x):
        return x
    value = float(f"{x:.{precision}g}")
    return 0.0 if value == 0 else value  # no negative zero in output


def _cnum(z: complex, precision: int, snap: float = 1e-12) -> dict:
    # round-off residue from exact cancellations is printed as zero
    re = z.real if abs(z.real) > snap else 0.0
    im = z.imag if abs(z.imag) > snap else 0.0
    return {"re": _num(re, precision), "im": _num(im, precision)}


def _params_out(params: CavityParams, precision: int) -> dict:
    return {k: _num(v, precision) for k, v in params.as_dict().items()}


# commands --------------------------------------------------------------------

def cmd_coeffs(cfg: RunConfig) -> dict:
    p = cfg.precision
    c = coefficients(cfg.params)
    hot, cold = c.passivity_residuals()
    return {
        "command": "coeffs",
        "params": _params_out(cfg.params, p),
        "coefficients": {name: _cnum(getattr(c, name), p) for name in ("r_hot", "t_hot", "r_cold", "t_cold")},
        "passivity_residuals": {"hot": _num(hot, p), "cold": _num(cold, p)},
    }


def cmd_simulate(cfg: RunConfig) -> dict:
    p = cfg.precision
    circuit = build(cfg.gate)
    vector = parse_input(cfg.input, circuit.n_spins, cfg.alpha)
    coeffs = coefficients(cfg.params) if cfg.mode == "lossy" else None
    result = run(circuit, vector, cfg.mode, coeffs)
    outcomes = []
    for o in result.outcomes:
        entry = {"detector": o.detector, "port": o.port, "label": o.label,
                 "probability": _num(o.probability, p), "spin_state": None, "basis_state": None}
        if o.spin_state is not None:
            v = o.spin_vector
            # fix the printed global phase on the largest amplitude
            k = int(np.argmax(np.abs(v).round(12)))
            v = v * cmath.exp(-1j * cmath.phase(v[k]))
            entry["spin_state"] = {label: _cnum(a, p) for label, a in zip(spin_basis(circuit.n_spins), v)
                                   if abs(a) > 10.0 ** -(p + 2)}
            entry["basis_state"] = spin_state_label(o.spin_vector, 1e-9)
        outcomes.append(entry)
    out = {
        "command": "simulate",
        "gate": cfg.gate,
        "mode": cfg.mode,
        "input": cfg.input,
        "alpha": cfg.alpha,
        "params": _params_out(cfg.params, p) if cfg.mode == "lossy" else None,
        "outcomes": outcomes,
        "success_probability": _num(result.success_probability, p),
        "lost_probability": _num(result.lost_probability, p),
    }
    if cfg.mode == "lossy":
        # the closed-form yield is a different quantity; shown alongside, not substituted
        out["closed_form_efficiency"] = _num(efficiency(cfg.gate, cfg.params).efficiency, p)
    return out


def _method(cfg: RunConfig) -> str:
    if cfg.method != "auto":
        return cfg.method
    return "closed_form" if cfg.gate == "cnot" else "simulation"


def cmd_fidelity(cfg: RunConfig) -> dict:
    p = cfg.precision
    res = average_fidelity(cfg.gate, cfg.params, _method(cfg), cfg.alpha_samples)
    return {
        "command": "fidelity",
        "gate": cfg.gate,
        "method": res.method,
        "alpha_samples": res.alpha_samples,
        "params": _params_out(cfg.params, p),
        "average_fidelity": _num(res.average_fidelity, p),
        "xi": None if res.xi is None else _num(res.xi, p),
        "zeta": None if res.zeta is None else _num(res.zeta, p),
        "warnings": list(res.warnings),
    }


def cmd_efficiency(cfg: RunConfig) -> dict:
    p = cfg.precision
    return {
        "command": "efficiency",
        "gate": cfg.gate,
        "params": _params_out(cfg.params, p),
        "efficiency": _num(efficiency(cfg.gate, cfg.params).efficiency, p),
    }


def cmd_presets(cfg: RunConfig) -> dict:
    p = cfg.precision
    rows = []
    for preset in presets.listing():
        d = preset.as_dict()
        if preset.kappa_s_over_kappa is not None:
            params = preset.to_params(gamma_over_kappa=cfg.params.gamma_over_kappa)
            d["g_over_kappa"] = _num(params.g_over_kappa, p)
            rep = feasibility(params, tau=9.0, T2=1000.0)
            d["critical_photon_number"] = _num(rep.critical_photon_number, p)
        else:
            d["g_over_kappa"] = None
            d["critical_photon_number"] = None
        rows.append(d)
    return {"command": "presets", "presets": rows}


def _output_path(out: Optional[str], default_name: str) -> Path:
    if out:
        return Path(out)
    return Path(os.environ.get(OUTPUT_DIR_ENV, ".")) / default_name


def cmd_sweep(cfg: RunConfig, out: Optional[str]) -> dict:
    grid = sweep(cfg.quantity, cfg.g_range, cfg.ks_range, cfg.resolution,
                 cfg.params.gamma_over_kappa, cfg.jobs, cfg.alpha_samples)
    ext = "csv" if cfg.format == "csv" else "json"
    path = _output_path(out, f"sweep_{cfg.quantity}.{ext}")
    if cfg.format == "csv":
        text = grid.to_csv(cfg.precision)
    else:
        d = grid.as_dict()
        d["values"] = [[_num(v, cfg.precision) for v in row] for row in d["values"]]
        text = json.dumps(d, sort_keys=True) + "\n"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return {
        "command": "sweep",
        "quantity": cfg.quantity,
        "path": str(path),
        "shape": list(grid.values.shape),
        "min": _num(float(grid.values.min()), cfg.precision),
        "max": _num(float(grid.values.max()), cfg.precision),
    }


# rendering -------------------------------------------------------------------

def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _flatten(v, f"{prefix}{k}.")
    elif isinstance(obj, list) and obj and all(isinstance(v, dict) for v in obj):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}{i}.")
    else:
        value = "" if obj is None else obj
        if isinstance(value, list):
            value = " ".join(str(v) for v in value)
        yield prefix[:-1], value


def render(result: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(result, sort_keys=True, indent=2) + "\n"
    rows = list(_flatten(result))
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["field", "value"])
        writer.writerows(rows)
        return buf.getvalue()
    width = max(len(k) for k, _ in rows)
    return "".join(f"{k:<{width}}  {v}\n" for k, v in rows)


# argument handling -------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _pair(text: str) -> tuple:
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'lo,hi', got {text!r}") from None
    return lo, hi


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    g = common.add_argument_group("cavity parameters (units of kappa)")
    g.add_argument("--g", type=float, help="coupling strength g/kappa")
    g.add_argument("--ks", type=float, help="side leakage kappa_s/kappa")
    g.add_argument("--gamma", type=float, help="dipole decay gamma/kappa (default 0.1)")
    g.add_argument("--detuning", type=float, help="photon detuning (w - w0)/kappa")
    g.add_argument("--detuning-cavity", type=float, help="cavity detuning (w_c - w0)/kappa")
    g.add_argument("--detuning-exciton", type=float, help="exciton detuning (w_X - w0)/kappa")
    g.add_argument("--preset", help="experimental preset, see the presets command")
    o = common.add_argument_group("output")
    o.add_argument("--format", choices=FORMATS)
    o.add_argument("--precision", type=int, help="significant digits (default 6)")
    o.add_argument("--out", help="write output here instead of stdout")
    o.add_argument("--config", help="JSON config file; explicit flags override it")
    o.add_argument("--dump-config", action="store_true", help="print the effective config and exit")

    parser = _Parser(prog="qdgates", description="Photon-mediated CNOT and Toffoli gates on QD spins.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("coeffs", parents=[common], help="reflection and transmission coefficients")

    s = sub.add_parser("simulate", parents=[common], help="run a gate circuit")
    s.add_argument("--gate", choices=GATES)
    s.add_argument("--mode", choices=("ideal", "lossy"))
    s.add_argument("--input", help="basis label (e.g. dd), pairs 'a,b;c,d', or 'superposition'")
    s.add_argument("--alpha", type=float, help="target angle for --input superposition")

    f = sub.add_parser("fidelity", parents=[common], help="average gate fidelity")
    f.add_argument("--gate", choices=GATES)
    f.add_argument("--method", choices=("auto", "closed_form", "simulation"))
    f.add_argument("--alpha-samples", type=int)

    e = sub.add_parser("efficiency", parents=[common], help="gate efficiency")
    e.add_argument("--gate", choices=GATES)

    w = sub.add_parser("sweep", parents=[common], help="grid over g/kappa and kappa_s/kappa")
    w.add_argument("--quantity", choices=QUANTITIES)
    w.add_argument("--g-range", type=_pair)
    w.add_argument("--ks-range", type=_pair)
    w.add_argument("--resolution", type=int)
    w.add_argument("--jobs", type=int)
    w.add_argument("--alpha-samples", type=int)

    sub.add_parser("presets", parents=[common], help="list experimental presets")
    return parser


_SIMPLE = ("gate", "mode", "input", "alpha", "method", "alpha_samples", "quantity",
           "g_range", "ks_range", "resolution", "jobs", "format", "precision", "preset")
_PARAM_FLAGS = {"g": "g_over_kappa", "ks": "kappa_s_over_kappa", "gamma": "gamma_over_kappa",
                "detuning": "detuning_photon", "detuning_cavity": "detuning_cavity",
                "detuning_exciton": "detuning_exciton"}


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Defaults, then the config file, then explicit flags."""
    if args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}") from None
        cfg = RunConfig.from_json(text)
    else:
        cfg = RunConfig()
    updates = {"command": args.command}
    for name in _SIMPLE:
        value = getattr(args, name, None)
        if value is not None:
            updates[name] = value
    cfg = replace(cfg, **updates)

    param_updates = {v: getattr(args, k) for k, v in _PARAM_FLAGS.items() if getattr(args, k) is not None}
    params = cfg.params.as_dict()
    if args.preset is not None:
        if args.g is not None:
            raise UsageError("--g and --preset are mutually exclusive")
        try:
            preset = presets.get(args.preset)
        except KeyError as exc:
            raise UsageError(exc.args[0]) from None
        if preset.kappa_s_over_kappa is not None and args.ks is not None:
            raise UsageError(f"preset {preset.name!r} fixes kappa_s/kappa; drop --ks")
        ks = preset.kappa_s_over_kappa
        if ks is None:
            ks = args.ks if args.ks is not None else 0.0
        gamma = param_updates.get("gamma_over_kappa", params["gamma_over_kappa"])
        base = preset.to_params(ks, gamma).as_dict()
        params.update(g_over_kappa=base["g_over_kappa"], kappa_s_over_kappa=ks)
    params.update({k: v for k, v in param_updates.items() if k != "kappa_s_over_kappa" or args.preset is None})
    return replace(cfg, params=CavityParams(**params))


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = resolve_config(args)
    except UsageError as exc:
        print(f"qdgates: error: {exc}", file=sys.stderr)
        return 2
    except InvalidParameterError as exc:
        print(f"qdgates: error: {exc}", file=sys.stderr)
        return 3

    if args.dump_config:
        sys.stdout.write(cfg.to_json() + "\n")
        return 0

    try:
        if cfg.command == "sweep":
            result = cmd_sweep(cfg, args.out)
        else:
            handler = {"coeffs": cmd_coeffs, "simulate": cmd_simulate, "fidelity": cmd_fidelity,
                       "efficiency": cmd_efficiency, "presets": cmd_presets}[cfg.command]
            result = handler(cfg)
    except UsageError as exc:
        print(f"qdgates: error: {exc}", file=sys.stderr)
        return 2
    except (InvalidParameterError, InvalidCoefficientsError, ZeroDivisionError, ValueError) as exc:
        print(f"qdgates: error: {exc}", file=sys.stderr)
        return 3

    fmt = "json" if cfg.command == "sweep" else cfg.format
    text = render(result, fmt)
    if args.out and cfg.command != "sweep":
        path = Path(args.out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
