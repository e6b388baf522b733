"""
Average gate fidelity, photon efficiency and (g, kappa_s) parameter sweeps.

Fidelities compare the realistic and ideal photon+spin states just before
the photon is detected, averaged over the target-spin angle alpha of the
input ``(|u> + |d>)/sqrt2 (x) ... (x) (cos a |u> + sin a |d>)``.  The
realistic state is renormalized to its photon-surviving part first, so the
fidelity is conditioned on a detector click; photon loss shows up in the
efficiency instead.

Because every circuit is linear, the state for arbitrary alpha is
``cos(a) psi(target up) + sin(a) psi(target down)``; both simulation and the
CNOT closed form are evaluated on the alpha grid this way.
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence, Union

import numpy as np

from .cavity import CavityParams, ScatteringCoefficients, coefficients
from .circuits import build, build_cnot, evolve
from .state import HybridState, photon_state, plus_minus

SQRT2 = math.sqrt(2.0)
CNOT_OUTPUT_PORT = "8"
QUANTITIES = ("F_CNOT", "F_Toffoli", "eta_CNOT", "eta_Toffoli")


def _gate_key(gate: str) -> str:
    key = gate.lower()
    if key not in ("cnot", "toffoli"):
        raise ValueError(f"unknown gate {gate!r}")
    return key


# CNOT output states written out by hand ---------------------------------------

def _cnot_ports():
    return build_cnot().ports


def _with_photon(terms: dict[str, dict[str, complex]]) -> HybridState:
    """``{"plus"/"minus": {spins: amp}}`` -> state with the photon on port 8."""
    ports = _cnot_ports()
    total = None
    for which, spin_amps in terms.items():
        spins = HybridState({(None, s): a for s, a in spin_amps.items()}, 2, ports)
        part = photon_state(plus_minus(+1 if which == "plus" else -1), CNOT_OUTPUT_PORT, spins)
        total = part if total is None else total + part
    return total


def ideal_cnot_output(alpha: float) -> HybridState:
    """Ideal CNOT state before detection, in the |+>, |-> photon basis.

    |-> (cos a |dd> + sin a |du>)/sqrt2 - |+> (cos a |uu> + sin a |ud>)/sqrt2,
    spins ordered (control, target).
    """
    c, s = math.cos(alpha), math.sin(alpha)
    return _with_photon({
        "minus": {"dd": c / SQRT2, "du": s / SQRT2},
        "plus": {"uu": -c / SQRT2, "ud": -s / SQRT2},
    })


def xi_zeta(coeffs: ScatteringCoefficients) -> tuple[float, float]:
    r, t, r0, t0 = coeffs.magnitudes()
    cold, hot = t0 - r0, t - r
    return cold - hot, cold + hot


def realistic_cnot_output(alpha: float, coeffs: ScatteringCoefficients) -> HybridState:
    """Leaky-cavity CNOT state before detection (not normalized).

    The |+> branch carries the transmission terms weighted by
    xi = (|t0| - |r0|) - (|t| - |r|) and zeta = (|t0| - |r0|) + (|t| - |r|);
    the |-> branch the reflection terms |r| and -|r0|.
    """
    r, t, r0, t0 = coeffs.magnitudes()
    xi, zeta = xi_zeta(coeffs)
    c, s = math.cos(alpha), math.sin(alpha)
    k = 1.0 / (2.0 * SQRT2)
    first = xi * c + zeta * s
    second = zeta * c + xi * s
    return _with_photon({
        "plus": {
            "du": k * t * first,
            "dd": k * t * second,
            "uu": -k * t0 * first,
            "ud": -k * t0 * second,
        },
        "minus": {
            "dd": r * c / SQRT2,
            "du": r * s / SQRT2,
            "ud": -r0 * c / SQRT2,
            "uu": -r0 * s / SQRT2,
        },
    })


# fidelity ---------------------------------------------------------------------

@dataclass(frozen=True)
class FidelityResult:
    average_fidelity: float
    method: str
    alpha_samples: int
    xi: Optional[float] = None
    zeta: Optional[float] = None
    resonant: bool = True
    warnings: tuple[str, ...] = field(default_factory=tuple)


def alpha_nodes(samples: int) -> np.ndarray:
    """Uniform periodic trapezoid nodes on [0, 2 pi)."""
    return 2.0 * np.pi * np.arange(samples) / samples


def _paired_vectors(up: HybridState, down: HybridState, keys=None):
    if keys is None:
        keys = sorted(set(up.keys()) | set(down.keys()), key=repr)
    return keys, up.to_vector(keys), down.to_vector(keys)


def _average_overlap(real_up, real_down, ideal_up, ideal_down, alphas) -> float:
    """Mean over alpha of |<i|r>|^2 / (<i|i><r|r>) for states linear in (cos a, sin a)."""
    c, s = np.cos(alphas)[:, None], np.sin(alphas)[:, None]
    real = c * real_up + s * real_down
    ideal = c * ideal_up + s * ideal_down
    overlap = np.abs(np.sum(ideal.conj() * real, axis=1)) ** 2
    norms = np.sum(np.abs(real) ** 2, axis=1) * np.sum(np.abs(ideal) ** 2, axis=1)
    return float(np.clip(np.mean(overlap / norms), 0.0, 1.0))


def _closed_form_cnot(coeffs: ScatteringCoefficients, samples: int) -> float:
    keys, r_up, r_down = _paired_vectors(realistic_cnot_output(0.0, coeffs),
                                         realistic_cnot_output(math.pi / 2, coeffs))
    _, i_up, i_down = _paired_vectors(ideal_cnot_output(0.0), ideal_cnot_output(math.pi / 2), keys)
    return _average_overlap(r_up, r_down, i_up, i_down, alpha_nodes(samples))


def fidelity_input(n_spins: int, target: str) -> np.ndarray:
    """Controls in (|u>+|d>)/sqrt2, target in |u> or |d>."""
    v = np.array([1.0 + 0j])
    for _ in range(n_spins - 1):
        v = np.kron(v, np.array([1.0, 1.0]) / SQRT2)
    return np.kron(v, np.array([1.0, 0.0]) if target == "u" else np.array([0.0, 1.0]))


@lru_cache(maxsize=None)
def _ideal_branches(gate: str):
    circuit = build(gate)
    return tuple(evolve(circuit, fidelity_input(circuit.n_spins, t))[0] for t in "ud")


def simulated_states(gate: str, coeffs: Optional[ScatteringCoefficients], alpha: float):
    """Pre-detection joint state of the full circuit for target angle ``alpha``."""
    circuit = build(gate)
    vec = (math.cos(alpha) * fidelity_input(circuit.n_spins, "u")
           + math.sin(alpha) * fidelity_input(circuit.n_spins, "d"))
    mode = "ideal" if coeffs is None else "lossy"
    return evolve(circuit, vec, mode, coeffs)[0]


def _simulated_fidelity(gate: str, coeffs: ScatteringCoefficients, samples: int) -> float:
    circuit = build(gate)
    real = [evolve(circuit, fidelity_input(circuit.n_spins, t), "lossy", coeffs)[0].sector("photon")
            for t in "ud"]
    ideal = _ideal_branches(gate)
    keys = sorted(set().union(*(s.keys() for s in (*real, *ideal))), key=repr)
    _, r_up, r_down = _paired_vectors(*real, keys)
    _, i_up, i_down = _paired_vectors(*ideal, keys)
    return _average_overlap(r_up, r_down, i_up, i_down, alpha_nodes(samples))


def average_fidelity(gate: str, params: Union[CavityParams, ScatteringCoefficients],
                     method: Optional[str] = None, alpha_samples: int = 256) -> FidelityResult:
    """Target-angle averaged gate fidelity.

    ``method`` is ``"closed_form"`` (CNOT only) or ``"simulation"``; ``None``
    picks the closed form when one exists.  Detuned parameters are accepted
    but flagged in ``warnings``.
    """
    gate = _gate_key(gate)
    if method is None:
        method = "closed_form" if gate == "cnot" else "simulation"
    if alpha_samples < 64:
        raise ValueError("alpha_samples must be at least 64")
    notes = []
    resonant = True
    if isinstance(params, CavityParams):
        resonant = params.is_resonant
        coeffs = coefficients(params)
    else:
        coeffs = params
    if not resonant:
        notes.append("detuned parameters: phase conventions off resonance are not validated")
        warnings.warn(notes[-1], stacklevel=2)

    if method == "closed_form":
        if gate != "cnot":
            raise ValueError("closed-form fidelity is only available for the CNOT gate")
        value = _closed_form_cnot(coeffs, alpha_samples)
    elif method == "simulation":
        value = _simulated_fidelity(gate, coeffs, alpha_samples)
    else:
        raise ValueError(f"method must be 'closed_form' or 'simulation', got {method!r}")
    xi, zeta = xi_zeta(coeffs) if gate == "cnot" else (None, None)
    return FidelityResult(value, method, alpha_samples, xi, zeta, resonant, tuple(notes))


# efficiency -------------------------------------------------------------------

@dataclass(frozen=True)
class EfficiencyResult:
    efficiency: float
    gate: str


def efficiency(gate: str, coeffs: Union[CavityParams, ScatteringCoefficients]) -> EfficiencyResult:
    """Photon yield of the gate.

    With ``loss = |t0||r0| + |t||r|``: CNOT ``(1 - loss)^2`` and Toffoli
    ``(1 - loss)^2 (2 - loss) / 2``.
    """
    gate = _gate_key(gate)
    if isinstance(coeffs, CavityParams):
        coeffs = coefficients(coeffs)
    r, t, r0, t0 = coeffs.magnitudes()
    loss = t0 * r0 + t * r
    if gate == "cnot":
        value = (1.0 - loss) ** 2
        return EfficiencyResult(value, "CNOT")
    value = 0.5 * (1.0 - loss) ** 2 * (2.0 - loss)
    return EfficiencyResult(value, "Toffoli")


# sweeps -----------------------------------------------------------------------

@dataclass
class SweepGrid:
    """``values[i, j]`` is the quantity at ``axis_g[i]``, ``axis_ks[j]``."""

    axis_g: np.ndarray
    axis_ks: np.ndarray
    values: np.ndarray
    quantity: str

    def to_csv(self, precision: int = 6) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([f"g_over_kappa\\kappa_s_over_kappa"] + [f"{k:.{precision}g}" for k in self.axis_ks])
        for g, row in zip(self.axis_g, self.values):
            writer.writerow([f"{g:.{precision}g}"] + [f"{v:.{precision}g}" for v in row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, quantity: str) -> "SweepGrid":
        rows = list(csv.reader(io.StringIO(text)))
        ks = np.array([float(x) for x in rows[0][1:]])
        g = np.array([float(r[0]) for r in rows[1:]])
        values = np.array([[float(x) for x in r[1:]] for r in rows[1:]])
        return cls(g, ks, values, quantity)

    def as_dict(self) -> dict:
        return {
            "quantity": self.quantity,
            "axes": {"g_over_kappa": self.axis_g.tolist(), "kappa_s_over_kappa": self.axis_ks.tolist()},
            "values": self.values.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict())

    @classmethod
    def from_json(cls, text: str) -> "SweepGrid":
        d = json.loads(text)
        return cls(np.array(d["axes"]["g_over_kappa"]), np.array(d["axes"]["kappa_s_over_kappa"]),
                   np.array(d["values"]), d["quantity"])


def evaluate(quantity: str, params: CavityParams, alpha_samples: int = 256) -> float:
    """One sweep cell."""
    if quantity == "F_CNOT":
        return average_fidelity("cnot", params, "closed_form", alpha_samples).average_fidelity
    if quantity == "F_Toffoli":
        return average_fidelity("toffoli", params, "simulation", alpha_samples).average_fidelity
    if quantity == "eta_CNOT":
        return efficiency("cnot", params).efficiency
    if quantity == "eta_Toffoli":
        return efficiency("toffoli", params).efficiency
    raise ValueError(f"quantity must be one of {QUANTITIES}")


def _row(args):
    quantity, g, ks_axis, gamma, samples = args
    return [evaluate(quantity, CavityParams(g, ks, gamma), samples) for ks in ks_axis]


def sweep(quantity: str, g_range: Sequence[float] = (0.0, 3.0), ks_range: Sequence[float] = (0.0, 1.0),
          resolution: Union[int, Sequence[int]] = 101, gamma_over_kappa: float = 0.1,
          jobs: int = 1, alpha_samples: int = 256) -> SweepGrid:
    """Evaluate ``quantity`` on a resonant (g/kappa, kappa_s/kappa) grid.

    Rows (fixed g) are independent and are farmed out to ``jobs`` worker
    processes when ``jobs > 1``.
    """
    if quantity not in QUANTITIES:
        raise ValueError(f"quantity must be one of {QUANTITIES}")
    n_g, n_ks = (resolution, resolution) if isinstance(resolution, int) else resolution
    if min(n_g, n_ks) < 1:
        raise ValueError("resolution must be positive")
    if min(*g_range, *ks_range) < 0:
        raise ValueError("ranges must be non-negative")
    axis_g = np.linspace(g_range[0], g_range[1], n_g)
    axis_ks = np.linspace(ks_range[0], ks_range[1], n_ks)
    tasks = [(quantity, float(g), [float(k) for k in axis_ks], gamma_over_kappa, alpha_samples)
             for g in axis_g]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_row, tasks))
    else:
        rows = [_row(t) for t in tasks]
    return SweepGrid(axis_g, axis_ks, np.array(rows, dtype=float), quantity)
