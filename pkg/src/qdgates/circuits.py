"""
Photon-mediated CNOT and Toffoli circuits on QD spins.

A circuit is a flat list of :class:`Element` descriptors acting on a
:class:`~qdgates.state.HybridState`, followed by a photon measurement and a
classical feed-forward table.  The single photon always enters as ``R`` on
port ``"in"`` travelling down.

Each photon-cavity interaction is wired as a *round*: a circular PBS sends R
to the top face of the cavity (travelling down) and L to the bottom face
(travelling up), both faces scatter, and the same PBS merges the two return
paths onto one output port.  Without a phase shifter the round acts as

    R u -> -R u,  R d -> L d,  L u -> -L u,  L d -> R d      (round_a)

and with a pi shifter in the bottom arm (passed on the way in and out) the
transmission sign is cancelled:

    R u -> R u,   R d -> L d,  L u -> L u,   L d -> R d      (round_b)

Port names follow the gate figures where they exist (``1``..``8`` and
``1~``..``3~``); ports internal to a round carry the round's prefix.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from .cavity import ScatteringCoefficients
from .state import (
    HybridState,
    Photon,
    apply_bs,
    apply_cavity_ideal,
    apply_cavity_lossy,
    apply_cpbs,
    apply_hwp,
    apply_path,
    apply_phase_shift,
    apply_sigma_z,
    apply_spin_hadamard,
    global_phase_of,
    measure_photon,
    norm_sq,
    spin_basis,
)

INPUT_PORT = "in"


@dataclass(frozen=True)
class Element:
    """One optical or spin element.

    ``op`` is one of ``cpbs``, ``cavity``, ``hwp``, ``phase``, ``bs``,
    ``path``, ``delay``, ``spin_hadamard``, ``sigma_z`` or ``checkpoint``;
    ``args`` holds its port/spin bindings.  ``block`` names the composite
    stage (e.g. ``round_a``) the element belongs to.
    """

    op: str
    args: Mapping = field(default_factory=dict)
    block: str = ""

    def as_dict(self) -> dict:
        return {"op": self.op, "block": self.block,
                "args": {k: list(v) if isinstance(v, tuple) else v for k, v in self.args.items()}}


@dataclass(frozen=True)
class CircuitSpec:
    name: str
    n_spins: int
    ports: tuple[str, ...]
    elements: tuple[Element, ...]
    measurement_ports: tuple[str, ...]
    basis: str
    detectors: Mapping[str, tuple[str, str]]
    feed_forward: Mapping[str, tuple[tuple[int, str], ...]]
    cavities: Mapping[int, int]

    def block(self, name: str) -> tuple[Element, ...]:
        return tuple(e for e in self.elements if e.block == name)

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "n_spins": self.n_spins,
            "ports": list(self.ports),
            "cavities": {str(k): v for k, v in sorted(self.cavities.items())},
            "elements": [e.as_dict() for e in self.elements],
            "measurement": {"ports": list(self.measurement_ports), "basis": self.basis},
            "detectors": {k: list(v) for k, v in self.detectors.items()},
            "feed_forward": {k: [list(c) for c in v] for k, v in self.feed_forward.items()},
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.as_dict(), indent=indent)


def _round(block: str, cavity: int, spin: int, port_in: str, port_out: str,
           top: str, bottom: str, top_ret: str, bottom_ret: str,
           phase_arm: bool = False) -> list[Element]:
    dump_in, dump_out = f"{block}:x_in", f"{block}:x_out"
    els = [Element("cpbs", {"in_ports": (port_in, dump_in), "out_ports": (top, bottom)}, block)]
    if phase_arm:
        els.append(Element("phase", {"port": bottom, "phase": math.pi}, block))
    els.append(Element("cavity", {"cavity": cavity, "spin_index": spin, "in_port": top,
                                  "transmit_port": bottom_ret, "reflect_port": top_ret,
                                  "direction": "down", "opposite_in_port": bottom}, block))
    if phase_arm:
        els.append(Element("phase", {"port": bottom_ret, "phase": math.pi}, block))
    els.append(Element("cpbs", {"in_ports": (bottom_ret, top_ret), "out_ports": (port_out, dump_out)}, block))
    return els


def _generic_round(block, cavity, spin, port_in, port_out, phase_arm=False):
    p = block
    return _round(block, cavity, spin, port_in, port_out,
                  f"{p}:top", f"{p}:bottom", f"{p}:top_ret", f"{p}:bottom_ret", phase_arm)


def _ports_of(elements: Sequence[Element], extra: Sequence[str] = ()) -> tuple[str, ...]:
    ports = set(extra)
    for e in elements:
        for key, value in e.args.items():
            if key in ("in_ports", "out_ports"):
                ports.update(value)
            elif key.endswith("port") or key in ("from_port", "to_port"):
                ports.add(value)
    return tuple(sorted(ports))


def build_cnot() -> CircuitSpec:
    """CNOT with the spin in cavity 1 as control (spin 0) and the spin in
    cavity 2 as target (spin 1).

    Outcome ``L`` on port 8 heralds success directly; outcome ``R`` needs
    -sigma_z on the control.
    """
    els = _round("round_a", 1, 0, INPUT_PORT, "3", top="1", bottom="1b", top_ret="1r", bottom_ret="2")
    els.append(Element("checkpoint", {"name": "after_round_a"}))
    els += [
        Element("hwp", {"port": "3"}, "prepare_b"),
        Element("spin_hadamard", {"spin_index": 1}, "prepare_b"),
        Element("path", {"from_port": "3", "to_port": "4"}, "prepare_b"),
    ]
    els += _round("round_b", 2, 1, "4", "8", top="5", bottom="6", top_ret="5r", bottom_ret="6r",
                  phase_arm=True)
    els.append(Element("spin_hadamard", {"spin_index": 1}, "finish_b"))
    els.append(Element("checkpoint", {"name": "pre_measurement"}))
    return CircuitSpec(
        name="CNOT",
        n_spins=2,
        ports=_ports_of(els),
        elements=tuple(els),
        measurement_ports=("8",),
        basis="RL",
        detectors={"L": ("8", "L"), "R": ("8", "R")},
        feed_forward={"L": (), "R": ((0, "-sigma_z"),)},
        cavities={1: 0, 2: 1},
    )


# Detector -> (port, polarization) wiring of the Toffoli read-out.  The only
# assignment for which the heralded corrections restore the Toffoli output
# (checked exhaustively in the test-suite).
TOFFOLI_DETECTORS = {
    "D1": ("3~", "plus"),
    "D2": ("3~", "minus"),
    "D3": ("5", "plus"),
    "D4": ("5", "minus"),
}


def build_toffoli() -> CircuitSpec:
    """Toffoli with controls in cavities 1, 2 (spins 0, 1) and target in cavity 3 (spin 2)."""
    els = [
        Element("cavity", {"cavity": 1, "spin_index": 0, "in_port": INPUT_PORT,
                           "transmit_port": "1~", "reflect_port": "1", "direction": "down"},
                "cavity_1"),
        Element("checkpoint", {"name": "after_cavity_1"}),
    ]
    els += _generic_round("round_a1", 2, 1, "1", "2")
    els += _generic_round("round_a2", 2, 1, "1~", "2~")
    els.append(Element("checkpoint", {"name": "after_round_a12"}))
    els += [Element("hwp", {"port": "2"}, "hwp1"), Element("spin_hadamard", {"spin_index": 2}, "hwp1")]
    els += _generic_round("round_a3", 3, 2, "2", "4")
    els += [Element("hwp", {"port": "4"}, "hwp2"), Element("spin_hadamard", {"spin_index": 2}, "hwp2")]
    els.append(Element("checkpoint", {"name": "after_round_a3"}))
    els += [
        Element("delay", {"port": "2~"}, "interfere"),
        Element("bs", {"in_ports": ("4", "2~"), "out_ports": ("5", "3~")}, "interfere"),
        Element("checkpoint", {"name": "pre_measurement"}),
    ]
    return CircuitSpec(
        name="Toffoli",
        n_spins=3,
        ports=_ports_of(els),
        elements=tuple(els),
        measurement_ports=("5", "3~"),
        basis="PlusMinus",
        detectors=dict(TOFFOLI_DETECTORS),
        feed_forward={
            "D1": ((0, "-sigma_z"), (1, "sigma_z")),
            "D2": (),
            "D3": ((1, "sigma_z"),),
            "D4": ((0, "sigma_z"),),
        },
        cavities={1: 0, 2: 1, 3: 2},
    )


def build(name: str) -> CircuitSpec:
    key = name.lower()
    if key == "cnot":
        return build_cnot()
    if key == "toffoli":
        return build_toffoli()
    raise ValueError(f"unknown gate {name!r}")


# execution -------------------------------------------------------------------

CoeffsArg = Union[None, ScatteringCoefficients, Mapping[int, ScatteringCoefficients]]


def _coeffs_for(coeffs: CoeffsArg, cavity: int) -> Optional[ScatteringCoefficients]:
    if coeffs is None or isinstance(coeffs, ScatteringCoefficients):
        return coeffs
    return coeffs[cavity]


def apply_element(state: HybridState, element: Element, coeffs: CoeffsArg = None) -> HybridState:
    """Apply one element; cavities scatter ideally when ``coeffs`` is None."""
    a = element.args
    op = element.op
    if op == "cavity":
        c = _coeffs_for(coeffs, a["cavity"])
        ports = (a["spin_index"], a["in_port"], a["transmit_port"], a["reflect_port"])
        if c is None:
            return apply_cavity_ideal(state, *ports, direction=a["direction"],
                                      opposite_in_port=a.get("opposite_in_port"))
        return apply_cavity_lossy(state, *ports, c, direction=a["direction"],
                                  opposite_in_port=a.get("opposite_in_port"))
    if op == "cpbs":
        return apply_cpbs(state, a["in_ports"], a["out_ports"])
    if op == "hwp":
        return apply_hwp(state, a["port"])
    if op == "phase":
        return apply_phase_shift(state, a["port"], a["phase"])
    if op == "bs":
        return apply_bs(state, a["in_ports"], a["out_ports"])
    if op == "path":
        return apply_path(state, a["from_port"], a["to_port"])
    if op == "spin_hadamard":
        return apply_spin_hadamard(state, a["spin_index"])
    if op == "sigma_z":
        return apply_sigma_z(state, a["spin_index"], a.get("with_global_minus", False))
    if op in ("delay", "checkpoint"):
        return state
    raise ValueError(f"unknown element op {op!r}")


def _resolve_coeffs(mode: str, coeffs: CoeffsArg) -> CoeffsArg:
    if mode == "ideal":
        return None
    if mode == "lossy":
        if coeffs is None:
            raise ValueError("lossy mode needs scattering coefficients")
        return coeffs
    raise ValueError(f"mode must be 'ideal' or 'lossy', got {mode!r}")


def _as_spin_state(circuit: CircuitSpec, spins) -> HybridState:
    if isinstance(spins, HybridState):
        if spins.n_spins != circuit.n_spins:
            raise ValueError(f"{circuit.name} acts on {circuit.n_spins} spins, got {spins.n_spins}")
        vector = spins.spin_vector()
    else:
        vector = np.asarray(spins, dtype=complex)
        if vector.shape != (2 ** circuit.n_spins,):
            raise ValueError(f"{circuit.name} needs a spin vector of length {2 ** circuit.n_spins}")
    return HybridState.from_spin_vector(vector, ports=circuit.ports)


def inject(circuit: CircuitSpec, spins) -> HybridState:
    """Photon R on the input port times the spin register."""
    spin_state = _as_spin_state(circuit, spins)
    photon = Photon("R", INPUT_PORT)
    return spin_state.with_amplitudes({(photon, s): a for (_, s), a in spin_state.items()})


def evolve(circuit: CircuitSpec, spins, mode: str = "ideal", coeffs: CoeffsArg = None,
           elements: Optional[Sequence[Element]] = None) -> tuple[HybridState, dict[str, HybridState]]:
    """Propagate up to (not including) the measurement.

    Returns the final joint state and the states recorded at each checkpoint.
    ``spins`` may also be a full :class:`HybridState` with the photon already
    placed, which is how sub-blocks are probed.
    """
    c = _resolve_coeffs(mode, coeffs)
    if isinstance(spins, HybridState) and any(p is not None for p, _ in spins.keys()):
        state = spins
    else:
        state = inject(circuit, spins)
    snapshots = {}
    for element in circuit.elements if elements is None else elements:
        if element.op == "checkpoint":
            snapshots[element.args["name"]] = state
        state = apply_element(state, element, c)
    return state, snapshots


def apply_corrections(state: HybridState, corrections: Sequence[tuple[int, str]]) -> HybridState:
    for spin, op in corrections:
        if op == "sigma_z":
            state = apply_sigma_z(state, spin)
        elif op == "-sigma_z":
            state = apply_sigma_z(state, spin, with_global_minus=True)
        elif op != "identity":
            raise ValueError(f"unknown correction {op!r}")
    return state


@dataclass(frozen=True)
class DetectorOutcome:
    detector: str
    port: str
    label: str
    probability: float
    spin_state: Optional[HybridState]

    @property
    def spin_vector(self) -> Optional[np.ndarray]:
        return None if self.spin_state is None else self.spin_state.spin_vector()


@dataclass(frozen=True)
class GateRunResult:
    outcomes: tuple[DetectorOutcome, ...]
    success_probability: float
    lost_probability: float
    final_state: HybridState

    def outcome(self, detector: str) -> DetectorOutcome:
        for o in self.outcomes:
            if o.detector == detector:
                return o
        raise KeyError(detector)


def run(circuit: CircuitSpec, input_spins, mode: str = "ideal", coeffs: CoeffsArg = None) -> GateRunResult:
    """Run the gate and enumerate every detector outcome, with feed-forward applied.

    The input's global phase is stripped first, so multiplying the input by a
    phase does not change any output.
    """
    spin_state = _as_spin_state(circuit, input_spins)
    spin_state = spin_state * global_phase_of(spin_state).conjugate()
    final, _ = evolve(circuit, spin_state, mode, coeffs)
    by_click = {(o.port, o.label): o for o in measure_photon(final, circuit.measurement_ports, circuit.basis)}
    outcomes = []
    for detector, (port, label) in circuit.detectors.items():
        click = by_click[(port, label)]
        corrected = None
        if click.conditioned_state is not None:
            corrected = apply_corrections(click.conditioned_state, circuit.feed_forward[detector])
        outcomes.append(DetectorOutcome(detector, port, label, click.probability, corrected))
    success = math.fsum(o.probability for o in outcomes)
    lost = norm_sq(final.sector("lost"))
    return GateRunResult(tuple(outcomes), success, lost, final)


# reference matrices ----------------------------------------------------------

def ideal_gate_matrix(name: str) -> np.ndarray:
    """CNOT = I2 (+) X and Toffoli = I6 (+) X in the up-first basis of
    :func:`~qdgates.state.spin_basis`."""
    n = {"cnot": 4, "toffoli": 8}.get(name.lower())
    if n is None:
        raise ValueError(f"unknown gate {name!r}")
    m = np.eye(n)
    m[n - 2:, n - 2:] = [[0, 1], [1, 0]]
    return m


def block_matrix(elements: Sequence[Element], in_port: str, out_port: str,
                 coeffs: Optional[ScatteringCoefficients] = None) -> np.ndarray:
    """Matrix of a single-spin photon block in the basis
    ``(R up, R down, L up, L down)``, from ``in_port`` to ``out_port``.

    Every cavity in the block is re-pointed at the single probe spin.
    """
    elements = [Element(e.op, {**e.args, "spin_index": 0}, e.block) if "spin_index" in e.args else e
                for e in elements]
    ports = _ports_of(elements, (in_port, out_port))
    basis = [(pol, s) for pol in "RL" for s in "ud"]
    m = np.zeros((4, 4), dtype=complex)
    for j, (pol, s) in enumerate(basis):
        state = HybridState({(Photon(pol, in_port), s): 1.0}, 1, ports)
        for e in elements:
            state = apply_element(state, e, coeffs)
        for i, (pol_out, s_out) in enumerate(basis):
            m[i, j] = state[(Photon(pol_out, out_port), s_out)]
    return m


def spin_readout(alpha: complex, beta: complex) -> tuple[dict[str, float], dict[str, np.ndarray]]:
    """Read a spin out with one R photon and one ideal cavity.

    The photon leaves transmitted as R if the spin is up and reflected as L
    if it is down.  Returns outcome probabilities and the collapsed spin
    vectors, keyed by ``"R"`` and ``"L"``.
    """
    ports = (INPUT_PORT, "t", "r")
    state = HybridState({(Photon("R", INPUT_PORT), "u"): alpha,
                         (Photon("R", INPUT_PORT), "d"): beta}, 1, ports)
    state = apply_cavity_ideal(state, 0, INPUT_PORT, "t", "r", direction="down")
    probs, collapsed = {"R": 0.0, "L": 0.0}, {}
    for o in measure_photon(state, ["t", "r"], "RL"):
        probs[o.label] += o.probability
        if o.conditioned_state is not None:
            collapsed[o.label] = o.conditioned_state.spin_vector()
    return probs, collapsed


def spin_state_label(vector: np.ndarray, tol: float = 1e-12) -> Optional[str]:
    """Basis label if ``vector`` is a computational basis state up to phase."""
    nz = np.flatnonzero(np.abs(vector) > tol)
    if len(nz) != 1:
        return None
    n = int(round(math.log2(len(vector))))
    return spin_basis(n)[nz[0]]
