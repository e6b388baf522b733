"""
Sparse joint state of one flying photon and N stationary electron spins.

A basis state is keyed by ``(photon, spins)``:

* ``photon`` is a :class:`Photon` (circular polarization ``"R"``/``"L"`` on a
  named spatial port), a :class:`Lost` marker for amplitude that leaked out
  of a cavity, or ``None`` once the photon has been measured away;
* ``spins`` is a string over ``"u"`` (spin up) and ``"d"`` (spin down), one
  character per electron, spin 0 first.

The propagation direction of the photon is not stored.  It is implied by the
port the photon sits on, and cavity elements are told which direction their
input port carries.  Lost amplitude is kept coherently but under a unique
``Lost`` tag per loss channel, so lost branches never interfere with each
other or with the surviving photon.

All operations return new states; a state is never mutated after it is
built.
"""

from __future__ import annotations

import json
import math
from collections import defaultdict
from dataclasses import dataclass
from itertools import product
from typing import Iterable, NamedTuple, Optional, Sequence, Union

import numpy as np

from .cavity import ScatteringCoefficients

PRUNE = 1e-15
UP, DOWN = "u", "d"
SQRT1_2 = 1.0 / math.sqrt(2.0)


class InvalidCoefficientsError(ValueError):
    """Scattering coefficients that would create amplitude (non-passive)."""


class InconsistentCircuitError(ValueError):
    """Photon amplitude found where the circuit says it cannot be."""


class DegenerateStateError(ValueError):
    """Operation needs a nonzero state."""


class Photon(NamedTuple):
    polarization: str
    port: str

    def __str__(self):
        return f"{self.polarization}@{self.port}"


class Lost(NamedTuple):
    """Photon that left through a cavity loss channel.

    ``event`` numbers the loss-producing operations applied to a state, so two
    passes through the same cavity leak into orthogonal channels.
    """

    event: int
    spin_index: int
    port: str
    polarization: str

    def __str__(self):
        return f"lost#{self.event}:s{self.spin_index}:{self.polarization}@{self.port}"


PhotonKey = Union[Photon, Lost, None]


def _photon_str(photon: PhotonKey) -> str:
    return "-" if photon is None else str(photon)


def spin_basis(n: int) -> list[str]:
    """Computational basis labels, ordered with spin up before spin down:
    ``spin_basis(2) == ['uu', 'ud', 'du', 'dd']``."""
    return ["".join(bits) for bits in product(UP + DOWN, repeat=n)]


class HybridState:
    """Complex amplitudes over ``(photon, spins)`` basis states.

    Parameters
    ----------
    amplitudes : mapping
        ``{(photon, spins): amplitude}``.  Entries below ``PRUNE`` in
        magnitude are dropped.
    n_spins : int
        Number of electron spins.
    ports : iterable of str
        Spatial ports the photon may occupy.
    """

    __slots__ = ("_amps", "n_spins", "ports")

    def __init__(self, amplitudes, n_spins: int, ports: Iterable[str] = ()):
        self.n_spins = int(n_spins)
        self.ports = frozenset(ports)
        amps = {}
        for (photon, spins), amp in amplitudes.items():
            if len(spins) != self.n_spins or set(spins) - {UP, DOWN}:
                raise ValueError(f"bad spin label {spins!r} for {n_spins} spins")
            if isinstance(photon, Photon) and photon.port not in self.ports:
                raise InconsistentCircuitError(f"photon on undeclared port {photon.port!r}")
            if abs(amp) >= PRUNE:
                amps[(photon, spins)] = complex(amp)
        self._amps = amps

    # construction -------------------------------------------------------

    @classmethod
    def from_spin_vector(cls, vector: Sequence[complex], photon: PhotonKey = None,
                         ports: Iterable[str] = ()) -> "HybridState":
        """Product of a single photon basis state (or no photon) with a spin
        register given as a dense vector in :func:`spin_basis` order."""
        vector = np.asarray(vector, dtype=complex)
        n = int(round(math.log2(vector.size)))
        if 2 ** n != vector.size:
            raise ValueError("spin vector length must be a power of two")
        return cls({(photon, s): a for s, a in zip(spin_basis(n), vector)}, n, ports)

    @classmethod
    def from_spin_factors(cls, factors: Sequence[Sequence[complex]], photon: PhotonKey = None,
                          ports: Iterable[str] = ()) -> "HybridState":
        """Product state from one ``(up, down)`` amplitude pair per spin."""
        vector = np.array([1.0 + 0j])
        for pair in factors:
            vector = np.kron(vector, np.asarray(pair, dtype=complex))
        return cls.from_spin_vector(vector, photon, ports)

    def with_amplitudes(self, amplitudes) -> "HybridState":
        return HybridState(amplitudes, self.n_spins, self.ports)

    # access -------------------------------------------------------------

    def items(self):
        return self._amps.items()

    def keys(self):
        return self._amps.keys()

    def __getitem__(self, key) -> complex:
        return self._amps.get(key, 0j)

    def __len__(self):
        return len(self._amps)

    def __mul__(self, scalar: complex) -> "HybridState":
        return self.with_amplitudes({k: scalar * a for k, a in self._amps.items()})

    __rmul__ = __mul__

    def __add__(self, other: "HybridState") -> "HybridState":
        _check_compatible(self, other)
        out = defaultdict(complex, self._amps)
        for k, a in other.items():
            out[k] += a
        return self.with_amplitudes(out)

    def __repr__(self):
        return f"HybridState(n_spins={self.n_spins}, terms={len(self)})"

    def photon_ports(self) -> set[str]:
        return {p.port for p, _ in self._amps if isinstance(p, Photon)}

    def sector(self, kind: str) -> "HybridState":
        """Restrict to ``"photon"``, ``"lost"`` or ``"none"`` (photon-free) terms."""
        types = {"photon": Photon, "lost": Lost, "none": type(None)}[kind]
        return self.with_amplitudes({k: a for k, a in self._amps.items()
                                     if isinstance(k[0], types)})

    def spin_vector(self) -> np.ndarray:
        """Dense spin vector of a photon-free state."""
        if any(p is not None for p, _ in self._amps):
            raise ValueError("state still carries a photon; measure it first")
        return np.array([self[(None, s)] for s in spin_basis(self.n_spins)])

    def to_vector(self, keys: Sequence) -> np.ndarray:
        return np.array([self[k] for k in keys])

    def dump(self) -> str:
        """Deterministic JSON listing, lexicographically sorted, for golden tests."""
        rows = sorted(
            (_photon_str(p), s, repr(a.real), repr(a.imag)) for (p, s), a in self._amps.items()
        )
        return json.dumps(
            [{"photon": p, "spins": s, "re": float(re), "im": float(im)} for p, s, re, im in rows],
            indent=1,
        )


def _check_compatible(a: HybridState, b: HybridState):
    if a.n_spins != b.n_spins:
        raise ValueError(f"spin count mismatch: {a.n_spins} vs {b.n_spins}")
    if a.ports != b.ports:
        raise ValueError("port sets differ")


def _check_port(state: HybridState, *ports: str):
    for port in ports:
        if port not in state.ports:
            raise InconsistentCircuitError(f"unknown port {port!r}")


def _check_spin(state: HybridState, index: int):
    if not 0 <= index < state.n_spins:
        raise IndexError(f"spin index {index} out of range for {state.n_spins} spins")


# linear-algebra plumbing ---------------------------------------------------

def inner_product(a: HybridState, b: HybridState) -> complex:
    """<a|b>, conjugate-linear in ``a``."""
    _check_compatible(a, b)
    small, large = (a, b) if len(a) <= len(b) else (b, a)
    total = 0j
    for key, amp in small.items():
        other = large[key]
        if other:
            total += amp.conjugate() * other if small is a else other.conjugate() * amp
    return total


def norm_sq(state: HybridState) -> float:
    return math.fsum(abs(a) ** 2 for _, a in state.items())


def normalize(state: HybridState) -> HybridState:
    n = norm_sq(state)
    if n == 0.0:
        raise DegenerateStateError("cannot normalize the zero state")
    return state * (1.0 / math.sqrt(n))


def equal_up_to_phase(a: HybridState, b: HybridState, tol: float = 1e-10) -> bool:
    """True when |<a|b>| >= (1 - tol) ||a|| ||b||."""
    na, nb = norm_sq(a), norm_sq(b)
    if na == 0.0 or nb == 0.0:
        return na == nb
    return abs(inner_product(a, b)) >= (1.0 - tol) * math.sqrt(na * nb)


def overlap_deficit(a: HybridState, b: HybridState) -> float:
    """1 - |<a|b>| / (||a|| ||b||); zero iff equal up to a global phase."""
    return 1.0 - abs(inner_product(a, b)) / math.sqrt(norm_sq(a) * norm_sq(b))


# spin operations -------------------------------------------------------------

def _map_spin(state: HybridState, index: int, column) -> HybridState:
    _check_spin(state, index)
    out = defaultdict(complex)
    for (photon, spins), amp in state.items():
        for new, coeff in column(spins[index]):
            out[(photon, spins[:index] + new + spins[index + 1:])] += coeff * amp
    return state.with_amplitudes(out)


def apply_spin_hadamard(state: HybridState, spin_index: int) -> HybridState:
    """Electron-spin Hadamard: up -> (up + down)/sqrt2, down -> (up - down)/sqrt2."""
    def column(s):
        return ((UP, SQRT1_2), (DOWN, SQRT1_2 if s == UP else -SQRT1_2))
    return _map_spin(state, spin_index, column)


def apply_sigma_z(state: HybridState, spin_index: int, with_global_minus: bool = False) -> HybridState:
    """sigma_z = |up><up| - |down><down|; ``with_global_minus`` gives -sigma_z."""
    sign = -1.0 if with_global_minus else 1.0

    def column(s):
        return ((s, sign if s == UP else -sign),)
    return _map_spin(state, spin_index, column)


# photon operations -----------------------------------------------------------

def _map_photon(state: HybridState, rule) -> HybridState:
    """``rule(photon)`` returns ``[(new_photon, coeff), ...]`` or None to leave it alone."""
    out = defaultdict(complex)
    for (photon, spins), amp in state.items():
        image = rule(photon) if isinstance(photon, Photon) else None
        if image is None:
            out[(photon, spins)] += amp
            continue
        for new, coeff in image:
            out[(new, spins)] += coeff * amp
    return state.with_amplitudes(out)


def _flip(polarization: str) -> str:
    return "L" if polarization == "R" else "R"


def apply_hwp(state: HybridState, port: str) -> HybridState:
    """Half-wave plate at 22.5 deg (photonic Hadamard) on one port."""
    _check_port(state, port)

    def rule(ph):
        if ph.port != port:
            return None
        sign = SQRT1_2 if ph.polarization == "R" else -SQRT1_2
        return [(Photon("R", port), SQRT1_2), (Photon("L", port), sign)]
    return _map_photon(state, rule)


def apply_cpbs(state: HybridState, in_ports: tuple[str, str], out_ports: tuple[str, str]) -> HybridState:
    """Circular-basis polarizing beam splitter: R is transmitted, L reflected.

    R on ``in_ports[0]`` exits ``out_ports[0]`` and L exits ``out_ports[1]``;
    the second input is mirrored (R to ``out_ports[1]``, L to ``out_ports[0]``).
    """
    _check_port(state, *in_ports, *out_ports)
    a, b = in_ports
    c, d = out_ports
    routes = {("R", a): c, ("L", a): d, ("R", b): d, ("L", b): c}

    def rule(ph):
        target = routes.get((ph.polarization, ph.port))
        return None if target is None else [(Photon(ph.polarization, target), 1.0)]
    return _map_photon(state, rule)


def _unit_phasor(phase: float) -> complex:
    c, s = math.cos(phase), math.sin(phase)
    # keep multiples of pi/2 exact
    c = 0.0 if abs(c) < 1e-15 else c
    s = 0.0 if abs(s) < 1e-15 else s
    return complex(c, s)


def apply_phase_shift(state: HybridState, port: str, phase: float) -> HybridState:
    """Multiply amplitudes on ``port`` by exp(i phase)."""
    _check_port(state, port)
    factor = _unit_phasor(phase)

    def rule(ph):
        return None if ph.port != port else [(ph, factor)]
    return _map_photon(state, rule)


def apply_path(state: HybridState, from_port: str, to_port: str) -> HybridState:
    """Free propagation: relabel ``from_port`` as ``to_port``."""
    _check_port(state, from_port, to_port)

    def rule(ph):
        return None if ph.port != from_port else [(Photon(ph.polarization, to_port), 1.0)]
    return _map_photon(state, rule)


def apply_bs(state: HybridState, in_ports: tuple[str, str], out_ports: tuple[str, str]) -> HybridState:
    """50:50 beam splitter.

    |x>_in0 -> (|x>_out0 + |x>_out1)/sqrt2,  |x>_in1 -> (|x>_out0 - |x>_out1)/sqrt2.
    """
    _check_port(state, *in_ports, *out_ports)
    a, b = in_ports
    c, d = out_ports

    def rule(ph):
        if ph.port == a:
            sign = 1.0
        elif ph.port == b:
            sign = -1.0
        else:
            return None
        x = ph.polarization
        return [(Photon(x, c), SQRT1_2), (Photon(x, d), sign * SQRT1_2)]
    return _map_photon(state, rule)


def _couples(polarization: str, direction: str, spin: str) -> bool:
    # photon spin s_z = +1 for R travelling up or L travelling down; it drives
    # the transition from spin up, s_z = -1 the one from spin down
    s_z_plus = (polarization == "R") == (direction == "up")
    return spin == (UP if s_z_plus else DOWN)


def _check_direction(direction: str):
    if direction not in ("up", "down"):
        raise ValueError(f"direction must be 'up' or 'down', got {direction!r}")


def _opposite(direction: str) -> str:
    return "up" if direction == "down" else "down"


def _cavity_ports(state, spin_index, in_port, transmit_port, reflect_port, direction, opposite_in_port):
    ports = [in_port, transmit_port, reflect_port]
    if opposite_in_port is not None:
        ports.append(opposite_in_port)
    _check_port(state, *ports)
    _check_spin(state, spin_index)
    _check_direction(direction)
    if opposite_in_port is not None and opposite_in_port == in_port:
        raise InconsistentCircuitError("the two cavity faces need distinct input ports")
    # (input port, direction, where transmitted light goes, where reflected light goes)
    faces = [(in_port, direction, transmit_port, reflect_port)]
    if opposite_in_port is not None:
        faces.append((opposite_in_port, _opposite(direction), reflect_port, transmit_port))
    return faces


def apply_cavity_ideal(state: HybridState, spin_index: int, in_port: str, transmit_port: str,
                       reflect_port: str, direction: str = "down",
                       opposite_in_port: Optional[str] = None) -> HybridState:
    """Lossless spin-dependent scattering off a cavity.

    Photons on ``in_port`` travel in ``direction``.  A photon whose spin
    matches the dot's transition is reflected onto ``reflect_port`` with its
    polarization flipped; otherwise it is transmitted onto ``transmit_port``
    with amplitude -1.

    ``opposite_in_port`` optionally feeds the other face of the same cavity;
    light entering there leaves through ``transmit_port`` when reflected and
    through ``reflect_port`` when transmitted.
    """
    faces = _cavity_ports(state, spin_index, in_port, transmit_port, reflect_port, direction,
                          opposite_in_port)
    routes = {port: (d, t, r) for port, d, t, r in faces}
    out = defaultdict(complex)
    for (photon, spins), amp in state.items():
        route = routes.get(photon.port) if isinstance(photon, Photon) else None
        if route is None:
            out[(photon, spins)] += amp
            continue
        d, t_port, r_port = route
        if _couples(photon.polarization, d, spins[spin_index]):
            out[(Photon(_flip(photon.polarization), r_port), spins)] += amp
        else:
            out[(Photon(photon.polarization, t_port), spins)] -= amp
    return state.with_amplitudes(out)


def _next_loss_event(state: HybridState) -> int:
    return 1 + max((p.event for p, _ in state.keys() if isinstance(p, Lost)), default=0)


def apply_cavity_lossy(state: HybridState, spin_index: int, in_port: str, transmit_port: str,
                       reflect_port: str, coeffs: ScatteringCoefficients,
                       direction: str = "down",
                       opposite_in_port: Optional[str] = None) -> HybridState:
    """Leaky spin-dependent scattering off a cavity.

    Coupled photons go to ``|r| (flipped, reflected) + |t| (unchanged,
    transmitted)``; uncoupled ones to ``-|t0| (unchanged, transmitted) -
    |r0| (flipped, reflected)``.  Off resonance the complex values replace
    the magnitudes through ``|r| -> r, |t| -> -t, |t0| -> -t0, |r0| -> r0``,
    which is the identity at resonance where r, r0 >= 0 and t, t0 <= 0.

    Ports are as in :func:`apply_cavity_ideal`.  With one face fed, the
    missing norm ``1 - |r|^2 - |t|^2`` (resp. cold) goes to a fresh
    :class:`Lost` channel.  With both faces fed, the two inputs of equal
    photon spin form a symmetric two-port ``[[a, b], [b, a]]``; its leakage
    is split over the even and odd input combinations, which lose
    ``1 - |a + b|^2`` and ``1 - |a - b|^2`` respectively, so norm is
    accounted for exactly even when both faces are lit coherently.
    """
    faces = _cavity_ports(state, spin_index, in_port, transmit_port, reflect_port, direction,
                          opposite_in_port)
    hot = (coeffs.r_hot, -coeffs.t_hot)
    cold = (-coeffs.r_cold, coeffs.t_cold)
    for a, b in (hot, cold):
        deficits = [1.0 - abs(a) ** 2 - abs(b) ** 2]
        if opposite_in_port is not None:
            deficits += [1.0 - abs(a + b) ** 2, 1.0 - abs(a - b) ** 2]
        if min(deficits) < -1e-12:
            raise InvalidCoefficientsError(f"non-passive coefficients: {coeffs}")
    event = _next_loss_event(state)

    # pair each input on this face with the opposite-face input of equal photon spin
    main_port, main_dir, t_port, r_port = faces[0]
    opp_port = opposite_in_port
    pairs = defaultdict(lambda: [0j, 0j])
    out = defaultdict(complex)
    for (photon, spins), amp in state.items():
        if isinstance(photon, Photon) and photon.port == main_port:
            pairs[(photon.polarization, spins)][0] += amp
        elif isinstance(photon, Photon) and photon.port == opp_port:
            pairs[(_flip(photon.polarization), spins)][1] += amp
        else:
            out[(photon, spins)] += amp

    for (pol, spins), (x, y) in pairs.items():
        a, b = hot if _couples(pol, main_dir, spins[spin_index]) else cold
        # x enters as `pol` on the main face, y as flip(pol) on the opposite face
        out[(Photon(_flip(pol), r_port), spins)] += a * x + b * y
        out[(Photon(pol, t_port), spins)] += b * x + a * y
        if opp_port is None:
            leak = math.sqrt(max(1.0 - abs(a) ** 2 - abs(b) ** 2, 0.0))
            out[(Lost(event, spin_index, in_port, pol), spins)] += leak * x
        else:
            even = math.sqrt(max(1.0 - abs(a + b) ** 2, 0.0))
            odd = math.sqrt(max(1.0 - abs(a - b) ** 2, 0.0))
            out[(Lost(event, spin_index, in_port, pol + "+"), spins)] += even * SQRT1_2 * (x + y)
            out[(Lost(event, spin_index, in_port, pol + "-"), spins)] += odd * SQRT1_2 * (x - y)
    return state.with_amplitudes(out)


# measurement -----------------------------------------------------------------

BASIS_LABELS = {"RL": ("R", "L"), "PlusMinus": ("plus", "minus")}


@dataclass(frozen=True)
class MeasurementOutcome:
    """One click (or the no-click event) of a photon measurement.

    ``conditioned_state`` is the normalized photon-free spin state left
    behind.  For the no-click outcome (``label == "lost"``) it is the
    normalized lost sector, which still carries the loss-channel tags.  It is
    None when the outcome has zero probability.
    """

    label: str
    port: Optional[str]
    probability: float
    conditioned_state: Optional[HybridState]


def _project(state: HybridState, port: str, label: str) -> HybridState:
    out = defaultdict(complex)
    for (photon, spins), amp in state.items():
        if not (isinstance(photon, Photon) and photon.port == port):
            continue
        if label in ("R", "L"):
            if photon.polarization == label:
                out[(None, spins)] += amp
        else:
            # <+|R> = <+|L> = <-|R> = 1/sqrt2, <-|L> = -1/sqrt2
            sign = -1.0 if (label == "minus" and photon.polarization == "L") else 1.0
            out[(None, spins)] += sign * SQRT1_2 * amp
    return state.with_amplitudes(out)


def measure_photon(state: HybridState, port_set: Sequence[str], basis: str = "RL") -> list[MeasurementOutcome]:
    """Complete projective polarization measurement on the listed ports.

    Returns one outcome per (port, basis label), in the order given, followed
    by the no-click outcome when the state has a lost sector.
    """
    if basis not in BASIS_LABELS:
        raise ValueError(f"basis must be one of {sorted(BASIS_LABELS)}")
    _check_port(state, *port_set)
    stray = {p for p, _ in state.keys() if p is None}
    if stray:
        raise InconsistentCircuitError("state has no photon to measure")
    off = state.photon_ports() - set(port_set)
    if off:
        raise InconsistentCircuitError(f"photon amplitude on unmeasured ports {sorted(off)}")

    outcomes = []
    for port in port_set:
        for label in BASIS_LABELS[basis]:
            branch = _project(state, port, label)
            p = norm_sq(branch)
            outcomes.append(MeasurementOutcome(label, port, p, normalize(branch) if p > 0 else None))
    lost = state.sector("lost")
    if len(lost):
        p = norm_sq(lost)
        outcomes.append(MeasurementOutcome("lost", None, p, normalize(lost)))
    return outcomes


def photon_state(polarization_amplitudes: dict[str, complex], port: str, spins_state: HybridState) -> HybridState:
    """Attach a photon polarization superposition on ``port`` to a photon-free spin state,
    e.g. ``{"R": 1/sqrt2, "L": 1/sqrt2}`` for |+>."""
    out = defaultdict(complex)
    for (photon, spins), amp in spins_state.items():
        if photon is not None:
            raise ValueError("spin state already carries a photon")
        for pol, c in polarization_amplitudes.items():
            out[(Photon(pol, port), spins)] += c * amp
    return spins_state.with_amplitudes(out)


def plus_minus(sign: int) -> dict[str, complex]:
    """Polarization amplitudes of |+> (sign=+1) or |-> (sign=-1)."""
    return {"R": SQRT1_2, "L": sign * SQRT1_2}


def global_phase_of(state: HybridState) -> complex:
    """Unit phasor of the first nonzero amplitude in sorted key order."""
    if not len(state):
        raise DegenerateStateError("zero state has no phase")
    key = min(state.keys(), key=lambda k: (_photon_str(k[0]), k[1]))
    a = state[key]
    return a / abs(a)


__all__ = [
    "HybridState", "Photon", "Lost", "MeasurementOutcome", "spin_basis",
    "apply_spin_hadamard", "apply_sigma_z", "apply_hwp", "apply_cpbs", "apply_phase_shift",
    "apply_path", "apply_bs", "apply_cavity_ideal", "apply_cavity_lossy", "measure_photon",
    "inner_product", "norm_sq", "normalize", "equal_up_to_phase", "overlap_deficit",
    "photon_state", "plus_minus", "InvalidCoefficientsError", "InconsistentCircuitError",
    "DegenerateStateError", "UP", "DOWN",
]
