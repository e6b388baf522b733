import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qdgates.cavity import CavityParams, ScatteringCoefficients, coefficients
from qdgates.state import (
    DegenerateStateError,
    HybridState,
    InconsistentCircuitError,
    InvalidCoefficientsError,
    Lost,
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
    equal_up_to_phase,
    inner_product,
    measure_photon,
    norm_sq,
    normalize,
    overlap_deficit,
    photon_state,
    plus_minus,
    spin_basis,
)

S = 1 / math.sqrt(2)
PORTS = ("a", "b", "c", "d")


def one(pol, port, spins, n=None, ports=PORTS, amp=1.0):
    return HybridState({(Photon(pol, port), spins): amp}, n or len(spins), ports)


def close(a, b, tol=1e-12):
    keys = set(a.keys()) | set(b.keys())
    return all(abs(a[k] - b[k]) <= tol for k in keys)


def random_state(rng, n_spins=2, ports=PORTS, lost=False, occupied=None):
    amps = {}
    for port in occupied or ports:
        for pol in "RL":
            for s in spin_basis(n_spins):
                amps[(Photon(pol, port), s)] = complex(*rng.normal(size=2))
    if lost:
        for s in spin_basis(n_spins):
            amps[(Lost(1, 0, ports[0], "R"), s)] = complex(*rng.normal(size=2))
    return normalize(HybridState(amps, n_spins, ports))


# --- spin operations --------------------------------------------------------

def test_spin_hadamard():
    up = HybridState({(None, "u"): 1}, 1)
    out = apply_spin_hadamard(up, 0)
    assert out[(None, "u")] == pytest.approx(S) and out[(None, "d")] == pytest.approx(S)
    plus = HybridState({(None, "u"): S, (None, "d"): S}, 1)
    assert close(apply_spin_hadamard(plus, 0), up)
    down = HybridState({(None, "d"): 1}, 1)
    assert apply_spin_hadamard(down, 0)[(None, "d")] == pytest.approx(-S)


def test_sigma_z_conventions():
    up = HybridState({(None, "u"): 1}, 1)
    down = HybridState({(None, "d"): 1}, 1)
    assert apply_sigma_z(up, 0, with_global_minus=True)[(None, "u")] == -1
    assert apply_sigma_z(down, 0, with_global_minus=True)[(None, "d")] == 1
    assert apply_sigma_z(down, 0)[(None, "d")] == -1
    rng = np.random.default_rng(1)
    psi = random_state(rng)
    assert close(apply_sigma_z(apply_sigma_z(psi, 1), 1), psi)


def test_spin_index_checked():
    psi = HybridState({(None, "ud"): 1}, 2)
    with pytest.raises(IndexError):
        apply_spin_hadamard(psi, 2)
    with pytest.raises(IndexError):
        apply_sigma_z(psi, -1)


# --- photon operations --------------------------------------------------------

def test_hwp():
    out = apply_hwp(one("R", "a", "u"), "a")
    assert out[(Photon("R", "a"), "u")] == pytest.approx(S)
    assert out[(Photon("L", "a"), "u")] == pytest.approx(S)
    minus = HybridState({(Photon("R", "a"), "u"): S, (Photon("L", "a"), "u"): -S}, 1, PORTS)
    assert close(apply_hwp(minus, "a"), one("L", "a", "u"))
    # other ports untouched
    assert close(apply_hwp(one("R", "b", "u"), "a"), one("R", "b", "u"))


def test_cpbs_routes_by_polarization():
    assert close(apply_cpbs(one("R", "a", "u"), ("a", "b"), ("c", "d")), one("R", "c", "u"))
    assert close(apply_cpbs(one("L", "a", "u"), ("a", "b"), ("c", "d")), one("L", "d", "u"))
    assert close(apply_cpbs(one("R", "b", "u"), ("a", "b"), ("c", "d")), one("R", "d", "u"))
    assert close(apply_cpbs(one("L", "b", "u"), ("a", "b"), ("c", "d")), one("L", "c", "u"))
    sup = HybridState({(Photon("R", "a"), "u"): S, (Photon("L", "a"), "u"): S}, 1, PORTS)
    expected = HybridState({(Photon("R", "c"), "u"): S, (Photon("L", "d"), "u"): S}, 1, PORTS)
    assert close(apply_cpbs(sup, ("a", "b"), ("c", "d")), expected)


def test_phase_shift():
    assert close(apply_phase_shift(one("R", "a", "u"), "a", math.pi), one("R", "a", "u", amp=-1))
    psi = random_state(np.random.default_rng(2))
    assert close(apply_phase_shift(psi, "a", 0.0), psi)
    assert close(apply_phase_shift(apply_phase_shift(psi, "a", math.pi), "a", math.pi), psi)


def test_beam_splitter():
    out = apply_bs(one("R", "a", "u"), ("a", "b"), ("c", "d"))
    assert out[(Photon("R", "c"), "u")] == pytest.approx(S)
    assert out[(Photon("R", "d"), "u")] == pytest.approx(S)
    out = apply_bs(one("L", "b", "u"), ("a", "b"), ("c", "d"))
    assert out[(Photon("L", "c"), "u")] == pytest.approx(S)
    assert out[(Photon("L", "d"), "u")] == pytest.approx(-S)
    both = HybridState({(Photon("R", "a"), "u"): S, (Photon("R", "b"), "u"): S}, 1, PORTS)
    assert close(apply_bs(both, ("a", "b"), ("c", "d")), one("R", "c", "u"))


def test_unknown_port():
    with pytest.raises(InconsistentCircuitError):
        apply_hwp(one("R", "a", "u"), "zz")
    with pytest.raises(InconsistentCircuitError):
        one("R", "zz", "u")


# --- cavities ---------------------------------------------------------------------

def test_ideal_cavity_rules():
    # R travelling down drives the spin-down transition
    assert close(apply_cavity_ideal(one("R", "a", "u"), 0, "a", "b", "c"), one("R", "b", "u", amp=-1))
    assert close(apply_cavity_ideal(one("R", "a", "d"), 0, "a", "b", "c"), one("L", "c", "d"))
    assert close(apply_cavity_ideal(one("L", "a", "u"), 0, "a", "b", "c"), one("R", "c", "u"))
    assert close(apply_cavity_ideal(one("L", "a", "d"), 0, "a", "b", "c"), one("L", "b", "d", amp=-1))
    # travelling up the roles swap
    assert close(apply_cavity_ideal(one("R", "a", "u"), 0, "a", "b", "c", "up"), one("L", "c", "u"))
    assert close(apply_cavity_ideal(one("L", "a", "d"), 0, "a", "b", "c", "up"), one("R", "c", "d"))


def test_readout_transformation():
    alpha, beta = 0.6, 0.8j
    psi = HybridState({(Photon("R", "a"), "u"): alpha, (Photon("R", "a"), "d"): beta}, 1, PORTS)
    out = apply_cavity_ideal(psi, 0, "a", "b", "c")
    expected = HybridState({(Photon("R", "b"), "u"): -alpha, (Photon("L", "c"), "d"): beta}, 1, PORTS)
    assert close(out, expected)


def test_two_face_ideal_cavity():
    # light on the opposite face leaves through the swapped ports
    out = apply_cavity_ideal(one("L", "d", "d"), 0, "a", "b", "c", opposite_in_port="d")
    assert close(out, one("R", "b", "d"))
    out = apply_cavity_ideal(one("R", "d", "d"), 0, "a", "b", "c", opposite_in_port="d")
    assert close(out, one("R", "c", "d", amp=-1))


def test_lossy_cavity_resonant_rules():
    c = coefficients(CavityParams(2.4, 0.2, 0.1))
    r, t, r0, t0 = c.magnitudes()
    out = apply_cavity_lossy(one("R", "a", "d"), 0, "a", "b", "c", c)
    assert out[(Photon("L", "c"), "d")] == pytest.approx(r)
    assert out[(Photon("R", "b"), "d")] == pytest.approx(t)
    assert norm_sq(out.sector("lost")) == pytest.approx(1 - r * r - t * t, abs=1e-15)
    out = apply_cavity_lossy(one("R", "a", "u"), 0, "a", "b", "c", c)
    assert out[(Photon("R", "b"), "u")] == pytest.approx(-t0)
    assert out[(Photon("L", "c"), "u")] == pytest.approx(-r0)
    assert norm_sq(out.sector("lost")) == pytest.approx(1 - r0 * r0 - t0 * t0, abs=1e-15)


def test_lossy_rejects_active_coefficients():
    bad = ScatteringCoefficients(1.0, 0.5, 0.0, -1.0)
    with pytest.raises(InvalidCoefficientsError):
        apply_cavity_lossy(one("R", "a", "d"), 0, "a", "b", "c", bad)


def test_lossy_ideal_limit_equals_ideal():
    rng = np.random.default_rng(3)
    ideal = ScatteringCoefficients.ideal()
    for _ in range(50):
        psi = random_state(rng)
        for opposite in (None, "d"):
            for direction in ("up", "down"):
                a = apply_cavity_ideal(psi, 1, "a", "b", "c", direction, opposite)
                b = apply_cavity_lossy(psi, 1, "a", "b", "c", ideal, direction, opposite)
                assert close(a, b, 1e-15)
                assert len(b.sector("lost")) == 0


def test_separate_passes_leak_into_separate_channels():
    c = coefficients(CavityParams(1.0, 0.5, 0.1))
    psi = one("R", "a", "d")
    once = apply_cavity_lossy(psi, 0, "a", "b", "c", c)
    twice = apply_cavity_lossy(apply_path(once, "c", "a"), 0, "a", "b", "d", c, direction="up")
    events = {p.event for p, _ in twice.sector("lost").keys()}
    assert events == {1, 2}
    assert norm_sq(twice) <= norm_sq(once) + 1e-15


def _ideal_ops(rng):
    """(element, input ports) pairs; inputs leave the element's output ports dark."""
    c = ScatteringCoefficients.ideal()
    return [
        (lambda psi: apply_spin_hadamard(psi, 0), PORTS),
        (lambda psi: apply_sigma_z(psi, 1, True), PORTS),
        (lambda psi: apply_hwp(psi, "b"), PORTS),
        (lambda psi: apply_phase_shift(psi, "c", rng.uniform(0, 2 * math.pi)), PORTS),
        (lambda psi: apply_cpbs(psi, ("a", "b"), ("c", "d")), ("a", "b")),
        (lambda psi: apply_bs(psi, ("a", "d"), ("b", "c")), ("a", "d")),
        (lambda psi: apply_cavity_ideal(psi, 0, "a", "c", "b", "down", "d"), ("a", "d")),
        (lambda psi: apply_cavity_lossy(psi, 1, "a", "c", "b", c, "up", "d"), ("a", "d")),
    ]


def test_ideal_elements_preserve_norm():
    rng = np.random.default_rng(4)
    for _ in range(1000):
        for op, inputs in _ideal_ops(rng):
            psi = random_state(rng, occupied=inputs)
            assert abs(norm_sq(op(psi)) - 1.0) < 1e-12


def test_ideal_cavity_is_unitary_on_photon_sector():
    ports = ("a", "b", "c", "d")
    basis = [(Photon(p, port), s) for port in ports for p in "RL" for s in "ud"]
    m = np.zeros((len(basis), len(basis)), dtype=complex)
    for j, key in enumerate(basis):
        out = apply_cavity_ideal(HybridState({key: 1}, 1, ports), 0, "a", "b", "c", "down", "d")
        m[:, j] = [out[k] for k in basis]
    # ports b and c only receive light, so restrict to inputs on a and d
    cols = [j for j, (ph, _) in enumerate(basis) if ph.port in ("a", "d")]
    sub = m[:, cols]
    assert np.allclose(sub.conj().T @ sub, np.eye(len(cols)), atol=1e-12)


rate = st.floats(0.0, 5.0, allow_nan=False, allow_subnormal=False)


@settings(max_examples=200, deadline=None)
@given(rate, rate, st.floats(0.0, 2.0, allow_subnormal=False), st.floats(-2.0, 2.0),
       st.integers(0, 2**32 - 1), st.sampled_from([None, "d"]))
def test_lossy_norm_accounting(g, ks, gamma, detuning, seed, opposite):
    c = coefficients(CavityParams(g, ks, gamma, detuning_photon=detuning))
    psi = random_state(np.random.default_rng(seed), occupied=("a", "d") if opposite else ("a",))
    out = apply_cavity_lossy(psi, 0, "a", "b", "c", c, "down", opposite)
    assert norm_sq(out) == pytest.approx(1.0, abs=1e-12)
    assert norm_sq(out.sector("photon")) <= 1.0 + 1e-12
    assert norm_sq(out.sector("photon")) + norm_sq(out.sector("lost")) == pytest.approx(1.0, abs=1e-12)


# --- measurement -----------------------------------------------------------------

def test_measure_rl_superposition():
    psi = HybridState({(Photon("R", "a"), "u"): S, (Photon("L", "a"), "u"): S}, 1, PORTS)
    outcomes = measure_photon(psi, ["a"], "RL")
    assert [o.label for o in outcomes] == ["R", "L"]
    for o in outcomes:
        assert o.probability == pytest.approx(0.5)
        assert np.allclose(o.conditioned_state.spin_vector(), [1, 0])


def test_measure_plus_eigenstate():
    spins = HybridState({(None, "d"): 1}, 1, PORTS)
    psi = photon_state(plus_minus(+1), "a", spins)
    probs = {o.label: o.probability for o in measure_photon(psi, ["a"], "PlusMinus")}
    assert probs["plus"] == pytest.approx(1.0)
    assert probs["minus"] == pytest.approx(0.0, abs=1e-15)


def test_measure_errors():
    psi = one("R", "b", "u")
    with pytest.raises(InconsistentCircuitError):
        measure_photon(psi, ["a"])
    with pytest.raises(InconsistentCircuitError):
        measure_photon(HybridState({(None, "u"): 1}, 1, PORTS), ["a"])
    with pytest.raises(ValueError):
        measure_photon(psi, ["b"], "XY")


def test_measurement_probabilities_sum_to_photon_norm():
    rng = np.random.default_rng(5)
    for _ in range(100):
        psi = random_state(rng, lost=True)
        for basis in ("RL", "PlusMinus"):
            outcomes = measure_photon(psi, list(PORTS), basis)
            clicks = [o for o in outcomes if o.label != "lost"]
            assert math.fsum(o.probability for o in clicks) == pytest.approx(
                norm_sq(psi.sector("photon")), abs=1e-12)
            assert math.fsum(o.probability for o in outcomes) == pytest.approx(1.0, abs=1e-12)


# --- plumbing ----------------------------------------------------------------------

def test_inner_products():
    rng = np.random.default_rng(6)
    psi = random_state(rng)
    assert inner_product(psi, psi) == pytest.approx(1.0)
    assert inner_product(one("R", "a", "u"), one("L", "a", "u")) == 0
    phased = psi * np.exp(0.7j)
    assert equal_up_to_phase(psi, phased)
    assert overlap_deficit(psi, phased) < 1e-12
    assert not equal_up_to_phase(one("R", "a", "u"), one("L", "a", "u"))


def test_incompatible_states():
    with pytest.raises(ValueError):
        inner_product(one("R", "a", "u"), one("R", "a", "uu"))
    with pytest.raises(ValueError):
        inner_product(one("R", "a", "u"), one("R", "a", "u", ports=("a",)))


def test_normalize_zero_state():
    with pytest.raises(DegenerateStateError):
        normalize(HybridState({}, 1, PORTS))


def test_pruning():
    psi = HybridState({(Photon("R", "a"), "u"): 1e-16, (Photon("L", "a"), "u"): 1.0}, 1, PORTS)
    assert len(psi) == 1


def test_dump_is_sorted_and_stable():
    rng = np.random.default_rng(7)
    psi = random_state(rng, lost=True)
    rows = json.loads(psi.dump())
    keys = [(r["photon"], r["spins"]) for r in rows]
    assert keys == sorted(keys)
    shuffled = HybridState(dict(reversed(list(psi.items()))), psi.n_spins, psi.ports)
    assert shuffled.dump() == psi.dump()


@settings(max_examples=100, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
                min_size=4, max_size=4))
def test_spin_vector_round_trip(amps):
    vec = np.array(amps)
    psi = HybridState.from_spin_vector(vec)
    expected = np.where(np.abs(vec) >= 1e-15, vec, 0)
    assert np.array_equal(psi.spin_vector(), expected)
