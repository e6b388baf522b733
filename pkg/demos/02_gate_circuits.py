"""Walking a single photon through the CNOT and Toffoli circuits."""

# %%
import math

import numpy as np

from qdgates.circuits import build_cnot, build_toffoli, evolve, ideal_gate_matrix, run, spin_state_label
from qdgates.state import spin_basis

# %% [markdown]
# Control in (|u> + |d>)/sqrt2, target cos(a)|u> + sin(a)|d>.  The photon
# state after the first interaction block entangles polarization with the
# control spin only.

# %%
alpha = math.pi / 6
psi_in = np.kron([1, 1] / np.sqrt(2), [math.cos(alpha), math.sin(alpha)])
circuit = build_cnot()
final, snapshots = evolve(circuit, psi_in)
print(snapshots["after_round_a"].dump())

# %% [markdown]
# Either detector can click with probability 1/2; after the feed-forward
# correction both branches carry the CNOT output.

# %%
res = run(circuit, psi_in)
want = ideal_gate_matrix("cnot") @ psi_in
for o in res.outcomes:
    overlap = abs(np.vdot(want, o.spin_vector))
    print(f"detector {o.label}: p={o.probability:.3f}  |<ideal|out>|={overlap:.12f}")

# %% [markdown]
# Toffoli truth table: only |dd> on the controls flips the target.

# %%
toffoli = build_toffoli()
for label in spin_basis(3):
    v = np.zeros(8, dtype=complex)
    v[spin_basis(3).index(label)] = 1
    res = run(toffoli, v)
    outs = {spin_state_label(o.spin_vector) for o in res.outcomes if o.probability > 0}
    print(label, "->", ", ".join(sorted(outs)))
