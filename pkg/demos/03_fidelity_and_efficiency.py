"""How side leakage and coupling strength set the gate quality."""

# %%
import numpy as np

from qdgates import CavityParams
from qdgates.metrics import average_fidelity, efficiency, sweep

# %% [markdown]
# The reference point g = 2.4, gamma = 0.1 with and without side leakage.

# %%
for ks in (0.0, 0.2):
    p = CavityParams(2.4, ks, 0.1)
    row = [average_fidelity("cnot", p).average_fidelity, average_fidelity("toffoli", p).average_fidelity,
           efficiency("cnot", p).efficiency, efficiency("toffoli", p).efficiency]
    print(f"ks={ks}: F_CNOT={row[0]:.6f} F_Toffoli={row[1]:.6f} eta_CNOT={row[2]:.6f} eta_Toffoli={row[3]:.6f}")

# %% [markdown]
# Sweeping side leakage at a few coupling strengths.  Efficiency falls
# steadily.  The post-selected fidelity, which only looks at runs where the
# photon survives, first creeps up by ~1e-3 at weak coupling before falling:
# a little leakage suppresses the hot-cavity transmission error faster than it
# grows the cold-cavity reflection error.

# %%
ks_axis = np.linspace(0, 1, 11)
for q in ("eta_CNOT", "F_CNOT", "F_Toffoli"):
    grid = sweep(q, (0.5, 2.5), (0.0, 1.0), (3, 11))
    print(q)
    for g, values in zip(grid.axis_g, grid.values):
        print(f"  g={g:.1f} " + " ".join(f"{v:.4f}" for v in values))

# %% [markdown]
# Grids can be written as CSV for plotting elsewhere.

# %%
print(sweep("eta_Toffoli", (0, 3), (0, 1), (4, 3)).to_csv())
