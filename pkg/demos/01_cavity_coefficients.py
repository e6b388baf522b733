"""Reflection and transmission of a QD-loaded double-sided cavity.

Run top to bottom, or cell by cell in an editor that understands ``# %%``.
All rates are in units of the cavity decay rate kappa.
"""

# %%
import numpy as np

from qdgates import CavityParams, coefficients, feasibility

# %% [markdown]
# At resonance every coefficient is real.  A coupled ("hot") cavity reflects
# almost everything, an empty ("cold") one transmits almost everything, and
# side leakage eats into both.

# %%
for g, ks in [(2.4, 0.0), (2.4, 0.2), (1.0, 0.2), (0.5, 1.0)]:
    c = coefficients(CavityParams(g, ks, 0.1))
    r, t, r0, t0 = c.magnitudes()
    print(f"g={g:<4} ks={ks:<4} |r|={r:.4f} |t|={t:.4f} |r0|={r0:.4f} |t0|={t0:.4f}")

# %% [markdown]
# Detuning the photon away from the cavity line makes the amplitudes complex.
# The identity r = 1 + t survives for any detuning.

# %%
for dw in np.linspace(-1.0, 1.0, 5):
    c = coefficients(CavityParams(2.4, 0.2, 0.1, detuning_photon=dw))
    print(f"detuning={dw:+.2f}  t_hot={c.t_hot:.4f}  t_cold={c.t_cold:.4f}  "
          f"r_hot-(1+t_hot)={abs(c.r_hot - 1 - c.t_hot):.1e}")

# %% [markdown]
# Weak excitation needs few photons per trion lifetime.  For g = 1.7 kappa and
# a 9 ps lifetime the photons must arrive several nanoseconds apart.

# %%
rep = feasibility(CavityParams.from_total_coupling(1.0, 0.7, 0.1), tau=9e-12, T2=1e-6)
print(f"n0 = {rep.critical_photon_number:.3e}")
print(f"tau/n0 = {rep.min_photon_interval * 1e9:.2f} ns")
print(f"dephasing penalty = {rep.dephasing_penalty:.1e}")
