"""Tour of the spectral density zoo: Ohmic-family and Lorentzian densities,
hard cutoff selection, and the temperature-extended effective density.

Run from the repo root:  python3 demos/01_spectral_densities.py
Writes demos/output/spectral_densities.png and prints a few sanity tables.
"""
import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from chainmapper import Lorentzian, Ohmic, choose_hard_cutoff

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

# Ohmic family: J(w) = 2*lam*w^s / wc^(s-1) * exp(-w/wc), here lam=1, wc=100.
# s<1 piles weight at low frequency, s>1 pushes it out toward the cutoff.
ohmics = {s: Ohmic(1.0, s, 100.0, hard_cutoff=1000.0) for s in (0.5, 1.0, 2.0)}

# Lorentzian family: a single mode at 100 with linewidth gamma.  The area is
# held fixed, so small gamma means a tall narrow line.
lorentzians = {g: Lorentzian(60.0, g, 100.0, hard_cutoff=1000.0)
               for g in (0.001, 1.0, 10.0)}

print("hard cutoff chosen so the integrated tail is below the tolerance:")
for label, sd in [("ohmic s=1", Ohmic(1.0, 1.0, 100.0, hard_cutoff=1000.0)),
                  ("ohmic s=0.5", Ohmic(1.0, 0.5, 100.0, hard_cutoff=1000.0)),
                  ("lorentz g=1", Lorentzian(60.0, 1.0, 100.0,
                                             hard_cutoff=1000.0))]:
    wc = choose_hard_cutoff(sd, tol=1e-8)
    print(f"  {label:14s} -> {wc:g}")

fig, axes = plt.subplots(1, 3, figsize=(13, 3.6))

w = np.linspace(0.0, 400.0, 2000)
for s, sd in ohmics.items():
    axes[0].plot(w, sd.evaluate(w), label=f"s={s:g}")
axes[0].set_title("Ohmic family (lam=1, wc=100)")
axes[0].set_xlabel("w")
axes[0].set_ylabel("J(w)")
axes[0].legend()

for g, sd in lorentzians.items():
    axes[1].semilogy(w, np.maximum(sd.evaluate(w), 1e-12), label=f"gamma={g:g}")
axes[1].set_ylim(1e-6, 1e5)
axes[1].set_title("Lorentzian lines at w0=100")
axes[1].set_xlabel("w")
axes[1].legend()

# Thermalizing extends the support to negative frequencies.  The weight that
# appears below zero encodes stimulated absorption from the thermal cloud,
# and the antisymmetric part must reproduce the bare density exactly.
base = ohmics[1.0]
wneg = np.linspace(-400.0, 400.0, 4000)
for T in (77.0, 300.0):
    th = base.thermalize(T)
    axes[2].plot(wneg, th.evaluate(wneg), label=f"T={T:g} K")
    pos = np.linspace(1.0, 400.0, 500)
    residual = np.abs(th.evaluate(pos) - th.evaluate(-pos) - base.evaluate(pos))
    print(f"detailed balance residual at T={T:g}: {residual.max():.2e}")
axes[2].plot(w, base.evaluate(w), "k--", lw=1, label="bare (T=0)")
axes[2].set_title("temperature-extended density")
axes[2].set_xlabel("w")
axes[2].legend()

fig.tight_layout()
path = os.path.join(OUT, "spectral_densities.png")
fig.savefig(path, dpi=130)
print(f"wrote {path}")
