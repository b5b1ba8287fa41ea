"""One excitation on the chain: ballistic spreading, the light cone, and
exponential decay of the first-site population for a Lorentzian line.

Run from the repo root:  python3 demos/03_single_excitation_transport.py
Writes demos/output/single_excitation.png.  Takes a few seconds.
"""
import os
import time

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from chainmapper import (Lorentzian, Ohmic, TridiagonalHamiltonian,
                         default_fit_window, default_node_count,
                         discretize, fit_decay_rate, front_speed,
                         lightcone_length, propagate, recurrence_coefficients)

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)


def run(sd, t_max, samples=401):
    L = lightcone_length(sd.support, t_max)
    chain = recurrence_coefficients(discretize(sd, default_node_count(L)), L)
    psi0 = np.zeros(L)
    psi0[0] = 1.0
    times = np.linspace(0.0, t_max, samples)
    return times, propagate(TridiagonalHamiltonian.from_chain(chain),
                            psi0, times)


fig, axes = plt.subplots(1, 3, figsize=(13.5, 3.8))

# 1. population decay for a moderately broad line: p1(t) ~ exp(-gamma t).
# The chain sites past the first act as a structured continuum the
# excitation leaks into, so the fitted rate recovers the linewidth.
gamma = 10.0
t0 = time.perf_counter()
times, traj = run(Lorentzian(60.0, gamma, 100.0, hard_cutoff=1000.0), 0.6)
window = default_fit_window(gamma, times[-1])
rate = fit_decay_rate(times, traj.populations[:, 0], window)
print(f"lorentzian gamma={gamma:g}: fitted decay rate {rate:.4f} "
      f"({time.perf_counter() - t0:.1f}s)")
axes[0].semilogy(times, traj.populations[:, 0], label="p_1(t)")
axes[0].semilogy(times, np.exp(-rate * times), "k--", lw=1,
                 label=f"exp(-{rate:.2f} t)")
axes[0].set_ylim(1e-4, 1.5)
axes[0].set_title(f"first-site decay, fitted rate {rate:.2f}")
axes[0].set_xlabel("t")
axes[0].legend()

# 2. the light cone: populations fan out at speed 2*kappa_inf = wmax/2
sd = Ohmic(1.0, 1.0, 100.0, hard_cutoff=1000.0)
times, traj = run(sd, 0.2, samples=201)
speed = front_speed(traj, threshold=1e-3)
print(f"ohmic T=0 front speed {speed:.1f} (ballistic value 500)")
im = axes[1].imshow(np.log10(np.maximum(traj.populations.T, 1e-12)),
                    aspect="auto", origin="lower", cmap="magma",
                    extent=(0, times[-1], 1, traj.populations.shape[1]),
                    vmin=-8, vmax=0)
axes[1].plot(times, 1 + speed * times, "c--", lw=1, label="fitted front")
axes[1].set_ylim(1, traj.populations.shape[1])
axes[1].set_title("log10 populations: light cone")
axes[1].set_xlabel("t")
axes[1].set_ylabel("site")
axes[1].legend(loc="upper left")
fig.colorbar(im, ax=axes[1])

# 3. temperature doubles the support, which doubles the front speed
th = sd.thermalize(300.0)
times_T, traj_T = run(th, 0.1, samples=201)
speed_T = front_speed(traj_T, threshold=1e-3)
print(f"ohmic T=300 front speed {speed_T:.1f} "
      f"(ratio to T=0: {speed_T / speed:.3f})")
for label, tt, tr in [("T=0", times, traj), ("T=300", times_T, traj_T)]:
    frontpos = [np.nonzero(p > 1e-3)[0].max() + 1 for p in tr.populations]
    axes[2].plot(tt, frontpos, label=label)
axes[2].set_title("front position vs time")
axes[2].set_xlabel("t")
axes[2].set_ylabel("furthest site above 1e-3")
axes[2].legend()

# bookkeeping check: nothing is lost while the front stays inside the chain
print(f"max |total population - 1| = "
      f"{np.abs(traj.total_population() - 1.0).max():.2e}")

fig.tight_layout()
path = os.path.join(OUT, "single_excitation.png")
fig.savefig(path, dpi=130)
print(f"wrote {path}")
