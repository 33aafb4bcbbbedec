"""Race a depth-3 design against a first-order design on a quartic bottom.

Both controllers start at x = 4 on the normalized cost (x - 1)^4 / 24.
The depth-3 design extracts the fourth derivative and converges
exponentially.  The first-order design senses only the gradient, which
dies cubically near the bottom, so its error envelope decays like a
power law and it is still far away when the clock runs out.

Writes flat_bottom_race.png next to this script.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from lieseek import compare_fits, envelope, preset, simulate

runs = {}
for name in ("m4", "gradient_m4"):
    cfg = preset(name)
    traj = simulate(cfg)
    env = envelope(traj, [1.0], cfg.horizon / 200)
    fits = compare_fits(env)
    runs[name] = (cfg, traj, env, fits)
    err = abs(traj.final_state[0] - 1.0)
    print(f"{name}: horizon {cfg.horizon:g}, final error {err:.4f}")
    for kind, fit in fits.items():
        print(f"  {kind:11s} fit: rate {fit.rate:+.3f}, R^2 {fit.r_squared:.4f}")
    print()

fig, ax = plt.subplots(figsize=(7, 4.5))
for name, style in (("m4", "-"), ("gradient_m4", "--")):
    cfg, traj, env, fits = runs[name]
    ax.semilogy(env[:, 0], env[:, 1], style, label=f"{name} (horizon {cfg.horizon:g})")
ax.set_xlabel("t")
ax.set_ylabel("error envelope")
ax.set_title("quartic flat bottom: depth-3 design vs first-order design")
ax.legend()
ax.grid(True, which="both", alpha=0.3)

out = Path(__file__).with_name("flat_bottom_race.png")
fig.savefig(out, dpi=120, bbox_inches="tight")
print(f"wrote {out}")
