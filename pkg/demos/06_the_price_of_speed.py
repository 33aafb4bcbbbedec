"""Measure what fast averaging costs in commanded amplitude.

The convergence guarantee is an averaging statement: it sharpens as
epsilon shrinks.  But the channel amplitudes scale like
epsilon^(-N/(N+1)), so the speed the controller demands of the plant
blows up at the same time.  No physical actuator follows a command in
the tens of thousands, which is the real obstacle to running the
high-depth designs at aggressive epsilon.
"""

from lieseek import default_pair, design_dithers, initial_speed, make_power_cost, preset, simulate
from lieseek.simulate import ESConfig

print("depth-3 design on the degree-4 cost, starting speed at x0 = 5:")
print(f"{'epsilon':>10}  {'commanded speed':>16}")
for eps in (1e-2, 1e-3, 1e-4, 1e-5):
    cfg = ESConfig(
        model=make_power_cost(4, x_star=1.0),
        pair=default_pair(),
        dithers=design_dithers(3, 1, eps),
        x0=(5.0,),
        horizon=eps,
    )
    print(f"{eps:>10g}  {initial_speed(cfg):>16.1f}")
print()

cfg = preset("limitation")
traj = simulate(cfg)
print(f"preset 'limitation' (epsilon {cfg.epsilon:g}, horizon {cfg.horizon:g}):")
print(f"  initial commanded speed {initial_speed(cfg):.1f}")
print(f"  integration completed, diverged = {traj.diverged}")
print(f"  x moved from {cfg.x0[0]:g} to {traj.final_state[0]:.3f}")
