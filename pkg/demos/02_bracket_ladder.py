"""Climb the bracket ladder and watch pure derivatives fall out.

With g1 = 1 and g2 = -J(x), nesting [g1, .] around g2 peels one
derivative of J per level.  The table prints the nested bracket next to
-J^(N) for the normalized degree-6 power cost.
"""

from lieseek import ad_bracket, default_pair, make_power_cost

model = make_power_cost(6)
pair = default_pair()
x = 1.7

print(f"cost: {model.name}, evaluation point x = {x}")
print(f"{'depth':>5}  {'nested bracket':>16}  {'-J^(N)(x)':>16}")
for order in range(1, 6):
    lhs = ad_bracket(order, pair, model, x)
    rhs = -model.derivative(order, x)
    print(f"{order:>5}  {lhs:>16.10f}  {rhs:>16.10f}")

print()
print("The match is exact because both vector fields are affine in J,")
print("so the ladder is computed symbolically rather than by finite")
print("differences.")
