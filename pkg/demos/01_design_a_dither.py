"""Design the oscillation pair for a degree-4 flat bottom.

A cost that behaves like (x - x*)^4 near its minimum has zero gradient,
zero Hessian and zero third derivative there, so any scheme that spends
its time estimating those quantities stalls.  The fourth derivative is
the first one that carries information, and the way to reach it with
two scalar inputs is a third-order iterated bracket.  The two channels
below are tuned so that exactly that bracket survives averaging.
"""

from lieseek import bracket_coefficient, design_dithers

ORDER = 3  # bracket depth for a degree-4 bottom

target = bracket_coefficient(ORDER)
print(f"bracket depth {ORDER}: the amplitude product c1^{ORDER} * c2 must equal {target:.6f}")
print()

for eps in (1e-2, 1e-3, 1e-4):
    spec = design_dithers(ORDER, kappa=1, epsilon=eps)
    ch1, ch2 = spec.pairs[0]
    print(f"epsilon = {eps:g}")
    for label, ch in (("channel 1", ch1), ("channel 2", ch2)):
        commanded = abs(ch.coefficient) * eps ** (-ch.exponent)
        print(
            f"  {label}: {ch.waveform:6s} at {ch.frequency_multiple}x base frequency, "
            f"coefficient {ch.coefficient:+.4f}, commanded amplitude {commanded:.1f}"
        )
    product = ch1.coefficient**ORDER * ch2.coefficient
    print(f"  product check: {product:.6f}")
    print()

print("Halving epsilon speeds up convergence in slow time but the commanded")
print("amplitude grows like epsilon^(-3/4); demo 06 measures that price.")
