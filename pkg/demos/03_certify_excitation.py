"""Certify that a design excites its target bracket and nothing else.

Averaging turns each length-L product of inputs into an iterated
integral over one period.  A design is correct when every integral up
to the bracket depth vanishes, except the ones that assemble the target
bracket, and those must land on binomial weights.  The certifier
evaluates all of them by quadrature.

The second half detunes channel 2 to the base frequency.  The broken
design looks plausible (same amplitudes, same waveforms) but a single
length-2 integral stops vanishing, which is exactly how the failure
shows up here.
"""

from dataclasses import replace

from lieseek import DitherSpec, certify_excitation, design_dithers

ORDER = 3

spec = design_dithers(ORDER, kappa=1, epsilon=1.0)
cert = certify_excitation(spec)
print(f"well-tuned design, depth {ORDER}: passed = {cert.passed}")
print(f"  {len(cert.checks)} word integrals checked, worst ratio {cert.worst.ratio:.2e}")
print()

ch1, ch2 = spec.pairs[0]
broken = DitherSpec(ORDER, ((ch1, replace(ch2, frequency_multiple=1)),), 1.0)
cert = certify_excitation(broken)
print(f"channel 2 detuned to 1x base frequency: passed = {cert.passed}")
for check in cert.failures[:4]:
    word = "".join(str(w) for w in check.word)
    print(
        f"  word {word:>4} ({check.kind}): value {check.value:+.6f}, "
        f"target {check.target:+g}, ratio {check.ratio:.2e}"
    )
more = len(cert.failures) - 4
if more > 0:
    print(f"  ... and {more} more failing words")
