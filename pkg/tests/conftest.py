import math

from hypothesis import strategies as st

from batsim.abilities import AbilityVector


@st.composite
def ability_vectors(draw):
    """Valid ability vectors with realistic-ish magnitudes and out mass."""
    positives = [draw(st.floats(0.001, 0.12)) for _ in range(5)]
    outs = [draw(st.floats(0.05, 0.40)) for _ in range(3)]
    total = math.fsum(positives + outs)
    comps = [v / total for v in positives + outs]
    # Normalization leaves a float crumb; fold it into the last component.
    comps[-1] += 1.0 - math.fsum(comps)
    return AbilityVector(*comps)
