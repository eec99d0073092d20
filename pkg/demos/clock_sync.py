"""How a display node finds the server's clock: four timestamps, no magic.

Run from the repository root:  python3 demos/clock_sync.py
"""

import random

from towerloop import estimate_clock_offset
from towerloop.scheduler import median_offset

rng = random.Random(4)

TRUE_OFFSET = 1337  # the server clock runs this many ms ahead of the display

print(f"true server-minus-display offset: {TRUE_OFFSET} ms\n")
print(f"{'leg out':>8} {'leg back':>9} {'estimate':>10} {'error':>7} {'rtt':>6}")

estimates = []
for _ in range(5):
    t1 = rng.randrange(1_000_000)
    out_delay = rng.randrange(5, 60)
    back_delay = rng.randrange(5, 60)
    t2 = t1 + out_delay + TRUE_OFFSET
    t3 = t2 + rng.randrange(0, 3)  # server turnaround
    t4 = t3 - TRUE_OFFSET + back_delay

    offset, rtt = estimate_clock_offset(t1, t2, t3, t4)
    estimates.append(offset)
    print(
        f"{out_delay:>6} ms {back_delay:>6} ms {offset:>7.1f} ms "
        f"{offset - TRUE_OFFSET:>+6.1f} {rtt:>4} ms"
    )

print(f"\nmedian of the last 5 estimates: {median_offset(estimates):.1f} ms")
print("each estimate errs by half the path asymmetry; the median is what a")
print("display applies, refreshed as heartbeats come and go")
