"""Tokenize a spoken transcript and lay out its word-fall timeline.

Run from the repository root:  python3 demos/wordfall_timeline.py
"""

from towerloop import FallParams, schedule_word_fall, tokenize

transcript = "Rehepeks käis hoos, vihud lendasid parsilt alla — tolm igal pool!"
words = tokenize(transcript, locale="et")
print(f"transcript: {transcript!r}")
print(f"tokens:     {[w.text for w in words]}")

params = FallParams(stagger_ms=250, fall_ms=1500, dissolve_ms=2000, columns=8)
timeline = schedule_word_fall(words, params, t0=0)

print(f"\n{'word':<12} {'drops at':>9} {'lands at':>9} {'column':>7}")
for entry in timeline.entries:
    print(f"{entry.word.text:<12} {entry.fall_start:>7} ms {entry.land_at:>7} ms {entry.column:>7}")
print(f"\ndissolve: {timeline.dissolve_start} ms -> {timeline.dissolve_end} ms")
print("the video reveal is gated on the dissolve finishing, never on a timer guess")

# A rough picture of the stagger: one row per 250 ms, column = screen lane.
print("\nfall chart (rows are 250 ms steps, letters are words):")
step = params.stagger_ms
rows = timeline.dissolve_start // step + 1
for row in range(rows):
    t = row * step
    line = ["."] * params.columns
    for i, entry in enumerate(timeline.entries):
        if entry.fall_start <= t < entry.land_at:
            line[entry.column] = chr(ord("a") + i % 26)
    print(f"{t:>6} ms  {' '.join(line)}")
