"""Regenerates santander_sample.csv deterministically.

Ten stable Santander sensors on 2022-12-03. Each sensor's first and last
report times and report count are fixed; the intervals in between are whole
minutes. Fixed ``:t`` sensors report every 4-6 minutes, sensor 90 switches
between 10, 20 and 30 minutes, and ``:np`` parking sensors report at
irregular minute multiples.

    python3 generate_sample.py > santander_sample.csv
"""

import random
import sys

# id, urn suffix, latitude, longitude, first (h, m), last (h, m), reports
SENSORS = [
    (1, "np3870", 43.464595794678, -3.7974231243134, (1, 3), (17, 41), 115),
    (9, "t258", 43.46262, -3.80161, (1, 0), (23, 55), 266),
    (19, "np3790", 43.463623046875, -3.799674987793, (5, 0), (18, 42), 15),
    (24, "t370", 43.46367, -3.81114, (0, 59), (23, 59), 270),
    (53, "t51", 43.47092, -3.80174, (1, 0), (23, 57), 269),
    (90, "t4074", 43.463869, -3.796732, (1, 0), (23, 54), 128),
    (110, "t506", 43.46385, -3.80545, (0, 58), (23, 56), 277),
    (135, "np3873", 43.464653015137, -3.7970464229584, (6, 56), (23, 58), 102),
    (146, "np3864", 43.464511871338, -3.7979302406311, (12, 52), (23, 32), 19),
    (213, "np3856", 43.464431762695, -3.7985026836395, (9, 24), (17, 57), 13),
]


def near_constant(total, n, rng):
    """n intervals of 5 min, some shifted to 4 or 6, summing to total."""
    steps = [5] * n
    diff = total - 5 * n
    idx = list(range(n))
    rng.shuffle(idx)
    for i in idx[: abs(diff)]:
        steps[i] += 1 if diff > 0 else -1
    return steps


def tiered(total, n, rng):
    """Intervals of 10, 20 or 30 min; one leftover interval absorbs the rest."""
    steps = [10] * n
    extra = total - 10 * n
    while extra >= 20:
        i = rng.randrange(n - 1)
        if steps[i] == 10:
            add = 20 if extra >= 30 else 10
            steps[i] += add
            extra -= add
    steps[-1] += extra
    return steps


def irregular(total, n, rng):
    """n positive minute intervals summing to total, random cut points."""
    cuts = sorted(rng.sample(range(1, total), n - 1))
    bounds = [0] + cuts + [total]
    return [b - a for a, b in zip(bounds, bounds[1:])]


def main():
    rng = random.Random(20221203)
    out = sys.stdout
    out.write("sensor_id,urn,latitude,longitude,timestamp,type,value\n")
    for sid, suffix, lat, lon, first, last, count in SENSORS:
        start = first[0] * 60 + first[1]
        end = last[0] * 60 + last[1]
        total, n = end - start, count - 1
        if suffix.startswith("np"):
            steps = irregular(total, n, rng)
        elif sid == 90:
            steps = tiered(total, n, rng)
        else:
            steps = near_constant(total, n, rng)
        assert sum(steps) == total and min(steps) > 0
        minute = start
        state = 0
        for k in range(count):
            if suffix.startswith("np"):
                value = str(state)
                state ^= 1
            else:
                value = f"{rng.uniform(9.0, 16.0):.1f}"
            ts = f"2022-12-03T{minute // 60:02d}:{minute % 60:02d}:00Z"
            out.write(f"{sid},urn:x-iot:smartsantander:u7jcfa:{suffix},{lat},{lon},{ts},stable,{value}\n")
            if k < n:
                minute += steps[k]


if __name__ == "__main__":
    main()
