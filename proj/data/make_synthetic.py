#!/usr/bin/env python3
"""Generates the bundled synthetic trace data (deterministic, seeded).

Writes prices.csv (timestamp,price; 7 days at 15-minute spacing, a daily
double-peak shape with weekend damping, noise, and occasional spikes) and
tasks.csv (task_id,start,end; tasks clustered in the morning and evening).
The committed CSVs are the output of this exact script; re-running it must
reproduce them byte for byte.
"""

import datetime as dt
import math
import random

START = dt.datetime(2026, 1, 5, 0, 0, 0)  # a Monday
DAYS = 7
SPACING_MIN = 15
SLOTS_PER_DAY = 24 * 60 // SPACING_MIN
N = DAYS * SLOTS_PER_DAY


def iso(ts: dt.datetime) -> str:
    return ts.strftime("%Y-%m-%dT%H:%M:%S")


def daily_shape(minute_of_day: float) -> float:
    """Double-peak daily profile in [0, 1]: morning and evening peaks."""
    h = minute_of_day / 60.0
    morning = math.exp(-((h - 8.5) ** 2) / (2 * 2.2**2))
    evening = math.exp(-((h - 18.5) ** 2) / (2 * 2.8**2))
    night = 0.15
    return night + 0.55 * morning + 0.85 * evening


def main() -> None:
    rng = random.Random(20260105)

    with open("prices.csv", "w") as out:
        out.write("timestamp,price\n")
        for i in range(N):
            ts = START + dt.timedelta(minutes=SPACING_MIN * i)
            day = i // SLOTS_PER_DAY
            weekend = 0.72 if day >= 5 else 1.0
            shape = daily_shape((i % SLOTS_PER_DAY) * SPACING_MIN)
            price = 35.0 + 140.0 * shape * weekend
            price += rng.gauss(0.0, 6.0)
            if rng.random() < 0.008:  # rare scarcity spike
                price *= rng.uniform(2.0, 4.0)
            price = max(price, 5.0)
            out.write(f"{iso(ts)},{price:.2f}\n")

    n_tasks = 320
    with open("tasks.csv", "w") as out:
        out.write("task_id,start,end\n")
        horizon_end = START + dt.timedelta(days=DAYS)
        for k in range(n_tasks):
            day = rng.randrange(DAYS)
            if rng.random() < 0.55:  # evening cluster
                minute = rng.gauss(18.5 * 60, 150)
            elif rng.random() < 0.6:  # morning cluster
                minute = rng.gauss(8.5 * 60, 120)
            else:
                minute = rng.uniform(0, 24 * 60)
            minute = min(max(minute, 0.0), 24 * 60 - 1)
            start = START + dt.timedelta(days=day, minutes=round(minute))
            duration_min = rng.choice([15, 30, 30, 45, 60, 60, 90, 120, 180, 240])
            end = min(start + dt.timedelta(minutes=duration_min), horizon_end)
            out.write(f"task{k:04d},{iso(start)},{iso(end)}\n")


if __name__ == "__main__":
    main()
