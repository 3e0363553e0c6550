"""Generates the recorded uncertainty trace shipped with the IoT presets.

The trace combines slow sinusoidal SNR drift per link with interference
windows on the three links whose child mote has an alternate parent
(7->2, 10->4, 12->6). During a window the link SNR drops below the power
compensation limit, so packet delivery on it degrades and configurations
that shift traffic to the sibling link keep their loss down. Loads carry
a diurnal-style wave; the three dual-parent motes run hot so distribution
choices also decide which gateway branch overflows its slots.

Rerunning with the same seed reproduces the committed CSV byte for byte.
"""

from __future__ import annotations

import argparse
import csv
from pathlib import Path

import numpy as np

from adaspace.deltaiot import DEFAULT_LINKS

DIP_LINKS = ((7, 2), (10, 4), (12, 6))
HOT_MOTES = (7, 10, 12)


def profile_rows(
    seed: int,
    cycles: int,
    snr_base: tuple[float, float] = (-12.0, 6.0),
    dip_rate: float = 0.22,
    dip_len: tuple[int, int] = (10, 28),
    dip_depth: tuple[float, float] = (-40.0, -35.0),
    load_mean: float = 3.4,
    load_wave: float = 1.0,
    load_noise: float = 0.5,
    hot_mean: float = 7.5,
    hot_wave: float = 1.8,
) -> list[tuple[int, str, float]]:
    rng = np.random.default_rng(seed)
    links = list(DEFAULT_LINKS)
    motes = sorted({child for child, _ in links})
    phase = rng.uniform(0.0, 2.0 * np.pi, len(links))
    period = rng.uniform(60.0, 140.0, len(links))

    dips = {link: np.zeros(cycles) for link in DIP_LINKS}
    for link in DIP_LINKS:
        cycle = 0
        while cycle < cycles:
            if rng.random() < dip_rate:
                length = int(rng.integers(dip_len[0], dip_len[1] + 1))
                dips[link][cycle : cycle + length] = rng.uniform(*dip_depth)
                cycle += length
            else:
                cycle += 1

    rows: list[tuple[int, str, float]] = []
    for cycle in range(cycles):
        for i, (child, parent) in enumerate(links):
            lo, hi = snr_base
            base = lo + (hi - lo) * (0.5 + 0.5 * np.sin(2.0 * np.pi * cycle / period[i] + phase[i]))
            snr = base + rng.normal(0.0, 1.2)
            if (child, parent) in dips and dips[(child, parent)][cycle] < 0.0:
                snr = dips[(child, parent)][cycle] + rng.normal(0.0, 0.5)
            rows.append((cycle, f"snr_{child}_{parent}", float(np.clip(snr, -40.0, 15.0))))
        for mote in motes:
            if mote in HOT_MOTES:
                mean = hot_mean
                wave = hot_wave * np.sin(2.0 * np.pi * cycle / 100.0 + mote)
            else:
                mean = load_mean
                wave = load_wave * np.sin(2.0 * np.pi * cycle / 100.0 + mote)
            load = mean + wave + rng.normal(0.0, load_noise)
            rows.append((cycle, f"load_{mote}", float(np.clip(load, 0.0, 10.0))))
    return rows


def write_profile(path: Path, rows: list[tuple[int, str, float]]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["cycle", "id", "value"])
        for cycle, key, value in rows:
            writer.writerow([cycle, key, f"{value:.6f}"])


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=20260815)
    parser.add_argument("--cycles", type=int, default=300)
    parser.add_argument(
        "--out",
        type=Path,
        default=Path(__file__).resolve().parents[1] / "configs" / "profiles" / "deltaiot-300.csv",
    )
    args = parser.parse_args()
    write_profile(args.out, profile_rows(args.seed, args.cycles))
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
