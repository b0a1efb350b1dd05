#!/usr/bin/env python3
"""Regenerates the 64x64 demo images under data/ (binary PGM/PPM)."""
import pathlib

import numpy as np

SIZE = 64


def band(seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:SIZE, 0:SIZE] / (SIZE - 1)
    img = 0.35 + 0.25 * np.sin(2.0 * np.pi * (xx + 0.5 * yy))
    for _ in range(6):
        cx, cy = rng.uniform(0.15, 0.85, size=2)
        r = rng.uniform(0.06, 0.2)
        img += rng.uniform(-0.3, 0.4) * (((xx - cx) ** 2 + (yy - cy) ** 2) < r * r)
    img += 0.05 * rng.standard_normal(img.shape)
    return np.clip(np.round(img * 255.0), 0, 255).astype(np.uint8)


def main() -> None:
    out = pathlib.Path(__file__).resolve().parent.parent / "data"
    out.mkdir(exist_ok=True)
    gray = band(11)
    with open(out / "demo_64x64_gray.pgm", "wb") as f:
        f.write(f"P5\n{SIZE} {SIZE}\n255\n".encode())
        f.write(gray.tobytes())
    rgb = np.stack([band(21), band(22), band(23)], axis=-1)
    with open(out / "demo_64x64.ppm", "wb") as f:
        f.write(f"P6\n{SIZE} {SIZE}\n255\n".encode())
        f.write(rgb.tobytes())


if __name__ == "__main__":
    main()
