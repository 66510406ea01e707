"""Calibration of the Lelong estimator: mollified logarithms and smooth random fields."""

from calabi_lab import regularity as reg
from calabi_lab.fields import random_kahler_field
from calabi_lab.geometry import GeometryConfig


def main():
    radii = [1.0, 0.5, 0.25]
    sigma = radii[-1] / 16
    for gamma in (0.5, 1.0, 2.0):
        est = reg.lelong_estimate(reg.mollified_log(gamma, sigma), (0.0, 0.0), radii)
        seq = ", ".join(f"{r:g}:{v:.5f}" for r, v in est.sequence)
        print(f"gamma={gamma}: sequence [{seq}] -> {est.extrapolated:.5f}")
    g = GeometryConfig(grid_n=128)
    for seed in range(5):
        est = reg.lelong_estimate(random_kahler_field(g, seed), (1.0, 1.0), [0.4, 0.3, 0.2])
        print(f"smooth field seed {seed}: extrapolated {est.extrapolated:+.2e}")


if __name__ == "__main__":
    main()
