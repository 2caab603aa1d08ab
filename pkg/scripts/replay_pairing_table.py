#!/usr/bin/env python3
"""Recompute agreement statistics from the production pairing-frequency table.

The table below is the relative pairing-frequency matrix observed in the
production annotation campaign (rows/columns are the five scale labels; each
cell is the share of annotation pairs with that ordered label combination).
From it we derive micro agreement and pooled pairwise F1, on the full scale
and after binarizing (0 vs 1-4).

Usage: python3 scripts/replay_pairing_table.py
"""

import numpy as np

from annolab.agreement import PairTable

PAIRING_FREQS = np.array(
    [
        [0.525, 0.032, 0.037, 0.015, 0.003],
        [0.032, 0.014, 0.020, 0.009, 0.001],
        [0.037, 0.020, 0.052, 0.036, 0.007],
        [0.015, 0.009, 0.036, 0.044, 0.016],
        [0.003, 0.001, 0.007, 0.016, 0.013],
    ]
)


def main() -> None:
    table = PairTable.from_relative(PAIRING_FREQS)
    binary = table.binarized()
    print("5-class pairing table (relative):")
    print(table.to_csv())
    print(f"micro agreement (5-class): {table.micro_agreement():.3f}")
    print(f"micro agreement (binary):  {binary.micro_agreement():.3f}")
    per_class = ", ".join(f"{v:.3f}" for v in table.f1_per_class())
    print(f"pairwise F1 per class:     {per_class}")
    print(f"pairwise F1 macro (5):     {table.f1_macro():.3f}")
    print(f"pairwise F1 macro (bin):   {binary.f1_macro():.3f}")


if __name__ == "__main__":
    main()
