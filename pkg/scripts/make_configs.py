#!/usr/bin/env python3
"""Regenerate the shipped run configs under configs/.

Single-run configs follow the representative balloon and reentry test tables
(balloon at full 500-step scale, reentry at the 600-step desk scale); the two
sweep configs are desk-scale statistical grids.
"""

import json
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent / "configs"

BALLOON_TESTS = [
    # r, q (q_x = q_p), delta, A, B, C, switch step (None = never)
    (1e-3, 1e-4, 1, 0.1, 0.0, 0.01, 200),
    (1e-6, 1e-4, 1, 0.2, 0.0, 0.0, 10),
    (1e-6, 1e-4, 1, 0.2, 0.0, 0.0, 200),
    (1e-3, 1e-6, 1, 0.0, 0.0, 0.01, 200),
    (1e-3, 1e-6, 1, 0.1, 0.0, 0.0, 0),
    (1e-3, 1e-6, 1, 0.1, 0.0, 0.01, 200),
    (1e-3, 1e-6, 5, 0.1, 0.0, 0.01, 200),
    (1e-6, 1e-6, 1, 0.0, 0.0, 0.0, None),
    (1e-6, 1e-6, 1, 0.1, 0.0, 0.0, 0),
]

SHUTTLE_NOISE_BLOCKS = [
    # (q_x, q_p, r), list of (A, B, C)
    ((1e-8, 1e-12, 1e-8), [
        (0, 0, 0), (0, 0, 1), (0, 0, 10),
        (0, 1, 0), (0, 1, 1), (0, 1, 10),
        (0, 10, 0), (0, 10, 1), (0, 10, 10),
        (0, 100, 0), (0, 100, 1), (0, 100, 10),
        (100, 0, 0), (100, 0, 1), (100, 0, 10),
        (100, 1, 0), (100, 1, 1), (100, 1, 10),
        (100, 10, 0), (100, 10, 1), (100, 10, 10),
        (100, 100, 0), (100, 100, 1), (100, 100, 10),
    ]),
    ((1e-8, 1e-12, 1e-9), [(0, 0, 0), (0, 1, 10), (0, 100, 10)]),
    ((1e-8, 1e-12, 1e-6), [(0, 0, 0), (0, 1, 10), (0, 100, 10)]),
    ((1e-6, 1e-10, 1e-8), [(0, 0, 0), (0, 1, 10), (0, 100, 10)]),
    ((1e-10, 1e-14, 1e-8), [(0, 0, 0), (0, 1, 10), (0, 100, 10)]),
]


def bias_dict(A, B, C, cap=None):
    if C:
        out = {"kind": "quadratic", "A": A, "B": B, "C": C}
    elif B:
        out = {"kind": "linear", "A": A, "B": B}
    else:
        out = {"kind": "static", "A": A}
    if cap is not None:
        out["cap"] = cap
    return out


def write(path, data):
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
    print(f"wrote {path}")


def main():
    ROOT.mkdir(exist_ok=True)
    for i, (r, q, delta, A, B, C, switch) in enumerate(BALLOON_TESTS, start=1):
        write(ROOT / f"table3_test{i}.json", {
            "scenario": "balloon",
            "n_steps": 500,
            "dt": 0.01,
            "delta": delta,
            "q_x": q,
            "q_p": q,
            "r": r,
            "seed": 0,
            "bias": bias_dict(A, B, C),
            "true_switch_step": switch,
        })

    test = 1
    for (q_x, q_p, r), rows in SHUTTLE_NOISE_BLOCKS:
        for A, B, C in rows:
            unbiased = not (A or B or C)
            write(ROOT / f"table5_test{test}.json", {
                "scenario": "shuttle",
                "n_steps": 600,
                "dt": 1.4,
                "delta": 1,
                "q_x": q_x,
                "q_p": q_p,
                "r": r,
                "seed": 0,
                "bias": bias_dict(float(A), float(B), float(C), cap=1000.0),
                "true_switch_step": None if unbiased else 357,
            })
            test += 1

    write(ROOT / "balloon_sa.json", {
        "scenario": "balloon",
        "name": "balloon-sa",
        "base": {
            "n_steps": 500, "dt": 0.01, "delta": 1, "q_x": 1e-6,
            "true_switch_step": 200,
        },
        "axes": {
            "q_p": [1e-8, 1e-6, 1e-4],
            "r": [1e-6, 1e-5, 1e-4],
            "A": [0.0, 0.01, 0.5],
            "B": [0.0, 0.01, 2.0],
            "C": [0.0, 0.01, 2.0],
        },
        "seeds": 5,
    })

    write(ROOT / "shuttle_sa.json", {
        "scenario": "shuttle",
        "name": "shuttle-sa",
        "base": {
            "n_steps": 280, "dt": 1.4, "delta": 1,
            "true_switch_step": 140,
            "bias": {"kind": "quadratic", "cap": 1000.0},
        },
        "axes": {
            "q_p": [1e-12, 1e-10],
            "r": [1e-8, 1e-6],
            "A": [0.0, 100.0],
            "B": [0.0, 100.0],
            "C": [0.0, 10.0],
        },
        "seeds": 3,
        "q_x_over_r": 100.0,
    })


if __name__ == "__main__":
    main()
