#!/usr/bin/env python3
"""Convert one SEED-VIG session (.mat) to the CSV inputs vigil reads.

The variable names inside the .mat files differ between dataset releases,
so they are passed on the command line. Run with --list first to see them.
"""
import argparse
import sys

import numpy as np
import scipy.io


def load(path):
    return {k: v for k, v in scipy.io.loadmat(path).items() if not k.startswith("__")}


def write_recording(path, data, names, rate):
    t = np.arange(data.shape[1]) / rate
    with open(path, "w") as out:
        out.write(",".join(["time_s"] + names) + "\n")
        np.savetxt(out, np.column_stack([t, data.T]), delimiter=",", fmt="%.9g")
    with open(str(path) + ".meta", "w") as meta:
        meta.write(f"sample_rate_hz={rate:g}\n")


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--list", metavar="MAT", help="print the variables of a .mat file and exit")
    p.add_argument("--forehead", metavar="MAT")
    p.add_argument("--forehead-var")
    p.add_argument("--rows", default="0,1,2,3", help="rows of the forehead matrix holding ch4,ch5,ch6,ch7")
    p.add_argument("--rate", type=float, help="sample rate of the forehead matrix in Hz")
    p.add_argument("--labels", metavar="MAT")
    p.add_argument("--labels-var", default="perclos")
    p.add_argument("--window", type=float, default=8.0)
    p.add_argument("--out", default=".")
    a = p.parse_args()

    if a.list:
        for k, v in load(a.list).items():
            print(k, getattr(v, "shape", type(v).__name__))
        return 0
    if not (a.forehead and a.forehead_var and a.rate and a.labels):
        p.error("--forehead, --forehead-var, --rate and --labels are required")

    x = np.asarray(load(a.forehead)[a.forehead_var], dtype=float)
    rows = [int(r) for r in a.rows.split(",")]
    if x.shape[0] > x.shape[1]:
        x = x.T  # samples along the first axis
    write_recording(f"{a.out}/forehead.csv", x[rows], ["ch4", "ch5", "ch6", "ch7"], a.rate)

    y = np.asarray(load(a.labels)[a.labels_var], dtype=float).ravel()
    with open(f"{a.out}/labels.csv", "w") as out:
        out.write("window_start_s,perclos\n")
        for i, v in enumerate(y):
            out.write(f"{i * a.window:g},{v:.9g}\n")
    print(f"{x.shape[1]} samples, {len(y)} labelled windows", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
