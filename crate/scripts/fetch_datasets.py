#!/usr/bin/env python3
"""Write the experiment datasets as plain CSV files under data/.

wine.csv and diabetes.csv come from the copies bundled with scikit-learn.
MiniBooNE is downloaded from the UCI repository when --miniboone is given
(about 90 MB); it is large, so it is opt-in.
"""

import argparse
import csv
import gzip
import os
import sys
import urllib.request

MINIBOONE_URL = "https://archive.ics.uci.edu/ml/machine-learning-databases/00199/MiniBooNE_PID.txt"


def sklearn_data_dir():
    import sklearn

    return os.path.join(os.path.dirname(sklearn.__file__), "datasets", "data")


def write_csv(path, header, rows):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(header)
        w.writerows(rows)
    print(f"wrote {path} ({len(rows)} rows, {len(header)} columns)")


def wine(out):
    from sklearn.datasets import load_wine

    d = load_wine()
    write_csv(os.path.join(out, "wine.csv"), list(d.feature_names), d.data.tolist())


def diabetes(out):
    base = sklearn_data_dir()
    with gzip.open(os.path.join(base, "diabetes_data_raw.csv.gz"), "rt") as f:
        x = [line.split() for line in f if line.strip()]
    with gzip.open(os.path.join(base, "diabetes_target.csv.gz"), "rt") as f:
        y = [line.strip() for line in f if line.strip()]
    header = ["age", "sex", "bmi", "bp", "s1", "s2", "s3", "s4", "s5", "s6", "target"]
    write_csv(os.path.join(out, "diabetes.csv"), header, [r + [t] for r, t in zip(x, y)])


def miniboone(out):
    raw = os.path.join(out, "MiniBooNE_PID.txt")
    if not os.path.exists(raw):
        print(f"downloading {MINIBOONE_URL}")
        urllib.request.urlretrieve(MINIBOONE_URL, raw)
    with open(raw) as f:
        f.readline()  # signal/background counts
        rows = [line.split() for line in f if line.strip()]
    header = [f"f{j}" for j in range(len(rows[0]))]
    write_csv(os.path.join(out, "miniboone.csv"), header, rows)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "data"))
    ap.add_argument("--miniboone", action="store_true", help="also download MiniBooNE")
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    wine(args.out)
    diabetes(args.out)
    if args.miniboone:
        try:
            miniboone(args.out)
        except OSError as e:
            print(f"MiniBooNE download failed: {e}", file=sys.stderr)
            return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
