#!/usr/bin/env python3
"""Generate the toy classifier fixture used by the mutation tests.

Two Gaussian blobs, a 2-16-16-2 ReLU MLP trained with dropout, and a test set
that includes points planted close to the decision boundary far from the
training mass.  Output goes to tests/data/.
"""
import argparse
import json
import struct
from pathlib import Path

import numpy as np

SEP = 1.5
HIDDEN = 16
DROPOUT = 0.05
EPOCHS = 3000
LR = 0.5
MARGIN = 0.3
PLANTED = 40


def write_atrc(path, a, dtype=np.float64):
    a = np.ascontiguousarray(a, dtype=dtype)
    if a.ndim == 1:
        a = a[:, None]
    code = 1 if dtype == np.float32 else 2
    header = b"ATRC" + struct.pack("<HBBQQI", 1, code, 0, a.shape[0], a.shape[1], 0)
    assert len(header) == 28
    path.write_bytes(header + a.astype(a.dtype.newbyteorder("<")).tobytes())


def sample(rng, n):
    y = rng.integers(0, 2, n)
    x = rng.normal(0, 1, (n, 2))
    x[:, 0] += np.where(y == 0, -SEP, SEP)
    return x, y


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "tests" / "data")
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)

    xtr, ytr = sample(rng, 600)
    xte, yte = sample(rng, 160)
    w1 = rng.normal(0, 1 / np.sqrt(2), (HIDDEN, 2))
    w2 = rng.normal(0, 1 / np.sqrt(HIDDEN), (HIDDEN, HIDDEN))
    w3 = rng.normal(0, 1 / np.sqrt(HIDDEN), (2, HIDDEN))
    b1, b2, b3 = np.zeros(HIDDEN), np.zeros(HIDDEN), np.zeros(2)
    n = len(xtr)
    keep = 1 - DROPOUT
    for _ in range(EPOCHS):
        m1 = (rng.uniform(size=(n, HIDDEN)) >= DROPOUT) / keep
        m2 = (rng.uniform(size=(n, HIDDEN)) >= DROPOUT) / keep
        h1 = np.maximum(xtr @ w1.T + b1, 0) * m1
        h2 = np.maximum(h1 @ w2.T + b2, 0) * m2
        z = h2 @ w3.T + b3
        p = np.exp(z - z.max(1, keepdims=True))
        p /= p.sum(1, keepdims=True)
        g = p.copy()
        g[np.arange(n), ytr] -= 1
        g /= n
        gh2 = g @ w3 * (h2 > 0) * m2
        gh1 = gh2 @ w2 * (h1 > 0) * m1
        for param, grad in ((w3, g.T @ h2), (b3, g.sum(0)), (w2, gh2.T @ h1), (b2, gh2.sum(0)),
                            (w1, gh1.T @ xtr), (b1, gh1.sum(0))):
            param -= LR * grad

    def margin(pt):
        h1 = np.maximum(pt @ w1.T + b1, 0)
        h2 = np.maximum(h1 @ w2.T + b2, 0)
        z = h2 @ w3.T + b3
        return z[1] - z[0]

    planted, planted_y = [], []
    for i in range(PLANTED):
        yv = (1 if i % 4 < 2 else -1) * rng.uniform(2.5, 4.5)
        c = i % 2
        target = MARGIN if c == 1 else -MARGIN
        lo, hi = -6.0, 6.0
        for _ in range(60):
            mid = (lo + hi) / 2
            if margin(np.array([mid, yv])) < target:
                lo = mid
            else:
                hi = mid
        planted.append([hi, yv])
        planted_y.append(c)
    xte = np.r_[xte, np.array(planted)]
    yte = np.r_[yte, np.array(planted_y)]

    def dense(w, b):
        return {"kind": "dense", "weights": w.tolist(), "bias": b.tolist()}

    model = {
        "input_dim": 2,
        "num_classes": 2,
        "layers": [dense(w1, b1), {"kind": "relu"}, {"kind": "dropout", "rate": DROPOUT},
                   dense(w2, b2), {"kind": "relu"}, {"kind": "dropout", "rate": DROPOUT},
                   dense(w3, b3), {"kind": "softmax"}],
    }
    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / "toy_model.json").write_text(json.dumps(model, indent=1) + "\n")
    write_atrc(args.out / "toy_train_inputs.atrc", xtr)
    write_atrc(args.out / "toy_train_labels.atrc", ytr, np.float32)
    write_atrc(args.out / "toy_test_inputs.atrc", xte)
    write_atrc(args.out / "toy_test_labels.atrc", yte, np.float32)


if __name__ == "__main__":
    main()
