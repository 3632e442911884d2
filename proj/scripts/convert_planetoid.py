#!/usr/bin/env python3
"""Convert a Planetoid dataset release (ind.<name>.*) into the manifest
format read by the loader (edges TSV, features CSV, labels TXT, manifest
JSON).

Expected input files, as shipped in the public Planetoid repository
(https://github.com/kimiyoung/planetoid, data/ directory):

    ind.<name>.x  ind.<name>.tx  ind.<name>.allx
    ind.<name>.y  ind.<name>.ty  ind.<name>.ally
    ind.<name>.graph  ind.<name>.test.index

Usage:
    python3 scripts/convert_planetoid.py --raw-dir /path/to/planetoid/data \
        --name cora --out data/cora

For cora the result must report N=2708, |E|=5278, F=1433, K=7.
"""

import argparse
import json
import pickle
from pathlib import Path

import numpy as np
import scipy.sparse as sp


def load_pickle(path: Path):
    with open(path, "rb") as f:
        return pickle.load(f, encoding="latin1")


def assemble(raw_dir: Path, name: str):
    x = load_pickle(raw_dir / f"ind.{name}.x")
    tx = load_pickle(raw_dir / f"ind.{name}.tx")
    allx = load_pickle(raw_dir / f"ind.{name}.allx")
    y = load_pickle(raw_dir / f"ind.{name}.y")
    ty = load_pickle(raw_dir / f"ind.{name}.ty")
    ally = load_pickle(raw_dir / f"ind.{name}.ally")
    graph = load_pickle(raw_dir / f"ind.{name}.graph")
    test_idx = np.loadtxt(raw_dir / f"ind.{name}.test.index", dtype=int)

    # citeseer has isolated test nodes missing from test.index; pad the
    # feature/label blocks with zero rows over the full contiguous range
    full = np.arange(test_idx.min(), test_idx.max() + 1)
    if len(full) > len(test_idx):
        tx_full = sp.lil_matrix((len(full), x.shape[1]))
        tx_full[test_idx - test_idx.min(), :] = tx
        tx = tx_full.tocsr()
        ty_full = np.zeros((len(full), y.shape[1]), dtype=ty.dtype)
        ty_full[test_idx - test_idx.min(), :] = ty
        # isolated nodes get an arbitrary valid class so labels stay in range
        ty_full[ty_full.sum(axis=1) == 0, 0] = 1
        ty = ty_full
        test_idx = full

    features = sp.vstack([allx, tx]).tolil()
    features[test_idx, :] = features[np.sort(test_idx), :]
    features = np.asarray(features.todense())

    labels_onehot = np.vstack([ally, ty])
    labels_onehot[test_idx, :] = labels_onehot[np.sort(test_idx), :]
    labels = labels_onehot.argmax(axis=1)

    n = features.shape[0]
    edges = set()
    for u, nbrs in graph.items():
        for v in nbrs:
            if u == v or u >= n or v >= n:
                continue
            edges.add((min(u, v), max(u, v)))
    return features, labels.astype(int), sorted(edges)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--raw-dir", required=True, type=Path)
    ap.add_argument("--name", required=True, choices=["cora", "citeseer", "pubmed"])
    ap.add_argument("--out", required=True, type=Path)
    args = ap.parse_args()

    features, labels, edges = assemble(args.raw_dir, args.name)
    n, f = features.shape
    k = int(labels.max()) + 1

    args.out.mkdir(parents=True, exist_ok=True)
    name = args.name

    with open(args.out / f"{name}_edges.tsv", "w") as out:
        for u, v in edges:
            out.write(f"{u}\t{v}\n")
    with open(args.out / f"{name}_features.csv", "w") as out:
        for row in features:
            out.write(",".join(repr(float(v)) for v in row) + "\n")
    with open(args.out / f"{name}_labels.txt", "w") as out:
        for label in labels:
            out.write(f"{label}\n")
    manifest = {
        "num_nodes": n,
        "num_classes": k,
        "edges": f"{name}_edges.tsv",
        "features": f"{name}_features.csv",
        "labels": f"{name}_labels.txt",
    }
    with open(args.out / "manifest.json", "w") as out:
        json.dump(manifest, out, indent=2)
        out.write("\n")

    print(f"wrote {args.out}/manifest.json  N={n} |E|={len(edges)} F={f} K={k}")


if __name__ == "__main__":
    main()
