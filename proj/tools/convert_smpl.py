#!/usr/bin/env python3
"""Convert an SMPL-style model archive (.npz) into satkit's body-model JSON.

Expected arrays: v_template (V, 3), shapedirs (V, 3, B) with B >= 10,
kintree_table (2, J), J_regressor (J, V), weights (V, J), and optionally
f (F, 3) and joint_regressor (J_out, V) for a separate output regressor.
Pickled SMPL files can be exported to .npz with numpy beforehand; pose
correctives (posedirs) are ignored.
"""

import argparse
import json

import numpy as np


def normalize_rows(m):
    m = np.asarray(m, dtype=np.float64)
    sums = m.sum(axis=1, keepdims=True)
    if np.any(sums <= 0):
        raise SystemExit("regressor or weight row with non-positive sum")
    return m / sums


def convert(archive, root_joint=0):
    d = np.load(archive, allow_pickle=False)
    template = np.asarray(d["v_template"], dtype=np.float64)
    n_verts = template.shape[0]
    shapedirs = np.asarray(d["shapedirs"], dtype=np.float64)[:, :, :10]
    parents = [int(p) for p in np.asarray(d["kintree_table"])[0]]
    parents[0] = -1
    rest = normalize_rows(d["J_regressor"])
    out = {
        "schema_version": 1,
        "template": template.tolist(),
        "shape_dirs": shapedirs.reshape(n_verts * 3, 10).tolist(),
        "parents": parents,
        "rest_regressor": rest.tolist(),
        "skin_weights": normalize_rows(d["weights"]).tolist(),
        "joint_regressor": normalize_rows(d["joint_regressor"]).tolist() if "joint_regressor" in d else rest.tolist(),
        "root_joint": root_joint,
    }
    if "f" in d:
        out["faces"] = np.asarray(d["f"], dtype=np.int64).tolist()
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("archive", help="input .npz")
    ap.add_argument("output", help="output body-model JSON")
    ap.add_argument("--root-joint", type=int, default=0)
    args = ap.parse_args()
    with open(args.output, "w") as f:
        json.dump(convert(args.archive, args.root_joint), f)


if __name__ == "__main__":
    main()
