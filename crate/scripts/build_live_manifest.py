#!/usr/bin/env python3
"""Build a `ref,dist,dmos,class` manifest from a LIVE release 2 directory.

Expected layout (as distributed):

    <root>/refimgs/*.bmp
    <root>/jp2k/img1.bmp ... img227.bmp
    <root>/jpeg/img1.bmp ... img233.bmp
    <root>/wn/img1.bmp ... img174.bmp
    <root>/gblur/img1.bmp ... img174.bmp
    <root>/fastfading/img1.bmp ... img174.bmp
    <root>/dmos_realigned.mat   (dmos_new, orgs)   or  dmos.mat (dmos, orgs)
    <root>/refnames_all.mat     (refnames_all)

The 982 DMOS entries are ordered jp2k, jpeg, wn, gblur, fastfading, each
block indexed by the image number within its folder. Entries with
orgs == 1 are undistorted copies of references and are dropped, leaving
779 scored pairs. Paths in the manifest are relative to the manifest's
own directory (default: <root>/manifest.csv).

Usage: build_live_manifest.py <root> [--out manifest.csv] [--original-dmos]
"""

import argparse
import csv
import os
import sys
from pathlib import Path

from scipy.io import loadmat

BLOCKS = [("jp2k", "jp2k", 227), ("jpeg", "jpeg", 233), ("wn", "wn", 174), ("gblur", "gblur", 174), ("ff", "fastfading", 174)]


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("root", type=Path)
    ap.add_argument("--out", type=Path, default=None)
    ap.add_argument("--original-dmos", action="store_true", help="use dmos.mat instead of dmos_realigned.mat")
    args = ap.parse_args()

    root = args.root
    if args.original_dmos:
        m = loadmat(root / "dmos.mat")
        dmos = m["dmos"].ravel()
    else:
        m = loadmat(root / "dmos_realigned.mat")
        dmos = m["dmos_new"].ravel()
    orgs = m["orgs"].ravel()
    refnames = [str(r[0]) for r in loadmat(root / "refnames_all.mat")["refnames_all"].ravel()]
    if not (len(dmos) == len(orgs) == len(refnames) == sum(b[2] for b in BLOCKS)):
        print("unexpected matrix sizes", len(dmos), len(orgs), len(refnames), file=sys.stderr)
        return 1

    out = args.out or root / "manifest.csv"
    rows = []
    offset = 0
    for cls, folder, count in BLOCKS:
        for k in range(count):
            i = offset + k
            if orgs[i] == 1:
                continue
            ref = Path("refimgs") / refnames[i]
            dist = Path(folder) / f"img{k + 1}.bmp"
            for p in (ref, dist):
                if not (root / p).is_file():
                    print(f"missing {root / p}", file=sys.stderr)
                    return 1
            rows.append((ref.as_posix(), dist.as_posix(), repr(float(dmos[i])), cls))
        offset += count

    base = out.resolve().parent
    with open(out, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["ref", "dist", "dmos", "class"])
        for ref, dist, d, cls in rows:
            w.writerow([Path(os.path.relpath(root.resolve() / ref, base)).as_posix(),
                        Path(os.path.relpath(root.resolve() / dist, base)).as_posix(), d, cls])
    print(f"wrote {len(rows)} rows to {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
