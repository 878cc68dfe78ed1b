#!/usr/bin/env python3
"""Rebuild the bundled CSV datasets under data/.

Sources are offline copies shipped inside public Python packages:
  * scikit-learn (iris, wine)
  * pydataset 0.2.0 resources.tar.gz (Rdatasets mirror: MASS biopsy, fgl, crabs, Pima)
  * orange3 wheel (ionosphere, zoo)

Usage:
  pip download pydataset orange3 --no-deps -d /tmp/dl
  python3 tools/make_datasets.py --pydataset /tmp/dl/pydataset-0.2.0.tar.gz \
      --orange /tmp/dl/orange3-*.whl --out data
  python3 tools/make_datasets.py --seeds seeds_dataset.txt --out data
"""
import argparse
import csv
import io
import tarfile
import zipfile
from pathlib import Path


def write(path, header, rows):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    print(f"{path}: {len(rows)} rows")


def rdata(tar, name):
    inner = tarfile.open(fileobj=io.BytesIO(tar.extractfile(
        [m for m in tar.getmembers() if m.name.endswith("resources.tar.gz")][0]).read()))
    member = [m for m in inner.getmembers() if m.name.endswith(f"csv/{name}.csv")][0]
    return list(csv.reader(io.StringIO(inner.extractfile(member).read().decode())))


def orange(whl, name):
    z = zipfile.ZipFile(whl)
    path = [n for n in z.namelist() if n.endswith(f"datasets/{name}.tab")][0]
    lines = z.read(path).decode().splitlines()
    return [l.split("\t") for l in lines]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--pydataset")
    ap.add_argument("--orange")
    ap.add_argument("--seeds", help="UCI seeds_dataset.txt")
    ap.add_argument("--out", default="data")
    a = ap.parse_args()
    out = Path(a.out)
    out.mkdir(exist_ok=True)

    if a.seeds:
        header = ["area", "perimeter", "compactness", "kernel_length", "kernel_width", "asymmetry", "groove_length"]
        rows = [r.split() for r in Path(a.seeds).read_text().splitlines() if r.strip()]
        write(out / "seeds.csv", header + ["label"], [r[:7] + [r[7]] for r in rows if len(r) == 8])
    if not (a.pydataset and a.orange):
        if not a.seeds:
            ap.error("--pydataset and --orange are required unless --seeds is given")
        return

    from sklearn import datasets as skd
    for name, loader in [("iris", skd.load_iris), ("wine", skd.load_wine)]:
        d = loader()
        names = [n.replace(" ", "_").replace("(cm)", "").strip("_").replace("/", "_") for n in d.feature_names]
        rows = [[repr(float(v)) for v in x] + [str(d.target_names[y])] for x, y in zip(d.data, d.target)]
        write(out / f"{name}.csv", names + ["label"], rows)

    tar = tarfile.open(a.pydataset)

    t = rdata(tar, "MASS/biopsy")
    rows = [[("" if v == "NA" else v) for v in r[2:11]] + [r[11]] for r in t[1:]]
    write(out / "breast_cancer.csv", t[0][2:11] + ["label"], rows)

    t = rdata(tar, "MASS/fgl")
    write(out / "glass.csv", t[0][1:10] + ["label"], [r[1:10] + [r[10]] for r in t[1:]])

    t = rdata(tar, "MASS/crabs")
    write(out / "crabs.csv", t[0][4:9] + ["label"], [r[4:9] + [r[1] + r[2]] for r in t[1:]])

    tr, te = rdata(tar, "MASS/Pima.tr"), rdata(tar, "MASS/Pima.te")
    write(out / "diabetes.csv", tr[0][1:8] + ["label"], [r[1:8] + [r[8]] for r in tr[1:] + te[1:]])

    t = orange(a.orange, "ionosphere")
    write(out / "ionosphere.csv", t[0][:34] + ["label"], [r[:35] for r in t[3:] if len(r) >= 35])

    t = orange(a.orange, "zoo")
    write(out / "zoo.csv", t[0][1:17] + ["label"], [r[1:18] for r in t[3:] if len(r) >= 18])


if __name__ == "__main__":
    main()
