#!/usr/bin/env python3
"""Materialize the benchmark suite directory from locally installable packages.

The UCI repository is the canonical source for every dataset in the suite.
When it is reachable, download the files listed in registry/*.toml directly
and place them in the suite directory. This script is the offline fallback:
it rebuilds as many of the files as possible from data bundled inside
packages available on a PyPI mirror.

    python3 scripts/fetch_suite.py data/suite

Sources:
    wine.data, iris.data          scikit-learn (bundled UCI copies)
    zoo.data                      Orange3 (datasets/zoo.tab)
    bupa.data, hayes-roth.data,
    letter-recognition.data       keel-ds (KEEL copies of the UCI files)
    SPECT.train, SPECT.test       imbalanced-databases (UCI SPECT files)

Abalone, User Modelling and Banknote are not bundled by any of these
packages and must be copied in by hand.
"""

import csv
import hashlib
import io
import os
import subprocess
import sys
import tempfile
import zipfile

ZOO_CLASSES = {
    "mammal": 1,
    "bird": 2,
    "reptile": 3,
    "fish": 4,
    "amphibian": 5,
    "insect": 6,
    "invertebrate": 7,
}

WHEELS = {
    "keel-ds": "keel_ds",
    "imbalanced-databases": "imbalanced_databases",
    "Orange3": "orange3",
}


def download_wheels(dest):
    wheels = {}
    for pkg, prefix in WHEELS.items():
        subprocess.run(
            [sys.executable, "-m", "pip", "download", "--no-deps", "-q", "-d", dest, pkg],
            check=True,
        )
        for name in os.listdir(dest):
            if name.lower().startswith(prefix) and name.endswith(".whl"):
                wheels[pkg] = zipfile.ZipFile(os.path.join(dest, name))
    return wheels


def keel_rows(text):
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("@"):
            continue
        yield [cell.strip() for cell in line.split(",")]


def num(cell):
    v = float(cell)
    return str(int(v)) if v.is_integer() else repr(v)


def write_rows(path, rows):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        for r in rows:
            w.writerow(r)


def sklearn_csv(name):
    import sklearn

    path = os.path.join(os.path.dirname(sklearn.__file__), "datasets", "data", name)
    with open(path) as f:
        rows = list(csv.reader(f))
    # first line is "n_samples,n_features,class names..."
    return rows[0], rows[1:]


def build(out, wheels):
    written = []

    header, rows = sklearn_csv("wine_data.csv")
    write_rows(
        os.path.join(out, "wine.data"),
        [[str(int(r[-1]) + 1)] + r[:-1] for r in rows],
    )
    written.append("wine.data")

    header, rows = sklearn_csv("iris.csv")
    names = ["Iris-setosa", "Iris-versicolor", "Iris-virginica"]
    write_rows(
        os.path.join(out, "iris.data"),
        [r[:-1] + [names[int(r[-1])]] for r in rows],
    )
    written.append("iris.data")

    orange = wheels["Orange3"]
    text = orange.read("Orange/datasets/zoo.tab").decode()
    lines = text.splitlines()
    zoo = []
    for line in lines[3:]:
        cells = line.split("\t")
        if len(cells) < 18:
            continue
        zoo.append([cells[0]] + cells[1:17] + [str(ZOO_CLASSES[cells[17]])])
    write_rows(os.path.join(out, "zoo.data"), zoo)
    written.append("zoo.data")

    keel = wheels["keel-ds"]
    base = "keel_ds/data/balanced/raw/"
    bupa = [[num(c) for c in r] for r in keel_rows(keel.read(base + "bupa.dat").decode())]
    write_rows(os.path.join(out, "bupa.data"), bupa)
    written.append("bupa.data")

    # KEEL concatenates the UCI train (132 rows) and test (28 rows) files and
    # drops the leading name column. Keep the train part.
    hayes = list(keel_rows(keel.read(base + "hayes-roth.dat").decode()))[:132]
    write_rows(os.path.join(out, "hayes-roth.data"), hayes)
    written.append("hayes-roth.data")

    # KEEL stores the label last and in a different row order than UCI.
    letters = [[r[-1]] + r[:-1] for r in keel_rows(keel.read(base + "letter.dat").decode())]
    write_rows(os.path.join(out, "letter-recognition.data"), letters)
    written.append("letter-recognition.data")

    imb = wheels["imbalanced-databases"]
    for name in ("SPECT.train", "SPECT.test"):
        data = imb.read("imbalanced_databases/data/spect_f/" + name + ".txt").decode()
        rows = [line.strip().split(",") for line in data.splitlines() if line.strip()]
        write_rows(os.path.join(out, name), rows)
        written.append(name)

    return written


def main():
    out = sys.argv[1] if len(sys.argv) > 1 else "data/suite"
    os.makedirs(out, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        wheels = download_wheels(tmp)
        written = build(out, wheels)
    for name in written:
        with open(os.path.join(out, name), "rb") as f:
            digest = hashlib.sha256(f.read()).hexdigest()
        print(f"{digest}  {name}")


if __name__ == "__main__":
    main()
