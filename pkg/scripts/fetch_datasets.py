#!/usr/bin/env python3
"""Download and prepare the two public benchmark tables.

Run this on a machine with network access, then copy the ``data/``
directory next to the package checkout (the tests look for
``data/wine_quality_red.csv`` and ``data/communities_crime.csv``).

* Wine quality (red): semicolon-separated with a quoted header; rewritten
  as a plain comma CSV. 1599 rows, 12 numeric columns.
* Communities and crime: headerless, ``?`` for missing cells, companion
  names file; converted through
  :func:`copulabn.data.prepare_communities_csv` (identifier columns
  dropped, sparse columns dropped). 1994 rows.

The script prints the SHA-256 of every raw download so a run can be
audited and compared against later fetches.
"""

import csv
import hashlib
import io
import sys
import urllib.request
from pathlib import Path

REPO_ROOT = Path(__file__).resolve().parent.parent
DATA_DIR = REPO_ROOT / "data"

WINE_URL = (
    "https://archive.ics.uci.edu/ml/machine-learning-databases/"
    "wine-quality/winequality-red.csv"
)
CRIME_DATA_URL = (
    "https://archive.ics.uci.edu/ml/machine-learning-databases/"
    "communities/communities.data"
)
CRIME_NAMES_URL = (
    "https://archive.ics.uci.edu/ml/machine-learning-databases/"
    "communities/communities.names"
)


def _download(url):
    print(f"fetching {url}")
    with urllib.request.urlopen(url, timeout=60) as response:
        payload = response.read()
    digest = hashlib.sha256(payload).hexdigest()
    print(f"  {len(payload)} bytes, sha256 {digest}")
    return payload


def _prepare_wine(payload, out_path):
    text = payload.decode("utf-8")
    reader = csv.reader(io.StringIO(text), delimiter=";")
    rows = [row for row in reader if row]
    header = [name.strip().strip('"') for name in rows[0]]
    body = rows[1:]
    if len(header) != 12:
        raise SystemExit(f"wine header has {len(header)} columns, expected 12")
    if len(body) != 1599:
        raise SystemExit(f"wine table has {len(body)} rows, expected 1599")
    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(body)
    print(f"wrote {out_path} ({len(body)} rows x {len(header)} columns)")


def main():
    sys.path.insert(0, str(REPO_ROOT / "src"))
    from copulabn.data import load_csv, prepare_communities_csv

    DATA_DIR.mkdir(exist_ok=True)

    wine_out = DATA_DIR / "wine_quality_red.csv"
    _prepare_wine(_download(WINE_URL), wine_out)
    load_csv(wine_out)  # must satisfy the package's CSV contract

    raw_data = DATA_DIR / "communities.data"
    raw_names = DATA_DIR / "communities.names"
    raw_data.write_bytes(_download(CRIME_DATA_URL))
    raw_names.write_bytes(_download(CRIME_NAMES_URL))
    crime_out = DATA_DIR / "communities_crime.csv"
    kept = prepare_communities_csv(raw_data, raw_names, crime_out)
    print(f"wrote {crime_out} ({len(kept)} columns kept)")
    load_csv(crime_out)

    print("done")


if __name__ == "__main__":
    main()
