#!/usr/bin/env python3
"""Fetch the UCI Bank Marketing dataset into data/bank.csv.

The raw bank-full.csv is semicolon-delimited with quoted fields; this
normalizes it into strict comma CSV matching data/bank.schema.json.
Needs network access to a UCI mirror.
"""

import csv
import io
import sys
import urllib.request
import zipfile
from pathlib import Path

URLS = [
    "https://archive.ics.uci.edu/ml/machine-learning-databases/00222/bank.zip",
    "https://archive.ics.uci.edu/static/public/222/bank+marketing.zip",
]

EXPECTED_ROWS = 45211


def fetch_raw():
    last_error = None
    for url in URLS:
        try:
            print(f"fetching {url} ...")
            with urllib.request.urlopen(url, timeout=120) as resp:
                blob = resp.read()
            with zipfile.ZipFile(io.BytesIO(blob)) as zf:
                names = zf.namelist()
                # the nested archive layout varies between mirrors
                if "bank-full.csv" in names:
                    return zf.read("bank-full.csv").decode("utf-8")
                for name in names:
                    if name.endswith("bank.zip"):
                        with zipfile.ZipFile(io.BytesIO(zf.read(name))) as inner:
                            return inner.read("bank-full.csv").decode("utf-8")
            raise FileNotFoundError(f"bank-full.csv not in {names}")
        except Exception as exc:
            last_error = exc
            print(f"  failed: {exc}")
    raise SystemExit(f"could not fetch bank-full.csv from any mirror: {last_error}")


def main():
    out_path = Path(__file__).resolve().parent.parent / "data" / "bank.csv"
    raw = fetch_raw()
    reader = csv.reader(io.StringIO(raw), delimiter=";")
    rows = list(reader)
    header, body = rows[0], rows[1:]
    if len(body) != EXPECTED_ROWS:
        raise SystemExit(f"expected {EXPECTED_ROWS} rows, got {len(body)}")
    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(body)
    print(f"wrote {out_path} ({len(body)} rows)")


if __name__ == "__main__":
    sys.exit(main())
