#!/usr/bin/env python3
"""Fetch the UCI Adult (Census Income) training split into data/adult.csv.

The raw file has no header and pads fields with spaces; this script
normalizes it into strict RFC-4180 CSV with a header row matching
data/adult.schema.json. Needs network access to a UCI mirror.
"""

import csv
import io
import sys
import urllib.request
import zipfile
from pathlib import Path

URLS = [
    "https://archive.ics.uci.edu/ml/machine-learning-databases/adult/adult.data",
    "https://archive.ics.uci.edu/static/public/2/adult.zip",
]

HEADER = [
    "age", "workclass", "fnlwgt", "education", "education-num", "marital-status",
    "occupation", "relationship", "race", "sex", "capital-gain", "capital-loss",
    "hours-per-week", "native-country", "income",
]

EXPECTED_ROWS = 32561


def fetch_raw():
    last_error = None
    for url in URLS:
        try:
            print(f"fetching {url} ...")
            with urllib.request.urlopen(url, timeout=60) as resp:
                blob = resp.read()
            if url.endswith(".zip"):
                with zipfile.ZipFile(io.BytesIO(blob)) as zf:
                    blob = zf.read("adult.data")
            return blob.decode("utf-8", errors="strict")
        except Exception as exc:  # try the next mirror
            last_error = exc
            print(f"  failed: {exc}")
    raise SystemExit(f"could not fetch adult.data from any mirror: {last_error}")


def main():
    out_path = Path(__file__).resolve().parent.parent / "data" / "adult.csv"
    raw = fetch_raw()
    rows = []
    for line in raw.splitlines():
        line = line.strip()
        if not line:
            continue
        cells = [cell.strip() for cell in line.split(",")]
        if len(cells) != len(HEADER):
            raise SystemExit(f"unexpected field count {len(cells)} in line: {line[:80]}")
        rows.append(cells)
    if len(rows) != EXPECTED_ROWS:
        raise SystemExit(f"expected {EXPECTED_ROWS} rows, got {len(rows)}")
    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(HEADER)
        writer.writerows(rows)
    print(f"wrote {out_path} ({len(rows)} rows)")


if __name__ == "__main__":
    sys.exit(main())
