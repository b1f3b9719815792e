"""Convert a monthly oil-market export into the svarsoft dataset layout.

    python python/convert_oil_data.py raw.csv fixtures/data/oil_market.csv \
        --date date --rea rea --prod prod --rpo rpo [--prod-levels] [--rpo-levels]
"""

import argparse
import calendar
import csv
import math
import re
import sys

MONTHS = {name.lower(): i for i, name in enumerate(calendar.month_abbr) if name}

PATTERNS = [
    re.compile(r"^(?P<y>\d{4})[Mm](?P<m>\d{1,2})$"),
    re.compile(r"^(?P<y>\d{4})[-:/.](?P<m>\d{1,2})([-/.]\d{1,2})?$"),
    re.compile(r"^(?P<m>\d{1,2})/(\d{1,2}/)?(?P<y>\d{4})$"),
    re.compile(r"^(?P<mon>[A-Za-z]{3})[a-z]*[ -](?P<y>\d{4})$"),
]


def parse_month(text):
    text = text.strip()
    for pattern in PATTERNS:
        hit = pattern.match(text)
        if hit:
            parts = hit.groupdict()
            month = MONTHS[parts["mon"].lower()] if parts.get("mon") else int(parts["m"])
            if 1 <= month <= 12:
                return int(parts["y"]), month
    raise ValueError(f"unrecognised date '{text}'")


def convert(rows, args):
    out = []
    for row in rows:
        year, month = parse_month(row[args.date])
        out.append([year, month, float(row[args.rea]), float(row[args.prod]), float(row[args.rpo])])
    out.sort()
    for prev, cur in zip(out, out[1:]):
        if (cur[0] * 12 + cur[1]) - (prev[0] * 12 + prev[1]) != 1:
            raise ValueError(f"dates are not contiguous months at {cur[0]}-{cur[1]:02d}")
    if args.rpo_levels:
        for r in out:
            r[4] = math.log(r[4])
    if args.prod_levels:
        out = [cur[:3] + [100.0 * math.log(cur[3] / prev[3]), cur[4]] for prev, cur in zip(out, out[1:])]
    return out


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--date", default="date")
    p.add_argument("--rea", default="REA")
    p.add_argument("--prod", default="PROD")
    p.add_argument("--rpo", default="RPO")
    p.add_argument("--prod-levels", action="store_true", help="production column holds levels")
    p.add_argument("--rpo-levels", action="store_true", help="price column holds the real price, not its log")
    args = p.parse_args(argv)

    with open(args.input, newline="") as f:
        rows = convert(csv.DictReader(f), args)
    with open(args.output, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["date", "REA", "PROD", "RPO"])
        for year, month, rea, prod, rpo in rows:
            w.writerow([f"{year:04d}-{month:02d}", repr(rea), repr(prod), repr(rpo)])
    print(f"wrote {len(rows)} months to {args.output}", file=sys.stderr)


if __name__ == "__main__":
    main()
