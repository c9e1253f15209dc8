"""Convert a multivariate ``.ts`` archive file into the canonical record CSV.

Usage: python scripts/convert_ts.py INPUT.ts OUTPUT.csv [--prefix train]

Each sample becomes m records ``<sample_id>,<dim_id>,<label>,<v1>,...``.
Only the subset of the ``.ts`` format needed for numeric, label-terminated
data without timestamps or missing values is handled.
"""
import argparse
import sys


def convert(src, dst, prefix):
    n = 0
    with open(src, encoding="utf-8") as fin, open(dst, "w", encoding="utf-8") as fout:
        fout.write(f"# converted from {src.rsplit('/', 1)[-1]}\n")
        in_data = False
        for line in fin:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if not in_data:
                if line.lower().startswith("@data"):
                    in_data = True
                continue
            *dims, label = line.split(":")
            sid = f"{prefix}{n}"
            for d, values in enumerate(dims):
                fout.write(f"{sid},{d},{label.strip()},{values.strip()}\n")
            n += 1
    return n


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("src")
    p.add_argument("dst")
    p.add_argument("--prefix", default="s")
    args = p.parse_args(argv)
    n = convert(args.src, args.dst, args.prefix)
    print(f"wrote {n} samples to {args.dst}", file=sys.stderr)


if __name__ == "__main__":
    main()
