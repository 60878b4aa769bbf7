#!/usr/bin/env python3
"""Download the MNIST / Fashion-MNIST IDX archives into the hcloss data layout.

Files land in ``<root>/<dataset>/`` as the gzip archives published upstream; the
loader inflates them on the fly.

Usage:
    python scripts/download_datasets.py --dataset mnist --root ./data
"""

import argparse
import sys
from pathlib import Path

import requests

MIRRORS = {
    "mnist": "https://storage.googleapis.com/cvdf-datasets/mnist/",
    "fashion-mnist": "http://fashion-mnist.s3-website.eu-central-1.amazonaws.com/",
}
FILES = (
    "train-images-idx3-ubyte.gz",
    "train-labels-idx1-ubyte.gz",
    "t10k-images-idx3-ubyte.gz",
    "t10k-labels-idx1-ubyte.gz",
)


def fetch(url: str, target: Path) -> int:
    """Stream ``url`` to ``target`` through a temporary file; returns the byte count."""
    partial = target.with_suffix(target.suffix + ".part")
    size = 0
    with requests.get(url, stream=True, timeout=60) as response:
        response.raise_for_status()
        with partial.open("wb") as handle:
            for chunk in response.iter_content(chunk_size=1 << 16):
                handle.write(chunk)
                size += len(chunk)
    partial.replace(target)
    return size


def main():
    """Main function."""
    parser = argparse.ArgumentParser(description="Download IDX datasets for hcloss")
    parser.add_argument("--dataset", choices=sorted(MIRRORS), action="append", help="Dataset to fetch (repeatable, default: all)")
    parser.add_argument("--root", type=Path, default=Path("data"), help="Data root (HCLOSS_DATA_ROOT)")
    parser.add_argument("--force", action="store_true", help="Download even if the file exists")
    args = parser.parse_args()

    try:
        for dataset in args.dataset or sorted(MIRRORS):
            directory = args.root / dataset
            directory.mkdir(parents=True, exist_ok=True)
            for name in FILES:
                target = directory / name
                if target.exists() and not args.force:
                    print(f"• {target} exists, skipping")
                    continue
                size = fetch(MIRRORS[dataset] + name, target)
                print(f"✅ {target} ({size / 1e6:.1f} MB)")
    except (requests.RequestException, OSError) as e:
        print(f"❌ Error: {e}", file=sys.stderr)
        sys.exit(1)


if __name__ == "__main__":
    main()
