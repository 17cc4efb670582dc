#!/usr/bin/env python3
"""Download the two evaluation corpora into data/.

 - data/sherlock.txt   The Adventures of Sherlock Holmes (Project
                       Gutenberg etext 1661), boilerplate stripped.
 - data/lingspam/      the "bare" variant of the Ling-Spam corpus,
                       partitions part1..part10 with spam messages
                       named spmsg*.

The corpus-scale acceptance tests skip themselves while these are
missing, so this is the one-time setup step.  Both corpora are public;
if the hosts are unreachable from your network, place the files
manually in the same layout (see README) and the tests will pick
them up.
"""

import argparse
import re
import shutil
import sys
import tarfile
import tempfile
import urllib.request
from pathlib import Path

from hdsem.textpipe import strip_gutenberg_boilerplate

BOOK_URLS = (
    "https://www.gutenberg.org/files/1661/1661-0.txt",
    "https://www.gutenberg.org/cache/epub/1661/pg1661.txt",
)
LINGSPAM_URLS = (
    "http://www.aueb.gr/users/ion/data/lingspam_public.tar.gz",
    "http://nlp.cs.aueb.gr/software_and_datasets/lingspam_public.tar.gz",
)
BARE_MEMBER = re.compile(r"(?:^|/)bare/(part(?:10|[1-9]))/([^/]+\.txt)$")


def _download(urls, dest, timeout):
    last = None
    for url in urls:
        try:
            print(f"fetching {url}")
            with urllib.request.urlopen(url, timeout=timeout) as resp, \
                    open(dest, "wb") as out:
                shutil.copyfileobj(resp, out)
            return
        except OSError as exc:
            print(f"  failed: {exc}", file=sys.stderr)
            last = exc
    raise SystemExit(f"all mirrors failed ({last}); see README for manual setup")


def fetch_book(data_dir, timeout, force):
    target = data_dir / "sherlock.txt"
    if target.exists() and not force:
        print(f"{target} already present")
        return
    with tempfile.NamedTemporaryFile(suffix=".txt") as tmp:
        _download(BOOK_URLS, tmp.name, timeout)
        raw = Path(tmp.name).read_text(encoding="utf-8-sig")
    target.write_text(strip_gutenberg_boilerplate(raw), encoding="utf-8")
    print(f"wrote {target}")


def fetch_lingspam(data_dir, timeout, force):
    target = data_dir / "lingspam"
    if (target / "part1").is_dir() and not force:
        print(f"{target} already present")
        return
    with tempfile.NamedTemporaryFile(suffix=".tar.gz") as tmp:
        _download(LINGSPAM_URLS, tmp.name, timeout)
        n = 0
        with tarfile.open(tmp.name, "r:gz") as archive:
            for member in archive.getmembers():
                m = BARE_MEMBER.search(member.name)
                if not m or not member.isfile():
                    continue
                part, fname = m.groups()
                out = target / part / fname
                out.parent.mkdir(parents=True, exist_ok=True)
                src = archive.extractfile(member)
                out.write_bytes(src.read())
                n += 1
    print(f"wrote {n} messages under {target}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--data-dir", default=str(Path(__file__).resolve().parent.parent / "data"))
    ap.add_argument("--timeout", type=float, default=60.0)
    ap.add_argument("--force", action="store_true", help="re-download even if present")
    ap.add_argument("--only", choices=("book", "lingspam"), help="fetch a single corpus")
    args = ap.parse_args()

    data_dir = Path(args.data_dir)
    data_dir.mkdir(parents=True, exist_ok=True)
    if args.only in (None, "book"):
        fetch_book(data_dir, args.timeout, args.force)
    if args.only in (None, "lingspam"):
        fetch_lingspam(data_dir, args.timeout, args.force)


if __name__ == "__main__":
    main()
