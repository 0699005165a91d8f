#!/usr/bin/env python3
"""Convert the public-domain KJV text to the xrefgen TSV corpus format.

Source is the `kjv` npm package (json/verses-1769.json, keys like
"Genesis 1:1"). Output lines are `<OSIS id>\t<text>`, e.g. `Gen.1.1\tIn the
beginning ...`. Pilcrow markers (`#`) and the italic brackets of the 1769
text are dropped.
"""

import argparse
import json
import re
import subprocess
import sys
import tarfile
import tempfile
from pathlib import Path

BOOKS = [
    ("Genesis", "Gen"), ("Exodus", "Exod"), ("Leviticus", "Lev"), ("Numbers", "Num"),
    ("Deuteronomy", "Deut"), ("Joshua", "Josh"), ("Judges", "Judg"), ("Ruth", "Ruth"),
    ("1 Samuel", "1Sam"), ("2 Samuel", "2Sam"), ("1 Kings", "1Kgs"), ("2 Kings", "2Kgs"),
    ("1 Chronicles", "1Chr"), ("2 Chronicles", "2Chr"), ("Ezra", "Ezra"), ("Nehemiah", "Neh"),
    ("Esther", "Esth"), ("Job", "Job"), ("Psalms", "Ps"), ("Proverbs", "Prov"),
    ("Ecclesiastes", "Eccl"), ("Song of Solomon", "Song"), ("Solomon's Song", "Song"), ("Isaiah", "Isa"), ("Jeremiah", "Jer"),
    ("Lamentations", "Lam"), ("Ezekiel", "Ezek"), ("Daniel", "Dan"), ("Hosea", "Hos"),
    ("Joel", "Joel"), ("Amos", "Amos"), ("Obadiah", "Obad"), ("Jonah", "Jonah"),
    ("Micah", "Mic"), ("Nahum", "Nah"), ("Habakkuk", "Hab"), ("Zephaniah", "Zeph"),
    ("Haggai", "Hag"), ("Zechariah", "Zech"), ("Malachi", "Mal"),
    ("Matthew", "Matt"), ("Mark", "Mark"), ("Luke", "Luke"), ("John", "John"),
    ("Acts", "Acts"), ("Romans", "Rom"), ("1 Corinthians", "1Cor"), ("2 Corinthians", "2Cor"),
    ("Galatians", "Gal"), ("Ephesians", "Eph"), ("Philippians", "Phil"), ("Colossians", "Col"),
    ("1 Thessalonians", "1Thess"), ("2 Thessalonians", "2Thess"), ("1 Timothy", "1Tim"),
    ("2 Timothy", "2Tim"), ("Titus", "Titus"), ("Philemon", "Phlm"), ("Hebrews", "Heb"),
    ("James", "Jas"), ("1 Peter", "1Pet"), ("2 Peter", "2Pet"), ("1 John", "1John"),
    ("2 John", "2John"), ("3 John", "3John"), ("Jude", "Jude"), ("Revelation", "Rev"),
]
OSIS = dict(BOOKS)
KEY = re.compile(r"^(.+) (\d+):(\d+)$")


def fetch_verses(workdir):
    subprocess.run(["npm", "pack", "kjv@1.0.0"], cwd=workdir, check=True, stdout=subprocess.DEVNULL)
    with tarfile.open(Path(workdir) / "kjv-1.0.0.tgz") as tar:
        member = tar.extractfile("package/json/verses-1769.json")
        return json.load(member)


def clean(text):
    text = text.replace("#", " ").replace("[", "").replace("]", "")
    return " ".join(text.split())


def convert(verses, out):
    count = 0
    for key, text in verses.items():
        m = KEY.match(key)
        if not m or m.group(1) not in OSIS:
            raise SystemExit(f"unrecognized verse key {key!r}")
        out.write(f"{OSIS[m.group(1)]}.{int(m.group(2))}.{int(m.group(3))}\t{clean(text)}\n")
        count += 1
    return count


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("output", help="TSV file to write")
    ap.add_argument("--json", help="use an existing verses-1769.json instead of npm")
    args = ap.parse_args()
    if args.json:
        with open(args.json, encoding="utf-8") as f:
            verses = json.load(f)
    else:
        with tempfile.TemporaryDirectory() as tmp:
            verses = fetch_verses(tmp)
    with open(args.output, "w", encoding="utf-8", newline="\n") as out:
        n = convert(verses, out)
    print(f"wrote {n} verses to {args.output}", file=sys.stderr)


if __name__ == "__main__":
    main()
