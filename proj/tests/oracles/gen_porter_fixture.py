"""Freeze Porter stems for every distinct lowercase word in a set of text files.

Usage: python3 gen_porter_fixture.py OUT.tsv FILE...
"""
import re
import sys

from nltk.stem.porter import PorterStemmer


def main():
    out, *files = sys.argv[1:]
    words = set()
    for f in files:
        with open(f, encoding="utf-8") as fh:
            words.update(re.findall(r"[a-z]+", fh.read().lower()))
    stemmer = PorterStemmer(mode=PorterStemmer.MARTIN_EXTENSIONS)
    with open(out, "w", encoding="utf-8") as fh:
        for w in sorted(words):
            fh.write(f"{w}\t{stemmer.stem(w, to_lowercase=False)}\n")


if __name__ == "__main__":
    main()
