#!/usr/bin/env python3
"""Regenerate include/codeprov/unicode_tables.inc.

Emits codepoint range tables for the character classes the tokenizer's
pre-tokenization scanner needs (\\p{L}, \\p{N}, \\s as matched by the
`regex` module) and the word-character class used by the punctuation
feature (underscore or alphanumeric, matching Python's re \\w).

Run from the repository root:  python3 scripts/gen_unicode_tables.py
"""

import sys

try:
    import regex
except ImportError:
    sys.exit("the 'regex' package is required: pip install regex")

MAX_CP = 0x110000


def ranges_for(pred):
    out = []
    start = None
    for cp in range(MAX_CP):
        if 0xD800 <= cp <= 0xDFFF:  # surrogates are not scalar values
            ok = False
        else:
            ok = pred(chr(cp))
        if ok and start is None:
            start = cp
        elif not ok and start is not None:
            out.append((start, cp - 1))
            start = None
    if start is not None:
        out.append((start, MAX_CP - 1))
    return out


def emit(f, name, ranges):
    f.write(f"inline constexpr CodepointRange {name}[] = {{\n")
    for i in range(0, len(ranges), 4):
        row = ", ".join(f"{{0x{lo:X}, 0x{hi:X}}}" for lo, hi in ranges[i : i + 4])
        f.write(f"    {row},\n")
    f.write("};\n\n")


def main():
    letter = regex.compile(r"\p{L}", regex.UNICODE)
    number = regex.compile(r"\p{N}", regex.UNICODE)
    space = regex.compile(r"\s", regex.UNICODE)

    tables = [
        ("kLetterRanges", ranges_for(lambda c: letter.fullmatch(c) is not None)),
        ("kNumberRanges", ranges_for(lambda c: number.fullmatch(c) is not None)),
        ("kSpaceRanges", ranges_for(lambda c: space.fullmatch(c) is not None)),
        # Python re's \w: underscore or str.isalnum().
        ("kWordRanges", ranges_for(lambda c: c == "_" or c.isalnum())),
    ]

    with open("include/codeprov/unicode_tables.inc", "w") as f:
        f.write("// Generated by scripts/gen_unicode_tables.py -- do not edit.\n")
        f.write("// Codepoint ranges are inclusive and sorted.\n\n")
        for name, ranges in tables:
            emit(f, name, ranges)
    for name, ranges in tables:
        print(f"{name}: {len(ranges)} ranges")


if __name__ == "__main__":
    main()
