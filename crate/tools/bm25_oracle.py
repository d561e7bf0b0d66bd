#!/usr/bin/env python3
"""Straightforward BM25 reference scorer for the toy corpus.

Writes fixtures/golden/bm25_toy_scores.json. The Rust implementation must
match these scores to 1e-9. Tokenization mirrors the library's documented
scheme: lowercase, split on non-alphanumerics, split camel-case words, and
split letter/digit boundaries.
"""

import json
import math
import os

K1 = 1.2
B = 0.75

DOCS = {
    "CalculatorLaunch": "CalculatorLaunch Open the calculator",
    "CalculatorEnterNumber": "CalculatorEnterNumber Enter the number {number} on the calculator",
    "FilesCreateFolder": "FilesCreateFolder Create a folder named {folder_name} in the current directory",
    "EditorSave": "EditorSave Save the document as {file_name}",
    "EdgeOpenHomePage": "EdgeOpenHomePage Open home page in Edge",
}

QUERIES = [
    "open the calculator",
    "create a folder",
    "save document",
    "Open home page in Edge.",
    "number",
    "CalculatorEnterNumber",
]


def split_camel(run):
    parts = []
    start = 0
    for i in range(1, len(run)):
        prev, cur = run[i - 1], run[i]
        boundary = False
        if (prev.islower() or prev.isdigit()) and cur.isupper():
            boundary = True
        elif prev.isupper() and cur.isupper() and i + 1 < len(run) and run[i + 1].islower():
            boundary = True
        elif prev.isalpha() and cur.isdigit():
            boundary = True
        elif prev.isdigit() and cur.isalpha():
            boundary = True
        if boundary:
            parts.append(run[start:i])
            start = i
    parts.append(run[start:])
    return parts


def tokenize(text):
    tokens = []
    run = ""
    for c in text:
        if c.isascii() and c.isalnum():
            run += c
        else:
            if run:
                tokens.extend(p.lower() for p in split_camel(run))
                run = ""
    if run:
        tokens.extend(p.lower() for p in split_camel(run))
    return tokens


def main():
    doc_tokens = {d: tokenize(t) for d, t in DOCS.items()}
    n = len(DOCS)
    avg_len = sum(len(t) for t in doc_tokens.values()) / n

    df = {}
    for tokens in doc_tokens.values():
        for tok in set(tokens):
            df[tok] = df.get(tok, 0) + 1

    results = {}
    for query in QUERIES:
        qtokens = sorted(set(tokenize(query)))
        scored = []
        for doc_id, tokens in doc_tokens.items():
            score = 0.0
            for tok in qtokens:
                tf = tokens.count(tok)
                if tf == 0 or tok not in df:
                    continue
                idf = math.log((n - df[tok] + 0.5) / (df[tok] + 0.5) + 1.0)
                score += idf * (tf * (K1 + 1.0)) / (tf + K1 * (1.0 - B + B * len(tokens) / avg_len))
            if score > 0.0:
                scored.append((doc_id, score))
        scored.sort(key=lambda e: (-e[1], e[0]))
        results[query] = [{"skill": d, "score": s} for d, s in scored]

    out = {
        "corpus": DOCS,
        "k1": K1,
        "b": B,
        "results": results,
    }
    path = os.path.join(os.path.dirname(__file__), "..", "fixtures", "golden", "bm25_toy_scores.json")
    with open(path, "w") as f:
        json.dump(out, f, indent=2, sort_keys=True)
        f.write("\n")
    print(f"wrote {os.path.normpath(path)}")


if __name__ == "__main__":
    main()
