#!/usr/bin/env python3
"""Independent statistics oracle for the skill library.

Parses .skill files with its own minimal reader and recomputes the
per-application action-primitive table by brute-force path enumeration:
a skill's primitive count is the length of its longest guard-free simple
path from the start node to any terminal, falling back to the longest
path overall when every terminal-reaching path is guarded, and 0 when no
path reaches a terminal.

Usage: stats_oracle.py <library-dir> [out-file]

The output is the canonical stats table; when out-file is given it is
written there byte for byte, otherwise printed to stdout.
"""

import sys
from pathlib import Path


def parse_skill(text, name):
    app = None
    nodes = set()
    start = None
    terminals = set()
    edges = []  # (from, to, guarded)
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("app "):
            app = line[4:].strip()
        elif line.startswith("node "):
            parts = line.split()
            node = parts[1]
            nodes.add(node)
            if "start" in parts[2:]:
                start = node
            if "terminal" in parts[2:]:
                terminals.add(node)
        elif line.startswith("edge "):
            parts = line.split()
            src, arrow, dst = parts[1], parts[2], parts[3]
            if arrow != "->" or parts[4] != "action":
                raise ValueError(f"{name}: unrecognized edge line: {line}")
            rest = line.split(" action ", 1)[1]
            depth = 0
            end = None
            for i, ch in enumerate(rest):
                if ch == "(":
                    depth += 1
                elif ch == ")":
                    depth -= 1
                    if depth == 0:
                        end = i
                        break
            if end is None:
                raise ValueError(f"{name}: unbalanced action in: {line}")
            tail = rest[end + 1:]
            guarded = " guard " in f" {tail} "
            edges.append((src, dst, guarded))
    if app is None or start is None:
        raise ValueError(f"{name}: missing app or start node")
    return app, start, terminals, edges


def longest_path(start, terminals, edges, guard_free_only):
    """Longest simple start-to-terminal path, in edges, or None."""
    adjacency = {}
    for src, dst, guarded in edges:
        if guard_free_only and guarded:
            continue
        adjacency.setdefault(src, []).append(dst)

    best = [None]

    def dfs(node, visited, length):
        if node in terminals:
            if best[0] is None or length > best[0]:
                best[0] = length
        for nxt in adjacency.get(node, []):
            if nxt not in visited:
                visited.add(nxt)
                dfs(nxt, visited, length + 1)
                visited.remove(nxt)

    dfs(start, {start}, 0)
    return best[0]


def primitive_count(start, terminals, edges):
    count = longest_path(start, terminals, edges, True)
    if count is None:
        count = longest_path(start, terminals, edges, False)
    return 0 if count is None else count


def summarize(counts):
    n = len(counts)
    mean = sum(counts) / n
    variance = sum((c - mean) ** 2 for c in counts) / n
    return mean, variance ** 0.5, min(counts), max(counts)


def row(app, skills, meanstd, rng):
    return f"{app:<16}{skills:>6}  {meanstd:<13} {rng}"


def format_table(per_app):
    lines = [row("application", "skills", "primitives", "range")]
    total_counts = []
    for app in sorted(per_app):
        counts = per_app[app]
        total_counts.extend(counts)
        mean, std, lo, hi = summarize(counts)
        lines.append(row(app, len(counts), f"{mean:.2f} ± {std:.2f}",
                         f"[{lo}–{hi}]"))
    if total_counts:
        mean, std, lo, hi = summarize(total_counts)
        lines.append(row("total", len(total_counts),
                         f"{mean:.2f} ± {std:.2f}", f"[{lo}–{hi}]"))
    return "\n".join(lines) + "\n"


def main():
    if len(sys.argv) not in (2, 3):
        sys.exit(__doc__.strip())
    library = Path(sys.argv[1])
    per_app = {}
    for path in sorted(library.glob("*.skill")):
        app, start, terminals, edges = parse_skill(path.read_text(), path.name)
        count = primitive_count(start, terminals, edges)
        per_app.setdefault(app, []).append(count)
    table = format_table(per_app)
    if len(sys.argv) == 3:
        Path(sys.argv[2]).write_text(table)
    else:
        sys.stdout.write(table)


if __name__ == "__main__":
    main()
