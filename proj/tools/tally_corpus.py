#!/usr/bin/env python3
# Copyright 2026 The cgra-layout-explorer Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Per-group opcode tally over a DFG directory, independent of the C++ code.

Prints V/E per file and the per-group maximum over files. With --expect,
exits non-zero unless the maxima match the given Group=count list.
"""

import argparse
import collections
import pathlib
import sys

GROUPS = ["Arith", "Div", "FP", "Mem", "Mult", "Other"]


def read_table(path):
    table = {}
    for line in pathlib.Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].split()
        if line:
            table[line[0]] = line[1]
    return table


def tally(path, table):
    counts = collections.Counter()
    nodes = edges = 0
    for line in path.read_text().splitlines():
        words = line.split("#", 1)[0].split()
        if not words:
            continue
        if words[0] == "node":
            nodes += 1
            counts[table[words[2]]] += 1
        elif words[0] == "edge":
            edges += 1
    return nodes, edges, counts


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("dfg_dir")
    ap.add_argument("--opcodes", default=str(pathlib.Path(__file__).parent.parent / "config" / "opcodes.txt"))
    ap.add_argument("--expect", help="e.g. Arith=54,Div=3,...")
    args = ap.parse_args()

    table = read_table(args.opcodes)
    maxima = dict.fromkeys(GROUPS, 0)
    for f in sorted(pathlib.Path(args.dfg_dir).glob("*.dfg")):
        v, e, counts = tally(f, table)
        print(f"{f.stem} V={v} E={e} " + " ".join(f"{g}={counts[g]}" for g in GROUPS))
        for g in GROUPS:
            maxima[g] = max(maxima[g], counts[g])
    line = ",".join(f"{g}={maxima[g]}" for g in GROUPS)
    print("max " + line)
    if args.expect is not None and args.expect != line:
        print(f"mismatch: expected {args.expect}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
