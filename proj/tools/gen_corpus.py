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
"""Regenerates the bundled sample corpus under corpus/.

Each kernel is described by its load/store counts, the multiset of compute
opcodes and the target edge count. Graphs are built deterministically:
compute nodes consume pending values in FIFO order (giving reduction-tree
shapes), extra operands fan out from earlier results, and stores drain
what is left.
"""

import argparse
import pathlib
import random

UNARY = {"ABS", "EXP", "LOG", "SQRT", "SIN", "COS", "SHR", "ITOF", "FTOI", "NOT", "FNEG", "FABS"}

KERNELS = [
    # name, description, loads, stores, {opcode: count}, edges
    ("bil", "Bilateral filter kernel", 6, 1,
     {"FSUB": 3, "FMUL": 5, "EXP": 2, "FDIV": 2, "FADD": 4, "ADD": 1, "ITOF": 1, "FCMP": 1}, 29),
    ("box", "Box filter kernel", 9, 1, {"ADD": 8, "DIV": 1}, 18),
    ("fft", "Radix-4 FFT kernel", 8, 8, {"MUL": 12, "ADD": 12, "SUB": 10, "SHR": 4}, 68),
    ("gar", "Gabor filter kernel", 5, 2,
     {"FMUL": 4, "FADD": 2, "FSUB": 1, "EXP": 1, "COS": 1, "SIN": 1, "MUL": 1, "ADD": 2, "ITOF": 1}, 24),
    ("gb", "Gaussian blur kernel", 8, 4, {"MUL": 2, "ADD": 1, "SHL": 1}, 12),
    ("md", "Molecular dynamics kernel", 9, 3,
     {"FSUB": 9, "FMUL": 14, "FADD": 10, "FDIV": 3, "SQRT": 2, "FCMP": 2, "SELECT": 1, "ADD": 2}, 74),
    ("nb", "N-body kernel", 7, 3, {"FSUB": 3, "FMUL": 7, "FADD": 5, "SQRT": 1, "FDIV": 2, "ADD": 2}, 37),
    ("nms", "Non-maximal suppression kernel", 8, 2,
     {"CMP": 4, "SELECT": 4, "FCMP": 3, "MAX": 3, "AND": 2, "FSUB": 1, "ADD": 2}, 36),
    ("rgb", "RGB to YIQ kernel", 3, 3, {"MUL": 9, "ADD": 6, "SHR": 6}, 30),
    ("roi", "Region-of-interest align kernel", 8, 4,
     {"FMUL": 6, "FADD": 5, "FSUB": 4, "FTOI": 2, "ITOF": 2, "ADD": 5, "SUB": 2, "MUL": 3, "DIV": 2,
      "MIN": 1, "MAX": 1}, 56),
    ("sad", "Sum of absolute differences kernel", 24, 2,
     {"SUB": 12, "ABS": 12, "ADD": 11, "AND": 8, "SHR": 6, "MAX": 5}, 79),
    ("sob", "Sobel filter kernel", 4, 1, {"MUL": 1, "SUB": 2, "ABS": 1}, 8),
]


def build(name, loads, stores, ops, edges, seed):
    rng = random.Random(seed)
    compute = [op for op, n in ops.items() for _ in range(n)]
    rng.shuffle(compute)
    # Binary-capable ops go first in the queue of two-operand slots.
    n_two = edges - stores - len(compute)
    assert 0 <= n_two <= len(compute), name
    order = sorted(range(len(compute)), key=lambda i: (compute[i] in UNARY, rng.random()))
    fanin = [1] * len(compute)
    for i in order[:n_two]:
        fanin[i] = 2

    nodes = [(f"ld{i}", "LOAD") for i in range(loads)]
    edge_list = []
    pending = list(range(loads))
    for i, op in enumerate(compute):
        me = len(nodes)
        nodes.append((f"n{i}", op))
        srcs = []
        while len(srcs) < fanin[i] and pending:
            srcs.append(pending.pop(0))
        candidates = [j for j in range(loads, me) if j not in srcs] or [j for j in range(me) if j not in srcs]
        while len(srcs) < fanin[i]:
            srcs.append(rng.choice(candidates[-6:]))
            candidates = [j for j in candidates if j not in srcs]
        edge_list += [(s, me) for s in srcs]
        pending.append(me)
    pending = [p for p in pending if p >= loads]
    for i in range(stores):
        me = len(nodes)
        nodes.append((f"st{i}", "STORE"))
        src = pending.pop(0) if pending else rng.choice(range(loads, loads + len(compute)))
        edge_list.append((src, me))
    if pending:
        return None
    consumed = {s for s, _ in edge_list}
    if any(i not in consumed for i in range(loads + len(compute))):
        return None
    assert len(edge_list) == edges and len(nodes) == loads + stores + len(compute)
    return nodes, edge_list


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "corpus"))
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, desc, loads, stores, ops, edges in KERNELS:
        seed = 0
        while (g := build(name, loads, stores, ops, edges, seed)) is None:
            seed += 1
        nodes, edge_list = g
        lines = [f"# {desc}: {len(nodes)} nodes, {len(edge_list)} edges", f"dfg {name}"]
        lines += [f"node {n} {op}" for n, op in nodes]
        lines += [f"edge {nodes[s][0]} {nodes[d][0]}" for s, d in edge_list]
        (out / f"{name}.dfg").write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
