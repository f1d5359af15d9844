#!/usr/bin/env python3
"""Generate data/tie_free.json: small reply-tree debates with explicit base
weights chosen so that no two arguments share an acceptability degree.
Used to check that a reversed gold ranking scores exactly -1.

Output is deterministic; rerun with `python3 scripts/gen_tie_free.py`.
"""

import json
import os
import random

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
OUT = os.path.join(ROOT, "data", "tie_free.json")

WORDS = ("the claim holds because the evidence from several independent sources points "
         "the same way and nobody has offered a better explanation of what happened").split()


def quad(n, edges, theta):
    att = {i: [] for i in range(1, n + 1)}
    sup = {i: [] for i in range(1, n + 1)}
    for s, t, k in edges:
        (att if k == "attack" else sup)[t].append(s)
    sigma = {}
    for a in range(n, 0, -1):  # sources have higher ids than targets
        va = theta[a]
        for b in att[a]:
            va *= 1 - sigma[b]
        prod = 1.0
        for c in sup[a]:
            prod *= 1 - sigma[c]
        vs = theta[a] + (1 - theta[a]) * (1 - prod)
        if att[a] and sup[a]:
            sigma[a] = (va + vs) / 2
        elif att[a]:
            sigma[a] = va
        elif sup[a]:
            sigma[a] = vs
        else:
            sigma[a] = theta[a]
    return sigma


def graph(rng, name, n):
    while True:
        edges = []
        for i in range(2, n + 1):
            parent = 1 if i <= 3 else rng.randint(1, i - 1)
            edges.append((i, parent, rng.choice(["attack", "support"])))
        theta = {i: round(rng.uniform(0.05, 0.95), 3) for i in range(1, n + 1)}
        sigma = sorted(quad(n, edges, theta).values())
        if all(b - a > 1e-4 for a, b in zip(sigma, sigma[1:])):
            break
    args = []
    for i in range(1, n + 1):
        words = rng.sample(WORDS, rng.randint(3, 14))
        args.append({
            "id": i,
            "text": (" ".join(words)).capitalize() + ".",
            "chronological_index": i - 1,
            "base_weight": theta[i],
        })
    rels = [{"source": s, "target": t, "kind": k} for s, t, k in edges]
    return {"name": name, "arguments": args, "relations": rels}


def main():
    rng = random.Random(4242)
    graphs = [graph(rng, f"TieFree{n}", n) for n in (5, 7, 9, 12)]
    with open(OUT, "w", encoding="utf-8") as f:
        json.dump({"format": "quadrank-graphs/1", "graphs": graphs}, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main()
