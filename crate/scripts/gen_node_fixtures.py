#!/usr/bin/env python3
"""Generate the synthetic NoDE-schema fixture corpora under data/node/.

The fixtures reproduce the published structural counts of the 12AngryMen and
DebatePedia corpora (graphs, nodes, edges, support/attack split) with
synthetic argument texts. Every graph is a reply tree: argument 1 is the
opening claim and each later argument answers exactly one earlier one, so
chronological (id) order keeps every reply after its claim.

Output is deterministic; rerun with `python3 scripts/gen_node_fixtures.py`.
"""

import os
import random
from xml.sax.saxutils import escape, quoteattr

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
OUT = os.path.join(ROOT, "data", "node")

SUBJECTS = [
    "the witness", "the defendant", "the evidence", "this policy", "the proposal",
    "the opposing side", "the statistics", "the government", "the average citizen",
    "the study", "the committee", "the switchblade", "the old man downstairs",
    "the timeline", "public opinion", "the market", "the court", "the school board",
]
VERBS = [
    "cannot prove", "strongly suggests", "undermines", "reinforces", "ignores",
    "explains", "contradicts", "depends on", "overstates", "clarifies",
    "shows", "casts doubt on", "supports the view of", "rests on",
]
OBJECTS = [
    "the original claim", "a reasonable doubt", "the cost to taxpayers",
    "the safety of everyone involved", "the long term consequences",
    "what actually happened that night", "the fairness of the process",
    "the reliability of memory", "basic individual rights", "the available data",
    "the motive", "the sound of the train", "the noise from the el",
    "the practical alternatives", "the burden of proof",
]
TAILS = [
    "and nobody has answered that", "which changes everything",
    "as anyone who looks closely can see", "even if we grant the premise",
    "so the conclusion does not follow", "and that matters more than the rest",
    "because the numbers are clear", "despite what was said before",
    "and we should not forget it", "which is exactly the point",
]


def sentence(rng, clauses):
    parts = []
    for i in range(clauses):
        s = f"{rng.choice(SUBJECTS)} {rng.choice(VERBS)} {rng.choice(OBJECTS)}"
        if rng.random() < 0.5:
            s += " " + rng.choice(TAILS)
        parts.append(s)
    text = ", and ".join(parts)
    return text[0].upper() + text[1:] + "."


def reply_tree(rng, n):
    """Parent of each argument 2..n. Arguments 2..4 answer the opening claim
    so every graph has fan-in and several valid dialogue orders."""
    parent = {}
    for i in range(2, n + 1):
        if i <= 4:
            parent[i] = 1
        else:
            r = rng.random()
            if r < 0.35:
                parent[i] = 1
            elif r < 0.6:
                parent[i] = rng.randint(max(1, i - 3), i - 1)
            else:
                parent[i] = rng.randint(1, i - 1)
    return parent


def assign_kinds(rng, children, supports):
    kinds = ["YES"] * supports + ["NO"] * (len(children) - supports)
    rng.shuffle(kinds)
    return dict(zip(children, kinds))


def make_graph(rng, topic, n, supports, texts=None):
    parent = reply_tree(rng, n)
    kinds = assign_kinds(rng, sorted(parent), supports)
    if texts is None:
        texts = {i: sentence(rng, rng.choice([1, 1, 1, 2, 2, 3, 4])) for i in range(1, n + 1)}
    return {
        "topic": topic,
        "texts": texts,
        "edges": [(i, parent[i], kinds[i]) for i in sorted(parent)],
    }


SOBRIETY = {
    "topic": "SobrietyTest",
    "texts": {
        1: "Police should be allowed to set up sobriety checkpoints on public roads.",
        2: "Checkpoints deter people from driving after drinking in the first place.",
        3: "Stopping drivers without any suspicion violates their right to privacy.",
        4: "Being searched without cause is exactly what constitutional protections forbid.",
        5: "Checkpoints catch drunk drivers that patrols would never notice.",
        6: "Most checkpoints make very few arrests compared with roving patrols.",
        7: "Drivers are only briefly delayed, so the inconvenience is minimal.",
        8: "Long queues at busy checkpoints can hold drivers for a considerable time.",
    },
    "edges": [
        (2, 1, "YES"),
        (3, 1, "NO"),
        (4, 3, "YES"),
        (5, 1, "YES"),
        (6, 5, "NO"),
        (7, 1, "YES"),
        (8, 7, "NO"),
    ],
}


def split_supports(rng, edge_counts, total):
    """Support counts per graph summing to `total`, each strictly between
    10% and 90% of the graph's edges and never exactly one half."""
    frac = total / sum(edge_counts)
    counts = [round(e * rng.uniform(frac - 0.2, frac + 0.2)) for e in edge_counts]

    def ok(s, e):
        return 0.1 < s / e < 0.9 and 2 * s != e

    for i, e in enumerate(edge_counts):
        while not ok(counts[i], e):
            counts[i] += 1 if counts[i] / e <= 0.5 else -1
    while sum(counts) != total:
        step = 1 if sum(counts) < total else -1
        i = rng.randrange(len(counts))
        s, e = counts[i] + step, edge_counts[i]
        if ok(s, e):
            counts[i] = s
    return counts


def write_corpus(path, graphs):
    lines = ['<?xml version="1.0" encoding="UTF-8"?>', "<entailment-corpus>"]
    pid = 0
    for g in graphs:
        for t, h, ent in g["edges"]:
            pid += 1
            lines.append(
                f"  <pair id=\"{pid}\" topic={quoteattr(g['topic'])} entailment=\"{ent}\">"
            )
            lines.append(f"    <t id=\"{t}\">{escape(g['texts'][t])}</t>")
            lines.append(f"    <h id=\"{h}\">{escape(g['texts'][h])}</h>")
            lines.append("  </pair>")
    lines.append("</entailment-corpus>")
    with open(path, "w", encoding="utf-8") as f:
        f.write("\n".join(lines) + "\n")


def main():
    os.makedirs(OUT, exist_ok=True)

    rng = random.Random(1957)
    acts = [
        make_graph(rng, "12AngryMen-Act1", 39, 12),
        make_graph(rng, "12AngryMen-Act2", 33, 10),
        make_graph(rng, "12AngryMen-Act3", 11, 3),
    ]
    write_corpus(os.path.join(OUT, "12angrymen.xml"), acts)

    rng = random.Random(2014)
    exemplars = [
        make_graph(rng, "SchoolUniforms", 13, 6),
        make_graph(rng, "ViolentVideoGames", 12, 1),
        make_graph(rng, "OrganicFood", 15, 13),
    ]
    sizes = [5, 6, 7, 8, 9, 10, 10, 11, 12, 13, 14, 15, 16, 17, 18, 20, 21, 22]
    topics = [
        "DeathPenalty", "SmokingBan", "SchoolVouchers", "NuclearPower",
        "MinimumWage", "GunControl", "AnimalTesting", "WindEnergy", "CellPhonesDriving",
        "FlatTax", "GayMarriage", "Abortion", "CollegeFootball", "Vegetarianism",
        "OnlineVoting", "GroundZeroMosque", "PoliceTasers", "ChurchTaxExemption",
    ]
    supports = split_supports(rng, [n - 1 for n in sizes], 116)
    evaluation = [SOBRIETY] + [
        make_graph(rng, t, n, s) for t, n, s in zip(topics, sizes, supports)
    ]
    # Exemplars are interleaved with the evaluation debates rather than listed
    # first, as in a real corpus dump.
    corpus = evaluation[:4] + [exemplars[0]] + evaluation[4:11] + [exemplars[1]] \
        + evaluation[11:] + [exemplars[2]]
    write_corpus(os.path.join(OUT, "debatepedia.xml"), corpus)
    write_corpus(os.path.join(OUT, "sobriety_test.xml"), [SOBRIETY])


if __name__ == "__main__":
    main()
