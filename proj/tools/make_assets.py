#!/usr/bin/env python3
"""Regenerates the shipped data files under data/.

    python3 tools/make_assets.py

Writes data/lexicon.csv, data/maps/scene1.json and data/maps/scene9.json.
The grammar (data/grammar.json) is hand-edited and not produced here.
"""

import json
import math
import os
import random

ROOT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..")
DIM = 32
FUNCTION_DIMS = list(range(25, 32))
# Non-referential nouns ("space", "distance", "robot") share one direction and
# are tagged "generic" so noun extraction skips them.
GENERIC_DIM = 24

# Noun clusters: (base dimension, head word, synonyms). Synonyms sit within
# 12 degrees of the head direction.
NOUN_CLUSTERS = [
    (0, "person", ["people", "persons", "pedestrian", "pedestrians", "human", "humans",
                   "child", "children", "kid", "kids", "man", "men", "woman", "women",
                   "crowd", "someone", "guy", "guys"]),
    (1, "table", ["tables", "desk table"]),
    (2, "chair", ["chairs", "seat", "seats", "stool", "stools"]),
    (3, "bench", ["benches"]),
    (4, "dog", ["dogs", "pet", "pets", "animal", "animals", "cat"]),
    (5, "cart", ["carts", "trolley", "trolleys"]),
    (6, "box", ["boxes", "package", "packages"]),
    (7, "plant", ["plants", "tree", "trees", "flower pot"]),
    (8, "trash can", ["bin", "garbage can"]),
    (9, "bike", ["bikes", "bicycle", "scooter"]),
    (10, "restaurant", ["diner", "canteen", "cafeteria", "eatery"]),
    (11, "cafe", ["coffee shop"]),
    (12, "school", ["classroom", "academy"]),
    (13, "laboratory", ["lab"]),
    (14, "lift", ["elevator"]),
    (15, "information desk", ["reception", "front desk", "help desk"]),
    (16, "hall", ["lobby", "hallway", "main hall"]),
    (17, "thrift shop", ["shop", "store", "secondhand store"]),
    (18, "office building", ["office"]),
    (19, "post office", ["mailroom"]),
    (20, "playground", ["park"]),
    (21, "workstation", ["computer room"]),
    (22, "rest region", ["lounge", "rest area"]),
    (23, "water", ["coffee", "food", "snacks", "bread", "medicine", "stamps", "books",
                   "tea", "milk"]),
    (24, "robot", ["end", "space", "distance", "moment", "way", "thing", "morning", "job",
                  "destination", "time"]),
]

# Partial relations between clusters: (dependent head, related head, cosine).
RELATED = {
    "bench": ("chair", 0.5),
    "cafe": ("restaurant", 0.5),
    "post office": ("office building", 0.4),
    "rest region": ("hall", 0.35),
}

FUNCTION_WORDS = {
    "verb": ["go", "move", "walk", "head", "navigate", "take", "bring", "drive", "buy",
             "want", "find", "reach", "get", "proceed", "keep", "stay", "collide", "watch",
             "avoid", "be", "bump", "run", "hit", "approach", "pass", "know", "think", "see",
             "mean", "hear", "listen", "let", "thank", "wait", "come", "lead", "guide",
             "travel", "return", "visit", "hurry", "mind", "steer", "give", "need",
             "can", "could", "do", "don't", "should", "try", "is", "are", "let's", "excuse",
             "remain", "avoiding", "going", "heading", "hitting", "keeping", "staying"],
    "stop": ["the", "a", "an", "some", "me", "you", "i", "my", "your", "it", "us", "we",
             "this", "that", "what", "no", "one", "more", "lot", "there"],
    "prep": ["to", "from", "with", "in", "near", "at", "by", "behind", "around", "into",
             "for", "of", "on", "toward", "towards", "past", "beside", "across", "through",
             "as", "without", "front"],
    "adv": ["away", "far", "out", "right", "left", "now", "quickly", "soon", "carefully",
            "close", "over", "straight", "back", "not", "just", "again", "next", "here",
            "fast", "where", "too"],
    "adj": ["careful", "good", "ready", "possible", "quick", "clear", "honest"],
    "interj": ["okay", "um", "hmm", "oh", "hey", "hello", "hi", "alright", "sorry", "well",
               "so", "yes", "please", "thanks", "buddy"],
    "conj": ["and", "then", "but", "also", "if", "when", "while"],
}


def unit(v):
    n = math.sqrt(sum(x * x for x in v))
    return [x / n for x in v]


def make_lexicon():
    rng = random.Random(20190501)
    rows = []
    heads = {}
    for dim, head, syns in NOUN_CLUSTERS:
        base = [0.0] * DIM
        base[dim] = 1.0
        heads[head] = base
    for dependent, (related, cosine) in RELATED.items():
        v = [0.0] * DIM
        own = next(d for d, h, _ in NOUN_CLUSTERS if h == dependent)
        rel = next(d for d, h, _ in NOUN_CLUSTERS if h == related)
        v[rel] = cosine
        v[own] = math.sqrt(1.0 - cosine * cosine)
        heads[dependent] = v
    for dim, head, syns in NOUN_CLUSTERS:
        tag = "generic" if dim == GENERIC_DIM else "noun"
        rows.append((head, tag, heads[head]))
        for s in syns:
            theta = math.radians(rng.uniform(2.0, 12.0))
            perturb = [0.0] * DIM
            perturb[rng.choice(FUNCTION_DIMS)] = 1.0
            v = [math.cos(theta) * a + math.sin(theta) * b for a, b in zip(heads[head], perturb)]
            rows.append((s, tag, unit(v)))
    for tag, words in FUNCTION_WORDS.items():
        for w in words:
            v = [0.0] * DIM
            for d in FUNCTION_DIMS:
                v[d] = rng.uniform(-1.0, 1.0)
            rows.append((w, tag, unit(v)))
    seen = set()
    for w, _, _ in rows:
        assert w not in seen, w
        seen.add(w)
    path = os.path.join(ROOT, "data", "lexicon.csv")
    with open(path, "w") as f:
        f.write("# langnav lexicon: word, pos-tag, v1..v%d\n" % DIM)
        f.write("# pos tags: noun generic verb stop prep adv adj interj conj\n")
        for w, tag, v in rows:
            f.write("%s, %s, %s\n" % (w, tag, ", ".join("%.6f" % x for x in v)))
    print("wrote %s (%d words)" % (path, len(rows)))


class Grid:
    def __init__(self, w_m, h_m, res):
        self.res = res
        self.w = int(round(w_m / res))
        self.h = int(round(h_m / res))
        self.cells = [["."] * self.w for _ in range(self.h)]

    def rect(self, x0, y0, x1, y1, ch="#"):
        for cy in range(self.h):
            yc = (cy + 0.5) * self.res
            if not (y0 <= yc <= y1):
                continue
            for cx in range(self.w):
                xc = (cx + 0.5) * self.res
                if x0 <= xc <= x1:
                    self.cells[cy][cx] = ch

    def border(self, t=0.2):
        w_m, h_m = self.w * self.res, self.h * self.res
        self.rect(0, 0, w_m, t)
        self.rect(0, h_m - t, w_m, h_m)
        self.rect(0, 0, t, h_m)
        self.rect(w_m - t, 0, w_m, h_m)

    def at(self, x, y):
        return self.cells[int(y / self.res)][int(x / self.res)]

    def rle_rows(self):
        out = []
        for cy in reversed(range(self.h)):
            row = self.cells[cy]
            parts = []
            i = 0
            while i < len(row):
                j = i
                while j < len(row) and row[j] == row[i]:
                    j += 1
                n = j - i
                parts.append(("%d" % n if n > 1 else "") + row[i])
                i = j
            out.append("".join(parts))
        return out


def write_map(name, grid, start, locations, objects):
    for loc in locations:
        assert grid.at(loc["x"], loc["y"]) == ".", loc
    doc = {
        "schema": "langnav-map/1",
        "name": name,
        "resolution": grid.res,
        "origin": [0.0, 0.0],
        "width": grid.w,
        "height": grid.h,
        "legend": {".": "free", "#": "obstacle", "?": "unknown"},
        "rows": grid.rle_rows(),
        "start": start,
        "locations": locations,
        "objects": objects,
    }
    path = os.path.join(ROOT, "data", "maps", name + ".json")
    with open(path, "w") as f:
        json.dump(doc, f, indent=1)
        f.write("\n")
    print("wrote %s" % path)


def scene1():
    # Indoor floor: open hall in the south, three rooms in the north.
    g = Grid(20.0, 12.0, 0.05)
    g.border()
    g.rect(0, 6.9, 3.0, 7.1)
    g.rect(4.5, 6.9, 9.0, 7.1)
    g.rect(10.5, 6.9, 15.0, 7.1)
    g.rect(16.5, 6.9, 20.0, 7.1)
    g.rect(6.4, 7.0, 6.6, 12.0)
    g.rect(12.9, 7.0, 13.1, 12.0)
    g.rect(18.0, 10.0, 19.8, 11.8, "?")
    locations = [
        {"name": "restaurant", "x": 16.5, "y": 9.5},
        {"name": "information desk", "x": 10.0, "y": 1.2},
        {"name": "laboratory", "x": 3.2, "y": 9.5},
        {"name": "lift", "x": 9.75, "y": 10.5},
        {"name": "hall", "x": 10.0, "y": 4.0},
        {"name": "rest region", "x": 18.2, "y": 2.0},
        {"name": "workstation", "x": 1.5, "y": 5.5},
    ]
    objects = [
        {"id": 1, "label": "person", "x": 8.6, "y": 4.0, "radius": 0.25,
         "motion": {"type": "static"}},
        {"id": 2, "label": "person", "x": 9.6, "y": 4.6, "radius": 0.25,
         "motion": {"type": "static"}},
        {"id": 3, "label": "table", "x": 13.0, "y": 2.0, "radius": 0.4,
         "motion": {"type": "static"}},
    ]
    write_map("scene1", g, {"x": 2.0, "y": 2.0, "heading": 0.0}, locations, objects)


def scene9():
    # Outdoor block: buildings along the north and south edges, open plaza between.
    g = Grid(30.0, 20.0, 0.05)
    g.border()
    g.rect(2.0, 13.0, 8.0, 19.8)     # office building
    g.rect(10.0, 14.0, 15.0, 19.8)   # post office
    g.rect(18.0, 14.0, 26.0, 19.8)   # school
    g.rect(2.0, 0.2, 7.0, 6.0)       # thrift shop
    g.rect(10.0, 0.2, 15.0, 5.0)     # restaurant
    g.rect(20.0, 0.2, 27.0, 5.0)     # cafe
    locations = [
        {"name": "office building", "x": 5.0, "y": 12.0},
        {"name": "post office", "x": 12.5, "y": 13.0},
        {"name": "school", "x": 22.0, "y": 13.0},
        {"name": "thrift shop", "x": 4.5, "y": 7.0},
        {"name": "restaurant", "x": 12.5, "y": 6.0},
        {"name": "cafe", "x": 23.5, "y": 6.0},
        {"name": "playground", "x": 16.0, "y": 10.0},
    ]
    objects = [
        {"id": 1, "label": "table", "x": 19.0, "y": 8.0, "radius": 0.4,
         "motion": {"type": "static"}},
        {"id": 2, "label": "table", "x": 25.5, "y": 9.5, "radius": 0.4,
         "motion": {"type": "static"}},
        {"id": 3, "label": "person", "x": 20.0, "y": 7.2, "radius": 0.25,
         "motion": {"type": "loop", "speed": 0.5,
                    "waypoints": [[20.0, 7.2], [27.5, 7.2], [27.5, 11.0], [20.0, 11.0]]}},
        {"id": 4, "label": "person", "x": 27.5, "y": 11.0, "radius": 0.25,
         "motion": {"type": "loop", "speed": 0.4,
                    "waypoints": [[27.5, 11.0], [20.0, 11.0], [20.0, 7.2], [27.5, 7.2]]}},
        {"id": 5, "label": "chair", "x": 8.5, "y": 7.5, "radius": 0.3,
         "motion": {"type": "static"}},
    ]
    write_map("scene9", g, {"x": 2.0, "y": 10.0, "heading": 0.0}, locations, objects)


if __name__ == "__main__":
    make_lexicon()
    scene1()
    scene9()
