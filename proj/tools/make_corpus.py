"""Writes data/suggestions.json: parametric stroke templates per category.

Each entry is scaled uniformly so its longer side spans [0, 1] and centred
on the shorter one. Re-running reproduces the file byte for byte.
"""

import json
import math
import pathlib


def arc(cx, cy, rx, ry, t0, t1, n=12):
    return [(cx + rx * math.cos(t0 + (t1 - t0) * k / (n - 1)),
             cy + ry * math.sin(t0 + (t1 - t0) * k / (n - 1))) for k in range(n)]


def line(p, q, n=2):
    return [(p[0] + (q[0] - p[0]) * k / (n - 1), p[1] + (q[1] - p[1]) * k / (n - 1)) for k in range(n)]


def stroke(kind, pts, a=0.6, width=3.0):
    return {"kind": kind, "a": a, "width": width, "points": pts}


def normalize(strokes):
    xs = [p[0] for s in strokes for p in s["points"]]
    ys = [p[1] for s in strokes for p in s["points"]]
    ext = max(max(xs) - min(xs), max(ys) - min(ys))
    ox = min(xs) - (ext - (max(xs) - min(xs))) / 2
    oy = min(ys) - (ext - (max(ys) - min(ys))) / 2
    for s in strokes:
        s["points"] = [[round(min(1.0, max(0.0, (x - ox) / ext)), 6),
                        round(min(1.0, max(0.0, (y - oy) / ext)), 6)] for x, y in s["points"]]
    return strokes


def nose(style, v):
    pi = math.pi
    if style == "human":
        w = 0.3 + 0.1 * v
        return [stroke("ridge", line((0, -1), (0, 0.4), 6), 0.5 + 0.1 * v, 4),
                stroke("valley", arc(-w, 0.5, 0.15, 0.12, -pi / 2, pi / 2 + 0.6), 0.6, 3),
                stroke("valley", arc(w, 0.5, 0.15, 0.12, pi / 2 - 0.6, 3 * pi / 2), 0.6, 3)]
    if style == "pig":
        r = 0.08 + 0.02 * v
        return [stroke("ridge", arc(0, 0, 0.5, 0.35 + 0.05 * v, 0, 2 * pi, 20), 0.7, 4),
                stroke("valley", arc(-0.18, 0, r, r * 1.6, 0, 2 * pi), 0.8, 3),
                stroke("valley", arc(0.18, 0, r, r * 1.6, 0, 2 * pi), 0.8, 3)]
    if style == "cat":
        h = 0.25 + 0.08 * v
        return [stroke("ridge", [(-0.3, 0), (0.3, 0), (0, h), (-0.3, 0)], 0.6, 3),
                stroke("valley", line((0, h), (0, h + 0.25), 3), 0.5, 2),
                stroke("valley", arc(-0.12, h + 0.25, 0.12, 0.08, 0, pi), 0.5, 2),
                stroke("valley", arc(0.12, h + 0.25, 0.12, 0.08, 0, pi), 0.5, 2)]
    r = 0.2 + 0.05 * v
    return [stroke("ridge", arc(0, 0, r, r * (0.8 + 0.1 * v), 0, 2 * pi, 16), 0.9, 5)]


def eye(style, v):
    pi = math.pi
    if style == "round":
        r = 0.3 + 0.05 * v
        return [stroke("valley", arc(0, 0, r, r, 0, 2 * pi, 20), 0.6, 3),
                stroke("ridge", arc(0, 0, r * (0.3 + 0.1 * v), r * (0.3 + 0.1 * v), 0, 2 * pi), 0.5, 2)]
    if style == "almond":
        h = 0.18 + 0.04 * v
        return [stroke("valley", arc(0, 0, 0.6, h, pi, 2 * pi), 0.6, 3),
                stroke("valley", arc(0, 0, 0.6, h * 0.7, 0, pi), 0.5, 3),
                stroke("ridge", arc(0, -h * 1.8, 0.65, 0.15, pi * 1.1, pi * 1.9), 0.4, 4)]
    h = 0.1 + 0.03 * v
    return [stroke("valley", arc(0, 0, 0.6, h, 0, pi), 0.6, 3),
            stroke("ridge", arc(0, -0.05, 0.62, h * 2, pi, 2 * pi), 0.5, 4),
            stroke("valley", arc(0, 0.25, 0.5, 0.08 + 0.02 * v, 0, pi), 0.3, 2)]


def mouth(style, v):
    pi = math.pi
    if style == "smile":
        d = 0.2 + 0.08 * v
        return [stroke("valley", arc(0, -d, 0.8, d + 0.1, 0.2, pi - 0.2, 16), 0.7, 3),
                stroke("ridge", arc(0, 0.3 - d, 0.5, 0.12, 0.3, pi - 0.3), 0.4, 5)]
    if style == "frown":
        d = 0.2 + 0.08 * v
        return [stroke("valley", arc(0, d, 0.8, d + 0.1, pi + 0.2, 2 * pi - 0.2, 16), 0.7, 3)]
    h = 0.2 + 0.06 * v
    return [stroke("valley", arc(0, 0, 0.6, h, 0, 2 * pi, 24), 0.8, 3),
            stroke("ridge", arc(0, -h - 0.1, 0.65, 0.1, pi * 1.15, pi * 1.85), 0.5, 4),
            stroke("ridge", arc(0, h + 0.1, 0.55, 0.1, pi * 0.15, pi * 0.85), 0.5, 4)]


def ear(style, v):
    pi = math.pi
    if style == "human":
        return [stroke("ridge", arc(0, 0, 0.4, 0.7 + 0.05 * v, -pi / 2, pi / 2 + 0.3, 16), 0.6, 4),
                stroke("valley", arc(0.05, 0.05, 0.22, 0.4, -pi / 2, pi / 2, 10), 0.5, 3)]
    if style == "elf":
        t = 0.9 + 0.15 * v
        return [stroke("ridge", [(0, 0.7), (0.35, 0.3), (0.45, -0.2), (0.2 + 0.1 * v, -t)], 0.6, 4),
                stroke("valley", [(0.05, 0.5), (0.22, 0.1), (0.25, -0.4)], 0.5, 3)]
    r = 0.5 + 0.05 * v
    return [stroke("ridge", arc(0, 0, r, r, 0, 2 * pi, 20), 0.6, 4),
            stroke("valley", arc(0, 0, r * 0.55, r * (0.55 + 0.05 * v), 0, 2 * pi), 0.6, 3)]


def wrinkle(style, v):
    pi = math.pi
    if style == "forehead":
        n = 2 + v
        return [stroke("valley", arc(0, 0.2 * k, 0.8, 0.06, pi * 1.1, pi * 1.9, 10), 0.4, 2) for k in range(n)]
    if style == "crow":
        return [stroke("valley", line((0, 0), (0.6 * math.cos(t), 0.6 * math.sin(t)), 3), 0.3, 2)
                for t in [-0.5 - 0.1 * v, 0.0, 0.5 + 0.1 * v]]
    return [stroke("valley", arc(0, 0, 0.3 + 0.05 * v, 0.8, pi * 0.55, pi * 1.05, 12), 0.5, 3)]


def other(style, v):
    pi = math.pi
    if style == "brow":
        return [stroke("ridge", arc(0, 0.2 * v, 0.8, 0.2 + 0.05 * v, pi * 1.1, pi * 1.9, 12), 0.6, 5)]
    if style == "cheek":
        r = 0.4 + 0.1 * v
        return [stroke("ridge", arc(0, 0, r, r * (0.6 + 0.1 * v), pi * 0.1, pi * 1.9, 16), 0.3, 5)]
    return [stroke("ridge", arc(0, 0, 0.3, 0.2 + 0.05 * v, pi, 2 * pi, 10), 0.5, 4),
            stroke("valley", line((0, 0.05), (0, 0.6 + 0.1 * v), 4), 0.5, 3)]


CATEGORIES = {
    "nose": (nose, ["human", "pig", "cat", "button"]),
    "eye": (eye, ["round", "almond", "sleepy"]),
    "mouth": (mouth, ["smile", "frown", "open"]),
    "ear": (ear, ["human", "elf", "round"]),
    "wrinkle": (wrinkle, ["forehead", "crow", "smile_line"]),
    "other": (other, ["brow", "cheek", "chin"]),
}


def main():
    entries = []
    for cat, (make, styles) in CATEGORIES.items():
        for style in styles:
            for v in range(3):
                entries.append({"id": f"{cat}-{style}-{v}", "category": cat, "style": style,
                                "strokes": normalize(make(style, v))})
    out = pathlib.Path(__file__).resolve().parent.parent / "data" / "suggestions.json"
    out.write_text(json.dumps(entries, indent=1) + "\n")
    print(f"{len(entries)} entries -> {out}")


if __name__ == "__main__":
    main()
