#!/usr/bin/env python3
"""Regenerates the scene fixtures under tests/fixtures/.

Scenes are laid out by hand. Most cameras sit on a ring around the room centre
and look at it; the kitchen camera pans from the middle of the room instead.
Output is deterministic, so re-running leaves git clean.

    python3 tools/make_fixture_pack.py [--root tests/fixtures]
"""
import argparse
import json
import math
from pathlib import Path

WIDTH, HEIGHT = 640, 480
FX = FY = 480.0


def look_at(eye, target):
    f = [t - e for t, e in zip(target, eye)]
    n = math.sqrt(sum(c * c for c in f))
    f = [c / n for c in f]
    up = (0.0, 0.0, 1.0)
    r = [f[1] * up[2] - f[2] * up[1], f[2] * up[0] - f[0] * up[2], f[0] * up[1] - f[1] * up[0]]
    n = math.sqrt(sum(c * c for c in r))
    r = [c / n for c in r]
    d = [f[1] * r[2] - f[2] * r[1], f[2] * r[0] - f[0] * r[2], f[0] * r[1] - f[1] * r[0]]
    rot = r + d + f
    t = [-sum(row[i] * eye[i] for i in range(3)) for row in (r, d, f)]
    return [round(v, 12) for v in rot], [round(v, 12) for v in t]


def ring_views(center, radius, count, height=1.6, frame_step=10, phase=0.0):
    views = []
    for k in range(count):
        a = phase + 2.0 * math.pi * k / count
        eye = (center[0] + radius * math.cos(a), center[1] + radius * math.sin(a), height)
        rot, t = look_at(eye, (center[0], center[1], 0.6))
        views.append({
            "id": f"v{k:02d}",
            "frame_index": k * frame_step,
            "rotation": rot,
            "translation": t,
            "fx": FX, "fy": FY, "cx": WIDTH / 2, "cy": HEIGHT / 2,
            "width": WIDTH, "height": HEIGHT,
        })
    return views


def pan_views(eye, count, start_deg, step_deg, frame_step=10):
    # Camera stays put and turns, so objects enter the video one by one.
    views = []
    for k in range(count):
        a = math.radians(start_deg + step_deg * k)
        target = (eye[0] + math.cos(a), eye[1] + math.sin(a), eye[2] - 0.35)
        rot, t = look_at(eye, target)
        views.append({
            "id": f"p{k:02d}",
            "frame_index": k * frame_step,
            "rotation": rot,
            "translation": t,
            "fx": FX, "fy": FY, "cx": WIDTH / 2, "cy": HEIGHT / 2,
            "width": WIDTH, "height": HEIGHT,
        })
    return views


def box(oid, category, center, size):
    lo = [round(c - s / 2, 6) for c, s in zip(center, size)]
    hi = [round(c + s / 2, 6) for c, s in zip(center, size)]
    return {"id": oid, "category": category, "centroid": [round(c, 6) for c in center],
            "aabb_min": lo, "aabb_max": hi}


def living_room():
    objs = [
        box("o00", "sofa", (1.0, 3.6, 0.45), (2.0, 0.9, 0.9)),
        box("o01", "table", (2.6, 2.4, 0.375), (1.2, 0.8, 0.75)),
        box("o02", "chair", (1.6, 1.2, 0.45), (0.5, 0.5, 0.9)),
        box("o03", "chair", (3.6, 1.2, 0.45), (0.5, 0.5, 0.9)),
        box("o04", "chair", (4.4, 3.2, 0.45), (0.5, 0.5, 0.9)),
        box("o05", "tv", (4.6, 0.4, 1.1), (1.2, 0.1, 0.7)),
        box("o06", "lamp", (0.4, 0.5, 0.8), (0.3, 0.3, 1.6)),
        box("o07", "plant", (5.2, 4.2, 0.5), (0.4, 0.4, 1.0)),
        box("o08", "bookshelf", (2.8, 4.6, 1.0), (1.4, 0.35, 2.0)),
        box("o09", "wall", (3.0, 5.0, 1.3), (6.0, 0.1, 2.6)),
        box("o10", "cup", (2.5, 2.3, 0.8), (0.08, 0.08, 0.1)),
    ]
    return {"scene_id": "living_room", "objects": objs,
            "views": ring_views((3.0, 2.5), 4.2, 12),
            "floor_extent": {"min_xy": [0.0, 0.0], "max_xy": [6.0, 5.0]}}


def bedroom():
    objs = [
        box("b00", "bed", (2.0, 3.0, 0.3), (1.6, 2.0, 0.6)),
        box("b01", "nightstand", (0.8, 3.8, 0.3), (0.45, 0.4, 0.6)),
        box("b02", "wardrobe", (4.3, 3.9, 1.0), (1.2, 0.6, 2.0)),
        box("b03", "desk", (4.1, 0.8, 0.375), (1.2, 0.6, 0.75)),
        box("b04", "monitor", (4.1, 0.7, 1.0), (0.6, 0.15, 0.45)),
        box("b05", "chair", (3.8, 1.5, 0.45), (0.5, 0.5, 0.9)),
        box("b06", "rug", (2.2, 1.2, 0.01), (1.6, 1.0, 0.02)),
        box("b07", "mirror", (0.2, 1.6, 1.2), (0.05, 0.6, 1.0)),
        box("b08", "backpack", (1.0, 0.6, 0.25), (0.35, 0.25, 0.5)),
    ]
    return {"scene_id": "bedroom", "objects": objs,
            "views": ring_views((2.5, 2.25), 3.8, 10, phase=0.3)}


def kitchen():
    objs = [
        box("k00", "refrigerator", (0.5, 3.3, 0.9), (0.8, 0.7, 1.8)),
        box("k01", "stove", (2.0, 3.5, 0.45), (0.7, 0.6, 0.9)),
        box("k02", "sink", (3.4, 3.5, 0.45), (0.9, 0.6, 0.9)),
        box("k03", "table", (2.4, 1.4, 0.375), (1.4, 0.9, 0.75)),
        box("k04", "stool", (1.3, 1.3, 0.35), (0.4, 0.4, 0.7)),
        box("k05", "trash can", (4.3, 0.5, 0.3), (0.35, 0.35, 0.6)),
        box("k06", "microwave", (3.0, 3.6, 1.1), (0.5, 0.4, 0.3)),
        box("k07", "floor", (2.4, 2.0, 0.0), (4.8, 4.0, 0.0)),
    ]
    return {"scene_id": "kitchen", "objects": objs,
            "views": pan_views((2.4, 2.0, 1.5), 16, -90.0, 22.5),
            "floor_extent": {"min_xy": [0.0, 0.0], "max_xy": [4.8, 4.0]}}


def adversarial(idx):
    # Everything sits on or near a ring around the room centre: distances tie,
    # directions hug the axes, and several categories repeat.
    cx, cy = 3.0, 3.0
    objs = []
    cats = ["chair", "chair", "box", "box", "crate", "stool", "stool", "bin",
            "crate", "bin", "pillow", "pillow"]
    for k, cat in enumerate(cats):
        a = 2.0 * math.pi * k / len(cats) + 0.01 * idx
        r = 1.5 + 0.01 * (k % 2)
        objs.append(box(f"a{k:02d}", cat, (cx + r * math.cos(a), cy + r * math.sin(a), 0.25),
                        (0.3, 0.3, 0.5)))
    objs.append(box("a12", "mug", (cx, cy, 0.05), (0.06, 0.06, 0.1)))
    objs.append(box("a13", "ceiling", (cx, cy, 2.8), (6.0, 6.0, 0.02)))
    return {"scene_id": f"adversarial_{idx}", "objects": objs,
            "views": ring_views((cx, cy), 3.2, 8, phase=0.05 * idx)}


def write(path, doc):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--root", default=str(Path(__file__).resolve().parent.parent / "tests" / "fixtures"))
    root = Path(ap.parse_args().root)
    for scene in (living_room(), bedroom(), kitchen()):
        write(root / "scenes" / f"{scene['scene_id']}.json", scene)
    for i in range(3):
        scene = adversarial(i)
        write(root / "adversarial" / f"{scene['scene_id']}.json", scene)


if __name__ == "__main__":
    main()
