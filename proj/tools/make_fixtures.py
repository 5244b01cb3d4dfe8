#!/usr/bin/env python3
"""Generates the case-study defect fixtures in data/case_study.

Totals per iteration (units, FP, hours, defects), the EL3 omission and
incorrect-fact counts, the EL3 detail tags and the systematic-error sizes are
fixed. Everything else (remaining nature split, unit sizes, placement of
defects on units, per-unit inspection hours) is drawn from a seeded generator.
"""

import csv
import random
import sys
from pathlib import Path

ITERATIONS = {
    "EL1": {"units": 8, "fp": 69, "hours": 29, "defects": 69},
    "EL2": {"units": 25, "fp": 292, "hours": 88, "defects": 181},
    "EL3": {"units": 35, "fp": 416, "hours": 77, "defects": 214},
}

NATURES = {
    "EL1": {"ambiguity": 24, "omission": 18, "incorrect fact": 12, "inconsistent information": 9,
            "extraneous information": 6},
    "EL2": {"omission": 70, "incorrect fact": 45, "ambiguity": 30, "inconsistent information": 22,
            "extraneous information": 14},
    "EL3": {"omission": 76, "incorrect fact": 46, "ambiguity": 40, "inconsistent information": 31,
            "extraneous information": 21},
}

# (nature, tag) -> count. Untagged defects get an empty detail_tag.
TAGS = {
    "EL1": {
        ("ambiguity", "Underspecified requirement"): 7,
        ("omission", "Link between use cases"): 5,
        ("omission", "Actor"): 3,
    },
    "EL2": {
        ("omission", "Link to business rules"): 21,
        ("omission", "Business rules"): 7,
        ("omission", "Field of a form"): 4,
        ("incorrect fact", "Linking the wrong business rule"): 7,
        ("incorrect fact", "Wrong understanding (comm. problem)"): 4,
    },
    "EL3": {
        ("omission", "Business rules"): 11,
        ("omission", "Link to business rules"): 10,
        ("omission", "Actor"): 10,
        ("omission", "Details in the prototype"): 10,
        ("omission", "Field of a form"): 7,
        ("omission", "Identification of mandatory fields"): 5,
        ("omission", "Exception flow"): 4,
        ("omission", "Precondition"): 4,
        ("omission", "Message text"): 3,
        ("omission", "Report column"): 2,
        ("incorrect fact", "Wrong understanding (comm. problem)"): 19,
        ("incorrect fact", "Linking the wrong business rule"): 6,
        ("incorrect fact", "Wrong the wrong use case flow"): 6,
        ("incorrect fact", "Prototype is wrong"): 5,
        ("incorrect fact", "Wrong data type"): 4,
        ("incorrect fact", "Wrong actor"): 3,
    },
}

# (error id, iteration, nature, label, tag whose defects form the group)
SYSTEMATIC_ERRORS = [
    ("se-el1-underspec", "EL1", "ambiguity", "Underspecifying Reqs.", "Underspecified requirement"),
    ("se-el1-uc-links", "EL1", "omission", "Omitting links to between use cases", "Link between use cases"),
    ("se-el2-br-links", "EL2", "omission", "Omitting links to Business Rules", "Link to business rules"),
    ("se-el2-br-details", "EL2", "omission", "Omitting details of Business Rules", "Business rules"),
    ("se-el2-br-wrong", "EL2", "incorrect fact", "Linking Business Rules incorrectly", "Linking the wrong business rule"),
    ("se-el3-br-details", "EL3", "omission", "Omitting details of Business Rules", "Business rules"),
    ("se-el3-br-links", "EL3", "omission", "Omitting links to Business Rules", "Link to business rules"),
    ("se-el3-comm", "EL3", "incorrect fact", "Incorrect facts due to comm. prob.", "Wrong understanding (comm. problem)"),
    ("se-el3-br-wrong", "EL3", "incorrect fact", "Linking Business Rules incorrectly", "Linking the wrong business rule"),
]


def split_total(rng, total, parts, low, fixed=()):
    """Random positive integers >= low summing to total; `fixed` values come first."""
    sizes = list(fixed)
    rest = parts - len(sizes)
    remaining = total - sum(sizes)
    cuts = sorted(rng.sample(range(1, remaining - rest * (low - 1)), rest - 1))
    edges = [0] + cuts + [remaining - rest * (low - 1)]
    sizes += [edges[i + 1] - edges[i] + low - 1 for i in range(rest)]
    return sizes


def place_defects(rng, sizes, total, hot):
    """Defect count per unit, roughly proportional to size with a few hot units."""
    weights = [s * (2.6 if i in hot else 1.0) for i, s in enumerate(sizes)]
    counts = [0] * len(sizes)
    for _ in range(total):
        counts[rng.choices(range(len(sizes)), weights=weights)[0]] += 1
    return counts


def split_hours(rng, sizes, total):
    """Per-unit inspection hours in tenths, roughly proportional to size, summing to total."""
    tenths = total * 10
    raw = [s * rng.uniform(0.7, 1.3) for s in sizes]
    share = [max(1, int(tenths * r / sum(raw))) for r in raw]
    share[share.index(max(share))] += tenths - sum(share)
    return [f"{t / 10:g}" for t in share]


def main(out_dir):
    rng = random.Random(2012)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    units_rows, hours_rows, defect_rows, group_rows = [], [], [], []

    for it, info in ITERATIONS.items():
        fixed = (9, 16, 25) if it == "EL3" else ()
        sizes = split_total(rng, info["fp"], info["units"], 3, fixed)
        unit_ids = [f"UC{i + 1:02d}" for i in range(info["units"])]
        order = list(range(info["units"]))
        rng.shuffle(order)
        sizes = [sizes[i] for i in order]
        hot = set(rng.sample(range(info["units"]), max(1, info["units"] // 8)))
        counts = place_defects(rng, sizes, info["defects"], hot)
        hours = split_hours(rng, sizes, info["hours"])
        for u, s, h in zip(unit_ids, sizes, hours):
            units_rows.append([it, u, s, h])
        hours_rows.append([it, info["hours"]])

        slots = [u for u, c in zip(unit_ids, counts) for _ in range(c)]
        natures = [n for n, c in NATURES[it].items() for _ in range(c)]
        assert len(slots) == len(natures) == info["defects"]
        rng.shuffle(natures)
        tag_pool = {}
        for (nature, tag), c in TAGS[it].items():
            tag_pool.setdefault(nature, []).extend([tag] * c)
        for nature, pool in tag_pool.items():
            pool += [""] * (NATURES[it][nature] - len(pool))
            rng.shuffle(pool)
        for i, (unit, nature) in enumerate(zip(slots, natures)):
            tag = tag_pool[nature].pop() if nature in tag_pool else ""
            did = f"{it}-{i + 1:03d}"
            what = tag.lower() if tag else nature
            defect_rows.append([did, it, unit, nature, tag, f"{unit}: {what}"])

    for eid, it, nature, label, tag in SYSTEMATIC_ERRORS:
        members = [r[0] for r in defect_rows if r[1] == it and r[3] == nature and r[4] == tag]
        for m in members:
            group_rows.append([eid, it, nature, label, m])

    def write(name, header, rows):
        with open(out / name, "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)

    write("defects.csv", ["id", "iteration", "unit", "nature", "detail_tag", "description"], defect_rows)
    write("units.csv", ["iteration", "unit", "size_fp", "hours"], units_rows)
    write("hours.csv", ["iteration", "hours"], hours_rows)
    write("systematic_errors.csv", ["error", "iteration", "nature", "label", "defect"], group_rows)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "data" / "case_study")
