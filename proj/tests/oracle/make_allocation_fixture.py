"""Freezes temperature-sampling allocations for the bundled language sizes.

Independently implements temperature scaling (p_l proportional to D_l^(1/tau))
and largest-remainder apportionment with lexicographic tie-breaking, then
writes tests/data/allocation_fixture.json with the allocation of 10,000 units
across the bundled 13-language monolingual token sizes (millions of tokens)
for tau in {1, 2, 30, 80}.

Python floats are IEEE-754 doubles and math.pow calls the platform libm, so
the frozen integers are the exact values a correct double implementation must
produce when it evaluates the same formula with left-to-right accumulation
over keys in sorted order.

Run from anywhere:

    python3 tests/oracle/make_allocation_fixture.py
"""

from __future__ import annotations

import json
import math
import pathlib

# Monolingual corpus sizes in millions of tokens for the bundled languages.
SIZES = {
    "aym": 23.4,
    "bzd": 2.6,
    "cni": 2.2,
    "ctp": 5.4,
    "grn": 37.6,
    "hch": 3.5,
    "nhe": 32.1,
    "ote": 23.6,
    "quy": 45.1,
    "shp": 3.3,
    "tar": 2.3,
    "eng": 9.8,
    "spa": 27.9,
}

TARGET = 10_000
TAUS = [1, 2, 30, 80]


def temperature_distribution(sizes: dict[str, float], tau: float) -> dict[str, float]:
    probs = {}
    norm = 0.0
    for lang in sorted(sizes):
        w = math.pow(sizes[lang], 1.0 / tau)
        probs[lang] = w
        norm += w
    return {lang: w / norm for lang, w in probs.items()}


def allocate(probabilities: dict[str, float], target: int) -> dict[str, int]:
    counts = {}
    remainders = []
    assigned = 0
    for lang in sorted(probabilities):
        exact = probabilities[lang] * float(target)
        base = math.floor(exact)
        counts[lang] = base
        assigned += base
        remainders.append((exact - base, lang))
    remainders.sort(key=lambda item: (-item[0], item[1]))
    for _, lang in remainders[: target - assigned]:
        counts[lang] += 1
    return counts


def main() -> None:
    cases = []
    for tau in TAUS:
        probs = temperature_distribution(SIZES, float(tau))
        counts = allocate(probs, TARGET)
        assert sum(counts.values()) == TARGET
        cases.append(
            {
                "tau": tau,
                "target": TARGET,
                "probabilities": probs,  # shortest-round-trip doubles
                "counts": counts,
            }
        )
        print(f"tau={tau}: {counts}")

    out = pathlib.Path(__file__).resolve().parent.parent / "data" / "allocation_fixture.json"
    out.write_text(json.dumps({"sizes": SIZES, "cases": cases}, indent=1) + "\n")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
