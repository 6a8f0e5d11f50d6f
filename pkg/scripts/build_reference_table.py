"""Regenerate src/pcelabs/data/reference_energies.json.

Levels for N <= 28 come from exhaustive enumeration.  Larger sizes get
the best known optimum; for odd sizes within reach of skew-symmetric
enumeration the script checks that a skew-symmetric sequence attains
the tabled value.
"""

import json
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from pcelabs.baselines import exact_solve
from pcelabs.bench import KNOWN_OPTIMA
from pcelabs.labs_core import expand_skew_symmetric, sidelobe_energy

ENUM_MAX = 28
SKEW_CHECK = (41, 43, 45)


def best_skew_energy(n: int) -> int:
    half = (n + 1) // 2
    best = None
    chunk = 1 << 16
    for start in range(0, 1 << half, chunk):
        codes = np.arange(start, min(start + chunk, 1 << half), dtype=np.uint64)
        bits = (codes[:, None] >> np.arange(half, dtype=np.uint64)) & 1
        halves = 1 - 2 * bits.astype(np.int8)
        for row in halves:
            energy = sidelobe_energy(expand_skew_symmetric(row))
            if best is None or energy < best:
                best = energy
    return int(best)


def main() -> None:
    table = {}
    for n in range(3, ENUM_MAX + 1):
        t0 = time.time()
        result = exact_solve(n)
        table[n] = {"levels": result.level_energies, "source": "enumeration"}
        print(f"N={n}: levels={result.level_energies} ({time.time() - t0:.1f}s)", flush=True)
        assert result.level_energies[0] == KNOWN_OPTIMA[n], n
    for n in sorted(KNOWN_OPTIMA):
        if n <= ENUM_MAX:
            continue
        entry = {"levels": [KNOWN_OPTIMA[n]], "source": "table"}
        if n in SKEW_CHECK:
            t0 = time.time()
            skew = best_skew_energy(n)
            print(f"N={n}: skew best={skew} table={KNOWN_OPTIMA[n]} ({time.time() - t0:.1f}s)", flush=True)
            if skew == KNOWN_OPTIMA[n]:
                entry["source"] = "table+skew-check"
        table[n] = entry
    out = Path(__file__).resolve().parents[1] / "src/pcelabs/data/reference_energies.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps({str(k): v for k, v in sorted(table.items())}, indent=1) + "\n")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
