"""Regenerates the frozen test fixtures with mpmath (50 digits).

    python3 tests/fixtures/generate.py

Outputs are committed; the C++ tests only read them.
"""

import csv
import os

import mpmath as mp

mp.mp.dps = 50
HERE = os.path.dirname(os.path.abspath(__file__))
MASK = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def airy_grid():
    pts = []
    for r in (0.0, 0.5, 1.0, 2.0, 3.5, 5.0, 7.0, 10.0, 15.0, 20.0, 30.0):
        for deg in (0, 30, 60, 90, 120, 150, 175):
            if r == 0.0 and deg:
                continue
            w = mp.mpf(r) * mp.expjpi(mp.mpf(deg) / 180)
            pts.append(w)
    # real negative axis between zeros
    for x in (-1.0, -3.0, -6.5, -12.25, -25.0):
        pts.append(mp.mpc(x, 0))
    return pts


def write_airy():
    with open(os.path.join(HERE, "airy_values.csv"), "w", newline="") as f:
        out = csv.writer(f)
        out.writerow(["w_re", "w_im", "ai_re", "ai_im", "aip_re", "aip_im"])
        for w in airy_grid():
            a = mp.airyai(w)
            d = mp.airyai(w, derivative=1)
            out.writerow([mp.nstr(v, 20) for v in (w.real, w.imag, a.real, a.imag, d.real, d.imag)])


def write_zeros():
    with open(os.path.join(HERE, "airy_zeros.csv"), "w", newline="") as f:
        out = csv.writer(f)
        out.writerow(["index", "zero"])
        for k in list(range(1, 31)) + [100, 1000]:
            out.writerow([k, mp.nstr(mp.airyaizero(k), 20)])


def mix64(x):
    x ^= x >> 30
    x = (x * 0xBF58476D1CE4E5B9) & MASK
    x ^= x >> 27
    x = (x * 0x94D049BB133111EB) & MASK
    x ^= x >> 31
    return x


def fnv1a64(s):
    h = 0xCBF29CE484222325
    for c in s.encode():
        h ^= c
        h = (h * 0x100000001B3) & MASK
    return h


def derive(seed, replica, purpose):
    k = mix64(seed ^ 0x6A09E667F3BCC909)
    k = mix64((k + (replica + 1) * GOLDEN) & MASK)
    return mix64(k ^ fnv1a64(purpose))


def write_rng():
    key = derive(42, 0, "noise")
    with open(os.path.join(HERE, "rng_golden.csv"), "w", newline="") as f:
        out = csv.writer(f)
        out.writerow(["counter", "u64", "normal"])
        for i in range(10):
            x = mix64((key + (i + 1) * GOLDEN) & MASK)
            u = (mp.mpf(x >> 11) + mp.mpf("0.5")) / mp.mpf(2) ** 53
            z = mp.sqrt(2) * mp.erfinv(2 * u - 1)
            out.writerow([i, x, mp.nstr(z, 20)])


def write_scaling():
    # Closed-form edge constants, evaluated directly from the formulas.
    rows = []
    n = m = mp.mpf(100)
    sp = mp.sqrt(m) + mp.sqrt(n)
    rows.append({
        "kind": "laguerre", "n": 100, "m": 100,
        "E": sp**2,
        "zeta": sp ** (mp.mpf(2) / 3) / (2 * (m * n) ** (mp.mpf(1) / 3)),
        "chi": sp ** (mp.mpf(4) / 3) / (m * n) ** (mp.mpf(1) / 6),
        "shift": mp.sqrt(n) / sp,
    })
    n, p, q = mp.mpf(50), mp.mpf(100), mp.mpf(100)
    M = p + q
    E = ((mp.sqrt(p * (M - n)) + mp.sqrt(q * n)) / M) ** 2
    pq = p * q * (M - n)
    rows.append({
        "kind": "jacobi", "n": 50, "p": 100, "q": 100,
        "E": E,
        "zeta": mp.cbrt(E * (1 - E)) / (2 * mp.cbrt(pq)) * n ** (-mp.mpf(1) / 3),
        "chi": (E * (1 - E)) ** (mp.mpf(2) / 3) * pq ** (-mp.mpf(1) / 6) * n ** (-mp.mpf(1) / 6),
        "shift": (M * E - 2 * n * E + n - p) / (2 * E * (1 - E)),
        "E_closed": (2 + mp.sqrt(3)) / 4,
    })
    import json
    out = [{k: (float(v) if isinstance(v, mp.mpf) else v) for k, v in r.items()} for r in rows]
    with open(os.path.join(HERE, "scaling.json"), "w") as f:
        json.dump(out, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    write_airy()
    write_zeros()
    write_rng()
    write_scaling()
