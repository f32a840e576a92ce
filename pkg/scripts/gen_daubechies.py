"""Regenerate the embedded Daubechies low-pass taps.

Spectral factorisation of the maxflat half-band polynomial, done in
arbitrary precision with mpmath so that db20 keeps full double accuracy.

    python3 scripts/gen_daubechies.py > src/wavepitch/_taps.py
"""
import mpmath as mp

mp.mp.dps = 80


def daubechies_taps(order):
    n = order
    # P(y) = sum_k C(n-1+k, k) y^k, y = (2 - z - 1/z) / 4
    p = [mp.binomial(n - 1 + k, k) for k in range(n)]
    # build z^(n-1) * P(y(z)) as a polynomial in z (ascending powers)
    poly = [mp.mpf(0)] * (2 * n - 1)
    base = [mp.mpf(-1) / 4, mp.mpf(2) / 4, mp.mpf(-1) / 4]  # z^0..z^2 of z*y
    term = [mp.mpf(1)]
    for k in range(n):
        # term = (z*y)^k, multiplied by z^(n-1-k)
        shift = n - 1 - k
        for i, c in enumerate(term):
            poly[i + shift] += p[k] * c
        nxt = [mp.mpf(0)] * (len(term) + 2)
        for i, c in enumerate(term):
            for j, b in enumerate(base):
                nxt[i + j] += c * b
        term = nxt
    if n == 1:
        roots = []
    else:
        roots = mp.polyroots(list(reversed(poly)), maxsteps=500, extraprec=400)
    inside = [r for r in roots if abs(r) < 1]
    # h(z) ~ (1 + z^-1)^n * prod(1 - r z^-1)
    coeffs = [mp.mpc(1)]
    factors = [[1, 1]] * n + [[1, -r] for r in inside]
    for f in factors:
        nxt = [mp.mpc(0)] * (len(coeffs) + 1)
        for i, c in enumerate(coeffs):
            nxt[i] += c * f[0]
            nxt[i + 1] += c * f[1]
        coeffs = nxt
    coeffs = [mp.re(c) for c in coeffs]
    scale = mp.sqrt(2) / sum(coeffs)
    return [c * scale for c in coeffs]


def main():
    print('"""Daubechies low-pass analysis taps, db1..db20 (generated; do not edit)."""')
    print()
    print("DAUBECHIES_TAPS = {")
    for order in range(1, 21):
        taps = daubechies_taps(order)
        print(f"    {order}: (")
        for t in taps:
            print(f"        {mp.nstr(t, 20, min_fixed=-30, max_fixed=30)},")
        print("    ),")
    print("}")


if __name__ == "__main__":
    main()
