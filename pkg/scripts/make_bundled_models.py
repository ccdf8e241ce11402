"""Regenerate the bundled model files in src/bcregion/data."""

from pathlib import Path

import numpy as np

from bcregion import models, setfam

DATA = Path(__file__).resolve().parents[1] / "src" / "bcregion" / "data"
S = setfam.subset


SKEWED8 = np.arange(1, 9) / 36.0


def binary_aux(k):
    return {s: 2 for s in setfam.power_set(k)}


def k2_noiseless():
    """Y1 = Y2 = X, binary; X = U12 xor U1 xor U2; skewed starting pmf."""
    alph = binary_aux(2)
    g = models.aux_index_grid(alph, 2)
    f = g[S(1, 2)] ^ g[S(1)] ^ g[S(2)]
    chan = models.deterministic_channel(2, (2, 2), lambda x: (x, x))
    return models.make_spec(2, alph, SKEWED8, f, 2, (2, 2), chan)


def k2_product():
    """X = (X1, X2) coded as 2 X1 + X2, Y_k = X_k; X1 = U1 xor U12, X2 = U2 xor U12."""
    alph = binary_aux(2)
    g = models.aux_index_grid(alph, 2)
    f = 2 * (g[S(1)] ^ g[S(1, 2)]) + (g[S(2)] ^ g[S(1, 2)])
    chan = models.deterministic_channel(4, (2, 2), lambda x: (x >> 1, x & 1))
    return models.make_spec(2, alph, SKEWED8, f, 4, (2, 2), chan)


def k3_bsbc():
    """Binary symmetric broadcast channel, crossovers 0.05, 0.1, 0.15.

    U123 is a fair bit independent of the rest.  (U12, U13, U23) is uniform
    on {000, 001, 100, 111}, so U12, U13 and U13, U23 are correlated given
    U123.  U1, U2, U3 copy U12, U23, U13.  X = U123 xor U1 xor U2 xor U3.
    """
    alph = binary_aux(3)
    g = models.aux_index_grid(alph, 3)
    pmf = np.zeros(128)
    for top in (0, 1):
        for a, b, c in ((0, 0, 0), (0, 0, 1), (1, 0, 0), (1, 1, 1)):
            cell = ((g[S(1, 2, 3)] == top) & (g[S(1, 2)] == a) & (g[S(1, 3)] == b) & (g[S(2, 3)] == c)
                    & (g[S(1)] == a) & (g[S(2)] == c) & (g[S(3)] == b))
            pmf[cell] = 1 / 8
    f = g[S(1, 2, 3)] ^ g[S(1)] ^ g[S(2)] ^ g[S(3)]
    chan = models.product_channel([models.bsc(0.05), models.bsc(0.1), models.bsc(0.15)])
    return models.make_spec(3, alph, pmf, f, 2, (2, 2, 2), chan)


if __name__ == "__main__":
    DATA.mkdir(parents=True, exist_ok=True)
    for name, build in (("k2_noiseless", k2_noiseless), ("k2_product", k2_product), ("k3_bsbc", k3_bsbc)):
        (DATA / f"{name}.json").write_text(models.dumps(build()))
        print("wrote", name)
