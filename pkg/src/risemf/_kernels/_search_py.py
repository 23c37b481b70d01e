"""Vectorised numpy implementation of the per-slot codebook search."""
import math

import numpy as np

LN2 = math.log(2.0)


def triple_gains(Hd, Hra, Hur, hdp, hrp, weights, phasors, Wu, Wa):
    """Gains of every (precoder, combiner, RIS) triple.

    Returns ``eff[u, a, r] = |w_a^H H_r w_u|^2`` and
    ``pix[u, r] = sum_p weight_p |h_{p,r} w_u|^2``. The RIS-independent
    factors are formed once, so each profile is a single contraction over
    the RIS elements.
    """
    B = Hur @ Wu.T                                   # k, u
    A = Wa.conj() @ Hra                              # a, k
    X = Wa.conj() @ Hd @ Wu.T                        # a, u
    Y = A[:, None, :] * B.T[None, :, :]              # a, u, k
    Z = X[:, :, None] + Y @ phasors.T                # a, u, r
    D = hdp @ Wu.T                                   # p, u
    P = hrp[:, None, :] * B.T[None, :, :]            # p, u, k
    Q = D[:, :, None] + P @ phasors.T                # p, u, r
    eff = (Z.real**2 + Z.imag**2).transpose(1, 0, 2)
    pix = np.einsum("p,pur->ur", weights, Q.real**2 + Q.imag**2)
    return eff, pix


def closed_form_power(bl, br, v, dfac, pix, eff, bw, noise, pmax):
    """Per-triple minimiser of the slot objective over [0, pmax] (array version)."""
    pix, eff = np.broadcast_arrays(pix, eff)
    if bl <= br:
        return np.zeros(eff.shape)
    c = v * dfac * pix
    with np.errstate(divide="ignore", invalid="ignore"):
        interior = bw * (bl - br) / (LN2 * c) - noise / eff
    p = np.where(c > 0, np.clip(interior, 0.0, pmax), pmax)
    return np.where(eff > 0, p, 0.0)


def objective(bl, br, v, dfac, pix, eff, power, bw, noise):
    rate = bw * np.log1p(eff * power / noise) / LN2
    return v * dfac * pix * power + (br - bl) * rate


def search(Hd, Hra, Hur, hdp, hrp, weights, phasors, Wu, Wa,
           bl, br, v, dfac, bw, noise, pmax):
    """Best triple and power; ties go to the lowest (u, a, r) index.

    Returns ``(u, a, r, power, objective, effective_gain, pixel_gain)``.
    """
    if bl <= br:
        eff, pix = triple_gains(Hd, Hra, Hur, hdp, hrp, weights, phasors[:1], Wu[:1], Wa[:1])
        return 0, 0, 0, 0.0, 0.0, float(eff[0, 0, 0]), float(pix[0, 0])
    eff, pix = triple_gains(Hd, Hra, Hur, hdp, hrp, weights, phasors, Wu, Wa)
    pix = pix[:, None, :]
    power = closed_form_power(bl, br, v, dfac, pix, eff, bw, noise, pmax)
    obj = np.where(power > 0, objective(bl, br, v, dfac, pix, eff, power, bw, noise), 0.0)
    k = int(np.argmin(obj))
    u, a, r = np.unravel_index(k, obj.shape)
    return (int(u), int(a), int(r), float(power[u, a, r]), float(obj[u, a, r]),
            float(eff[u, a, r]), float(pix[u, 0, r]))
