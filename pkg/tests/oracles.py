"""Independent reference computations used as test oracles."""
from collections import deque
import math

import numpy as np

LN2 = math.log(2.0)


def power_objective(p, bl, br, v, c, eff, bw, noise):
    """V c P + (B_r - B_l) W log2(1 + eff P / noise); ``c`` already includes 4 pi / lambda^2."""
    return v * c * p + (br - bl) * bw * np.log1p(eff * p / noise) / LN2


def grid_min_power(bl, br, v, c, eff, bw, noise, pmax, step=1e-7, coarse=1000):
    """Minimum over the lattice {k * step} in [0, pmax] of the power objective.

    The objective is convex in P, so the lattice minimum lies within one coarse
    cell of the coarse-grid minimiser; the fine pass scans that window at
    ``step``. Works elementwise on arrays of instances.
    """
    bl, br, v, c, eff = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (bl, br, v, c, eff)))
    n_fine = int(round(pmax / step))
    stride = max(n_fine // coarse, 1)
    ks = np.arange(0, n_fine + 1, stride)
    f = power_objective(ks[:, None] * step, bl.ravel(), br.ravel(), v.ravel(), c.ravel(),
                        eff.ravel(), bw, noise)
    i = np.argmin(f, axis=0)
    lo = np.maximum(ks[np.maximum(i - 1, 0)], 0)
    offs = np.arange(0, 2 * stride + 1)
    kk = np.minimum(lo[None, :] + offs[:, None], n_fine)
    pp = kk * step
    ff = power_objective(pp, bl.ravel(), br.ravel(), v.ravel(), c.ravel(), eff.ravel(), bw, noise)
    j = np.argmin(ff, axis=0)
    cols = np.arange(ff.shape[1])
    shape = bl.shape
    return pp[j, cols].reshape(shape), ff[j, cols].reshape(shape)


def refined_min_power(bl, br, v, c, eff, bw, noise, pmax, step=1e-7, iterations=80):
    """Continuous minimiser: the lattice bracket of :func:`grid_min_power`, then golden section.

    The endpoints 0 and ``pmax`` are compared explicitly so clamped optima
    are reported exactly.
    """
    pg, _ = grid_min_power(bl, br, v, c, eff, bw, noise, pmax, step)
    bl, br, v, c, eff = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (bl, br, v, c, eff)))
    f = lambda p: power_objective(p, bl, br, v, c, eff, bw, noise)
    a = np.maximum(pg - step, 0.0)
    b = np.minimum(pg + step, pmax)
    g = (math.sqrt(5) - 1) / 2
    x1, x2 = b - g * (b - a), a + g * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(iterations):
        left = f1 <= f2
        b = np.where(left, x2, b)
        a = np.where(left, a, x1)
        x1n = np.where(left, b - g * (b - a), x2)
        x2n = np.where(left, x1, a + g * (b - a))
        x1, x2 = x1n, x2n
        f1, f2 = f(x1), f(x2)
    cands = np.stack([np.zeros_like(a), np.full_like(a, pmax), (a + b) / 2, pg])
    vals = f(cands)
    j = np.argmin(vals, axis=0)
    pick = np.take_along_axis(cands, j[None], 0)[0]
    return pick, np.take_along_axis(vals, j[None], 0)[0]


def enumerate_slot(ch, books, bl, br, v, radio, weights):
    """Brute-force minimiser over every (precoder, combiner, RIS) triple.

    Rebuilds each composite channel with an explicit diagonal matrix and
    minimises power numerically (lattice bracket plus golden section). Returns ``(u, a, r, power, objective)``
    with ties going to the first triple in (u, a, r) order.
    """
    n_u, n_a, n_r = books.sizes
    dfac = 4 * math.pi / radio.wavelength**2
    eff = np.empty((n_u, n_a, n_r))
    pix = np.empty((n_u, n_r))
    for r in range(n_r):
        theta = np.diag(np.exp(1j * books.ris_phases[r]))
        H = ch.H_direct + ch.H_ris_ap @ theta @ ch.H_ue_ris
        G = ch.h_direct_pixel + ch.h_ris_pixel @ theta @ ch.H_ue_ris
        for u in range(n_u):
            wu = books.precoders[u]
            Hw = H @ wu
            pix[u, r] = sum(weights[p] * abs(np.sum(G[p] * wu)) ** 2 for p in range(len(weights)))
            for a in range(n_a):
                eff[u, a, r] = abs(np.vdot(books.combiners[a], Hw)) ** 2
    c = dfac * np.broadcast_to(pix[:, None, :], eff.shape)
    power, obj = refined_min_power(bl, br, v, c, eff, radio.bandwidth, radio.noise_power,
                                   radio.max_tx_power)
    k = int(np.argmin(obj))
    u, a, r = np.unravel_index(k, obj.shape)
    return int(u), int(a), int(r), float(power[u, a, r]), float(obj[u, a, r])


def fifo_sojourns(trace, first_arrival_slot=0):
    """Per-bit FIFO bookkeeping over a simulator trace.

    Bits arriving in slot t join the local buffer at the end of slot t, move
    to the remote buffer at the end of the slot that transmits them, and leave
    during the slot that processes them. A bit processed in slot s after
    arriving in slot t is counted in the backlog of slots t+1..s, so its
    sojourn is s - t slots. Returns ``(mean sojourn in slots over departed bits
    that arrived at or after first_arrival_slot, max backlog mismatch)``.
    """
    local, remote = deque(), deque()

    def pop(q, amount):
        out = []
        while amount > 1e-9 and q:
            t0, bits = q[0]
            take = min(bits, amount)
            out.append((t0, take))
            amount -= take
            if bits - take > 1e-9:
                q[0] = (t0, bits - take)
            else:
                q.popleft()
        return out

    weighted, total, mismatch = 0.0, 0.0, 0.0
    T = len(trace["arrivals"])
    for t in range(T):
        held_l = sum(b for _, b in local)
        held_r = sum(b for _, b in remote)
        mismatch = max(mismatch, abs(held_l - trace["local_bits"][t]), abs(held_r - trace["remote_bits"][t]))
        for t0, bits in pop(remote, trace["processed"][t]):
            if t0 >= first_arrival_slot:
                weighted += (t - t0) * bits
                total += bits
        remote.extend(pop(local, trace["transmitted"][t]))
        if trace["arrivals"][t] > 0:
            local.append((t, trace["arrivals"][t]))
    return weighted / total, mismatch
