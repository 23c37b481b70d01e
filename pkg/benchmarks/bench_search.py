"""Per-slot codebook search: compiled kernel vs numpy fallback.

    python3 benchmarks/bench_search.py --slots 500 --repeats 3

Both backends see the same pre-drawn channels and queue states; the script
also checks that they pick the same triples.
"""
import argparse
import time

import numpy as np

from risemf import _kernels
from risemf.config import ScenarioConfig
from risemf.simulator import RunContext, run


def time_backend(backend, ctx, channels, states, v):
    b, r = ctx.books, ctx.radio
    w = ctx.pixels.weight_array
    picks = []
    t0 = time.perf_counter()
    for ch, (bl, br) in zip(channels, states):
        out = _kernels.search(ch.H_direct, ch.H_ris_ap, ch.H_ue_ris, ch.h_direct_pixel,
                              ch.h_ris_pixel, w, b.ris_phasors, b.precoders, b.combiners,
                              bl, br, v, r.density_factor, r.bandwidth, r.noise_power,
                              r.max_tx_power, backend=backend)
        picks.append(out[:3])
    return time.perf_counter() - t0, picks


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--slots", type=int, default=500)
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--v", type=float, default=1e18)
    ap.add_argument("--run-slots", type=int, default=2000,
                    help="length of the end-to-end run timed per backend (0 skips it)")
    args = ap.parse_args()

    config = ScenarioConfig()
    ctx = RunContext.build(config)
    rng = np.random.default_rng(0)
    channels = [ctx.generator.draw(rng) for _ in range(args.slots)]
    # busy slots: local backlog above remote so every triple is evaluated
    states = [(float(bl), float(bl) * f) for bl, f in
              zip(rng.uniform(1e5, 1e7, args.slots), rng.uniform(0, 0.9, args.slots))]

    backends = ["python"] + (["compiled"] if _kernels.BACKEND == "compiled" else [])
    n_triples = np.prod(ctx.books.sizes)
    best, picks = {}, {}
    for be in backends:
        best[be] = min(time_backend(be, ctx, channels, states, args.v)[0] for _ in range(args.repeats))
        picks[be] = time_backend(be, ctx, channels, states, args.v)[1]
        per_slot = best[be] / args.slots
        print(f"{be:9s} {per_slot * 1e6:8.1f} us/slot  {per_slot / n_triples * 1e9:6.1f} ns/triple")
    if "compiled" in best:
        same = sum(a == b for a, b in zip(picks["python"], picks["compiled"]))
        print(f"speedup   {best['python'] / best['compiled']:.2f}x  "
              f"identical picks {same}/{args.slots}")

    if args.run_slots:
        cfg = config.with_overrides({"run.horizon": args.run_slots, "run.warmup": 0})
        for be in backends:
            t0 = time.perf_counter()
            run(cfg, backend=be)
            dt = time.perf_counter() - t0
            print(f"run {args.run_slots} slots [{be}] {dt:.2f} s")


if __name__ == "__main__":
    main()
