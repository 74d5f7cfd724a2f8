"""Compare the compiled kernels with the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat N] [--json]

Inputs have realistic sizes: a 10 s utterance at 24 kHz gives 938 frames of
513 cepstral coefficients, and the F0 tracker sees the same number of
2048-sample frames with lags up to 600.
"""
import argparse
import json
import timeit

import numpy as np

from melshift import _fallback

try:
    from melshift import _kernels as compiled
except ImportError:  # extension not built
    compiled = None


def cases(rng):
    cep = rng.standard_normal((938, 513))
    w = np.ones(513)
    w[48:] = 2 ** (-5 / 12)
    frames = rng.standard_normal((938, 2048))
    diff = _fallback.yin_difference(frames, 1024, 601)
    norm = _fallback.cmnd(diff)
    return {
        "shift_frames/nearest": lambda m: m.shift_frames(cep, w, m.NEAREST),
        "shift_frames/linear": lambda m: m.shift_frames(cep, w, m.LINEAR),
        "yin_difference": lambda m: m.yin_difference(frames, 1024, 601),
        "cmnd": lambda m: m.cmnd(diff),
        "pick_lags": lambda m: m.pick_lags(norm, 24, 600, 0.15),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--json", action="store_true", help="print results as JSON")
    args = parser.parse_args()

    backends = {"python": _fallback}
    if compiled is not None:
        backends["cython"] = compiled
    results = {}
    for name, fn in cases(np.random.default_rng(0)).items():
        results[name] = {}
        for backend, module in backends.items():
            times = timeit.repeat(lambda: fn(module), number=1, repeat=args.repeat)
            results[name][backend] = min(times)

    if args.json:
        print(json.dumps(results, indent=2, sort_keys=True))
        return
    print(f"{'kernel':<22}{'python ms':>12}{'cython ms':>12}{'speed-up':>10}")
    for name, row in results.items():
        py = row["python"] * 1e3
        cy = row.get("cython")
        if cy is None:
            print(f"{name:<22}{py:>12.2f}{'n/a':>12}{'':>10}")
        else:
            print(f"{name:<22}{py:>12.2f}{cy * 1e3:>12.2f}{py / (cy * 1e3):>9.1f}x")


if __name__ == "__main__":
    main()
