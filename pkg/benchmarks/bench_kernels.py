"""Benchmark the compiled counting kernels against the pure reference.

Usage: python benchmarks/bench_kernels.py [--repeat N]

Times the four kernel families on desk-scale tables (SL2(F_7) products
and closures, Z/1009 overlap and fiber counting) and prints a table
with the speedup of the compiled backend.
"""

import argparse
import time

import numpy as np

from actcomb.kernels import _purekern

try:
    from actcomb.kernels import _fastkern
except ImportError:
    _fastkern = None

from actcomb.actions import SelfTranslationAction, carrier_sl2


def cyclic_tables(n):
    row = np.arange(n, dtype=np.int32)
    table = (row[:, None] + row[None, :]) % n
    inv = (-row) % n
    return table.astype(np.int32), inv.astype(np.int32)


def sl2_tables():
    action = SelfTranslationAction(carrier_sl2(7))
    model = action.index_model()
    return model.table, model.inv


def timeit(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    rng = np.random.default_rng(7)
    cases = []

    table7, inv7 = sl2_tables()
    n7 = table7.shape[0]
    a7 = np.sort(rng.choice(n7, 80, replace=False)).astype(np.int32)
    b7 = np.sort(rng.choice(n7, 80, replace=False)).astype(np.int32)
    cases.append(("product SL2(F7) 80x80", lambda impl: impl.product_indices(table7, a7, b7)))
    gens7 = a7[:2]
    cases.append(("closure SL2(F7) 2 gens", lambda impl: impl.closure_indices(table7, inv7, gens7, 0, n7)))
    cases.append(("pair-hist SL2(F7) |A|=80", lambda impl: impl.pair_histogram(table7, inv7, a7)))

    tableZ, invZ = cyclic_tables(1009)
    nZ = 1009
    cand = np.sort(rng.choice(nZ, 600, replace=False)).astype(np.int32)
    y = np.sort(rng.choice(nZ, 120, replace=False)).astype(np.int32)
    cases.append(("overlap Z/1009 600x120", lambda impl: impl.overlap_counts(tableZ, cand, y, nZ)))
    cases.append(("fiber-hist Z/1009 600x120", lambda impl: impl.act_histogram(tableZ, cand, y, nZ)))

    print(f"{'case':32} {'pure':>10} {'compiled':>10} {'speedup':>8}")
    for name, fn in cases:
        t_pure = timeit(lambda: fn(_purekern), args.repeat)
        if _fastkern is None:
            print(f"{name:32} {t_pure*1e3:9.2f}ms {'n/a':>10} {'n/a':>8}")
            continue
        got_pure = fn(_purekern)
        got_fast = fn(_fastkern)
        if isinstance(got_pure, tuple):
            assert all(np.array_equal(a, b) for a, b in zip(got_pure, got_fast))
        else:
            assert np.array_equal(got_pure, got_fast)
        t_fast = timeit(lambda: fn(_fastkern), args.repeat)
        print(f"{name:32} {t_pure*1e3:9.2f}ms {t_fast*1e3:9.2f}ms {t_pure/t_fast:7.1f}x")


if __name__ == "__main__":
    main()
