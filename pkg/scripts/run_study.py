#!/usr/bin/env python3
"""Variable-selection study at several sample sizes.

Writes one frequency table per sample size and prints the balanced accuracy
of every method-criterion pair. The default run is small enough for a laptop;
raise --reps for tighter numbers.

    python scripts/run_study.py --reps 50 --n 50,100,200 --methods cavi,lasso
"""

import argparse
import json
import time
from pathlib import Path

from mixlasso import formats
from mixlasso.simulation import METHODS, StudyConfig, run_study


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--reps", type=int, default=20)
    ap.add_argument("--n", default="50,100,200", help="comma-separated sample sizes")
    ap.add_argument("--methods", default="cavi,lasso", help=f"subset of {','.join(METHODS)}")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--outdir", default="study_out")
    args = ap.parse_args(argv)

    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    sizes = [int(s) for s in args.n.split(",")]
    summary = {}
    for n in sizes:
        cfg = StudyConfig(n_replications=args.reps, n_obs=n, methods=tuple(args.methods.split(",")),
                          seed=args.seed, n_jobs=args.jobs)
        start = time.perf_counter()
        report = run_study(cfg)
        elapsed = time.perf_counter() - start
        echo = {"reps": args.reps, "n": n, "methods": list(cfg.methods), "seed": args.seed}
        formats.write_study_csv(out / f"frequencies_n{n}.csv", report, echo)
        summary[n] = {c: report.bai(c) if report.masks[c].shape[0] else None for c in report.combos}
        fails = {c: len(v) for c, v in report.failures.items() if v}
        print(f"n={n}: {elapsed:.1f}s" + (f", failures {fails}" if fails else ""))

    combos = list(next(iter(summary.values())))
    print("\nbalanced accuracy index")
    print(f"{'n':>6} " + " ".join(f"{c:>10}" for c in combos))
    for n, row in summary.items():
        print(f"{n:>6} " + " ".join(f"{'-' if row[c] is None else format(row[c], '.3f'):>10}" for c in combos))
    (out / "bai_by_n.json").write_text(json.dumps({str(k): v for k, v in summary.items()}, indent=2))


if __name__ == "__main__":
    main()
