#!/usr/bin/env python3
"""Stand-in for the HiGHS command-line driver, backed by the highspy wheel.

Accepts the subset of flags used by the cdsndp "highs" backend:

    highs_shim.py --model_file M --solution_file S --time_limit T --options_file O

Point the backend at it with CDSNDP_HIGHS="python3 /path/to/highs_shim.py".
"""
import argparse
import sys


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("model", nargs="?")
    ap.add_argument("--model_file")
    ap.add_argument("--solution_file")
    ap.add_argument("--time_limit", type=float)
    ap.add_argument("--options_file")
    ap.add_argument("--version", action="store_true")
    args = ap.parse_args()

    import highspy

    if args.version:
        print("HiGHS (highspy shim)")
        return 0
    model = args.model_file or args.model
    if not model:
        ap.error("no model file")

    h = highspy.Highs()
    if args.options_file:
        h.readOptions(args.options_file)
    if args.time_limit is not None:
        h.setOptionValue("time_limit", args.time_limit)
    if h.readModel(model) == highspy.HighsStatus.kError:
        print(f"cannot read {model}", file=sys.stderr)
        return 1
    h.run()
    if args.solution_file:
        h.writeSolution(args.solution_file, 0)
    return 0


if __name__ == "__main__":
    sys.exit(main())
