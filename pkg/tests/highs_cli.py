"""Tiny command-line wrapper around HiGHS used as an external solver in tests.

Usage: python3 highs_cli.py MODEL.mps SOLUTION.txt
"""

import sys

import highspy


def main(mps_path: str, sol_path: str) -> int:
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.readModel(mps_path)
    h.run()
    if h.getModelStatus() != highspy.HighsModelStatus.kOptimal:
        return 3
    lp = h.getLp()
    values = h.getSolution().col_value
    with open(sol_path, "w") as fh:
        fh.write("# column value\n")
        for name, v in zip(lp.col_names_, values):
            fh.write(f"{name} {v!r}\n")
    return 0


if __name__ == "__main__":
    sys.exit(main(*sys.argv[1:3]))
