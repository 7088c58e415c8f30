"""
Checking the integrability relations
====================================

Run the inverse, Yang-Baxter and braid suites and look at the worst rows.
"""

from msasep.integrability import THRESHOLDS, run_suite

####################################################################
# Each suite returns one row per (relation, sector, point). A handful of
# points keeps this quick; the command line runs fifty.

for name in ("inverse", "ybe", "braid"):
    report = run_suite(name, points=5, p_values=(0.3, 0.7))
    worst = report.worst
    print(f"{name:8s} rows={len(report.rows):5d} max={report.max_deviation:.1e} "
          f"pass={report.passed(THRESHOLDS[name])}")
    print("   worst:", worst.csv())

####################################################################
# The rows are plain CSV, handy for a spreadsheet or a diff between runs.

print(run_suite("inverse", points=1, p_values=(0.5,)).rows[0].csv())
