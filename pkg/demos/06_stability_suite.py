"""
Randomized stability inequalities
=================================

Run a reduced suite, inspect margins, and write the CSV and JSON reports.
The same run is available as ``cxproj stability-suite``.
"""

import sys
import tempfile

from cxproj.harness import HarnessConfig, run_suite

cfg = HarnessConfig(seed=0, trials=int(sys.argv[1]) if len(sys.argv) > 1 else 10)
report = run_suite(cfg)
for check_id, c in report.summary["checks"].items():
    print(f"{check_id:22s} n={c['count']:4d} min margin {c['min_margin']: .3e} fail={c['fail']}")
print("extrapolation Lipschitz margins by t:", report.summary["extra_lip_2t_trend"])
print("forward Holder slope:", report.summary["forward_holder_trend"]["loglog_slope"])
out = tempfile.mkdtemp()
print("written:", report.write(out))
print("suite passed:", report.passed)
