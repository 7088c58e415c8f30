"""
Sweeping time from the command line
===================================

``msasep sweep`` writes one CSV row per state and time; ``msasep plot``
redraws the species marginals from that file.
"""

import subprocess
import sys
import tempfile
from pathlib import Path

out = Path(tempfile.mkdtemp())

####################################################################
# Three times for two particles; the window is calibrated per time.

subprocess.run([sys.executable, "-m", "msasep", "sweep", "--p", "0.7", "--y", "0,1",
                "--nu", "12", "--t-list", "0.5,1,2", "--out", str(out / "sweep.csv")],
               check=True)
print((out / "sweep.csv").read_text().splitlines()[:4])

####################################################################
# The SVG is deterministic, so it can be committed and diffed.

subprocess.run([sys.executable, "-m", "msasep", "plot", str(out / "sweep.csv"),
                str(out / "marginals.svg")], check=True)
print((out / "marginals.svg").stat().st_size, "bytes")
