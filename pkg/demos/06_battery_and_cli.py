"""The verification battery, from Python and from the command line.

Run: python3 demos/06_battery_and_cli.py
"""
import subprocess
import sys

from fraclap.verification import BatteryConfig, run_battery, summary_table

# %% A small matrix in-process
bc = BatteryConfig(s_values=(0.25, 0.5), gamma_values=(1.0, 4.0), n=128,
                   barrier_refinements=(256, 512), boundary_refinements=(128, 256, 512),
                   convergence_refinements=(128, 256, 512), competitors=50, gradient_points=20)
print(summary_table(run_battery(bc)))

# %% The same tools behind the CLI (diagnostics go to stderr, data to stdout)
cmd = [sys.executable, "-m", "fraclap", "u0", "--s", "0.5", "--gamma", "2", "--n", "16"]
print("\n$", " ".join(cmd[2:]))
print(subprocess.run(cmd, capture_output=True, text=True).stdout)
