"""The complete command-line workflow in one script: simulate a panel, fit
a model, select ranks, forecast ahead, and score held-out predictions.

Run with: python3 demos/command_line.py
"""

import json
import os
import tempfile

from tuckervar.cli import main

workdir = tempfile.mkdtemp(prefix="tuckervar-demo-")
print("working in", workdir)

config = os.path.join(workdir, "config.json")
with open(config, "w") as fh:
    json.dump(
        {
            "scenario": {
                "m": 8,
                "p": 2,
                "ranks": [2, 2, 2],
                "superdiag": [1.5, 1.0],
                "noise_scale": 0.5,
                "length": 300,
            }
        },
        fh,
    )

panel = os.path.join(workdir, "panel.csv")
model = os.path.join(workdir, "model.json")
forecasts = os.path.join(workdir, "forecast.csv")

steps = [
    ["simulate", "--config", config, "--output", panel, "--seed", "7"],
    ["fit", "--input", panel, "--output", model, "--p", "2",
     "--ranks", "auto", "--train-fraction", "0.7", "--c", "2"],
    ["rank-select", "--input", panel, "--p", "2"],
    ["forecast", "--model", model, "--input", panel, "--output", forecasts,
     "--horizon", "5"],
    ["eval", "--model", model, "--input", panel, "--train-fraction", "0.7"],
]

for argv in steps:
    print("\n$ tuckervar " + " ".join(argv))
    code = main(argv)
    print("exit code:", code)

print("\nper-iteration diagnostics live next to the model file:")
with open(model + ".diagnostics.jsonl") as fh:
    for line in list(fh)[:3]:
        print(" ", line.rstrip())
