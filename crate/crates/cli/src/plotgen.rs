//! Emits a self-contained matplotlib script alongside the experiment CSVs.

use std::fs;
use std::path::Path;

use anyhow::Result;

/// Writes `plot_regret.py` next to `results.csv`. The script reproduces the
/// figure layout of the experiments: mean relative average regret versus
/// horizon, one line per swept parameter value, 95% error bars.
pub fn write_plot_script(path: &Path, experiment: &str) -> Result<()> {
    let script = format!(
        r#"#!/usr/bin/env python3
"""Plot mean relative average regret vs horizon for experiment {experiment}.

Reads results.csv from the directory this script lives in and writes
regret_vs_T.png next to it. Only needs the Python stdlib and matplotlib.
"""
import csv
import math
import os
import sys
from collections import defaultdict

HERE = os.path.dirname(os.path.abspath(__file__))
RESULTS = sys.argv[1] if len(sys.argv) > 1 else os.path.join(HERE, "results.csv")

groups = defaultdict(list)  # (param, T) -> [rel_regret_pct]
with open(RESULTS, newline="") as fh:
    for row in csv.DictReader(fh):
        key = (float(row["param"]), int(row["T"]))
        groups[key].append(float(row["rel_regret_pct"]))

params = sorted({{p for (p, _) in groups}})
horizons = sorted({{t for (_, t) in groups}})

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

fig, ax = plt.subplots(figsize=(6, 4))
for p in params:
    xs, ys, es = [], [], []
    for t in horizons:
        vals = groups.get((p, t))
        if not vals:
            continue
        mean = sum(vals) / len(vals)
        if len(vals) > 1:
            var = sum((v - mean) ** 2 for v in vals) / (len(vals) - 1)
            err = 1.96 * math.sqrt(var / len(vals))
        else:
            err = 0.0
        xs.append(t)
        ys.append(mean)
        es.append(err)
    label = "param={{:g}}".format(p) if len(params) > 1 else "{experiment}"
    ax.errorbar(xs, ys, yerr=es, marker="o", capsize=3, label=label)

ax.set_xlabel("horizon T")
ax.set_ylabel("relative average regret (%)")
ax.set_title({title:?})
ax.legend()
ax.grid(True, alpha=0.3)
fig.tight_layout()
out = os.path.join(HERE, "regret_vs_T.png")
fig.savefig(out, dpi=150)
print("wrote", out)
"#,
        experiment = experiment,
        title = experiment,
    );
    fs::write(path, script)?;
    Ok(())
}
