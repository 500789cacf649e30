"""
Adversaries, verdicts and the command line
==========================================

Every run is checked against the lattice agreement properties, the round and
message bounds, and per-round lemma invariants.  A sweep writes one report per
point and a CSV summary.
"""

# %%
import csv
import json
import tempfile
from pathlib import Path

from blasim import RunConfig, builtin_adversaries, run
from blasim.cli import main

print(builtin_adversaries())

# %%
rep = run(RunConfig.make(10, "logf", t=3, adversary="random_within_safe", seed=4))
for v in rep.verdicts[:8]:
    print(f"{v.name:24s} {v.passed}")
print("...", len(rep.verdicts), "verdicts, all pass:", rep.passed)

# %%
# a replayable witness: the config alone reproduces the report byte for byte
cfg = RunConfig.make(7, "sqrtf", t=2, adversary="inject_fresh", seed=11)
print(run(cfg).to_json() == run(RunConfig.from_json(cfg.to_json())).to_json())

# %%
out = Path(tempfile.mkdtemp())
spec = out / "spec.json"
spec.write_text(json.dumps({"n": [4, 7], "algorithm": ["sqrtf", "logn"], "adversary": "all", "seeds": 2}))
code = main(["sweep", "--quiet", "--spec", str(spec), "--out-dir", str(out / "sweep")])
print("exit code", code)
with open(out / "sweep" / "summary.csv") as fh:
    rows = list(csv.reader(fh))
print(rows[0])
print(rows[1])

# %%
# a configuration that breaks n >= 3f + 1 is a config error
bad = out / "bad.json"
bad.write_text(json.dumps(RunConfig.make(7, "sqrtf").to_dict() | {"f": 3}))
print("exit code", main(["run", "--config", str(bad), "--out", str(out / "bad_report.json")]))
