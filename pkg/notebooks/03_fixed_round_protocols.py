"""
The log-n and log-f protocols
=============================

Both run a fixed schedule: one Gradecast round, then halving iterations.
Log-n splits by id; log-f splits by how many values a group has seen.
"""

# %%
from blasim import RunConfig, run
from blasim.bla_logn import groups_at
from blasim.bla_logf import LabelScheme

for n in (4, 7, 10, 13, 16):
    f = (n - 1) // 3
    ln = run(RunConfig.make(n, "logn", f=f, t=f, adversary="equivocate_split", seed=1))
    lf = run(RunConfig.make(n, "logf", f=f, t=f, adversary="lie_label", seed=1))
    print(f"n={n:2d} f={f}: logn {ln.sub_rounds} sub-rounds, logf {lf.sub_rounds} sub-rounds, "
          f"pass {ln.passed and lf.passed}")

# %%
# the id intervals that split in each log-n iteration
for r in (1, 2, 3):
    print(r, groups_at(7, r))

# %%
# log-f labels: the expected number of values, halving its window each iteration
s = LabelScheme(13, 4)
print("initial label", s.unscale(s.k0))
for r in (2, 3):
    print(r, sorted(s.unscale(k) for k in s.labels_at(r)))

# %%
# all correct with distinct inputs: log-n outputs form a chain rather than one value
rep = run(RunConfig.make(4, "logn"))
print([sorted(t for t, _ in rep.outputs[i]) for i in range(4)])
