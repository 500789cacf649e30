"""
Early stopping in the sqrt-f protocol
=====================================

Outer rounds shrink with the number of processes that actually misbehave,
not with the resilience bound.
"""

# %%
from blasim import RunConfig, builtin_adversaries, run

n = 16
f = (n - 1) // 3
for t in range(f + 1):
    rows = [run(RunConfig.make(n, "sqrtf", f=f, t=t, adversary=adv, seed=s))
            for adv in builtin_adversaries() for s in range(3)]
    worst = max(r.outer_rounds for r in rows)
    print(f"t={t}: worst outer rounds {worst}, all pass {all(r.passed for r in rows)}")

# %%
# every correct process decides; decisions land within a couple of rounds of each other
rep = run(RunConfig.make(n, "sqrtf", f=f, t=f, adversary="terrible", seed=7))
print("decision rounds:", rep.decision_rounds)
print("sub-rounds:", rep.sub_rounds, "envelopes:", rep.envelopes)

# %%
# outputs of correct processes form a chain
outs = sorted({rep.outputs[i] for i in rep.outputs if rep.outputs[i] is not None}, key=len)
print([len(y) for y in outs])
print(all(x <= y for x, y in zip(outs, outs[1:])))
