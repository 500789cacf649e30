"""
Lattice values and one Gradecast instance
=========================================

Values are sets of (origin, nonce) tags ordered by inclusion.  Gradecast
lets a leader send one value; every receiver ends with a value and a score
in {0, 1, 2}.
"""

# %%
from blasim.gradecast import GradecastFilter, GradecastRound
from blasim.lattice import element, generated_by_enumeration, join, leq, member_of_generated

a, b, c = element((0, 0)), element((1, 0)), element((2, 0))
print("a | b =", sorted(join(a, b)), " a <= a|b:", leq(a, join(a, b)))

# %%
# membership in the lattice generated by a safe set, checked against brute force
gens = [a, b]
print(sorted(map(sorted, generated_by_enumeration(gens))))
print("a|b generated:", member_of_generated(gens, a | b), " a|c generated:", member_of_generated(gens, a | c))

# %%
# four processes, all correct, process 0 leads; the same tuple goes to everyone
n, f = 4, 1
procs = [GradecastRound(i, n, f, GradecastFilter(accept_all=True)) for i in range(n)]
leader_out = tuple(procs[0].start(a))
echoes = [tuple(p.on_leader({0: leader_out})) for p in procs]
confirms = [tuple(p.on_echo(dict(enumerate(echoes)))) for p in procs]
grades = [p.on_confirm(dict(enumerate(confirms)))[0] for p in procs]
for i, g in enumerate(grades):
    print(f"process {i}: value={sorted(g.value)} score={g.score}")

# %%
# a filter that does not admit the value: nobody echoes it, so every score is 0
procs = [GradecastRound(i, n, f, GradecastFilter(safe_generators=frozenset({b}))) for i in range(n)]
echoes = [tuple(p.on_leader({0: leader_out})) for p in procs]
confirms = [tuple(p.on_echo(dict(enumerate(echoes)))) for p in procs]
print([p.on_confirm(dict(enumerate(confirms)))[0].score for p in procs])
