"""
Splitting receivers' subset families into disjoint blocks
=========================================================

Every auxiliary U_S is indexed by a nonempty subset S of receivers.  For a
group T of receivers decoded in the order pi, the families A(k) of subsets
containing k are split into disjoint blocks, one per receiver in pi.
"""

from bcregion import setfam
from bcregion.setfam import subset as S

K = 3

# subsets are bitmasks; families print in canonical order
print("A(2) restricted to levels 1..2:", setfam.format_family(setfam.a_family(S(2), 1, 2, K), K))
print("B_1 of {1,2,3} at levels 1..2:", setfam.format_family(setfam.b_family(1, S(1, 2, 3), 1, 2), K))

# blocks for T = {1,2,3} decoded as 2, 1, 3
t, pi = S(1, 2, 3), (2, 1, 3)
for i in range(len(pi)):
    print(f"block {i} (receiver {pi[i]}):", setfam.format_family(setfam.b_pi(t, pi, i, K), K))

# the blocks partition the union of A(k) over T, for every ordering and every K up to 5
cases = 0
for k in range(2, 6):
    for t in setfam.power_set(k):
        for pi in setfam.orderings(t):
            assert setfam.verify_decomposition(t, pi, k).ok
            cases += 1
print(f"decomposition verified for {cases} (K, T, pi) cases")
