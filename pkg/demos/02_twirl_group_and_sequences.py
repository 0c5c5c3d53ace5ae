"""The twelve-element twirling group, its tables, and sequence compilation.

Run:  python demos/02_twirl_group_and_sequences.py
"""

import numpy as np

from rbtlab import a4_elements, a4_table, clifford24_elements, frame_potential
from rbtlab.sequences import exhaustive_set, make_sequence, unit_cell

np.set_printoptions(precision=4, suppress=True)

els = a4_elements()
table = a4_table()

# Twelve rotations: identity, three half turns, eight third turns about the
# cube's body diagonals.  Their transfer matrices are signed permutations,
# so group composition is exact integer arithmetic.
print("element 5 transfer matrix (third turn about (1,1,1)):")
print(els[4].superop)
print("5 * 5 =", table.multiply(5, 5), " inverse(5) =", table.inverse(5))

# A unitary 2-design has frame potential exactly 2; so does the full
# 24-element Clifford group.
print("\nframe potential, 12-element group: ", frame_potential(els))
print("frame potential, 24-element group: ", frame_potential(clifford24_elements()))

# One overlap experiment iterates a four-slot unit cell: randomizer, target,
# inverse overlap gate, inverse randomizer (chronological order; None marks
# the target slot).
print("\nunit cell for randomizer 2, overlap 3:", unit_cell(2, 3))

# Adjacent gates fold through the table into single gates, leaving the
# compiled alternating form.  Twelve gates per slot, so a length-3
# experiment has 12^3 = 1,728 distinct sequences.
seq = make_sequence((2, 7, 11), basis_index=3)
print("compiled gates for randomizers (2, 7, 11):", seq.compiled)

full = exhaustive_set(3)
print("\nexhaustive overlap experiment:")
print("  counts by length:", {k: v for k, v in sorted(full.counts_by_length().items(), key=str)})
print("  distinct sequences:", full.distinct_count())
print("  total runs (with repeats):", len(full))
