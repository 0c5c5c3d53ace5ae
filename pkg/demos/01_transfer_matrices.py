"""Transfer matrices, overlaps, fidelities, and the Choi positivity test.

Run:  python demos/01_transfer_matrices.py
"""

import numpy as np

from rbtlab import (
    avg_fidelity,
    choi,
    compose,
    depolarizing,
    min_eig_and_vector,
    overlap,
    superop_from_unitary,
    unital_part,
)
from rbtlab.channels import amplitude_phase_damping
from rbtlab.groups import rotation_unitary

np.set_printoptions(precision=4, suppress=True)

# A channel is a real 4x4 matrix acting on Pauli coefficient vectors
# (I, X, Y, Z).  Unitaries map to orthogonal matrices.
hadamard = rotation_unitary((1.0, 0.0, 1.0), np.pi)
s_had = superop_from_unitary(hadamard)
print("Hadamard transfer matrix (X<->Z, Y->-Y):")
print(s_had)

# Composition is matrix product; the Hadamard squares to the identity.
print("\nH then H:")
print(compose(s_had, s_had))

# Overlaps are Hilbert-Schmidt inner products; a channel against itself
# scores d^2 = 4, and overlap tomography estimates exactly these numbers.
print("\noverlap(H, H) =", overlap(s_had, s_had))
print("overlap(I, H) =", overlap(np.eye(4), s_had))

# Average gate fidelity via the overlap relation F = (a + 2)/6.
lam = 0.98
print("\ndepolarizing(0.98) fidelity to identity:", avg_fidelity(depolarizing(lam), np.eye(2)))

# Decoherence over one 33.3 ns gate at the modeled device's T1/T2:
chan = amplitude_phase_damping(33.3e-9, 5.7e-6, 8.4e-6)
print("coherence-limited gate fidelity:", avg_fidelity(chan, np.eye(2)))
print("non-unital identity column:", chan[:, 0])
print("unital part replaces it:    ", unital_part(chan)[:, 0])

# Physicality: the channel's Choi state must be positive semidefinite.
# The transpose map is the canonical violation, with eigenvalue -1/2.
transpose_map = np.diag([1.0, 1.0, -1.0, 1.0])
value, vector = min_eig_and_vector(choi(transpose_map))
print("\ntranspose-map Choi minimum eigenvalue:", value)
print("witness direction:", vector)
