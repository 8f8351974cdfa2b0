# 4x4 tables of the s_a and tau_a matrices, entries without the overall 1/2.
# Rows are listed top to bottom; 1j marks the imaginary unit.

S_TABLES = {
    1: [[0, 1, 0, 0],
        [1, 0, 0, 0],
        [0, 0, 0, -1j],
        [0, 0, 1j, 0]],
    2: [[0, 0, 1, 0],
        [0, 0, 0, 1j],
        [1, 0, 0, 0],
        [0, -1j, 0, 0]],
    3: [[0, 0, 0, 1],
        [0, 0, -1j, 0],
        [0, 1j, 0, 0],
        [1, 0, 0, 0]],
}

TAU_TABLES = {
    1: [[0, -1, 0, 0],
        [-1, 0, 0, 0],
        [0, 0, 0, -1j],
        [0, 0, 1j, 0]],
    2: [[0, 0, -1, 0],
        [0, 0, 0, 1j],
        [-1, 0, 0, 0],
        [0, -1j, 0, 0]],
    3: [[0, 0, 0, -1],
        [0, 0, -1j, 0],
        [0, 1j, 0, 0],
        [-1, 0, 0, 0]],
}

PAULI_TABLES = {
    1: [[0, 1],
        [1, 0]],
    2: [[0, -1j],
        [1j, 0]],
    3: [[1, 0],
        [0, -1]],
}
