"""Integer move ids shared by the orbit backends.

A move id packs the kind and parameters of one elementary triangular
operation into an int so the BFS kernels can record parent edges compactly.
Scaling factors and shear coefficients are stored as least residues.
"""

P_KIND, F_KIND, Q_KIND = 1, 2, 3


def p_move(r, a):
    return (P_KIND << 24) | (r << 16) | a


def f_move(r1, r2):
    return (F_KIND << 24) | (r1 << 16) | r2


def q_move(r0, k0, b):
    return (Q_KIND << 24) | (r0 << 20) | (k0 << 16) | b


def decode_move(mid):
    kind = mid >> 24
    if kind == P_KIND:
        return ("P", (mid >> 16) & 0xFF, mid & 0xFFFF)
    if kind == F_KIND:
        return ("F", (mid >> 16) & 0xFF, mid & 0xFFFF)
    if kind == Q_KIND:
        return ("Q", (mid >> 20) & 0xF, (mid >> 16) & 0xF, mid & 0xFFFF)
    raise ValueError(f"bad move id {mid:#x}")
