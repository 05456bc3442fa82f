"""Exact sparse linear algebra over QQ.

Matrices are passed around as dictionary-of-keys maps {(row, col): value} together with a shape,
and reduced with sympy's DomainMatrix. Vectors are sparse dicts {index: value}.
"""


from sympy.polys.domains import QQ
from sympy.polys.matrices import DomainMatrix


__all__ = ['rref', 'rank', 'nullspace', 'Solver']


def _matrix(dok, shape):
    return DomainMatrix.from_dok({k: QQ.convert(v) for k, v in dok.items() if v}, shape, QQ)


def rref(dok, shape):
    """Reduced row echelon form.

    Returns:
        tuple: (entries, pivots) where entries is the RREF as a dok dict and pivots the list of
        pivot columns, one per nonzero row.
    """
    nrows, ncols = shape
    if nrows == 0 or ncols == 0:
        return {}, []
    reduced, pivots = _matrix(dok, shape).rref()
    return reduced.to_dok(), list(pivots)


def rank(dok, shape):
    return len(rref(dok, shape)[1])


def nullspace(dok, shape):
    """Basis of the right null space, one vector per free column.

    The vector belonging to free column f has entry 1 at f, zero at every other free column, and
    its remaining support on pivot columns left of f.
    """
    nrows, ncols = shape
    entries, pivots = rref(dok, shape)
    pivot_set = set(pivots)
    basis = []
    for free in range(ncols):
        if free in pivot_set:
            continue
        vec = {free: QQ(1)}
        for row, col in enumerate(pivots):
            val = entries.get((row, free))
            if val:
                vec[col] = -val
        basis.append(vec)
    return basis


class Solver:
    """Solves M F = g for many right-hand sides g with one elimination.

    The augmented matrix [M | I] is row reduced once. The identity block then holds a transform E
    with E M = RREF(M). Rows of E below the rank of M span the left null space of M, so their
    products with g are the obstruction coordinates of g; for consistent g the particular
    solution sets every free column to zero and reads pivot values off E g.
    """

    def __init__(self, dok, shape):
        nrows, ncols = shape
        self.shape = shape
        augmented = dict(dok)
        for i in range(nrows):
            augmented[(i, ncols + i)] = QQ(1)
        entries, pivots = rref(augmented, (nrows, ncols + nrows))
        self.pivots = [p for p in pivots if p < ncols]
        self.rank = len(self.pivots)
        transform = [dict() for _ in range(nrows)]
        for (i, j), val in entries.items():
            if j >= ncols:
                transform[i][j - ncols] = val
        self.transform = transform
        self.cokernel = transform[self.rank:]
        # RREF of M itself, needed for the kernel
        self.reduced = {(i, j): val for (i, j), val in entries.items() if j < ncols}

    @staticmethod
    def _dot(row, vec):
        total = QQ(0)
        for k, val in row.items():
            other = vec.get(k)
            if other:
                total += val * other
        return total

    def obstruction(self, g):
        """Cokernel coordinates of g; all zero exactly when g lies in the image."""
        return [self._dot(row, g) for row in self.cokernel]

    def particular(self, g):
        """Particular solution of M F = g with free columns zero (g assumed consistent)."""
        sol = {}
        for i, col in enumerate(self.pivots):
            val = self._dot(self.transform[i], g)
            if val:
                sol[col] = val
        return sol

    def kernel(self):
        nrows, ncols = self.shape
        pivot_set = set(self.pivots)
        basis = []
        for free in range(ncols):
            if free in pivot_set:
                continue
            vec = {free: QQ(1)}
            for row, col in enumerate(self.pivots):
                val = self.reduced.get((row, free))
                if val:
                    vec[col] = -val
            basis.append(vec)
        return basis
