"""Exact Smith normal form for integer matrices.

Everything here is plain Python integers, so there is no overflow and no
floating point anywhere.  The only export most callers need is
``smith_normal_form``, which returns the diagonal ``(d1, d2, ...)`` with
``d1 | d2 | ... `` and ``di >= 0``.  Trailing zeros are kept so the output
always has ``min(rows, cols)`` entries.
"""

from __future__ import annotations

Matrix = list[list[int]]


def _check_rectangular(rows) -> Matrix:
    m = [list(map(int, r)) for r in rows]
    if m and any(len(r) != len(m[0]) for r in m):
        raise ValueError("matrix rows have unequal lengths")
    return m


def smith_normal_form(rows) -> tuple[int, ...]:
    """Diagonal of the Smith normal form of an integer matrix.

    The input is any sequence of equal-length integer rows.  The result is a
    tuple of ``min(#rows, #cols)`` nonnegative integers forming a
    divisibility chain; the product of the first k nonzero entries equals
    (up to sign) the k-th determinantal divisor.

    >>> smith_normal_form([[2, 0], [0, 4]])
    (2, 4)
    >>> smith_normal_form([[2, 2], [3, 3]])
    (1, 0)
    """
    m = _check_rectangular(rows)
    nrows = len(m)
    ncols = len(m[0]) if m else 0
    size = min(nrows, ncols)
    if size == 0:
        return ()

    # Zero rows are common in exponent matrices of commutator relators;
    # dropping them early keeps the elimination loops short.
    m = [r for r in m if any(r)]
    nrows = len(m)

    diag: list[int] = []
    t = 0
    while t < min(nrows, ncols) and t < size:
        # Pick the nonzero entry of least absolute value in the remaining
        # submatrix as pivot.
        pi = pj = -1
        best = 0
        for i in range(t, nrows):
            row = m[i]
            for j in range(t, ncols):
                v = row[j]
                if v and (best == 0 or abs(v) < best):
                    best = abs(v)
                    pi, pj = i, j
                    if best == 1:
                        break
            if best == 1:
                break
        if best == 0:
            break  # remaining block is all zeros
        m[t], m[pi] = m[pi], m[t]
        if pj != t:
            for row in m:
                row[t], row[pj] = row[pj], row[t]

        # Clear column t and row t; a reduction can reintroduce entries, so
        # loop until both are clean.
        while True:
            pivot = m[t][t]
            dirty = False
            for i in range(t + 1, nrows):
                if m[i][t]:
                    q = m[i][t] // pivot
                    if q:
                        m[i] = [a - q * b for a, b in zip(m[i], m[t])]
                    if m[i][t]:
                        m[t], m[i] = m[i], m[t]
                        dirty = True
                        break
            if dirty:
                continue
            for j in range(t + 1, ncols):
                if m[t][j]:
                    q = m[t][j] // pivot
                    if q:
                        for row in m:
                            row[j] -= q * row[t]
                    if m[t][j]:
                        for row in m:
                            row[t], row[j] = row[j], row[t]
                        dirty = True
                        break
            if not dirty:
                break

        # Make the pivot divide everything that is left; otherwise fold the
        # offending row into row t and redo this position.
        pivot = m[t][t]
        offender = None
        for i in range(t + 1, nrows):
            for j in range(t + 1, ncols):
                if m[i][j] % pivot:
                    offender = i
                    break
            if offender is not None:
                break
        if offender is not None:
            m[t] = [a + b for a, b in zip(m[t], m[offender])]
            continue

        diag.append(abs(pivot))
        t += 1

    diag.extend(0 for _ in range(size - len(diag)))
    return tuple(diag)


def rank(rows) -> int:
    """Rank over the rationals, via the Smith normal form."""
    return sum(1 for d in smith_normal_form(rows) if d)


def in_row_lattice(rows, vector) -> bool:
    """Whether ``vector`` lies in the integer span of the given rows.

    Appending a lattice member never changes the invariant factors; appending
    anything else changes the rank or the torsion of the quotient, so it is
    enough to compare the nonzero parts of the two normal forms.
    """
    m = _check_rectangular(rows)
    v = list(map(int, vector))
    if m and len(v) != len(m[0]):
        raise ValueError("vector length does not match matrix width")
    if not any(v):
        return True
    before = tuple(d for d in smith_normal_form(m) if d)
    after = tuple(d for d in smith_normal_form(m + [v]) if d)
    return before == after
