"""Smith normal form over the integers.

Two entry points: :func:`invariant_factors` for homology of (possibly large,
sparse) boundary matrices, and :func:`smith_with_columns` which also returns
the column transform, used to read off abelianization images of words.
"""

from __future__ import annotations


def _sparse_unit_reduce(rows, ncols):
    """Eliminate unit pivots from a sparse integer matrix.

    ``rows`` is a list of {col: value} dicts and is consumed.  Returns the
    number of unit pivots removed and the residual rows (dense-able).
    """
    rows = [dict(r) for r in rows if r]
    cols = {}
    for i, r in enumerate(rows):
        for j in r:
            cols.setdefault(j, set()).add(i)
    alive = set(range(len(rows)))
    units = 0
    changed = True
    while changed:
        changed = False
        cand = []
        for i in alive:
            r = rows[i]
            for j, a in r.items():
                if a == 1 or a == -1:
                    cand.append((len(r) * len(cols[j]), i, j))
                    break
        cand.sort()
        used_rows, used_cols = set(), set()
        for _, i, j in cand:
            if i not in alive or i in used_rows or j in used_cols:
                continue
            r = rows[i]
            if r.get(j) not in (1, -1):
                continue
            a = r[j]
            touched = [k for k in cols[j] if k != i]
            for k in touched:
                rk = rows[k]
                c = rk[j] * a  # rk -= c * r, since a*a == 1
                for jj, v in r.items():
                    nv = rk.get(jj, 0) - c * v
                    if nv:
                        if jj not in rk:
                            cols[jj].add(k)
                        rk[jj] = nv
                    elif jj in rk:
                        del rk[jj]
                        cols[jj].discard(k)
            for jj in r:
                cols[jj].discard(i)
            alive.discard(i)
            used_rows.update(touched)
            used_rows.add(i)
            used_cols.update(r)
            units += 1
            changed = True
        alive = {i for i in alive if rows[i]}
    return units, [rows[i] for i in sorted(alive)]


def _dense_diagonal(M):
    """Invariant factors of a small dense integer matrix (list of lists)."""
    M = [list(r) for r in M]
    out = []
    while M and M[0]:
        nz = [(abs(v), i, j) for i, r in enumerate(M) for j, v in enumerate(r) if v]
        if not nz:
            break
        _, pi, pj = min(nz)
        M[0], M[pi] = M[pi], M[0]
        for r in M:
            r[0], r[pj] = r[pj], r[0]
        while True:
            p = M[0][0]
            done = True
            for i in range(1, len(M)):
                q = M[i][0] // p
                if q:
                    M[i] = [x - q * y for x, y in zip(M[i], M[0])]
                if M[i][0]:
                    done = False
            for j in range(1, len(M[0])):
                q = M[0][j] // p
                if q:
                    for r in M:
                        r[j] -= q * r[0]
                if M[0][j]:
                    done = False
            if done:
                bad = next(
                    ((i, j) for i in range(1, len(M)) for j in range(1, len(M[0])) if M[i][j] % p),
                    None,
                )
                if bad is None:
                    break
                M[0] = [x + y for x, y in zip(M[0], M[bad[0]])]
                continue
            nz = [(abs(M[i][0]), i, 0) for i in range(len(M)) if M[i][0]]
            nz += [(abs(M[0][j]), 0, j) for j in range(len(M[0])) if M[0][j]]
            _, pi, pj = min(nz)
            if pi:
                M[0], M[pi] = M[pi], M[0]
            if pj:
                for r in M:
                    r[0], r[pj] = r[pj], r[0]
        out.append(abs(M[0][0]))
        M = [r[1:] for r in M[1:]]
    return out


def invariant_factors(matrix):
    """Nonzero invariant factors d1 | d2 | ... of an integer matrix.

    Accepts a numpy array or nested lists.  Unit pivots are stripped with a
    sparse elimination first, so boundary matrices of large complexes stay
    cheap; the small residue goes through the dense algorithm.
    """
    rows = [{j: int(v) for j, v in enumerate(r) if v} for r in matrix]
    ncols = len(matrix[0]) if len(matrix) else 0
    units, rest = _sparse_unit_reduce(rows, ncols)
    if rest:
        used = sorted({j for r in rest for j in r})
        idx = {j: k for k, j in enumerate(used)}
        dense = [[0] * len(used) for _ in rest]
        for i, r in enumerate(rest):
            for j, v in r.items():
                dense[i][idx[j]] = v
        tail = _dense_diagonal(dense)
    else:
        tail = []
    return sorted([1] * units + tail, key=lambda d: (d != 1, d))


def rank(matrix):
    return len(invariant_factors(matrix))


def smith_with_columns(M, ncols):
    """Diagonalize ``M`` (list of integer rows of width ``ncols``).

    Returns ``(diag, V)`` with ``U M V = D`` for some unimodular ``U``;
    ``diag`` lists the nonzero diagonal entries (positive, in order) and
    ``V`` is the ``ncols x ncols`` unimodular column transform.  A row
    vector ``x`` lies in the row space of ``M`` iff ``(x V)_i`` is divisible
    by ``diag[i]`` for ``i < len(diag)`` and zero beyond.
    """
    A = [list(map(int, r)) for r in M if any(r)]
    V = [[int(i == j) for j in range(ncols)] for i in range(ncols)]

    def col_swap(a, b):
        for r in A:
            r[a], r[b] = r[b], r[a]
        for r in V:
            r[a], r[b] = r[b], r[a]

    def col_addmul(dst, src, q):  # col dst -= q * col src
        for r in A:
            r[dst] -= q * r[src]
        for r in V:
            r[dst] -= q * r[src]

    diag = []
    t = 0
    while t < len(A) and t < ncols:
        nz = [(abs(A[i][j]), i, j) for i in range(t, len(A)) for j in range(t, ncols) if A[i][j]]
        if not nz:
            break
        _, pi, pj = min(nz)
        A[t], A[pi] = A[pi], A[t]
        if pj != t:
            col_swap(t, pj)
        while True:
            p = A[t][t]
            clean = True
            for i in range(t + 1, len(A)):
                q = A[i][t] // p
                if q:
                    A[i] = [x - q * y for x, y in zip(A[i], A[t])]
                if A[i][t]:
                    clean = False
            for j in range(t + 1, ncols):
                q = A[t][j] // p
                if q:
                    col_addmul(j, t, q)
                if A[t][j]:
                    clean = False
            if clean:
                bad = next(
                    (i for i in range(t + 1, len(A)) for j in range(t + 1, ncols) if A[i][j] % p),
                    None,
                )
                if bad is None:
                    break
                A[t] = [x + y for x, y in zip(A[t], A[bad])]
                continue
            nz = [(abs(A[i][t]), i, t) for i in range(t, len(A)) if A[i][t]]
            nz += [(abs(A[t][j]), t, j) for j in range(t, ncols) if A[t][j]]
            _, pi, pj = min(nz)
            if pi != t:
                A[t], A[pi] = A[pi], A[t]
            if pj != t:
                col_swap(t, pj)
        if A[t][t] < 0:
            A[t] = [-x for x in A[t]]
        diag.append(A[t][t])
        t += 1
    return diag, V
