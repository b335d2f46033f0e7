"""Dense kernels generic over an arithmetic context.

Matrices are lists of rows (lists of context values); vectors are lists.
Every arithmetic step goes through the context so each one is rounded into
the simulated system.  The eigenvalue route follows the classical Handbook
procedures: Householder reduction to tridiagonal form (``tred1``) followed by
the implicit-origin-shift QL iteration (``tql1``).
"""

from __future__ import annotations

from typing import Sequence

from .simarith import ArithContext

MAX_QL_SWEEPS = 30


class SingularMatrix(ArithmeticError):
    pass


class NoConvergence(ArithmeticError):
    def __init__(self, index: int):
        super().__init__(f"QL iteration did not converge for eigenvalue {index}")
        self.index = index


def _copy(A: Sequence[Sequence]) -> list[list]:
    return [list(row) for row in A]


def gauss_solve_complete_pivot(ctx: ArithContext, A: Sequence[Sequence], b: Sequence) -> list:
    """Solve ``A y = b`` by Gaussian elimination with complete pivoting.

    Pivot ties go to the smallest row index, then the smallest column index.
    """
    n = len(A)
    a = _copy(A)
    rhs = list(b)
    cols = list(range(n))
    for k in range(n):
        p, q = k, k
        best = ctx.abs(a[k][k])
        for i in range(k, n):
            row = a[i]
            for j in range(k, n):
                mag = ctx.abs(row[j])
                if ctx.lt(best, mag):
                    best, p, q = mag, i, j
        if ctx.is_zero(best):
            raise SingularMatrix(f"zero pivot at step {k}")
        if p != k:
            a[k], a[p] = a[p], a[k]
            rhs[k], rhs[p] = rhs[p], rhs[k]
        if q != k:
            for row in a:
                row[k], row[q] = row[q], row[k]
            cols[k], cols[q] = cols[q], cols[k]
        pivot_row = a[k]
        pivot = pivot_row[k]
        for i in range(k + 1, n):
            row = a[i]
            mult = ctx.div(row[k], pivot)
            for j in range(k + 1, n):
                row[j] = ctx.sub(row[j], ctx.mul(mult, pivot_row[j]))
            rhs[i] = ctx.sub(rhs[i], ctx.mul(mult, rhs[k]))
    y = [None] * n
    for k in range(n - 1, -1, -1):
        s = rhs[k]
        row = a[k]
        for j in range(k + 1, n):
            s = ctx.sub(s, ctx.mul(row[j], y[j]))
        y[k] = ctx.div(s, row[k])
    x = [None] * n
    for k in range(n):
        x[cols[k]] = y[k]
    return x


def householder_tridiagonalize(ctx: ArithContext, A: Sequence[Sequence],
                               tol: float = 1e-60) -> tuple[list, list]:
    """Reduce symmetric ``A`` to tridiagonal form (``d``, ``e``).

    ``e[i]`` couples rows ``i-1`` and ``i``; ``e[0]`` is zero.  Only the lower
    triangle of ``A`` is read.  A step whose sum of squares is ``<= tol`` is
    skipped, the Handbook's guard against underflow destroying orthogonality.
    Matrices of order 2 are already tridiagonal and are returned as they are.
    """
    n = len(A)
    a = _copy(A)
    zero = ctx.zero
    if n <= 2:
        d = [a[i][i] for i in range(n)]
        e = [zero] + [a[1][0]] if n == 2 else [zero] * n
        return d, e
    tol_v = ctx.const(tol)
    d = [a[i][i] for i in range(n)]
    e = [zero] * n
    for i in range(n - 1, -1, -1):
        l = i - 1
        ai = a[i]
        h = zero
        for k in range(l + 1):
            h = ctx.add(h, ctx.mul(ai[k], ai[k]))
        if l < 0 or not ctx.lt(tol_v, h):
            e[i] = zero
        else:
            f = ai[l]
            g = ctx.sqrt(h)
            if not ctx.lt(f, zero):
                g = ctx.neg(g)
            e[i] = g
            h = ctx.sub(h, ctx.mul(f, g))
            ai[l] = ctx.sub(f, g)
            f = zero
            for j in range(l + 1):
                g = zero
                aj = a[j]
                for k in range(j + 1):
                    g = ctx.add(g, ctx.mul(aj[k], ai[k]))
                for k in range(j + 1, l + 1):
                    g = ctx.add(g, ctx.mul(a[k][j], ai[k]))
                g = ctx.div(g, h)
                e[j] = g
                f = ctx.add(f, ctx.mul(g, ai[j]))
            hh = ctx.div(f, ctx.add(h, h))
            for j in range(l + 1):
                f = ai[j]
                g = ctx.sub(e[j], ctx.mul(hh, f))
                e[j] = g
                aj = a[j]
                for k in range(j + 1):
                    aj[k] = ctx.sub(ctx.sub(aj[k], ctx.mul(f, e[k])), ctx.mul(g, ai[k]))
        # d[i] receives the reduced diagonal; a[i][i] gets the original back
        h = d[i]
        d[i] = ai[i]
        ai[i] = h
    return d, e


def tridiag_eigen_ql(ctx: ArithContext, diag: Sequence, offdiag: Sequence,
                     macheps: float = 1e-8, tol: float = 1e-60) -> list:
    """Eigenvalues (ascending) of a symmetric tridiagonal matrix by QL with shifts.

    ``offdiag[i]`` couples rows ``i-1`` and ``i`` (``offdiag[0]`` ignored).  An
    off-diagonal element is negligible once it is at most ``macheps`` times the
    largest ``|d[l]| + |e[l]|`` seen so far; ``tol`` is a floor on that
    threshold so an all-zero leading block cannot make it vanish.
    """
    n = len(diag)
    d = list(diag)
    if n == 0:
        return d
    e = list(offdiag[1:]) + [ctx.zero]
    zero = ctx.zero
    one = ctx.const(1)
    two = ctx.const(2)
    eps_v = ctx.const(macheps)
    b = ctx.const(tol)
    f = zero
    for l in range(n):
        j = 0
        h = ctx.mul(eps_v, ctx.add(ctx.abs(d[l]), ctx.abs(e[l])))
        if ctx.lt(b, h):
            b = h
        m = l
        while m < n - 1 and ctx.lt(b, ctx.abs(e[m])):
            m += 1
        while m != l:
            if j == MAX_QL_SWEEPS:
                raise NoConvergence(l)
            j += 1
            # form shift
            g = d[l]
            p = ctx.div(ctx.sub(d[l + 1], g), ctx.mul(two, e[l]))
            r = ctx.sqrt(ctx.add(ctx.mul(p, p), one))
            d[l] = ctx.div(e[l], ctx.sub(p, r) if ctx.lt(p, zero) else ctx.add(p, r))
            h = ctx.sub(g, d[l])
            for i in range(l + 1, n):
                d[i] = ctx.sub(d[i], h)
            f = ctx.add(f, h)
            # QL transformation
            p = d[m]
            c = one
            s = zero
            for i in range(m - 1, l - 1, -1):
                g = ctx.mul(c, e[i])
                h = ctx.mul(c, p)
                if not ctx.lt(ctx.abs(p), ctx.abs(e[i])):
                    c = ctx.div(e[i], p)
                    r = ctx.sqrt(ctx.add(ctx.mul(c, c), one))
                    e[i + 1] = ctx.mul(ctx.mul(s, p), r)
                    s = ctx.div(c, r)
                    c = ctx.div(one, r)
                else:
                    c = ctx.div(p, e[i])
                    r = ctx.sqrt(ctx.add(ctx.mul(c, c), one))
                    e[i + 1] = ctx.mul(ctx.mul(s, e[i]), r)
                    s = ctx.div(one, r)
                    c = ctx.div(c, r)
                p = ctx.sub(ctx.mul(c, d[i]), ctx.mul(s, g))
                d[i + 1] = ctx.add(h, ctx.mul(s, ctx.add(ctx.mul(c, g), ctx.mul(s, d[i]))))
            e[l] = ctx.mul(s, p)
            d[l] = ctx.mul(c, p)
            if not ctx.lt(b, ctx.abs(e[l])):
                break
        p = ctx.add(d[l], f)
        # insertion into the ascending list d[0..l]
        i = l
        while i > 0 and ctx.lt(p, d[i - 1]):
            d[i] = d[i - 1]
            i -= 1
        d[i] = p
    return d


def sym2x2_eigenvalues(ctx: ArithContext, a, b, c) -> list:
    """Eigenvalues of ``[[a, b], [b, c]]`` from the closed form, ascending."""
    two = ctx.const(2)
    mean = ctx.div(ctx.add(a, c), two)
    half = ctx.div(ctx.sub(a, c), two)
    r = ctx.sqrt(ctx.add(ctx.mul(half, half), ctx.mul(b, b)))
    return [ctx.sub(mean, r), ctx.add(mean, r)]


def symmetric_eigenvalues(ctx: ArithContext, A: Sequence[Sequence],
                          macheps: float = 1e-8, tol: float = 1e-60) -> list:
    """Ascending eigenvalues via tridiagonalisation and QL."""
    d, e = householder_tridiagonalize(ctx, A, tol=tol)
    return tridiag_eigen_ql(ctx, d, e, macheps=macheps, tol=tol)


def frobenius_norm(ctx: ArithContext, A: Sequence[Sequence]):
    s = ctx.zero
    for row in A:
        for v in row:
            s = ctx.add(s, ctx.mul(v, v))
    return ctx.sqrt(s)


def two_norm(ctx: ArithContext, v: Sequence):
    s = ctx.zero
    for x in v:
        s = ctx.add(s, ctx.mul(x, x))
    return ctx.sqrt(s)


def matvec(ctx: ArithContext, A: Sequence[Sequence], x: Sequence) -> list:
    out = []
    for row in A:
        s = ctx.zero
        for a, xv in zip(row, x):
            s = ctx.add(s, ctx.mul(a, xv))
        out.append(s)
    return out
