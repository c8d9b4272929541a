"""Exact nonnegative-integer matrix analysis.

Characteristic polynomials are computed over the integers, Perron-Frobenius
eigenvalues are isolated with Sturm sequences and Fraction bisection, and
eigenvalue handles compare exactly (via polynomial gcd on the isolating
intervals) so the descent arguments never rest on floating point.
"""
from __future__ import annotations

from fractions import Fraction

from .errors import NotIrreducible

# -- integer polynomials (dense, highest degree first) -----------------------


def poly_trim(c):
    i = 0
    while i < len(c) - 1 and c[i] == 0:
        i += 1
    return tuple(c[i:])


def poly_eval(c, x):
    out = Fraction(0)
    for a in c:
        out = out * x + a
    return out


def poly_deriv(c):
    n = len(c) - 1
    if n <= 0:
        return (0,)
    return tuple(a * (n - i) for i, a in enumerate(c[:-1]))


def poly_neg(c):
    return tuple(-a for a in c)


def poly_mul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return poly_trim(out)


def _frac_divmod(a, b):
    """Polynomial division over Q; a, b tuples of Fractions or ints."""
    a = [Fraction(x) for x in a]
    b = [Fraction(x) for x in b]
    if b == [Fraction(0)]:
        raise ZeroDivisionError("polynomial division by zero")
    q = [Fraction(0)] * max(1, len(a) - len(b) + 1)
    r = a[:]
    db = len(b) - 1
    while len(r) - 1 >= db and any(x != 0 for x in r):
        lead = r[0] / b[0]
        deg_gap = (len(r) - 1) - db
        q[len(q) - 1 - deg_gap] = lead
        for i in range(len(b)):
            r[i] -= lead * b[i]
        r.pop(0)
        if not r:
            r = [Fraction(0)]
    while len(r) > 1 and r[0] == 0:
        r.pop(0)
    return tuple(q), tuple(r)


def _primitive(c):
    """Primitive integer polynomial with positive leading coefficient."""
    from math import gcd
    den = 1
    for x in c:
        den = den * Fraction(x).denominator // gcd(den, Fraction(x).denominator)
    ints = [int(Fraction(x) * den) for x in c]
    g = 0
    for x in ints:
        g = gcd(g, abs(x))
    if g == 0:
        return (0,)
    ints = [x // g for x in ints]
    if ints[0] < 0:
        ints = [-x for x in ints]
    return poly_trim(ints)


def poly_gcd(a, b):
    """Monic-free gcd over Q, returned primitive over Z."""
    a = poly_trim(a)
    b = poly_trim(b)
    if a == (0,):
        return _primitive(b)
    if b == (0,):
        return _primitive(a)
    while True:
        _, r = _frac_divmod(a, b)
        if r == (Fraction(0),) or r == (0,):
            return _primitive(b)
        a, b = b, r


def square_free_part(c):
    g = poly_gcd(c, poly_deriv(c))
    if len(g) == 1:
        return _primitive(c)
    q, r = _frac_divmod(c, g)
    assert poly_trim(r) in ((0,), (Fraction(0),))
    return _primitive(q)


def sturm_chain(c):
    chain = [tuple(Fraction(x) for x in c),
             tuple(Fraction(x) for x in poly_deriv(c))]
    while True:
        _, r = _frac_divmod(chain[-2], chain[-1])
        if poly_trim(r) in ((0,), (Fraction(0),)):
            break
        chain.append(tuple(-x for x in r))
    return chain


def _sign_changes(chain, x):
    signs = []
    for p in chain:
        v = poly_eval(p, x)
        if v != 0:
            signs.append(1 if v > 0 else -1)
    changes = 0
    for i in range(len(signs) - 1):
        if signs[i] != signs[i + 1]:
            changes += 1
    return changes


def count_roots(c, lo, hi, chain=None):
    """Distinct real roots of square-free c in the half-open interval (lo, hi]."""
    if chain is None:
        chain = sturm_chain(c)
    return _sign_changes(chain, lo) - _sign_changes(chain, hi)


# -- characteristic polynomial (Faddeev-LeVerrier, exact) ---------------------


def char_poly(rows):
    """Integer coefficients of det(xI - M), highest degree first."""
    n = len(rows)
    if n == 0:
        return (1,)
    M = [list(map(int, r)) for r in rows]
    coeffs = [1]
    aux = [[0] * n for _ in range(n)]  # running matrix M_k
    Mk = [row[:] for row in M]
    for k in range(1, n + 1):
        trace = sum(Mk[i][i] for i in range(n))
        ck = -trace // k
        assert -trace % k == 0, "Faddeev-LeVerrier division must be exact"
        coeffs.append(ck)
        if k == n:
            break
        for i in range(n):
            for j in range(n):
                aux[i][j] = Mk[i][j] + (ck if i == j else 0)
        Mk = [[sum(M[i][t] * aux[t][j] for t in range(n)) for j in range(n)]
              for i in range(n)]
    return tuple(coeffs)


# -- digraph structure --------------------------------------------------------


def support_successors(rows):
    """succ[j] = sorted indices i with rows[i][j] > 0 (image of j crosses i)."""
    n = len(rows)
    return [sorted(i for i in range(n) if rows[i][j] > 0) for j in range(n)]


def strongly_connected_components(succ):
    """Tarjan, iterative.  Returns a list of sorted node lists."""
    n = len(succ)
    index = [None] * n
    low = [0] * n
    on_stack = [False] * n
    stack = []
    comps = []
    counter = [0]
    for root in range(n):
        if index[root] is not None:
            continue
        work = [(root, 0)]
        while work:
            v, pi = work[-1]
            if pi == 0:
                index[v] = low[v] = counter[0]
                counter[0] += 1
                stack.append(v)
                on_stack[v] = True
            advanced = False
            for k in range(pi, len(succ[v])):
                w = succ[v][k]
                if index[w] is None:
                    work[-1] = (v, k + 1)
                    work.append((w, 0))
                    advanced = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                comps.append(sorted(comp))
            work.pop()
            if work:
                u, _ = work[-1]
                low[u] = min(low[u], low[v])
    return comps


def matrix_is_irreducible(rows):
    """Support digraph strongly connected; 1x1 must be nonzero."""
    n = len(rows)
    if n == 0:
        return False
    if n == 1:
        return rows[0][0] > 0
    return len(strongly_connected_components(support_successors(rows))) == 1


def matrix_is_aperiodic(rows):
    """Irreducible and the gcd of cycle lengths is 1 (some power positive)."""
    from math import gcd
    if not matrix_is_irreducible(rows):
        return False
    n = len(rows)
    if n == 1:
        return True
    succ = support_successors(rows)
    level = [None] * n
    level[0] = 0
    frontier = [0]
    g = 0
    while frontier:
        nxt = []
        for v in frontier:
            for w in succ[v]:
                if level[w] is None:
                    level[w] = level[v] + 1
                    nxt.append(w)
                else:
                    g = gcd(g, level[v] + 1 - level[w])
        frontier = nxt
    return abs(g) == 1


# -- algebraic real handles ---------------------------------------------------


class AlgebraicReal:
    """A real algebraic number: square-free integer polynomial plus an
    isolating rational interval (or an exact rational value).

    Comparisons are exact.  Equality of two handles is decided by a
    polynomial gcd restricted to the interval overlap, never by floats.
    """

    __slots__ = ("poly", "lo", "hi", "_chain", "source_poly")

    def __init__(self, poly, lo, hi, source_poly=None):
        self.poly = poly_trim(tuple(int(c) for c in poly))
        self.lo = Fraction(lo)
        self.hi = Fraction(hi)
        self.source_poly = tuple(source_poly) if source_poly else self.poly
        self._chain = None
        if self.lo > self.hi:
            raise ValueError("empty interval")
        if self.lo == self.hi:
            assert poly_eval(self.poly, self.lo) == 0
        else:
            assert (poly_eval(self.poly, self.lo) != 0
                    and poly_eval(self.poly, self.hi) != 0)
            assert self._count(self.lo, self.hi) == 1

    @classmethod
    def from_rational(cls, q):
        q = Fraction(q)
        return cls((q.denominator, -q.numerator), q, q)

    def _count(self, lo, hi):
        if self._chain is None:
            self._chain = sturm_chain(self.poly)
        return count_roots(self.poly, lo, hi, self._chain)

    @property
    def is_rational(self):
        return self.lo == self.hi

    def refine(self, width=Fraction(1, 10**12)):
        """Shrink the isolating interval below the requested width."""
        while self.hi - self.lo > width:
            mid = (self.lo + self.hi) / 2
            if poly_eval(self.poly, mid) == 0:
                self.lo = self.hi = mid
                return self
            if self._count(self.lo, mid) == 1:
                self.hi = mid
            else:
                self.lo = mid
        return self

    def __float__(self):
        self.refine(Fraction(1, 10**15))
        return float((self.lo + self.hi) / 2)

    def decimal(self, digits=20):
        """The value to `digits` significant decimal digits, exactly rounded."""
        self.refine(Fraction(1, 10**(digits + 10)))
        mid = (self.lo + self.hi) / 2
        if mid == 0:
            return "0." + "0" * (digits - 1)
        sign = "-" if mid < 0 else ""
        mid = abs(mid)
        exp = 0
        while mid >= 10:
            mid /= 10
            exp += 1
        while mid < 1:
            mid *= 10
            exp -= 1
        scaled = mid * Fraction(10) ** (digits - 1)
        intval = int(scaled + Fraction(1, 2))
        if len(str(intval)) > digits:  # rounding carried over
            intval //= 10
            exp += 1
        s = str(intval)[:digits]
        if exp >= digits - 1 or exp < -4:
            mantissa = s[0] + "." + s[1:]
            return f"{sign}{mantissa}e{exp}"
        if exp >= 0:
            return sign + s[:exp + 1] + "." + s[exp + 1:]
        return sign + "0." + "0" * (-exp - 1) + s

    def equals(self, other):
        """Exact equality.

        Both intervals isolate one root of their polynomial and have
        non-root endpoints, so the numbers coincide exactly when the gcd of
        the two polynomials has a root in the open interval overlap.
        """
        other = _coerce(other)
        if self.is_rational and other.is_rational:
            return self.lo == other.lo
        if self.is_rational:
            return (other.lo < self.lo < other.hi
                    and poly_eval(other.poly, self.lo) == 0)
        if other.is_rational:
            return other.equals(self)
        lo = max(self.lo, other.lo)
        hi = min(self.hi, other.hi)
        if lo >= hi:
            return False
        g = square_free_part(poly_gcd(self.poly, other.poly))
        if len(g) == 1:
            return False
        return count_roots(g, lo, hi) >= 1

    def compare(self, other):
        """-1, 0, 1 exactly."""
        other = _coerce(other)
        if self.equals(other):
            return 0
        while True:
            if self.hi < other.lo:
                return -1
            if other.hi < self.lo:
                return 1
            width = max(self.hi - self.lo, other.hi - other.lo)
            target = width / 4 if width > 0 else Fraction(1, 10**9)
            self.refine(target)
            other.refine(target)

    def __eq__(self, other):
        return self.equals(other)

    def __lt__(self, other):
        return self.compare(other) < 0

    def __le__(self, other):
        return self.compare(other) <= 0

    def __gt__(self, other):
        return self.compare(other) > 0

    def __ge__(self, other):
        return self.compare(other) >= 0

    def minimal_polynomial(self):
        """Irreducible integer polynomial with this number as a root."""
        import sympy

        x = sympy.symbols("x")
        expr = sum(int(c) * x ** (len(self.poly) - 1 - i)
                   for i, c in enumerate(self.poly))
        best = None
        for fac, _ in sympy.Poly(expr, x).factor_list()[1]:
            coeffs = tuple(int(c) for c in fac.all_coeffs())
            if len(coeffs) == 1:
                continue
            if self.is_rational:
                if poly_eval(coeffs, self.lo) == 0:
                    best = coeffs
                    break
            else:
                if count_roots(square_free_part(coeffs), self.lo, self.hi) >= 1:
                    best = coeffs
                    break
        assert best is not None
        if best[0] < 0:
            best = tuple(-c for c in best)
        return best

    def __repr__(self):
        return f"AlgebraicReal({poly_str(self.poly)}, ~{float(self):.6f})"


def _coerce(x):
    if isinstance(x, AlgebraicReal):
        return x
    return AlgebraicReal.from_rational(x)


def poly_str(coeffs):
    """Render integer coefficients as e.g. ``x^4-2x^3-2x^2+2x-1``."""
    coeffs = poly_trim(coeffs)
    n = len(coeffs) - 1
    if n == 0:
        return str(coeffs[0])
    parts = []
    for i, c in enumerate(coeffs):
        if c == 0:
            continue
        deg = n - i
        mag = abs(c)
        if deg == 0:
            body = str(mag)
        else:
            xpart = "x" if deg == 1 else f"x^{deg}"
            body = xpart if mag == 1 else f"{mag}{xpart}"
        if not parts:
            parts.append(("-" if c < 0 else "") + body)
        else:
            parts.append(("-" if c < 0 else "+") + body)
    return "".join(parts) if parts else "0"


def pf_eigenvalue(rows):
    """Perron-Frobenius eigenvalue of an irreducible nonnegative matrix.

    The handle carries the exact characteristic polynomial; the value is the
    largest real root, isolated by Sturm counts and refined by bisection to
    width 1e-12.  It always lies between the min and max row sums.
    """
    if not matrix_is_irreducible(rows):
        raise NotIrreducible("matrix must be irreducible")
    cp = char_poly(rows)
    sf = square_free_part(cp)
    chain = sturm_chain(sf)
    row_sums = [sum(r) for r in rows]
    lo = Fraction(min(row_sums)) - 1
    hi = Fraction(max(row_sums)) + 1

    def exact(q):
        out = AlgebraicReal(sf, q, q, source_poly=cp)
        _check_pf_bounds(out, row_sums)
        return out

    assert poly_eval(sf, hi) != 0, "largest root must lie below the bound"
    assert count_roots(sf, lo, hi, chain) >= 1
    # invariant: the largest real root lies in (lo, hi]
    while count_roots(sf, lo, hi, chain) > 1:
        mid = (lo + hi) / 2
        if poly_eval(sf, mid) == 0:
            if count_roots(sf, mid, hi, chain) == 0:
                return exact(mid)
            lo = mid
        elif count_roots(sf, mid, hi, chain) >= 1:
            lo = mid
        else:
            hi = mid
    # the single root in (lo, hi] is strictly above lo; move lo off any root
    while poly_eval(sf, lo) == 0:
        mid = (lo + hi) / 2
        if poly_eval(sf, mid) == 0:
            return exact(mid)
        if count_roots(sf, mid, hi, chain) == 1:
            lo = mid
        else:
            hi = mid
    out = AlgebraicReal(sf, lo, hi, source_poly=cp)
    out.refine(Fraction(1, 10**12))
    _check_pf_bounds(out, row_sums)
    return out


def _check_pf_bounds(handle, row_sums):
    lo_bound = AlgebraicReal.from_rational(min(row_sums))
    hi_bound = AlgebraicReal.from_rational(max(row_sums))
    assert handle.compare(lo_bound) >= 0 and handle.compare(hi_bound) <= 0


def is_permutation_matrix(rows):
    n = len(rows)
    for i in range(n):
        if sum(rows[i]) != 1 or sum(rows[j][i] for j in range(n)) != 1:
            return False
        if any(x not in (0, 1) for x in rows[i]):
            return False
    return True
