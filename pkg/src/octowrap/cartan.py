"""Generalized Cartan matrices: validation, realization, symmetrization, invariant forms.

Integer matrices are handled in exact rational arithmetic.  Matrices with
A_r entries go through rank_over_Ar and realize with float coordinates.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Sequence


from octowrap.cayley_dickson import CayleyNumber, inverse, mul

Q = Fraction
PIVOT_TOL = 1e-10


# -- exact linear algebra -----------------------------------------------------

def _qmat(A) -> list[list[Fraction]]:
    return [[Q(x) for x in row] for row in A]


def _square(A) -> int:
    n = len(A)
    if any(len(row) != n for row in A):
        raise ValueError("matrix must be square")
    return n


def rref(A) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form and pivot columns over Q."""
    M = _qmat(A)
    rows = len(M)
    cols = len(M[0]) if rows else 0
    piv: list[int] = []
    r = 0
    for c in range(cols):
        p = next((i for i in range(r, rows) if M[i][c] != 0), None)
        if p is None:
            continue
        M[r], M[p] = M[p], M[r]
        inv = 1 / M[r][c]
        M[r] = [x * inv for x in M[r]]
        for i in range(rows):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        piv.append(c)
        r += 1
        if r == rows:
            break
    return M, piv


def rank_q(A) -> int:
    return len(rref(A)[1]) if len(A) else 0


def det_q(A) -> Fraction:
    M = _qmat(A)
    n = _square(M)
    d = Q(1)
    for c in range(n):
        p = next((i for i in range(c, n) if M[i][c] != 0), None)
        if p is None:
            return Q(0)
        if p != c:
            M[c], M[p] = M[p], M[c]
            d = -d
        d *= M[c][c]
        for i in range(c + 1, n):
            f = M[i][c] / M[c][c]
            if f:
                M[i] = [a - f * b for a, b in zip(M[i], M[c])]
    return d


def nullspace_q(A, ncols: int | None = None) -> list[list[Fraction]]:
    """Basis of {x : A x = 0} over Q."""
    cols = len(A[0]) if len(A) else (ncols or 0)
    if not len(A):
        return [[Q(int(i == j)) for i in range(cols)] for j in range(cols)]
    R, piv = rref(A)
    free = [c for c in range(cols) if c not in piv]
    out = []
    for f in free:
        v = [Q(0)] * cols
        v[f] = Q(1)
        for i, c in enumerate(piv):
            v[c] = -R[i][f]
        out.append(v)
    return out


def inv_q(A) -> list[list[Fraction]]:
    n = _square(A)
    aug = [list(row) + [Q(int(i == j)) for j in range(n)] for i, row in enumerate(_qmat(A))]
    R, piv = rref(aug)
    if piv[:n] != list(range(n)):
        raise ZeroDivisionError("singular matrix")
    return [row[n:] for row in R]


def matmul_q(A, B) -> list[list[Fraction]]:
    Bt = list(zip(*B))
    return [[sum((a * b for a, b in zip(row, col)), Q(0)) for col in Bt] for row in A]


def transpose(A) -> list[list]:
    return [list(c) for c in zip(*A)]


# -- GCM checks ---------------------------------------------------------------

def validate_gcm(A) -> list[str]:
    """Violations of the generalized Cartan matrix axioms; empty when A is a GCM."""
    n = _square(A)
    out = []
    for j in range(n):
        for k in range(n):
            a = A[j][k]
            if Q(a).denominator != 1:
                out.append(f"a_{{{j + 1},{k + 1}}}={a} is not an integer")
                continue
            if j == k and a != 2:
                out.append(f"a_{{{j + 1},{j + 1}}}={a} but diagonal entries must be 2")
            if j != k and a > 0:
                out.append(f"a_{{{j + 1},{k + 1}}}={a} > 0 off the diagonal")
            if j != k and a == 0 and A[k][j] != 0:
                out.append(f"a_{{{j + 1},{k + 1}}}=0 but a_{{{k + 1},{j + 1}}}≠0")
    return out


def is_gcm(A) -> bool:
    return not validate_gcm(A)


def leading_minors(A) -> list[Fraction]:
    n = _square(A)
    return [det_q([row[:k] for row in A[:k]]) for k in range(1, n + 1)]


def principal_minors(A, proper: bool = True) -> dict[tuple, Fraction]:
    n = _square(A)
    top = n - 1 if proper else n
    return {
        S: det_q([[A[i][j] for j in S] for i in S])
        for k in range(1, top + 1)
        for S in combinations(range(n), k)
    }


def classify_affine(A, minors: str = "leading") -> bool:
    """True when all proper leading principal minors are positive and det A = 0.

    minors="all" checks every proper principal minor instead.
    """
    _square(A)
    if minors == "leading":
        m = leading_minors(A)
        return all(x > 0 for x in m[:-1]) and m[-1] == 0
    if minors == "all":
        return all(x > 0 for x in principal_minors(A).values()) and det_q(A) == 0
    raise ValueError("minors must be 'leading' or 'all'")


# -- rank over A_r ------------------------------------------------------------

def _is_cd_matrix(B) -> bool:
    return any(isinstance(x, CayleyNumber) for row in B for x in row)


def rank_over_Ar(B, tol: float = PIVOT_TOL) -> int:
    """Row rank by Gauss elimination with left division x = a b^-1 on pivots.

    Rational and integer matrices are reduced exactly.  Matrices with
    CayleyNumber entries use float coordinates and drop pivots below tol.
    """
    if not len(B):
        return 0
    if not _is_cd_matrix(B):
        return rank_q(B)
    level = next(x.level for row in B for x in row if isinstance(x, CayleyNumber))
    M = [[x.to_float() if isinstance(x, CayleyNumber) else CayleyNumber.real(level, float(x)) for x in row] for row in B]
    rows, cols = len(M), len(M[0])
    r = 0
    for c in range(cols):
        p = max(range(r, rows), key=lambda i: M[i][c].norm(), default=None)
        if p is None or M[p][c].norm() <= tol:
            continue
        M[r], M[p] = M[p], M[r]
        pinv = inverse(M[r][c])
        for i in range(r + 1, rows):
            if M[i][c].norm() == 0:
                continue
            f = mul(M[i][c], pinv)
            M[i] = [a - mul(f, b) for a, b in zip(M[i], M[r])]
            M[i][c] = CayleyNumber.zero(level)
        r += 1
        if r == rows:
            break
    return r


def _independent_rows(A) -> list[int]:
    chosen: list[int] = []
    for i in range(len(A)):
        if rank_over_Ar([A[j] for j in chosen + [i]]) == len(chosen) + 1:
            chosen.append(i)
    return chosen


# -- realization --------------------------------------------------------------

@dataclass(frozen=True)
class Realization:
    """h = A_r^dim_h; coroots are vectors in h and roots coefficient functionals on h."""

    A: tuple
    coroots: tuple
    roots: tuple
    l: int

    @property
    def n(self) -> int:
        return len(self.A)

    @property
    def dim_h(self) -> int:
        return len(self.coroots[0]) if self.coroots else 0

    def pairing(self, gamma, beta):
        """<gamma, beta> = sum_i gamma_i beta_i."""
        if isinstance(gamma[0], CayleyNumber) or isinstance(beta[0], CayleyNumber):
            terms = [mul(_cd(g), _cd(b)) for g, b in zip(gamma, beta)]
            acc = terms[0]
            for t in terms[1:]:
                acc = acc + t
            return acc
        return sum((Q(g) * Q(b) for g, b in zip(gamma, beta)), Q(0))

    def pairing_matrix(self) -> list[list]:
        return [[self.pairing(g, b) for b in self.roots] for g in self.coroots]

    def to_json(self) -> dict:
        return {
            "dim_h": self.dim_h,
            "coroots": [[_q_json(x) for x in g] for g in self.coroots],
            "pairing_matrix": [[_q_json(x) for x in row] for row in self.pairing_matrix()],
        }


def _cd(x) -> CayleyNumber:
    return x if isinstance(x, CayleyNumber) else CayleyNumber.real(3, float(x))


def _q_json(x):
    if isinstance(x, CayleyNumber):
        return x.to_json()
    x = Q(x)
    return int(x) if x.denominator == 1 else {"num": x.numerator, "den": x.denominator}


def realize(A) -> Realization:
    """Bordered construction C = [[A1, 0], [A2, I]] with the independent rows in A1.

    Coroot gamma_k is the row of C belonging to row k of A; beta_j(x) = x_j.
    """
    n = _square(A)
    cd = _is_cd_matrix(A)
    if cd:
        level = next(x.level for row in A for x in row if isinstance(x, CayleyNumber))
        zero, one = CayleyNumber.zero(level), CayleyNumber.real(level, 1.0)
        A = [[x if isinstance(x, CayleyNumber) else CayleyNumber.real(level, float(x)) for x in row] for row in A]
    else:
        zero, one = Q(0), Q(1)
        A = _qmat(A)
    indep = _independent_rows(A)
    l = len(indep)
    dep = [i for i in range(n) if i not in indep]
    dim = 2 * n - l
    coroots = [None] * n
    for i in indep:
        coroots[i] = tuple(A[i]) + (zero,) * (n - l)
    for s, i in enumerate(dep):
        coroots[i] = tuple(A[i]) + tuple(one if t == s else zero for t in range(n - l))
    roots = tuple(tuple(one if c == j else zero for c in range(dim)) for j in range(n))
    return Realization(tuple(tuple(r) for r in A), tuple(coroots), roots, l)


def verify_realization(R: Realization, tol: float = 0.0) -> bool:
    P = R.pairing_matrix()
    for k in range(R.n):
        for j in range(R.n):
            a = R.A[k][j]
            p = P[k][j]
            if isinstance(p, CayleyNumber):
                if (p - _cd(a)).norm() > tol:
                    return False
            elif p != a:
                return False
    return True


def transpose_realization(R: Realization) -> Realization:
    """Swap roles: roots become coroots and coroots become functionals; pairing is A^T."""
    return Realization(tuple(tuple(r) for r in transpose(R.A)), R.roots, R.coroots, R.l)


def center_basis(A, R: Realization | None = None) -> list[list[Fraction]]:
    """Real basis of Z = {h : <beta_j, h> = 0 for all j}; dimension n - l."""
    R = R or realize(A)
    if _is_cd_matrix(R.A):
        raise ValueError("center_basis needs a rational matrix")
    return nullspace_q([list(b) for b in R.roots], R.dim_h)


# -- symmetrization -----------------------------------------------------------

class NotSymmetrizable(ValueError):
    def __init__(self, cycle: list[int]):
        super().__init__(f"not symmetrizable: inconsistent ratios around cycle {[c + 1 for c in cycle]}")
        self.cycle = cycle


@dataclass(frozen=True)
class Symmetrization:
    d: tuple
    B: tuple

    def D(self) -> list[list[Fraction]]:
        n = len(self.d)
        return [[self.d[i] if i == j else Q(0) for j in range(n)] for i in range(n)]

    def to_json(self) -> dict:
        return {"d": [_q_json(x) for x in self.d], "B": [[_q_json(x) for x in row] for row in self.B]}


def components(A) -> list[list[int]]:
    """Indecomposable blocks: connected components of the graph a_{j,k} != 0."""
    n = _square(A)
    seen = [False] * n
    out = []
    for s in range(n):
        if seen[s]:
            continue
        comp, queue = [], deque([s])
        seen[s] = True
        while queue:
            j = queue.popleft()
            comp.append(j)
            for k in range(n):
                if k != j and not seen[k] and (A[j][k] != 0 or A[k][j] != 0):
                    seen[k] = True
                    queue.append(k)
        out.append(sorted(comp))
    return out


def decomposable(A) -> list[list[int]]:
    """Components of A; A is decomposable when there is more than one."""
    return components(A)


def symmetrize(A) -> Symmetrization:
    """A = diag(d) B with B symmetric, d_j > 0 rational, d = 1 at each component's first index."""
    bad = validate_gcm(A)
    if bad:
        raise ValueError("not a generalized Cartan matrix: " + "; ".join(bad))
    n = len(A)
    A = _qmat(A)
    d: list[Fraction | None] = [None] * n
    parent: list[int | None] = [None] * n
    for comp in components(A):
        root = comp[0]
        d[root] = Q(1)
        queue = deque([root])
        while queue:
            j = queue.popleft()
            for k in comp:
                if k == j or A[j][k] == 0:
                    continue
                want = d[j] * A[k][j] / A[j][k]
                if d[k] is None:
                    d[k] = want
                    parent[k] = j
                    queue.append(k)
                elif d[k] != want:
                    raise NotSymmetrizable(_cycle(parent, j, k))
    B = tuple(tuple(A[j][k] / d[j] for k in range(n)) for j in range(n))
    return Symmetrization(tuple(d), B)


def _cycle(parent, j, k) -> list[int]:
    def chain(x):
        out = [x]
        while parent[x] is not None:
            x = parent[x]
            out.append(x)
        return out

    cj, ck = chain(j), chain(k)
    common = next(x for x in cj if x in ck)
    return cj[: cj.index(common) + 1] + list(reversed(ck[: ck.index(common)]))


def is_symmetrizable(A) -> bool:
    try:
        symmetrize(A)
        return True
    except NotSymmetrizable:
        return False


# -- invariant form on h ------------------------------------------------------

@dataclass(frozen=True)
class FormOnH:
    """Gram matrix G of (*|*) on h = Q^dim_h in the coordinate basis.

    (gamma_j | h) = d_j <beta_j, h> for all h; the complement h2 is spanned by
    coordinate vectors and is isotropic, (h2 | h2) = 0.
    """

    R: Realization
    S: Symmetrization
    G: tuple
    h2: tuple

    def __call__(self, x, y) -> Fraction:
        return sum((Q(a) * g * Q(b) for a, row in zip(x, self.G) for g, b in zip(row, y)), Q(0))

    def nu(self, h) -> list[Fraction]:
        """Coefficient vector of the functional <nu(h), p> = (h | p)."""
        return [sum((Q(a) * self.G[i][k] for i, a in enumerate(h)), Q(0)) for k in range(len(h))]

    def nu_inv(self, functional) -> list[Fraction]:
        Gi = inv_q([list(r) for r in self.G])
        return [sum((Gi[i][k] * Q(f) for k, f in enumerate(functional)), Q(0)) for i in range(len(functional))]

    def dual(self, lam, mu) -> Fraction:
        """Induced form on h*: (lam | mu) = (nu^-1 lam | nu^-1 mu)."""
        return self(self.nu_inv(lam), self.nu_inv(mu))

    def beta_gram(self) -> list[list[Fraction]]:
        Gi = inv_q([list(r) for r in self.G])
        n = self.R.n
        return [[Gi[j][k] for k in range(n)] for j in range(n)]

    def restricted_kernel(self) -> list[list[Fraction]]:
        """Kernel of the form on h1 = span gamma_j, as vectors in h."""
        n = self.R.n
        gram = [[self(self.R.coroots[j], self.R.coroots[k]) for k in range(n)] for j in range(n)]
        out = []
        for c in nullspace_q(gram, n):
            out.append([sum((c[j] * Q(self.R.coroots[j][i]) for j in range(n)), Q(0)) for i in range(self.R.dim_h)])
        return out


def form_on_h(R: Realization, S: Symmetrization) -> FormOnH:
    n, dim = R.n, R.dim_h
    d = S.d
    # complement to span(gamma): coordinate vectors chosen greedily
    basis = [list(map(Q, g)) for g in R.coroots]
    h2 = []
    for c in range(dim):
        e = [Q(int(i == c)) for i in range(dim)]
        if rank_q(basis + [e]) == len(basis) + 1:
            basis.append(e)
            h2.append(tuple(e))
        if len(basis) == dim:
            break
    if len(basis) != dim:
        raise RuntimeError("coroots and complement do not span h")
    m = len(basis)
    Gp = [[Q(0)] * m for _ in range(m)]
    for a in range(m):
        for b in range(m):
            if a < n:
                Gp[a][b] = d[a] * basis[b][a]
            elif b < n:
                Gp[a][b] = d[b] * basis[a][b]
    P = transpose(basis)
    Pi = inv_q(P)
    G = matmul_q(matmul_q(transpose(Pi), Gp), Pi)
    if det_q(G) == 0:
        raise RuntimeError("degenerate form on h")
    return FormOnH(R, S, tuple(tuple(r) for r in G), tuple(h2))


def nu(F: FormOnH, h) -> list[Fraction]:
    return F.nu(h)


def cartan_from_form(F: FormOnH) -> list[list[Fraction]]:
    """a_{j,k} = 2 (beta_j | beta_k) / (beta_j | beta_j)."""
    Bg = F.beta_gram()
    n = len(Bg)
    return [[2 * Bg[j][k] / Bg[j][j] for k in range(n)] for j in range(n)]


def rho(R: Realization) -> list[Fraction]:
    """Functional with <rho, gamma_j> = a_{j,j}/2; free components set to 0."""
    rows = [list(map(Q, g)) + [Q(R.A[j][j]) / 2] for j, g in enumerate(R.coroots)]
    M, piv = rref(rows)
    dim = R.dim_h
    if dim in piv:
        raise ValueError("no functional with <rho, gamma_j> = a_jj/2")
    out = [Q(0)] * dim
    for i, c in enumerate(piv):
        out[c] = M[i][dim]
    return out


# -- root lattice -------------------------------------------------------------

def ht(beta: Sequence[int]) -> int:
    return int(sum(beta))


def leq(b1: Sequence[int], b2: Sequence[int]) -> bool:
    """b1 <= b2 when b2 - b1 has non-negative coefficients."""
    return all(y - x >= 0 for x, y in zip(b1, b2))


def _reachable(A) -> list[set[int]]:
    n = len(A)
    out = []
    for j in range(n):
        seen, stack = set(), [j]
        while stack:
            x = stack.pop()
            for k in range(n):
                if A[x][k] != 0 and k not in seen:
                    seen.add(k)
                    stack.append(k)
        out.append(seen)
    return out


def simplicity_conditions(A) -> bool:
    """rank A = n and every k reachable from every j through nonzero entries."""
    n = _square(A)
    if rank_over_Ar(A) != n:
        return False
    reach = _reachable(A)
    return all(k in reach[j] for j in range(n) for k in range(n))


AFFINE_CORPUS: dict[str, list[list[int]]] = {
    "A1(1)": [[2, -2], [-2, 2]],
    "A2(2)": [[2, -4], [-1, 2]],
    "A2(1)": [[2, -1, -1], [-1, 2, -1], [-1, -1, 2]],
    "C2(1)": [[2, -1, 0], [-2, 2, -2], [0, -1, 2]],
    "D3(2)": [[2, -2, 0], [-1, 2, -1], [0, -2, 2]],
    "G2(1)": [[2, -1, 0], [-1, 2, -3], [0, -1, 2]],
    "D4(3)": [[2, -1, 0], [-1, 2, -1], [0, -3, 2]],
    "A4(2)": [[2, -2, 0], [-1, 2, -2], [0, -1, 2]],
    "A3(1)": [[2, -1, 0, -1], [-1, 2, -1, 0], [0, -1, 2, -1], [-1, 0, -1, 2]],
    "B3(1)": [[2, 0, -1, 0], [0, 2, -1, 0], [-1, -1, 2, -1], [0, 0, -2, 2]],
    "A5(2)": [[2, 0, -1, 0], [0, 2, -1, 0], [-1, -1, 2, -2], [0, 0, -1, 2]],
    "C3(1)": [[2, -1, 0, 0], [-2, 2, -1, 0], [0, -1, 2, -2], [0, 0, -1, 2]],
    "D4(2)": [[2, -2, 0, 0], [-1, 2, -1, 0], [0, -1, 2, -1], [0, 0, -2, 2]],
    "A6(2)": [[2, -2, 0, 0], [-1, 2, -1, 0], [0, -1, 2, -2], [0, 0, -1, 2]],
}
