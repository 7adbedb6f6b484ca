"""Brute-force Lindblad exact diagonalization in the occupation-number basis.

Everything here is the small-system oracle: Jordan-Wigner fermion operators
with their sign strings baked into sparse matrices, Hamiltonians with
arbitrary antisymmetric pairing and a global charging energy, the vectorized
Liouvillian, steady states, the absorber-doubled pure state and its partial
trace, two-time correlations via quantum regression, and the nonreciprocity
checks.  Dimensions are deliberately capped; the closed-form modules are the
production path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .core import OBC, PBC, ModelParams, PairingMatrix, nearest_neighbor_pairing, validate_params
from .errors import (
    DegenerateKernelError,
    DimensionMismatchError,
    OddParityStateError,
    TooManyModesError,
)

MAX_MODES = 16


def _popcounts(dim: int) -> np.ndarray:
    return np.bitwise_count(np.arange(dim, dtype=np.uint32)).astype(np.int64)


@dataclass(frozen=True)
class FockOperator:
    """A sparse operator on the 2^M-dimensional occupation basis.

    ``parity`` records whether the operator preserves fermion-number parity
    ("even"), flips it ("odd"), or does neither ("mixed").
    """

    n_modes: int
    matrix: sp.csr_matrix
    parity: str = field(default="", compare=False)

    def __post_init__(self):
        if not self.parity:
            object.__setattr__(self, "parity", _classify_parity(self.matrix))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def dag(self) -> "FockOperator":
        return FockOperator(self.n_modes, self.matrix.conj().T.tocsr(), self.parity)

    def __matmul__(self, other: "FockOperator") -> "FockOperator":
        return FockOperator(self.n_modes, (self.matrix @ other.matrix).tocsr())

    def __add__(self, other: "FockOperator") -> "FockOperator":
        return FockOperator(self.n_modes, (self.matrix + other.matrix).tocsr())

    def __sub__(self, other: "FockOperator") -> "FockOperator":
        return FockOperator(self.n_modes, (self.matrix - other.matrix).tocsr())

    def __rmul__(self, scalar) -> "FockOperator":
        return FockOperator(self.n_modes, (scalar * self.matrix).tocsr())


def _classify_parity(m: sp.spmatrix) -> str:
    coo = m.tocoo()
    if coo.nnz == 0:
        return "even"
    pr = np.bitwise_count(coo.row.astype(np.uint32)).astype(np.int64) & 1
    pc = np.bitwise_count(coo.col.astype(np.uint32)).astype(np.int64) & 1
    same = pr == pc
    if same.all():
        return "even"
    if (~same).all():
        return "odd"
    return "mixed"


def build_operators(n_modes: int) -> list[FockOperator]:
    """Annihilation operators c_0 .. c_{M-1} with Jordan-Wigner signs.

    Basis state k has mode j occupied iff bit j of k is set; the creation
    string is ordered by increasing mode index, so the sign of c_j on state
    k is (-1)^(number of occupied modes below j).
    """
    if n_modes > MAX_MODES:
        raise TooManyModesError(f"{n_modes} modes exceed the cap of {MAX_MODES}")
    dim = 1 << n_modes
    states = np.arange(dim, dtype=np.int64)
    ops = []
    for j in range(n_modes):
        bit = 1 << j
        occupied = (states & bit) != 0
        cols = states[occupied]
        rows = cols ^ bit
        below = np.bitwise_count((cols & (bit - 1)).astype(np.uint32)).astype(np.int64)
        signs = 1.0 - 2.0 * (below & 1)
        mat = sp.csr_matrix(
            (signs.astype(complex), (rows, cols)), shape=(dim, dim)
        )
        ops.append(FockOperator(n_modes, mat, "odd"))
    return ops


def number_operators(ops: list[FockOperator]) -> list[FockOperator]:
    return [c.dag() @ c for c in ops]


def total_number(n_modes: int) -> FockOperator:
    dim = 1 << n_modes
    return FockOperator(
        n_modes, sp.diags(_popcounts(dim).astype(complex)).tocsr(), "even"
    )


def parity_operator(n_modes: int) -> FockOperator:
    dim = 1 << n_modes
    signs = 1.0 - 2.0 * (_popcounts(dim) & 1)
    return FockOperator(n_modes, sp.diags(signs.astype(complex)).tocsr(), "even")


def build_hamiltonian(pairing, mu: float, e_c: float,
                      ops: list[FockOperator]) -> FockOperator:
    """Hermitian matrix of the pairing chain Hamiltonian.

    H = -mu * sum_j n_j + e_c/(2M) * (sum_j n_j)^2
        + sum_{i<j} (2 D_ij c_i^dag c_j^dag + h.c.)

    where D is the antisymmetric pairing matrix (the factor 2 restores the
    unrestricted double sum over ordered index pairs).
    """
    D = pairing.entries if isinstance(pairing, PairingMatrix) else np.asarray(pairing)
    M = len(ops)
    if D.shape != (M, M):
        raise DimensionMismatchError(f"pairing shape {D.shape} vs {M} modes")
    dim = 1 << M
    occ = _popcounts(dim).astype(float)
    diag = -mu * occ + (e_c / (2.0 * M)) * occ * occ
    H = sp.diags(diag.astype(complex)).tocsr()
    for i in range(M):
        for j in range(i + 1, M):
            if D[i, j] != 0:
                term = (2.0 * D[i, j]) * (ops[i].dag().matrix @ ops[j].dag().matrix)
                H = H + term + term.conj().T
    return FockOperator(M, H.tocsr(), "even")


@dataclass(frozen=True)
class SuperOperator:
    """Vectorized Lindblad generator acting on row-stacked density matrices."""

    dim: int
    matrix: sp.csr_matrix

    @property
    def hilbert_dim(self) -> int:
        return math.isqrt(self.dim)


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho).reshape(-1)


def unvec(v: np.ndarray) -> np.ndarray:
    d = math.isqrt(v.size)
    return np.asarray(v).reshape(d, d)


def build_liouvillian(H: FockOperator, jumps: list[FockOperator],
                      rates) -> SuperOperator:
    """Sparse matrix of d(rho)/dt = -i[H, rho] + sum_j r_j D[L_j] rho.

    Row-stacked vectorization: vec(A rho B) = (A kron B^T) vec(rho).  The
    Jordan-Wigner matrices already carry every fermionic sign, so no extra
    superoperator bookkeeping is required.
    """
    dim = H.dim
    if np.isscalar(rates):
        rates = [rates] * len(jumps)
    if len(rates) != len(jumps):
        raise DimensionMismatchError("one rate per jump operator required")
    eye = sp.identity(dim, dtype=complex, format="csr")
    Hm = H.matrix
    Lv = -1j * (sp.kron(Hm, eye) - sp.kron(eye, Hm.T))
    for op, r in zip(jumps, rates):
        if op.dim != dim:
            raise DimensionMismatchError("jump operator dimension mismatch")
        c = op.matrix
        cdc = (c.conj().T @ c).tocsr()
        Lv = Lv + r * (
            sp.kron(c, c.conj())
            - 0.5 * sp.kron(cdc, eye)
            - 0.5 * sp.kron(eye, cdc.T)
        )
    return SuperOperator(dim * dim, Lv.tocsr())


def smallest_eigenvalues(liouv: SuperOperator, k: int = 4) -> np.ndarray:
    """The k Liouvillian eigenvalues closest to zero (deterministic seed)."""
    A = liouv.matrix
    n = A.shape[0]
    if n <= 1024:
        w = np.linalg.eigvals(A.toarray())
        return w[np.argsort(np.abs(w))[:k]]
    shift = 1e-8
    lu = spla.splu((A - shift * sp.identity(n, dtype=complex, format="csc")).tocsc())
    op_inv = spla.LinearOperator((n, n), matvec=lu.solve, dtype=complex)
    v0 = np.ones(n) / math.sqrt(n)
    w = spla.eigs(A, k=k, sigma=shift, OPinv=op_inv, v0=v0,
                  return_eigenvectors=False)
    return w[np.argsort(np.abs(w))]


def steady_state(liouv: SuperOperator,
                 degeneracy_check: bool | None = None) -> np.ndarray:
    """Unique density matrix in the Liouvillian kernel.

    Up to 4096 vectorized dimensions: shifted inverse iteration on the
    sparse LU factorization, seeded with the maximally mixed state, with a
    spectrum check near zero guarding the uniqueness assumption
    (``degeneracy_check`` defaults to on there).  Beyond that the direct
    factorization is impractical, so the maximally mixed state is evolved
    on the even row/column parity-difference sector (which contains the
    kernel exactly) in geometric time stages until the kernel residual
    drops below 1e-12; the spectrum check is skipped unless forced.

    Raises
    ------
    DegenerateKernelError
        If two or more eigenvalues lie within 1e-10 of zero, or if the
        evolution fallback cannot isolate a kernel vector.
    """
    A = liouv.matrix
    n = A.shape[0]
    d = liouv.hilbert_dim
    if degeneracy_check is None:
        degeneracy_check = n <= 4096
    if degeneracy_check:
        w = smallest_eigenvalues(liouv, k=min(4, d * d - 2) if d * d > 4 else 2)
        if np.sum(np.abs(w) < 1e-10) >= 2:
            raise DegenerateKernelError(
                f"{np.sum(np.abs(w) < 1e-10)} eigenvalues within 1e-10 of zero"
            )
    x = vec(np.eye(d, dtype=complex) / d)
    if n > 4096:
        x = _kernel_by_evolution(A, d, x)
    else:
        lu = spla.splu(
            (A - 1e-9 * sp.identity(n, dtype=complex, format="csc")).tocsc())
        for _ in range(30):
            x = lu.solve(x)
            x = x / np.linalg.norm(x)
            if np.linalg.norm(A @ x) < 1e-13:
                break
    rho = unvec(x)
    rho = 0.5 * (rho + rho.conj().T)
    tr = np.trace(rho)
    if abs(tr) < 1e-12:  # pragma: no cover - kernel vector always has trace
        raise DegenerateKernelError("kernel vector is traceless")
    rho = rho / tr
    evals = np.linalg.eigvalsh(rho)
    if evals.min() < -1e-10:
        raise DegenerateKernelError(
            f"kernel state not positive semidefinite (min eigenvalue {evals.min():.2e})"
        )
    return rho


def _kernel_by_evolution(A, d, x, target=1e-12, t_stage=250.0,
                         max_stages=14):
    """Relax toward the kernel on the even parity-difference sector."""
    n = A.shape[0]
    par = _popcounts(d) & 1
    even = np.nonzero(par[np.arange(n) // d] == par[np.arange(n) % d])[0]
    Ae = A[even][:, even].tocsr()
    xe = x[even]
    for _ in range(max_stages):
        xe = spla.expm_multiply(Ae, xe, start=0.0, stop=t_stage, num=2,
                                endpoint=True)[-1]
        xe = xe / np.linalg.norm(xe)
        if np.linalg.norm(Ae @ xe) < target:
            break
        t_stage *= 2.0
    else:
        raise DegenerateKernelError(
            "evolution fallback did not isolate a kernel vector "
            f"(residual {np.linalg.norm(Ae @ xe):.2e})"
        )
    out = np.zeros(n, dtype=complex)
    out[even] = xe
    return out


# ---------------------------------------------------------------------------
# Absorber-doubled system
# ---------------------------------------------------------------------------
#
# Mode layout: modes 0..L-1 are the physical sites (A block, low bits),
# modes L..2L-1 the absorber sites (B block, high bits).  The composite
# Hamiltonian is H(A) - H(B) plus the unidirectional coupling
# -i*kappa/2 * sum_j (c_jA^dag c_jB - h.c.); the collective jumps are
# sqrt(kappa) (c_jA - c_jB).


@dataclass(frozen=True)
class DoubledSystem:
    L: int
    ops: list[FockOperator]          # 2L annihilators, A block then B block
    hamiltonian: FockOperator        # cascaded composite Hamiltonian
    jumps: list[FockOperator]        # c_jA - c_jB (rate kappa each)
    kappa: float

    @property
    def a_ops(self) -> list[FockOperator]:
        return self.ops[: self.L]

    @property
    def b_ops(self) -> list[FockOperator]:
        return self.ops[self.L:]

    def dark_ops(self) -> list[FockOperator]:
        inv_sqrt2 = 1.0 / math.sqrt(2.0)
        return [
            FockOperator(2 * self.L,
                         (inv_sqrt2 * (a.matrix + b.matrix)).tocsr(), "odd")
            for a, b in zip(self.a_ops, self.b_ops)
        ]


def _resolve_pairing(params_or_pairing, mu, e_c, kappa):
    if isinstance(params_or_pairing, ModelParams):
        p = validate_params(params_or_pairing)
        pm = nearest_neighbor_pairing(p.L, p.delta, p.bc)
        return pm, p.mu, p.e_c, p.kappa
    pm = params_or_pairing
    if not isinstance(pm, PairingMatrix):
        pm = PairingMatrix.from_entries(pm)
    if mu is None or e_c is None or kappa is None:
        raise ValueError("mu, e_c, kappa are required with an explicit pairing matrix")
    return pm, mu, e_c, kappa


def build_doubled_system(params_or_pairing, mu=None, e_c=None,
                         kappa=None) -> DoubledSystem:
    pm, mu, e_c, kappa = _resolve_pairing(params_or_pairing, mu, e_c, kappa)
    L = pm.entries.shape[0]
    if 2 * L > MAX_MODES:
        raise TooManyModesError(f"doubled system needs {2 * L} modes (cap {MAX_MODES})")
    ops = build_operators(2 * L)
    a_ops, b_ops = ops[:L], ops[L:]
    dim = 1 << (2 * L)
    H = sp.csr_matrix((dim, dim), dtype=complex)
    H = _add_block_hamiltonian(H, pm.entries, mu, e_c, a_ops, +1.0)
    H = _add_block_hamiltonian(H, pm.entries, mu, e_c, b_ops, -1.0)
    for a, b in zip(a_ops, b_ops):
        t = a.dag().matrix @ b.matrix
        H = H + (-0.5j * kappa) * (t - t.conj().T)
    hamiltonian = FockOperator(2 * L, H.tocsr(), "even")
    jumps = [
        FockOperator(2 * L, (a.matrix - b.matrix).tocsr(), "odd")
        for a, b in zip(a_ops, b_ops)
    ]
    return DoubledSystem(L=L, ops=ops, hamiltonian=hamiltonian,
                         jumps=jumps, kappa=kappa)


def _add_block_hamiltonian(H, D, mu, e_c, block_ops, sign):
    L = len(block_ops)
    dim = H.shape[0]
    occ = np.zeros(dim)
    for c in block_ops:
        occ += (c.dag() @ c).matrix.diagonal().real
    H = H + sign * sp.diags((-mu * occ + (e_c / (2.0 * L)) * occ * occ).astype(complex))
    for i in range(L):
        for j in range(i + 1, L):
            if D[i, j] != 0:
                t = (2.0 * D[i, j]) * (
                    block_ops[i].dag().matrix @ block_ops[j].dag().matrix
                )
                H = H + sign * (t + t.conj().T)
    return H


def build_cqa_state(params_or_pairing, mu=None, e_c=None, kappa=None,
                    system: DoubledSystem | None = None) -> np.ndarray:
    """Normalized pure steady state of the absorber-doubled system.

    The state is the power series sum_n (g_n / n!) (P^dag)^n |0> with
    P^dag = sum_{i<j} 2 D_ij c_{i,+}^dag c_{j,+}^dag built from dark modes
    and g_n = 1 / prod_{m=1..n} (mu~ - m e_c / L); the series terminates on
    its own when no further pair fits (and at half filling on even rings,
    where the two maximal tilings cancel).
    """
    if system is None:
        system = build_doubled_system(params_or_pairing, mu, e_c, kappa)
    pm, mu, e_c, kappa = _resolve_pairing(params_or_pairing, mu, e_c, kappa)
    L = system.L
    mu_tilde = complex(mu, 0.5 * kappa)
    dark = system.dark_ops()
    dim = 1 << (2 * L)
    pair_raise = sp.csr_matrix((dim, dim), dtype=complex)
    D = pm.entries
    for i in range(L):
        for j in range(i + 1, L):
            if D[i, j] != 0:
                pair_raise = pair_raise + (2.0 * D[i, j]) * (
                    dark[i].dag().matrix @ dark[j].dag().matrix
                )
    psi = np.zeros(dim, dtype=complex)
    psi[0] = 1.0
    component = np.zeros(dim, dtype=complex)
    component[0] = 1.0
    coeff = 1.0 + 0j
    for n in range(1, L // 2 + 1):
        component = pair_raise @ component
        if np.linalg.norm(component) == 0.0:
            break
        coeff = coeff / (mu_tilde - n * e_c / L)
        psi += (coeff / math.factorial(n)) * component
    return psi / np.linalg.norm(psi)


@dataclass(frozen=True)
class DarkReport:
    hamiltonian_residual: float
    jump_residuals: np.ndarray

    @property
    def max_residual(self) -> float:
        return max(self.hamiltonian_residual, float(self.jump_residuals.max()))


def verify_dark_conditions(state: np.ndarray, params_or_pairing, mu=None,
                           e_c=None, kappa=None) -> DarkReport:
    """Residual norms of H_cqa |psi> and of every collective jump on |psi>."""
    system = build_doubled_system(params_or_pairing, mu, e_c, kappa)
    h_res = float(np.linalg.norm(system.hamiltonian.matrix @ state))
    j_res = np.array([np.linalg.norm(j.matrix @ state) for j in system.jumps])
    return DarkReport(hamiltonian_residual=h_res, jump_residuals=j_res)


def partial_trace_absorber(state: np.ndarray) -> np.ndarray:
    """Reduced density matrix of the physical block of a doubled pure state.

    Valid as an ordinary blocked partial trace because the state is required
    to have even total parity and the mode ordering is blocked (all physical
    modes below all absorber modes), so no Jordan-Wigner string crosses the
    cut for physical-block observables.
    """
    n_modes = int(round(math.log2(state.size)))
    if state.size != 1 << n_modes or n_modes % 2:
        raise DimensionMismatchError("state must span 2L modes")
    L = n_modes // 2
    occ = _popcounts(state.size)
    odd_weight = float(np.linalg.norm(state[(occ & 1) == 1]))
    if odd_weight > 1e-12 * max(1.0, float(np.linalg.norm(state))):
        raise OddParityStateError(f"odd-parity weight {odd_weight:.2e}")
    m = state.reshape(1 << L, 1 << L)  # [absorber bits, physical bits]
    return np.einsum("ba,bc->ac", m, m.conj())


def trace_distance(rho1: np.ndarray, rho2: np.ndarray) -> float:
    return 0.5 * float(np.abs(np.linalg.eigvalsh(rho1 - rho2)).sum())


# ---------------------------------------------------------------------------
# Two-time correlations and hidden time-reversal checks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CorrelationSeries:
    times: np.ndarray
    values: np.ndarray


def two_time_correlation(liouv: SuperOperator, rho_ss: np.ndarray,
                         X: FockOperator, Y: FockOperator,
                         times: np.ndarray) -> CorrelationSeries:
    """<X(t) Y(0)> on a uniform time grid via quantum regression.

    Propagates vec(Y rho_ss) with the error-controlled sparse
    matrix-exponential action and traces against X at each grid point.
    """
    times = np.asarray(times, dtype=float)
    if times.size < 2 or times[0] != 0.0:
        raise ValueError("times must be a grid starting at 0")
    steps = np.diff(times)
    if not np.allclose(steps, steps[0], rtol=1e-12, atol=1e-15):
        raise ValueError("times must be uniformly spaced")
    v0 = vec(Y.matrix @ rho_ss)
    vt = spla.expm_multiply(liouv.matrix, v0, start=times[0], stop=times[-1],
                            num=times.size, endpoint=True)
    Xm = X.matrix
    values = np.array([np.sum((Xm @ unvec(v)).diagonal()) for v in vt])
    return CorrelationSeries(times=times, values=values)


@dataclass(frozen=True)
class PerturbationSpec:
    """Incoherent pump D[c_site^dag] with rate gamma_p on one site (1-based)."""

    site: int = 1
    gamma_p: float = 0.0

    def __post_init__(self):
        if self.gamma_p < 0:
            raise ValueError("gamma_p must be >= 0")


@dataclass(frozen=True)
class HtrsReport:
    gamma_values: np.ndarray
    asymmetry: np.ndarray          # max_t |<c_i(t)c_j(0)> + <c_j(t)c_i(0)>|
    h_eff_mismatch: float          # max_t |<H_eff(t)c_j(0)> - <c_j(t)H_eff(0)>|

    @property
    def monotone(self) -> bool:
        return bool(np.all(np.diff(self.asymmetry) > 0))


def _single_system(params: ModelParams):
    p = validate_params(params)
    ops = build_operators(p.L)
    H = build_hamiltonian(nearest_neighbor_pairing(p.L, p.delta, p.bc),
                          p.mu, p.e_c, ops)
    return ops, H


def htrs_breaking(params: ModelParams, pert: PerturbationSpec,
                  times: np.ndarray, sites: tuple[int, int] = (1, 2),
                  gamma_fractions: tuple[float, ...] = (0.0, 0.5, 1.0)) -> HtrsReport:
    """Pair-swap asymmetry of <c_i(t) c_j(0)> under weak incoherent pumping.

    For each pump rate in ``gamma_fractions * pert.gamma_p`` the steady state
    of the perturbed Lindbladian is recomputed and the forward and reversed
    correlators compared; without pumping the sum vanishes (Onsager
    antisymmetry for odd jump operators), with pumping it does not.
    """
    ops, H = _single_system(params)
    i, j = sites[0] - 1, sites[1] - 1
    gammas = np.array(sorted({f * pert.gamma_p for f in gamma_fractions}))
    asym = []
    h_eff = H.matrix - 0.5j * params.kappa * total_number(params.L).matrix
    h_eff_op = FockOperator(params.L, h_eff.tocsr())
    h_mismatch = 0.0
    for g in gammas:
        jumps = list(ops)
        rates = [params.kappa] * len(ops)
        if g > 0:
            jumps.append(ops[pert.site - 1].dag())
            rates.append(g)
        liouv = build_liouvillian(H, jumps, rates)
        rho = steady_state(liouv, degeneracy_check=False)
        fwd = two_time_correlation(liouv, rho, ops[i], ops[j], times)
        rev = two_time_correlation(liouv, rho, ops[j], ops[i], times)
        asym.append(float(np.abs(fwd.values + rev.values).max()))
        if g == 0.0:
            a = two_time_correlation(liouv, rho, h_eff_op, ops[j], times)
            b = two_time_correlation(liouv, rho, ops[j], h_eff_op, times)
            h_mismatch = float(np.abs(a.values - b.values).max())
    return HtrsReport(gamma_values=gammas, asymmetry=np.array(asym),
                      h_eff_mismatch=h_mismatch)


# ---------------------------------------------------------------------------
# Cascade nonreciprocity
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CascadeReport:
    times: np.ndarray
    max_system_deviation: float    # physical-block (upstream) observables
    max_absorber_deviation: float  # downstream observable


def cascade_nonreciprocity_check(params: ModelParams, absorber_tweak: float,
                                 times: np.ndarray | None = None) -> CascadeReport:
    """Detune the absorber and compare upstream vs downstream observables.

    Two doubled systems are evolved from vacuum, identical except that the
    absorber-block chemical potential is scaled by (1 + absorber_tweak).
    Upstream (physical-block, parity-even) observables must not move;
    at least one absorber observable must.
    """
    p = validate_params(params)
    if 2 * p.L > 12:
        raise TooManyModesError("nonreciprocity check capped at 12 total modes")
    if times is None:
        times = np.linspace(0.0, 5.0 / p.kappa, 11)
    base = build_doubled_system(p)
    tweaked = _build_detuned_absorber(p, absorber_tweak)
    obs_dev = []
    for system in (base, tweaked):
        liouv = build_liouvillian(system.hamiltonian, system.jumps,
                                  [p.kappa] * p.L)
        dim = 1 << (2 * p.L)
        rho0 = np.zeros((dim, dim), dtype=complex)
        rho0[0, 0] = 1.0
        vt = spla.expm_multiply(liouv.matrix, vec(rho0), start=times[0],
                                stop=times[-1], num=times.size, endpoint=True)
        sys_obs = [n.matrix for n in number_operators(system.a_ops)]
        sys_obs.append((system.a_ops[0].matrix @ system.a_ops[1].matrix).tocsr())
        abs_obs = [number_operators(system.b_ops)[0].matrix]
        rows = []
        for v in vt:
            r = unvec(v)
            rows.append([np.sum((o @ r).diagonal()) for o in sys_obs + abs_obs])
        obs_dev.append(np.array(rows))
    diff = np.abs(obs_dev[0] - obs_dev[1])
    return CascadeReport(
        times=times,
        max_system_deviation=float(diff[:, :-1].max()),
        max_absorber_deviation=float(diff[:, -1].max()),
    )


def _build_detuned_absorber(p: ModelParams, tweak: float) -> DoubledSystem:
    pm = nearest_neighbor_pairing(p.L, p.delta, p.bc)
    L = p.L
    ops = build_operators(2 * L)
    a_ops, b_ops = ops[:L], ops[L:]
    dim = 1 << (2 * L)
    H = sp.csr_matrix((dim, dim), dtype=complex)
    H = _add_block_hamiltonian(H, pm.entries, p.mu, p.e_c, a_ops, +1.0)
    H = _add_block_hamiltonian(H, pm.entries, p.mu * (1.0 + tweak), p.e_c,
                               b_ops, -1.0)
    for a, b in zip(a_ops, b_ops):
        t = a.dag().matrix @ b.matrix
        H = H + (-0.5j * p.kappa) * (t - t.conj().T)
    jumps = [
        FockOperator(2 * L, (a.matrix - b.matrix).tocsr(), "odd")
        for a, b in zip(a_ops, b_ops)
    ]
    return DoubledSystem(L=L, ops=ops,
                         hamiltonian=FockOperator(2 * L, H.tocsr(), "even"),
                         jumps=jumps, kappa=p.kappa)
