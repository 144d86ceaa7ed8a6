"""Dense complex linear-operator substrate.

Density matrices, superoperators acting on column-stacked vectorizations,
matrix functions, norms, spectra and steady-state extraction.  Everything is
dense; the intended scale is n <= 7 qubits for full-Liouvillian eigensolves
and n <= 10 for channel iteration.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-10
PSD_TOL = 1e-10

# Hard caps for dense work (dim 4^n for a Liouvillian, 2^n for a state).
MAX_QUBITS_EIGENSOLVE = 7
MAX_QUBITS_CHANNEL = 10


def vec(m: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization: vec(X rho Y) = (Y^T (x) X) vec(rho)."""
    return np.asarray(m).flatten(order="F")


def unvec(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v)
    n = int(round(np.sqrt(v.size)))
    if n * n != v.size:
        raise ValueError(f"cannot unvec a vector of length {v.size}")
    return v.reshape((n, n), order="F")


def spectral_norm(m: np.ndarray) -> float:
    """Largest singular value."""
    return float(np.linalg.norm(m, 2))


def frobenius_norm(m: np.ndarray) -> float:
    return float(np.linalg.norm(m))


def trace_norm(m: np.ndarray) -> float:
    """||M||_1 = Tr sqrt(M^dag M), the unscaled trace norm."""
    return float(np.sum(np.linalg.svd(m, compute_uv=False)))


def trace_distance(a, b) -> float:
    """(1/2)||a - b||_1.  Use `trace_norm` for the unscaled convention."""
    return 0.5 * trace_norm(_matrix(a) - _matrix(b))


def _matrix(x) -> np.ndarray:
    return x.matrix if isinstance(x, DensityMatrix) else np.asarray(x)


@dataclass(frozen=True)
class DensityMatrix:
    """N x N complex Hermitian PSD unit-trace state, rho[a, b] = <a|rho|b>."""

    matrix: np.ndarray
    basis_tag: str = "computational"

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def validate(self) -> "DensityMatrix":
        m = self.matrix
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("density matrix must be square")
        scale = max(spectral_norm(m), 1e-300)
        herm = np.abs(m - m.conj().T).max()
        if herm > HERMITICITY_TOL * scale:
            raise ValueError(f"not Hermitian: defect {herm:.3e}")
        tr = np.trace(m)
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"trace deviates from 1 by {abs(tr - 1.0):.3e}")
        lo = float(np.linalg.eigvalsh(0.5 * (m + m.conj().T)).min())
        if lo < -PSD_TOL:
            raise ValueError(f"negative eigenvalue {lo:.3e}")
        return self

    def ground_overlap(self, index: int = 0) -> float:
        return float(self.matrix[index, index].real)

    @classmethod
    def pure(cls, psi: np.ndarray, basis_tag: str = "computational") -> "DensityMatrix":
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()), basis_tag)

    @classmethod
    def uniform_superposition(cls, n: int) -> "DensityMatrix":
        return cls.pure(np.full(2**n, 1.0 / np.sqrt(2**n)))

    @classmethod
    def basis_state(cls, dim: int, index: int) -> "DensityMatrix":
        psi = np.zeros(dim)
        psi[index] = 1.0
        return cls.pure(psi)


@dataclass(frozen=True)
class Superoperator:
    """N^2 x N^2 matrix acting on column-stacked density matrices."""

    matrix: np.ndarray
    kind: str = "liouvillian"  # or "channel"

    @property
    def dim(self) -> int:
        """Hilbert-space dimension N (matrix is N^2 x N^2)."""
        return int(round(np.sqrt(self.matrix.shape[0])))

    def apply(self, rho) -> np.ndarray:
        return unvec(self.matrix @ vec(_matrix(rho)))

    def trace_functional_defect(self) -> float:
        """max |vec(I)^dag L| -- zero iff Tr(L[rho]) = 0 for all rho."""
        n = self.dim
        w = vec(np.eye(n)).conj() @ self.matrix
        scale = max(1.0, float(np.abs(self.matrix).max()))
        return float(np.abs(w).max() / scale)


def liouvillian_matrix(h: np.ndarray | None, jump_ops, include_hamiltonian: bool) -> np.ndarray:
    n = jump_ops[0].shape[0] if jump_ops else h.shape[0]
    eye = np.eye(n)
    out = np.zeros((n * n, n * n), dtype=complex)
    if include_hamiltonian:
        out += -1j * (np.kron(eye, h) - np.kron(h.T, eye))
    for L in jump_ops:
        L = np.asarray(L, dtype=complex)
        ldl = L.conj().T @ L
        out += np.kron(L.conj(), L)
        out -= 0.5 * np.kron(eye, ldl)
        out -= 0.5 * np.kron(ldl.T, eye)
    return out


def build_liouvillian(h: np.ndarray | None, jump_ops, include_hamiltonian: bool = False) -> Superoperator:
    """Assemble L = [flag] L_H + L_L in the column-stacking convention.

    `h` must be Hermitian to relative 1e-12; all operators must share one
    dimension.
    """
    jump_ops = [np.asarray(L, dtype=complex) for L in jump_ops]
    if h is None:
        if include_hamiltonian:
            raise ValueError("include_hamiltonian=True requires a Hamiltonian")
        if not jump_ops:
            raise ValueError("need a Hamiltonian or at least one jump operator")
        h = np.zeros_like(jump_ops[0])
    h = np.asarray(h, dtype=complex)
    n = h.shape[0]
    if h.shape != (n, n):
        raise ValueError("Hamiltonian must be square")
    for L in jump_ops:
        if L.shape != (n, n):
            raise ValueError(f"jump operator shape {L.shape} does not match dim {n}")
    scale = max(spectral_norm(h), 1.0)
    if np.abs(h - h.conj().T).max() > HERMITICITY_TOL * scale:
        raise ValueError("Hamiltonian is not Hermitian at tolerance 1e-12")
    return Superoperator(liouvillian_matrix(h, jump_ops, include_hamiltonian), "liouvillian")


def apply_dissipator(jump_op: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """L rho L^dag - (1/2){L^dag L, rho} without forming the superoperator."""
    ldl = jump_op.conj().T @ jump_op
    return jump_op @ rho @ jump_op.conj().T - 0.5 * (ldl @ rho + rho @ ldl)


def evolve_exact(liouvillian: Superoperator, rho0, t: float) -> DensityMatrix:
    """unvec(exp(L t) vec(rho0)) via scaling-and-squaring Pade expm."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    rho0 = _matrix(rho0)
    basis = rho0.basis_tag if isinstance(rho0, DensityMatrix) else "computational"
    propagator = scipy.linalg.expm(liouvillian.matrix * t)
    out = unvec(propagator @ vec(rho0))
    if not np.all(np.isfinite(out)):
        raise RuntimeError(
            f"matrix exponential did not converge: non-finite entries at t={t}, "
            f"||L t|| ~ {spectral_norm(liouvillian.matrix) * t:.3e}"
        )
    return DensityMatrix(out, basis)


def steady_states(liouvillian: Superoperator, zero_tol: float | None = None) -> list[DensityMatrix]:
    """Orthonormal basis of the numerical null space of a Liouvillian.

    Null vectors are reshaped and Hermitized; trace-normalized when the trace
    is not numerically zero (traceless kernel elements are returned with unit
    Frobenius norm instead).
    """
    if liouvillian.kind != "liouvillian":
        raise ValueError("steady_states expects kind='liouvillian'")
    m = liouvillian.matrix
    u, s, vh = np.linalg.svd(m)
    del u
    tol = zero_tol if zero_tol is not None else 1e-9 * max(s.max(), 1e-300)
    null = [vh[i].conj() for i in range(len(s)) if s[i] < tol]
    if not null:
        warnings.warn(
            "no steady state found; every Lindbladian has at least one -- "
            "zero_tol is probably misconfigured",
            stacklevel=2,
        )
    out = []
    for v in null:
        rho = unvec(v)
        rho = 0.5 * (rho + rho.conj().T)
        tr = np.trace(rho).real
        if abs(tr) > 1e-7:
            rho = rho / tr
        else:
            rho = rho / frobenius_norm(rho)
        out.append(DensityMatrix(rho))
    return out


@dataclass(frozen=True)
class SpectrumReport:
    """Full Liouvillian spectrum with the relaxation eigenvalue alpha*.

    alpha* is the eigenvalue with the largest real part among those not
    classified as zero modes; `alpha_star is None` flags generators with no
    decaying mode (e.g. purely Hamiltonian ones).
    """

    eigenvalues: np.ndarray
    zero_modes: list[int]
    alpha_star: complex | None
    zero_tol: float
    eigenvectors: np.ndarray | None = field(default=None, repr=False)

    @property
    def mixing_time(self) -> float:
        if self.alpha_star is None:
            raise ValueError("no decaying eigenvalue; mixing time undefined")
        return 1.0 / abs(self.alpha_star.real)


def _spectrum_report(eigenvalues, zero_tol, eigenvectors=None) -> SpectrumReport:
    zero = [
        i
        for i, lam in enumerate(eigenvalues)
        if abs(lam.real) < zero_tol and abs(lam.imag) < zero_tol
    ]
    zero_set = set(zero)
    nonzero = [i for i in range(len(eigenvalues)) if i not in zero_set]
    alpha = None
    if nonzero:
        best = max(nonzero, key=lambda i: eigenvalues[i].real)
        if eigenvalues[best].real < -zero_tol:
            alpha = complex(eigenvalues[best])
        # otherwise a non-decaying, non-zero mode exists (e.g. a purely
        # imaginary pair of a Hamiltonian generator): alpha* stays undefined
    return SpectrumReport(np.asarray(eigenvalues), zero, alpha, zero_tol, eigenvectors)


def mixing_rate(
    liouvillian: Superoperator,
    zero_tol: float | None = None,
    want_eigenvectors: bool = False,
) -> SpectrumReport:
    """Full eigendecomposition of the Liouvillian and alpha* extraction.

    Liouvillians are non-normal; a defective matrix surfaces as a warning on
    the report, not an exception.
    """
    if liouvillian.kind != "liouvillian":
        raise ValueError("mixing_rate expects kind='liouvillian'")
    m = liouvillian.matrix
    if zero_tol is None:
        zero_tol = 1e-9 * max(spectral_norm(m), 1e-300)
    if want_eigenvectors:
        lam, vecs = np.linalg.eig(m)
    else:
        lam, vecs = np.linalg.eigvals(m), None
    return _spectrum_report(lam, zero_tol, vecs)


def krylov_invariant_spectrum(
    apply_superop,
    seed_matrix: np.ndarray,
    max_dim: int = 64,
    breakdown_tol: float = 1e-12,
):
    """Exact spectrum of a superoperator restricted to the invariant subspace
    generated by `seed_matrix`.

    Arnoldi with full reorthogonalization; terminates on happy breakdown,
    which occurs at the (small) dimension of the invariant subspace for the
    structured Liouvillians used here.  Returns (eigenvalues, modes) where
    modes[k] is the N x N eigenmatrix for eigenvalues[k].  The eigenvalues
    are a subset of the full operator spectrum up to roundoff.

    `apply_superop` maps an N x N matrix to an N x N matrix.
    """
    seed = np.asarray(seed_matrix, dtype=complex)
    n = seed.shape[0]
    v0 = vec(seed)
    scale = np.linalg.norm(v0)
    basis = [v0 / scale]
    hess = np.zeros((max_dim + 1, max_dim), dtype=complex)
    k = 0
    op_scale = 0.0
    for j in range(max_dim):
        w = vec(apply_superop(unvec(basis[j])))
        op_scale = max(op_scale, float(np.linalg.norm(w)))
        for _ in range(2):  # classical Gram-Schmidt, twice
            coeffs = np.array([np.vdot(b, w) for b in basis])
            for i, b in enumerate(basis):
                w = w - coeffs[i] * b
            hess[: len(coeffs), j] += coeffs
        nrm = np.linalg.norm(w)
        k = j + 1
        if nrm <= breakdown_tol * max(op_scale, 1e-300):
            break
        hess[j + 1, j] = nrm
        basis.append(w / nrm)
    else:
        raise RuntimeError(f"no invariant subspace within {max_dim} Krylov steps")
    h = hess[:k, :k]
    lam, y = np.linalg.eig(h)
    vmat = np.stack(basis[:k], axis=1)
    modes = [unvec(vmat @ y[:, i]) for i in range(k)]
    return lam, modes


def observable_relaxation_rate(
    apply_superop,
    rho0: np.ndarray,
    observable: np.ndarray,
    zero_tol: float = 1e-9,
    overlap_tol: float = 1e-9,
) -> complex:
    """Slowest decaying eigenvalue that the given observable actually sees.

    The dynamics from rho0 are confined to the invariant subspace generated
    by rho0; among its (exact) eigenmodes, modes with Tr(O^dag m) ~ 0 never
    contribute to Tr(O rho(t)) and are skipped.  This is the relaxation rate
    of the observable's trajectory, which for degenerate search Liouvillians
    differs from the raw spectral gap (coherence sectors can decay slower
    without ever entering the populations).
    """
    lam, modes = krylov_invariant_spectrum(apply_superop, rho0)
    scale = max(np.abs(lam).max(), 1e-300)
    best = None
    for ev, mode in zip(lam, modes):
        if abs(ev) < zero_tol * scale:
            continue
        weight = abs(np.sum(observable.conj() * mode)) / max(
            frobenius_norm(mode), 1e-300
        )
        if weight < overlap_tol:
            continue
        if best is None or ev.real > best.real:
            best = complex(ev)
    if best is None:
        raise ValueError("no decaying mode overlaps the observable")
    return best


def choi_matrix(channel: Superoperator) -> np.ndarray:
    """Unnormalized Choi matrix sum_ij |i><j| (x) Phi(|i><j|)."""
    n = channel.dim
    out = np.zeros((n * n, n * n), dtype=complex)
    for i in range(n):
        for j in range(n):
            e = np.zeros((n, n), dtype=complex)
            e[i, j] = 1.0
            out[i * n : (i + 1) * n, j * n : (j + 1) * n] = channel.apply(e)
    return out


def channel_cptp_defects(channel: Superoperator) -> tuple[float, float]:
    """(trace-preservation defect, CP defect = max(0, -min Choi eigenvalue))."""
    n = channel.dim
    choi = choi_matrix(channel)
    tp = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            tp[i, j] = np.trace(choi[i * n : (i + 1) * n, j * n : (j + 1) * n])
    tp_defect = float(np.abs(tp - np.eye(n)).max())
    lo = float(np.linalg.eigvalsh(0.5 * (choi + choi.conj().T)).min())
    herm = float(np.abs(choi - choi.conj().T).max())
    return max(tp_defect, herm), max(0.0, -lo)


def random_density_matrix(dim: int, rng: np.random.Generator) -> DensityMatrix:
    """Ginibre-induced random mixed state."""
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = g @ g.conj().T
    return DensityMatrix(rho / np.trace(rho).real)
