"""Fourier-collocation operators and their spectra.

Dense matrices for L+, L-, the 2x2 block operator H, and the linearized
evolution generator dH = diag(d/dxi) H, plus Morse-index counts, kernel
alignments, the full nonsymmetric eigensolve with Krein signatures, and
pseudo-inverse pairings used as the independent oracle for the quadrature
pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .waves import WaveParams, eval_profile, eval_profile_derivatives

__all__ = [
    "OperatorMatrix",
    "SpectrumReport",
    "EigensolveError",
    "assemble",
    "assemble_operator",
    "morse_index",
    "kernel_vector",
    "kernel_alignment",
    "unstable_modes",
    "unstable_eigenmode",
    "pseudo_inverse_apply",
    "dmatrix_via_collocation",
    "hcal_generalized_pairing",
]

OPERATOR_KINDS = ("Lplus", "Lminus", "Hcal", "dHcal")
SYMMETRIC_KINDS = ("Lplus", "Lminus", "Hcal")

# Dimension of the zero cluster of the discretized dHcal: the 4-dimensional
# generalized kernel (e1, e2, the kernel pair (psi', phi'), and the e3 chain)
# plus 2 artifacts of the zeroed Nyquist row of the spectral derivative.
ZERO_CLUSTER_SIZE = 6


class EigensolveError(RuntimeError):
    """Dense eigensolve failed to converge."""


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    kind: str
    size: int
    matrix: np.ndarray
    params: WaveParams | None
    c: float = 1.0


def _fourier_diff_matrices(N: int, L: float):
    """Dense spectral derivative matrices D1 (Nyquist zeroed) and D2."""
    k = 2.0 * np.pi * np.fft.fftfreq(N, d=L / N)
    F = np.fft.fft(np.eye(N), axis=0)
    k1 = k.copy()
    k1[N // 2] = 0.0
    D1 = np.real(np.fft.ifft(1j * k1[:, None] * F, axis=0))
    D2 = np.real(np.fft.ifft(-(k[:, None] ** 2) * F, axis=0))
    return D1, D2


def assemble_operator(kind: str, L: float, c: float, psi: np.ndarray) -> OperatorMatrix:
    """Collocation matrix of the requested operator from raw profile samples."""
    if kind not in OPERATOR_KINDS:
        raise ValueError(f"unknown operator kind {kind!r}")
    psi = np.asarray(psi, dtype=float)
    N = psi.size
    D1, D2 = _fourier_diff_matrices(N, L)

    if kind == "Lplus":
        A = -D2 + np.diag(c - 1.5 * psi**2 / c)
        A = 0.5 * (A + A.T)
    elif kind == "Lminus":
        A = -D2 + np.diag(c - 0.5 * psi**2 / c)
        A = 0.5 * (A + A.T)
    else:
        Lm = -D2 + np.diag(c - 0.5 * psi**2 / c)
        Lm = 0.5 * (Lm + Lm.T)
        H = np.block([[Lm, -np.diag(psi)], [-np.diag(psi), c * np.eye(N)]])
        if kind == "Hcal":
            A = H
        else:  # dHcal
            Z = np.zeros((N, N))
            A = np.block([[D1, Z], [Z, D1]]) @ H
    return OperatorMatrix(kind=kind, size=A.shape[0], matrix=A, params=None, c=float(c))


def assemble(kind: str, p: WaveParams, N: int = 256) -> OperatorMatrix:
    """Collocation matrix for the wave profile of p on an N-point grid."""
    if N < 128 or (N & (N - 1)) != 0:
        raise ValueError(f"N must be a power of two >= 128 (got {N})")
    x = np.arange(N) * (p.L / N)
    psi, _ = eval_profile(p, x)
    op = assemble_operator(kind, p.L, p.c, psi)
    return OperatorMatrix(kind=kind, size=op.size, matrix=op.matrix, params=p, c=op.c)


def morse_index(m: OperatorMatrix, zero_tol: float | None = None):
    """(n_negative, n_zero) of a symmetric operator matrix.

    Default zero_tol is 1e-6 times the operator's physical scale max(1, |c|):
    the kernel eigenvalue sits at the eigensolver noise floor (eps times the
    spectral radius, <= 1e-8 here) while the smallest genuinely nonzero
    eigenvalues are >= 1e-4 c across the sweep range, so the split is robust.
    (A spectral-radius anchor would grow like N^2 and swallow small physical
    eigenvalues; see NOTES.md.)
    """
    if m.kind not in SYMMETRIC_KINDS:
        raise ValueError(f"morse_index requires a symmetric kind, got {m.kind!r}")
    lam = np.linalg.eigvalsh(m.matrix)
    if zero_tol is None:
        zero_tol = 1e-6 * max(1.0, abs(m.c))
    n_neg = int(np.sum(lam < -zero_tol))
    n_zero = int(np.sum(np.abs(lam) <= zero_tol))
    return n_neg, n_zero


def kernel_vector(m: OperatorMatrix) -> np.ndarray:
    """Eigenvector of the smallest-|eigenvalue| mode of a symmetric operator."""
    lam, vec = np.linalg.eigh(m.matrix)
    return vec[:, int(np.argmin(np.abs(lam)))]


def kernel_alignment(m: OperatorMatrix, reference: np.ndarray) -> float:
    """|cos angle| between the near-kernel eigenvector and a reference vector."""
    v = kernel_vector(m)
    r = np.asarray(reference, dtype=float)
    return float(abs(v @ r) / (np.linalg.norm(v) * np.linalg.norm(r)))


# ---------------------------------------------------------------------------
# pseudo-inverse pairings (the oracle for the quadrature pipeline)

def pseudo_inverse_apply(m: OperatorMatrix, f: np.ndarray) -> np.ndarray:
    """Solve m x = f on the orthogonal complement of the near-kernel mode.

    The smallest-|eigenvalue| direction is dropped; for even right-hand sides
    this reproduces the even periodic inverse exactly (the kernel is odd).
    """
    lam, vec = np.linalg.eigh(m.matrix)
    inv = 1.0 / lam
    inv[int(np.argmin(np.abs(lam)))] = 0.0
    return vec @ (inv * (vec.T @ np.asarray(f, dtype=float)))


def dmatrix_via_collocation(p: WaveParams, N: int = 512) -> np.ndarray:
    """Independent D matrix: solve H e_i = rhs_i off-kernel and pair on the grid.

    Uses only the collocation H and trapezoid quadrature; shares nothing with
    the quadrature pipeline except the wave profile itself.
    """
    x = np.arange(N) * (p.L / N)
    psi, phi = eval_profile(p, x)
    H = assemble_operator("Hcal", p.L, p.c, psi)
    w = p.L / N
    one = np.ones(N)
    zero = np.zeros(N)
    rhs = [np.concatenate([one, zero]),
           np.concatenate([zero, one]),
           np.concatenate([psi, phi])]
    sols = [pseudo_inverse_apply(H, r) for r in rhs]
    D = np.empty((3, 3))
    for i, ri in enumerate(rhs):
        for j, ej in enumerate(sols):
            D[i, j] = w * float(ri @ ej)
    return 0.5 * (D + D.T)


def hcal_generalized_pairing(p: WaveParams, N: int = 512) -> float:
    """<H e1, e1> computed spectrally: solve H x = (1,0)^T off-kernel, pair with the rhs."""
    x = np.arange(N) * (p.L / N)
    psi, _ = eval_profile(p, x)
    H = assemble_operator("Hcal", p.L, p.c, psi)
    rhs = np.concatenate([np.ones(N), np.zeros(N)])
    sol = pseudo_inverse_apply(H, rhs)
    return (p.L / N) * float(rhs @ sol)


# ---------------------------------------------------------------------------
# full spectrum of dHcal

@dataclass(frozen=True, eq=False)
class SpectrumReport:
    """Eigenvalue lists and index counts for the linearized evolution generator."""

    params: WaveParams
    N: int
    eigenvalues: np.ndarray          # nonzero spectrum, zero cluster excluded
    zero_cluster: np.ndarray         # the ZERO_CLUSTER_SIZE smallest-|.| eigenvalues
    n_Lplus: tuple
    n_H: tuple
    kernel_overlap_Lplus: float
    kernel_overlap_H: float
    k_r: int
    k_c: int
    krein_negative: int
    lambda_max_real: float
    symmetry_residual: float
    krein_signs: list = field(default_factory=list)

    def count_identity_lhs(self) -> int:
        return self.k_r + 2 * self.k_c + 2 * self.krein_negative

    def n_H_minus_nD(self, n_D: int) -> int:
        return self.n_H[0] - n_D


def _classify(eigs: np.ndarray, scale_tol: float):
    """Split eigenvalues into real / imaginary / quadruplet classes."""
    real_mask = np.abs(eigs.imag) <= scale_tol * np.maximum(1.0, np.abs(eigs))
    imag_mask = (~real_mask) & (np.abs(eigs.real) <= scale_tol * np.maximum(1.0, np.abs(eigs)))
    quad_mask = ~(real_mask | imag_mask)
    return real_mask, imag_mask, quad_mask


def unstable_modes(p: WaveParams, N: int = 256, re_tol: float = 1e-6,
                   class_tol: float = 1e-7) -> SpectrumReport:
    """Full eigensolve of dHcal with symmetry classification and Krein signs.

    The ZERO_CLUSTER_SIZE smallest-|lambda| eigenvalues form the generalized
    kernel cluster (plus Nyquist artifacts) and are excluded from the counts;
    their Jordan-splitting noise would otherwise contaminate k_r. A separation
    factor between the cluster and the first genuine mode is asserted.
    """
    x = np.arange(N) * (p.L / N)
    psi, phi = eval_profile(p, x)
    H = assemble_operator("Hcal", p.L, p.c, psi)
    dH = assemble_operator("dHcal", p.L, p.c, psi)

    try:
        eigvals, eigvecs = np.linalg.eig(dH.matrix)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise EigensolveError(str(exc)) from exc

    order = np.argsort(np.abs(eigvals))
    cluster = eigvals[order[:ZERO_CLUSTER_SIZE]]
    keep = order[ZERO_CLUSTER_SIZE:]
    eigs = eigvals[keep]
    vecs = eigvecs[:, keep]
    cluster_top = float(np.max(np.abs(cluster)))
    first_real = float(np.min(np.abs(eigs)))
    if cluster_top > 0.1 * first_real:
        raise EigensolveError(
            f"zero cluster (|.|<= {cluster_top:.2e}) not separated from the "
            f"spectrum (next |.| = {first_real:.2e})"
        )

    real_mask, imag_mask, quad_mask = _classify(eigs, class_tol)
    k_r = int(np.sum(real_mask & (eigs.real > re_tol)))
    k_c = int(np.sum(quad_mask & (eigs.real > re_tol) & (eigs.imag > re_tol)))

    # Krein signature of each purely imaginary pair with Im > 0: sign of the
    # quadratic form <H f, f> on the real 2-dimensional invariant subspace.
    w = p.L / N
    krein_signs = []
    k_i_minus = 0
    for idx in np.where(imag_mask & (eigs.imag > re_tol))[0]:
        v = vecs[:, idx]
        u1, u2 = v.real, v.imag
        G = np.array([[u1 @ (H.matrix @ u1), u1 @ (H.matrix @ u2)],
                      [u2 @ (H.matrix @ u1), u2 @ (H.matrix @ u2)]]) * w
        glam = np.linalg.eigvalsh(0.5 * (G + G.T))
        sign = int(np.sign(glam[0] + glam[1]))
        krein_signs.append((float(eigs.imag[idx]), sign))
        if sign < 0:
            k_i_minus += 1

    # Hamiltonian quadruplet symmetry: every eigenvalue must have a -lambda partner
    sym = 0.0
    for lam in eigs:
        gap = np.min(np.abs(eigs + lam))
        sym = max(sym, float(gap / max(1.0, abs(lam))))

    Lp = assemble_operator("Lplus", p.L, p.c, psi)
    dpsi = eval_profile_derivatives(p, x)[1]
    dphi = psi * dpsi / p.c
    n_Lp = morse_index(Lp)
    n_H = morse_index(H)
    ker_lp = kernel_alignment(Lp, dpsi)
    ker_h = kernel_alignment(H, np.concatenate([dpsi, dphi]))

    reals = eigs.real[real_mask & (eigs.real > re_tol)]
    lam_max = float(np.max(reals)) if reals.size else 0.0

    return SpectrumReport(params=p, N=N, eigenvalues=eigs, zero_cluster=cluster,
                          n_Lplus=n_Lp, n_H=n_H, kernel_overlap_Lplus=ker_lp,
                          kernel_overlap_H=ker_h, k_r=k_r, k_c=k_c,
                          krein_negative=k_i_minus, lambda_max_real=lam_max,
                          symmetry_residual=sym, krein_signs=krein_signs)


class NoUnstableModeError(RuntimeError):
    """The discretized spectrum has no eigenvalue with positive real part."""


def unstable_eigenmode(p: WaveParams, N: int = 256, re_tol: float = 1e-6):
    """(lambda, U, V) for the most unstable mode, if one exists.

    Raises NoUnstableModeError when the spectrum (zero cluster excluded) has
    no eigenvalue with real part above re_tol -- which is the measured state
    of affairs for this wave family; see NOTES.md.
    """
    x = np.arange(N) * (p.L / N)
    psi, _ = eval_profile(p, x)
    dH = assemble_operator("dHcal", p.L, p.c, psi)
    eigvals, eigvecs = np.linalg.eig(dH.matrix)
    order = np.argsort(np.abs(eigvals))
    keep = order[ZERO_CLUSTER_SIZE:]
    eigs, vecs = eigvals[keep], eigvecs[:, keep]
    idx = int(np.argmax(eigs.real))
    if eigs.real[idx] <= re_tol:
        raise NoUnstableModeError(
            f"max Re lambda = {eigs.real[idx]:.3e} <= {re_tol}: spectrum is stable"
        )
    lam = eigs[idx]
    v = vecs[:, idx]
    if abs(lam.imag) <= 1e-7 * max(1.0, abs(lam)):
        v = v.real / np.linalg.norm(v.real)
        lam = complex(lam.real, 0.0)
    return lam, v[:N], v[N:]


def imaginary_eigenmode(p: WaveParams, N: int = 256):
    """(mu, U, V) for the smallest purely imaginary pair with Im > 0.

    Used by the simulation cross-check: the seeded deviation oscillates at
    frequency mu in the co-moving frame.
    """
    x = np.arange(N) * (p.L / N)
    psi, _ = eval_profile(p, x)
    dH = assemble_operator("dHcal", p.L, p.c, psi)
    eigvals, eigvecs = np.linalg.eig(dH.matrix)
    order = np.argsort(np.abs(eigvals))
    keep = order[ZERO_CLUSTER_SIZE:]
    eigs, vecs = eigvals[keep], eigvecs[:, keep]
    imag = np.where((np.abs(eigs.real) <= 1e-6 * np.abs(eigs)) & (eigs.imag > 0))[0]
    idx = imag[int(np.argmin(eigs.imag[imag]))]
    v = vecs[:, idx]
    return float(eigs.imag[idx]), v[:N], v[N:]
