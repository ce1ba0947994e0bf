"""Complete elliptic integral K and Jacobi elliptic functions sn, cn, dn.

Everything here uses the modulus convention: the argument ``kappa`` is the
modulus k, never the parameter m = k**2. Evaluation is by the arithmetic-
geometric mean (K) and the descending-AGM amplitude recursion (sn, cn, dn),
which deliver ~1e-13 accuracy uniformly on the admissible modulus range
without lookup tables.
"""

from __future__ import annotations

import numpy as np

__all__ = ["ellip_k", "jacobi_sn_cn_dn", "KAPPA_MAX"]

# Moduli this close to 1 are rejected: K diverges logarithmically and the
# wave family degenerates to its separatrix there.
KAPPA_MAX = 1.0 - 1e-9

_AGM_TOL = 1e-17
_AGM_MAX_ITER = 64


def _check_modulus(kappa: float) -> float:
    kappa = float(kappa)
    if not np.isfinite(kappa) or kappa < 0.0 or kappa > KAPPA_MAX:
        raise ValueError(
            f"modulus must satisfy 0 <= kappa <= {KAPPA_MAX} (got {kappa!r})"
        )
    return kappa


def ellip_k(kappa: float) -> float:
    """Complete elliptic integral of the first kind, K(kappa).

    AGM iteration: K = pi / (2 * agm(1, sqrt(1 - kappa^2))). Converges
    quadratically; a dozen iterations reach machine precision even for
    kappa near the admissible upper end.
    """
    kappa = _check_modulus(kappa)
    a = 1.0
    b = float(np.sqrt(1.0 - kappa * kappa))
    for _ in range(_AGM_MAX_ITER):
        if abs(a - b) <= _AGM_TOL * a:
            break
        a, b = 0.5 * (a + b), float(np.sqrt(a * b))
    return float(np.pi / (2.0 * a))


def _agm_scheme(kappa: float):
    """AGM sequences a_n and c_n = (a_{n-1} - b_{n-1})/2 for the amplitude recursion."""
    a = [1.0]
    c = [kappa]
    b = float(np.sqrt(1.0 - kappa * kappa))
    while len(a) < _AGM_MAX_ITER:
        an = 0.5 * (a[-1] + b)
        cn = 0.5 * (a[-1] - b)
        b = float(np.sqrt(a[-1] * b))
        a.append(an)
        c.append(cn)
        if abs(cn) <= _AGM_TOL * an:
            break
    return np.asarray(a), np.asarray(c)


def _scd_core(w: np.ndarray, kappa: float):
    """(sn, cn, dn) by the descending-AGM amplitude recursion, for w in [0, K/2].

    DLMF 22.20(ii): phi_N = 2^N a_N w, phi_{n-1} = (phi_n + asin((c_n/a_n) sin phi_n))/2,
    sn = sin phi_0, cn = cos phi_0, dn = cos phi_0 / cos(phi_1 - phi_0). On [0, K/2]
    the dn denominator stays >= 1/sqrt(2), so the formula is uniformly stable (it
    degenerates to 0/0 at w = K, which the caller avoids by quarter-period shifts).
    """
    a, c = _agm_scheme(kappa)
    n_last = len(a) - 1
    phi = (2.0**n_last) * a[n_last] * w
    phi_1 = phi
    for n in range(n_last, 0, -1):
        if n == 1:
            phi_1 = phi
        arg = np.clip((c[n] / a[n]) * np.sin(phi), -1.0, 1.0)
        phi = 0.5 * (phi + np.arcsin(arg))
    sn = np.sin(phi)
    cn = np.cos(phi)
    dn = cn / np.cos(phi_1 - phi)
    return sn, cn, dn


def jacobi_sn_cn_dn(u, kappa: float):
    """Jacobi elliptic functions (sn, cn, dn)(u, kappa) for scalar or array u.

    The argument is reduced modulo 4K and folded into [0, K/2] using the
    reflection sn(2K-u) = sn(u), cn(2K-u) = -cn(u), dn(2K-u) = dn(u) and the
    quarter-period shift sn(K-v) = cn(v)/dn(v), cn(K-v) = k' sn(v)/dn(v),
    dn(K-v) = k'/dn(v), so the amplitude recursion only ever runs where it is
    well conditioned.
    """
    kappa = _check_modulus(kappa)
    u_arr = np.asarray(u, dtype=float)
    scalar = u_arr.ndim == 0
    u_arr = np.atleast_1d(u_arr)
    if not np.all(np.isfinite(u_arr)):
        raise ValueError("argument u must be finite")

    if kappa == 0.0:
        sn, cn, dn = np.sin(u_arr), np.cos(u_arr), np.ones_like(u_arr)
    else:
        K = ellip_k(kappa)
        kprime = float(np.sqrt((1.0 - kappa) * (1.0 + kappa)))
        r = np.remainder(u_arr, 4.0 * K)

        # fold [0, 4K) into w in [0, K] with sign factors for sn and cn
        q = np.minimum(np.floor(r / K).astype(int), 3)
        w = np.where(q == 0, r, np.where(q == 1, 2 * K - r, np.where(q == 2, r - 2 * K, 4 * K - r)))
        sgn_sn = np.where(q >= 2, -1.0, 1.0)
        sgn_cn = np.where((q == 1) | (q == 2), -1.0, 1.0)

        # fold [0, K] into [0, K/2] via the quarter-period shift
        shifted = w > 0.5 * K
        v = np.where(shifted, K - w, w)
        s0, c0, d0 = _scd_core(v, kappa)
        sn = np.where(shifted, c0 / d0, s0)
        cn = np.where(shifted, kprime * s0 / d0, c0)
        dn = np.where(shifted, kprime / d0, d0)
        sn *= sgn_sn
        cn *= sgn_cn

    if scalar:
        return float(sn[0]), float(cn[0]), float(dn[0])
    return sn, cn, dn
