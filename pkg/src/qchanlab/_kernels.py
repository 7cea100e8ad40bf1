"""Hot numeric kernels: channel application, output-entropy / p-norm objectives
with analytic gradients, projected-descent loops, and oracle scan loops.

Every function here is compiled with numba's @njit when available. Setting the
environment variable ``QCHANLAB_BACKEND=numpy`` before import selects the pure
numpy/Python path instead (same code, uncompiled), which is bit-compatible but
slow. ``QCHANLAB_BACKEND=numba`` forces compilation and raises if numba is
missing. All kernels take C-contiguous complex128 arrays; Kraus families are
stacked as 3-d arrays of shape (n_kraus, dim_out, dim_in).
"""

from __future__ import annotations

import os

import numpy as np

_EIG_FLOOR = 1e-18  # clamp for logs; keeps gradients finite near pure outputs
_ARMIJO_C1 = 1e-4
_STEP_GROW = 1.5
_STEP_MAX = 4.0
_STEP_MIN = 1e-20


def _resolve_backend() -> str:
    requested = os.environ.get("QCHANLAB_BACKEND", "").strip().lower()
    if requested not in ("", "numba", "numpy"):
        raise ValueError(
            f"QCHANLAB_BACKEND must be 'numba' or 'numpy', got {requested!r}"
        )
    if requested == "numpy":
        return "numpy"
    try:
        import numba  # noqa: F401
    except ImportError:
        if requested == "numba":
            raise
        return "numpy"
    return "numba"


BACKEND = _resolve_backend()

if BACKEND == "numba":
    from numba import njit as _njit

    def _jit(func):
        return _njit(cache=True, nogil=True)(func)

else:

    def _jit(func):
        return func


@_jit
def _vnorm(v):
    """Euclidean norm of a complex vector."""
    acc = 0.0
    for a in range(v.shape[0]):
        acc += v[a].real * v[a].real + v[a].imag * v[a].imag
    return np.sqrt(acc)


@_jit
def _re_inner(u, v):
    """Real part of <u, v> with the physics convention (conjugate first slot)."""
    acc = 0.0
    for a in range(u.shape[0]):
        acc += (u[a].conjugate() * v[a]).real
    return acc


@_jit
def _fro_norm(m):
    acc = 0.0
    for i in range(m.shape[0]):
        for j in range(m.shape[1]):
            acc += m[i, j].real * m[i, j].real + m[i, j].imag * m[i, j].imag
    return np.sqrt(acc)


@_jit
def apply_channel(kraus, rho):
    """Sum_j K_j rho K_j^dagger."""
    n_k, dim_out, _ = kraus.shape
    out = np.zeros((dim_out, dim_out), dtype=np.complex128)
    for j in range(n_k):
        out += kraus[j] @ rho @ kraus[j].conj().T
    return out


@_jit
def output_of_pure(kraus, psi):
    """Channel output for the pure input psi psi^dagger."""
    n_k, dim_out, _ = kraus.shape
    sigma = np.zeros((dim_out, dim_out), dtype=np.complex128)
    for j in range(n_k):
        v = kraus[j] @ psi
        sigma += np.outer(v, v.conj())
    return sigma


@_jit
def entropy_from_eigs(eigs):
    """-sum lam ln lam over nonnegative eigenvalues (0 ln 0 = 0)."""
    s = 0.0
    for i in range(eigs.shape[0]):
        lam = eigs[i]
        if lam > _EIG_FLOOR:
            s -= lam * np.log(lam)
    return s


@_jit
def moe_value_grad(kraus, psi):
    """Output entropy of the pure input psi and its Euclidean gradient.

    Gradient convention: d f = Re <grad, d psi> over independent real/imag
    parts, i.e. grad = -2 sum_j K_j^dag (ln sigma + I) K_j psi.
    """
    n_k, dim_out, dim_in = kraus.shape
    sigma = np.zeros((dim_out, dim_out), dtype=np.complex128)
    vecs = np.zeros((n_k, dim_out), dtype=np.complex128)
    for j in range(n_k):
        v = kraus[j] @ psi
        vecs[j] = v
        sigma += np.outer(v, v.conj())
    w, u = np.linalg.eigh(sigma)
    val = entropy_from_eigs(w)
    f = np.empty(dim_out, dtype=np.float64)
    for i in range(dim_out):
        lam = w[i]
        if lam < _EIG_FLOOR:
            lam = _EIG_FLOOR
        f[i] = np.log(lam) + 1.0
    t = (u * f.astype(np.complex128)) @ u.conj().T
    grad = np.zeros(dim_in, dtype=np.complex128)
    for j in range(n_k):
        grad += kraus[j].conj().T @ (t @ vecs[j])
    return val, -2.0 * grad


@_jit
def pnorm_value_grad(kraus, psi, p):
    """Schatten p-norm (finite p > 1) of the output and its Euclidean gradient."""
    n_k, dim_out, dim_in = kraus.shape
    sigma = np.zeros((dim_out, dim_out), dtype=np.complex128)
    vecs = np.zeros((n_k, dim_out), dtype=np.complex128)
    for j in range(n_k):
        v = kraus[j] @ psi
        vecs[j] = v
        sigma += np.outer(v, v.conj())
    w, u = np.linalg.eigh(sigma)
    s = 0.0
    for i in range(dim_out):
        lam = w[i]
        if lam > 0.0:
            s += lam**p
    val = s ** (1.0 / p)
    grad = np.zeros(dim_in, dtype=np.complex128)
    if val <= 0.0:
        return val, grad
    f = np.empty(dim_out, dtype=np.float64)
    for i in range(dim_out):
        lam = w[i]
        f[i] = lam ** (p - 1.0) if lam > 0.0 else 0.0
    t = (u * f.astype(np.complex128)) @ u.conj().T
    for j in range(n_k):
        grad += kraus[j].conj().T @ (t @ vecs[j])
    return val, (2.0 / val ** (p - 1.0)) * grad


@_jit
def opnorm_value_grad(kraus, psi):
    """Largest output eigenvalue (p = inf) and its Euclidean subgradient.

    Degenerate maxima are broken deterministically by taking the
    highest-index eigenvector returned by eigh.
    """
    n_k, dim_out, dim_in = kraus.shape
    sigma = np.zeros((dim_out, dim_out), dtype=np.complex128)
    vecs = np.zeros((n_k, dim_out), dtype=np.complex128)
    for j in range(n_k):
        v = kraus[j] @ psi
        vecs[j] = v
        sigma += np.outer(v, v.conj())
    w, u = np.linalg.eigh(sigma)
    top = u[:, dim_out - 1]
    grad = np.zeros(dim_in, dtype=np.complex128)
    for j in range(n_k):
        amp = np.vdot(top, vecs[j])
        grad += kraus[j].conj().T @ (top * amp)
    return w[dim_out - 1], 2.0 * grad


@_jit
def _tangent_project(psi, grad):
    """Project a Euclidean gradient onto the tangent space of the unit sphere."""
    return grad - _re_inner(psi, grad) * psi


@_jit
def descend_entropy(kraus, psi0, max_iterations, step_tolerance):
    """Projected-gradient minimization of output entropy over unit vectors.

    Armijo backtracking line search with renormalization retraction.
    Returns (value, minimizer, riemannian_grad_norm, converged, iterations).
    """
    psi = psi0 / _vnorm(psi0)
    val, grad = moe_value_grad(kraus, psi)
    t = 1.0
    converged = False
    g_norm = 0.0
    iters = 0
    for _ in range(max_iterations):
        iters += 1
        rg = _tangent_project(psi, grad)
        g_norm = _vnorm(rg)
        if g_norm < 1e-14:
            converged = True
            break
        accepted = False
        tt = t
        cand = psi
        c_val = val
        c_grad = grad
        while tt > _STEP_MIN:
            trial = psi - tt * rg
            trial = trial / _vnorm(trial)
            t_val, t_grad = moe_value_grad(kraus, trial)
            if t_val <= val - _ARMIJO_C1 * tt * g_norm * g_norm:
                accepted = True
                cand = trial
                c_val = t_val
                c_grad = t_grad
                break
            tt *= 0.5
        if not accepted:
            converged = True
            break
        step = _vnorm(cand - psi)
        psi = cand
        val = c_val
        grad = c_grad
        t = min(tt * _STEP_GROW, _STEP_MAX)
        if step < step_tolerance:
            converged = True
            break
    return val, psi, g_norm, converged, iters


@_jit
def descend_pnorm(kraus, psi0, p, max_iterations, step_tolerance):
    """Projected-gradient maximization of the output p-norm (finite p > 1)."""
    psi = psi0 / _vnorm(psi0)
    val, grad = pnorm_value_grad(kraus, psi, p)
    t = 1.0
    converged = False
    g_norm = 0.0
    iters = 0
    for _ in range(max_iterations):
        iters += 1
        rg = _tangent_project(psi, grad)
        g_norm = _vnorm(rg)
        if g_norm < 1e-14:
            converged = True
            break
        accepted = False
        tt = t
        cand = psi
        c_val = val
        c_grad = grad
        while tt > _STEP_MIN:
            trial = psi + tt * rg
            trial = trial / _vnorm(trial)
            t_val, t_grad = pnorm_value_grad(kraus, trial, p)
            if t_val >= val + _ARMIJO_C1 * tt * g_norm * g_norm:
                accepted = True
                cand = trial
                c_val = t_val
                c_grad = t_grad
                break
            tt *= 0.5
        if not accepted:
            converged = True
            break
        step = _vnorm(cand - psi)
        psi = cand
        val = c_val
        grad = c_grad
        t = min(tt * _STEP_GROW, _STEP_MAX)
        if step < step_tolerance:
            converged = True
            break
    return val, psi, g_norm, converged, iters


@_jit
def descend_opnorm(kraus, psi0, max_iterations, step_tolerance):
    """Subgradient ascent on the largest output eigenvalue (p = inf)."""
    psi = psi0 / _vnorm(psi0)
    val, grad = opnorm_value_grad(kraus, psi)
    t = 1.0
    converged = False
    g_norm = 0.0
    iters = 0
    for _ in range(max_iterations):
        iters += 1
        rg = _tangent_project(psi, grad)
        g_norm = _vnorm(rg)
        if g_norm < 1e-14:
            converged = True
            break
        accepted = False
        tt = t
        cand = psi
        c_val = val
        c_grad = grad
        while tt > _STEP_MIN:
            trial = psi + tt * rg
            trial = trial / _vnorm(trial)
            t_val, t_grad = opnorm_value_grad(kraus, trial)
            if t_val >= val + _ARMIJO_C1 * tt * g_norm * g_norm:
                accepted = True
                cand = trial
                c_val = t_val
                c_grad = t_grad
                break
            tt *= 0.5
        if not accepted:
            converged = True
            break
        step = _vnorm(cand - psi)
        psi = cand
        val = c_val
        grad = c_grad
        t = min(tt * _STEP_GROW, _STEP_MAX)
        if step < step_tolerance:
            converged = True
            break
    return val, psi, g_norm, converged, iters


@_jit
def _qr_retract(x):
    """Thin QR with the R diagonal phase-fixed, giving a unique orthonormal factor."""
    q, r = np.linalg.qr(x)
    cols = q.shape[1]
    out = q.copy()
    for k in range(cols):
        d = r[k, k]
        mag = abs(d)
        if mag > 0.0:
            out[:, k] = q[:, k] * (d / mag)
    return out


@_jit
def roof_value_grad(kraus, bfac, mix):
    """Ensemble-averaged output entropy for the mixing isometry ``mix``.

    bfac (n x r) is a square-root factor of the averaged state, rho = B B^dag.
    mix (m x r, isometric) defines unnormalized members phi_i = B mix[i]^T;
    the value is sum_i p_i S(Phi(phi_i phi_i^dag / p_i)) with p_i = |phi_i|^2.
    Returns the value and the Euclidean gradient with respect to mix.
    """
    n_k, dim_out, _ = kraus.shape
    n = bfac.shape[0]
    m = mix.shape[0]
    members = bfac @ mix.T  # column i = phi_i
    grad_phi = np.zeros((m, n), dtype=np.complex128)
    total = 0.0
    for i in range(m):
        phi = members[:, i].copy()
        p = 0.0
        for a in range(n):
            p += phi[a].real * phi[a].real + phi[a].imag * phi[a].imag
        sigma = np.zeros((dim_out, dim_out), dtype=np.complex128)
        vecs = np.zeros((n_k, dim_out), dtype=np.complex128)
        for j in range(n_k):
            v = kraus[j] @ phi
            vecs[j] = v
            sigma += np.outer(v, v.conj())
        w, u = np.linalg.eigh(sigma)
        # p_i S(sigma_i / p_i) = -tr[sigma ln sigma] + p ln p
        term = 0.0
        for a in range(dim_out):
            lam = w[a]
            if lam > _EIG_FLOOR:
                term -= lam * np.log(lam)
        p_log = np.log(p) if p > _EIG_FLOOR else np.log(_EIG_FLOOR)
        term += p * p_log
        total += term
        f = np.empty(dim_out, dtype=np.float64)
        for a in range(dim_out):
            lam = w[a]
            if lam < _EIG_FLOOR:
                lam = _EIG_FLOOR
            f[a] = np.log(lam) + 1.0
        t = (u * f.astype(np.complex128)) @ u.conj().T
        g = np.zeros(n, dtype=np.complex128)
        for j in range(n_k):
            g += kraus[j].conj().T @ (t @ vecs[j])
        grad_phi[i] = -g + (p_log + 1.0) * phi
    grad_mix = 2.0 * (grad_phi @ bfac.conj())
    return total, grad_mix


@_jit
def descend_roof(kraus, bfac, mix0, max_iterations, step_tolerance):
    """Riemannian descent of the ensemble objective over the isometry manifold."""
    mix = _qr_retract(mix0)
    val, grad = roof_value_grad(kraus, bfac, mix)
    t = 1.0
    converged = False
    g_norm = 0.0
    iters = 0
    for _ in range(max_iterations):
        iters += 1
        a = mix.conj().T @ grad
        herm = 0.5 * (a + a.conj().T)
        xi = grad - mix @ herm
        g_norm = _fro_norm(xi)
        if g_norm < 1e-14:
            converged = True
            break
        accepted = False
        tt = t
        cand = mix
        c_val = val
        c_grad = grad
        while tt > _STEP_MIN:
            trial = _qr_retract(mix - tt * xi)
            t_val, t_grad = roof_value_grad(kraus, bfac, trial)
            if t_val <= val - _ARMIJO_C1 * tt * g_norm * g_norm:
                accepted = True
                cand = trial
                c_val = t_val
                c_grad = t_grad
                break
            tt *= 0.5
        if not accepted:
            converged = True
            break
        step = _fro_norm(cand - mix)
        mix = cand
        val = c_val
        grad = c_grad
        t = min(tt * _STEP_GROW, _STEP_MAX)
        if step < step_tolerance:
            converged = True
            break
    return val, mix, g_norm, converged, iters


@_jit
def scan_entropy(kraus, pure_samples):
    """Minimum output entropy over rows of pure_samples (unit vectors)."""
    n_s = pure_samples.shape[0]
    best = np.inf
    best_i = 0
    for s in range(n_s):
        sigma = output_of_pure(kraus, pure_samples[s])
        w = np.linalg.eigvalsh(sigma)
        val = entropy_from_eigs(w)
        if val < best:
            best = val
            best_i = s
    return best, best_i


@_jit
def scan_pnorm(kraus, pure_samples, p):
    """Maximum output p-norm (finite p) over rows of pure_samples."""
    n_s = pure_samples.shape[0]
    best = -np.inf
    best_i = 0
    for s in range(n_s):
        sigma = output_of_pure(kraus, pure_samples[s])
        w = np.linalg.eigvalsh(sigma)
        acc = 0.0
        for i in range(w.shape[0]):
            if w[i] > 0.0:
                acc += w[i] ** p
        val = acc ** (1.0 / p)
        if val > best:
            best = val
            best_i = s
    return best, best_i


@_jit
def scan_opnorm(kraus, pure_samples):
    """Maximum output operator norm (p = inf) over rows of pure_samples."""
    n_s = pure_samples.shape[0]
    best = -np.inf
    best_i = 0
    for s in range(n_s):
        sigma = output_of_pure(kraus, pure_samples[s])
        w = np.linalg.eigvalsh(sigma)
        val = w[w.shape[0] - 1]
        if val > best:
            best = val
            best_i = s
    return best, best_i


@_jit
def scan_entropy_mixed(kraus, dm_samples):
    """Minimum output entropy over a stack of density-matrix inputs."""
    n_s = dm_samples.shape[0]
    best = np.inf
    for s in range(n_s):
        sigma = apply_channel(kraus, dm_samples[s])
        w = np.linalg.eigvalsh(sigma)
        val = entropy_from_eigs(w)
        if val < best:
            best = val
    return best


@_jit
def scan_pnorm_mixed(kraus, dm_samples, p):
    """Maximum output p-norm (finite p) over a stack of density-matrix inputs."""
    n_s = dm_samples.shape[0]
    best = -np.inf
    for s in range(n_s):
        sigma = apply_channel(kraus, dm_samples[s])
        w = np.linalg.eigvalsh(sigma)
        acc = 0.0
        for i in range(w.shape[0]):
            if w[i] > 0.0:
                acc += w[i] ** p
        val = acc ** (1.0 / p)
        if val > best:
            best = val
    return best


@_jit
def scan_opnorm_mixed(kraus, dm_samples):
    """Maximum output operator norm over a stack of density-matrix inputs."""
    n_s = dm_samples.shape[0]
    best = -np.inf
    for s in range(n_s):
        sigma = apply_channel(kraus, dm_samples[s])
        w = np.linalg.eigvalsh(sigma)
        if w[w.shape[0] - 1] > best:
            best = w[w.shape[0] - 1]
    return best
