"""Pure numpy implementations of the time-stepping kernels.

Same signatures and results as the compiled ``_core`` module.
"""
import numpy as np


def volterra_heun(L0, L1, kvals, rho0, dt, nsteps):
    """Heun stepping of ``x' = L0 x + L1 (k * x)`` with trapezoidal memory.

    ``kvals[n] = k(n dt)`` for ``n = 0..nsteps``. Returns the ``(nsteps+1, n)``
    history of vectorized states.
    """
    L0 = np.asarray(L0, dtype=complex)
    L1 = np.asarray(L1, dtype=complex)
    k = np.asarray(kvals, dtype=float)
    hist = np.zeros((nsteps + 1, len(rho0)), dtype=complex)
    hist[0] = rho0
    for n in range(nsteps):
        x = hist[n]
        if n == 0:
            conv = np.zeros_like(x)
        else:
            conv = dt * (0.5 * k[n] * hist[0] + k[n - 1:0:-1] @ hist[1:n] + 0.5 * k[0] * x)
        f = L0 @ x + L1 @ conv
        pred = x + dt * f
        conv_p = dt * (0.5 * k[n + 1] * hist[0] + k[n:0:-1] @ hist[1:n + 1] + 0.5 * k[0] * pred)
        fp = L0 @ pred + L1 @ conv_p
        hist[n + 1] = x + 0.5 * dt * (f + fp)
    return hist


def stochastic_heun(L0, Hc, paths, rho0, dt):
    """Heun stepping of ``x' = (L0 - i B(t) Hc) x`` for every noise path.

    ``paths`` has shape ``(n_traj, nsteps+1)``. Returns ``(n_traj, nsteps+1, n)``.
    """
    L0 = np.asarray(L0, dtype=complex)
    Hc = np.asarray(Hc, dtype=complex)
    paths = np.asarray(paths, dtype=float)
    m, npts = paths.shape
    out = np.zeros((m, npts, len(rho0)), dtype=complex)
    x = np.tile(np.asarray(rho0, dtype=complex), (m, 1))
    out[:, 0] = x
    a0 = L0.T
    h = Hc.T
    for n in range(npts - 1):
        k1 = x @ a0 - 1j * paths[:, n, None] * (x @ h)
        pred = x + dt * k1
        k2 = pred @ a0 - 1j * paths[:, n + 1, None] * (pred @ h)
        x = x + 0.5 * dt * (k1 + k2)
        out[:, n + 1] = x
    return out
