"""Independent reference implementations used to cross-check the library.

Everything here is written the slow, obvious way (dense matrices, explicit
loops, matrix DFTs) and deliberately avoids the library's FFT shortcuts.
"""

import numpy as np


def dft_matrix(n):
    jk = np.outer(np.arange(n), np.arange(n))
    return np.exp(-2j * np.pi * jk / n)


def raised_cosine(shape, taper):
    wins = []
    for n in shape:
        w = np.ones(n)
        for i in range(min(taper, n // 2)):
            v = 0.5 * (1 - np.cos(np.pi * (i + 1) / (taper + 1)))
            w[i] = v
            w[n - 1 - i] = v
        wins.append(w)
    return np.outer(wins[0], wins[1])


def dense_design_filter(pa, pi_, eps, kernel_shape, taper=2):
    """Ridge-regularized LSQ on the padded circular grid, solved densely.

    Builds the circulant operator column by column, forms the normal
    equations with the ridge weight eps * max|Ha|^2 (spectrum computed with a
    matrix DFT), solves, re-centers, crops, tapers.
    """
    kz, kx = kernel_shape
    nz, nx = pa.shape[0] + kz - 1, pa.shape[1] + kx - 1
    pad_a = np.zeros((nz, nx), complex)
    pad_a[: pa.shape[0], : pa.shape[1]] = pa
    pad_i = np.zeros((nz, nx), complex)
    pad_i[: pi_.shape[0], : pi_.shape[1]] = pi_

    cols = [np.roll(pad_a, (sz, sx), axis=(0, 1)).ravel()
            for sz in range(nz) for sx in range(nx)]
    C = np.stack(cols, axis=1)
    spectrum = dft_matrix(nz) @ pad_a @ dft_matrix(nx).T
    lam = eps * (np.abs(spectrum) ** 2).max()
    kappa = np.linalg.solve(C.conj().T @ C + lam * np.eye(nz * nx),
                            C.conj().T @ pad_i.ravel()).reshape(nz, nx)

    cz, cx = (nz - 1) // 2, (nx - 1) // 2
    kappa = np.roll(kappa, (cz, cx), axis=(0, 1))
    az, ax = (kz - 1) // 2, (kx - 1) // 2
    taps = kappa[cz - az: cz + az + 1, cx - ax: cx + ax + 1]
    return taps * raised_cosine(kernel_shape, taper)


def direct_convolution(img, taps):
    """Same-size true convolution, center anchor, nested loops."""
    nz, nx = img.shape
    kz, kx = taps.shape
    az, ax = (kz - 1) // 2, (kx - 1) // 2
    out = np.zeros((nz, nx), complex)
    for z in range(nz):
        for x in range(nx):
            acc = 0.0 + 0.0j
            for i in range(kz):
                for j in range(kx):
                    zz, xx = z + az - i, x + ax - j
                    if 0 <= zz < nz and 0 <= xx < nx:
                        acc += taps[i, j] * img[zz, xx]
            out[z, x] = acc
    return out


def coherence_explicit(data, taps, m0, axes="both"):
    """Per-pixel coherence from explicit matrix DFTs of the product patch."""
    kz, kx = taps.shape
    az, ax = (kz - 1) // 2, (kx - 1) // 2
    padded = np.zeros((data.shape[0] + 2 * az, data.shape[1] + 2 * ax), complex)
    padded[az: az + data.shape[0], ax: ax + data.shape[1]] = data
    ez, ex = dft_matrix(kz), dft_matrix(kx)
    low_u = [u % kz for u in range(-m0, m0 + 1)]
    low_v = [v % kx for v in range(-m0, m0 + 1)]
    w = np.zeros(data.shape)
    for z in range(data.shape[0]):
        for x in range(data.shape[1]):
            P = np.empty((kz, kx), complex)
            for a in range(kz):
                for b in range(kx):
                    P[a, b] = taps[a, b] * padded[z + 2 * az - a, x + 2 * ax - b]
            if axes == "both":
                Q = ez @ P @ ex.T
                total = np.sum(np.abs(Q) ** 2)
                if total > 0:
                    w[z, x] = sum(np.abs(Q[u, v]) ** 2
                                  for u in low_u for v in low_v) / total
            else:
                Q = P @ ex.T  # one 1D DFT per kernel row
                total = np.sum(np.abs(Q) ** 2)
                if total > 0:
                    w[z, x] = np.sum(np.abs(Q[:, low_v]) ** 2) / total
    return w


def echo_center_time(geom, profile, element, sx, sz):
    """Two-way arrival time for single-element transmit and receive."""
    d = float(np.hypot(geom.element_x[element] - sx, sz))
    fx, fz = geom.tx_focus
    focus = (np.hypot(geom.element_x[element] - fx, fz) - np.hypot(fx, fz)) / geom.c0
    return 2 * d / geom.c0 - focus + 2 * profile.delays[element]
