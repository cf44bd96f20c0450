"""Spectral representation of divergence-free velocity fields on the torus.

A velocity field on the periodic square of side ``length`` is expanded in
the divergence-free Fourier basis

    psi_m(x) = (m_perp / |m|) * exp(2*pi*i m.x / length),   m_perp = (m2, -m1),

over integer wavevectors m != 0.  Real fields satisfy u_{-m} = -conj(u_m),
so only one member of each conjugate pair is stored.  The stored modes are
the dealiased set max(|m1|, |m2|) <= cutoff intersected with the half plane
{m2 > 0} union {m2 == 0, m1 > 0}, where cutoff is the largest integer with
3 * cutoff < n.  The strict inequality matters: with 3 * cutoff == n a
quadratic product at frequency 2 * cutoff aliases exactly onto -cutoff,
which sits inside the retained set.

States are handled as flat real arrays: mode i occupies slots (2i, 2i+1)
holding (sqrt(2) Re u_m, sqrt(2) Im u_m).  With this scaling the Euclidean
norm of the array equals the L2 norm of the field under the normalized
measure dx / length**2, i.e. Parseval holds with the conjugate modes'
contribution folded in.
"""

from __future__ import annotations

import numpy as np

_SQRT2 = np.sqrt(2.0)


class SpectralGrid:
    """Wavevector bookkeeping and transforms for one grid resolution.

    Args:
        n: collocation points per direction (even, >= 12).
        length: side of the periodic box.
    """

    def __init__(self, n: int, length: float = 2.0):
        if n < 12 or n % 2 != 0:
            raise ValueError(f"grid size must be an even integer >= 12, got {n}")
        if length <= 0:
            raise ValueError("box side must be positive")
        self.n = int(n)
        self.length = float(length)
        self.cutoff = (self.n - 1) // 3

        c = self.cutoff
        m1, m2 = np.meshgrid(np.arange(-c, c + 1), np.arange(-c, c + 1), indexing="ij")
        m1 = m1.ravel()
        m2 = m2.ravel()
        keep = ((m2 > 0) | ((m2 == 0) & (m1 > 0)))
        self.m1 = m1[keep].astype(np.int64)
        self.m2 = m2[keep].astype(np.int64)
        self.msq = (self.m1**2 + self.m2**2).astype(np.float64)
        self.n_modes = self.m1.size
        self.dim = 2 * self.n_modes

        mabs = np.sqrt(self.msq)
        # basis direction m_perp / |m| for each stored mode
        self.dir1 = self.m2 / mabs
        self.dir2 = -self.m1 / mabs

        # positions of +m and -m in numpy's FFT layout
        self._ip = (self.m1 % self.n, self.m2 % self.n)
        self._im = ((-self.m1) % self.n, (-self.m2) % self.n)

        freq = np.fft.fftfreq(self.n, d=1.0 / self.n)
        kx, ky = np.meshgrid(freq, freq, indexing="ij")
        self._ikx = 2j * np.pi * kx / self.length
        self._iky = 2j * np.pi * ky / self.length

    # ---------------------------------------------------------------- layout

    def coeffs(self, data: np.ndarray) -> np.ndarray:
        """Complex coefficients u_m of the stored modes from the real layout."""
        data = np.asarray(data)
        if data.shape[-1] != self.dim:
            raise ValueError(f"state has {data.shape[-1]} slots, grid expects {self.dim}")
        return (data[..., 0::2] + 1j * data[..., 1::2]) / _SQRT2

    def encode(self, coeffs: np.ndarray) -> np.ndarray:
        """Real layout from complex stored-mode coefficients."""
        coeffs = np.asarray(coeffs)
        if coeffs.shape[-1] != self.n_modes:
            raise ValueError(f"expected {self.n_modes} coefficients, got {coeffs.shape[-1]}")
        out = np.empty(coeffs.shape[:-1] + (self.dim,), dtype=np.float64)
        out[..., 0::2] = _SQRT2 * coeffs.real
        out[..., 1::2] = _SQRT2 * coeffs.imag
        return out

    def mode_index(self, m1: int, m2: int) -> int:
        """Position of stored wavevector (m1, m2); raises if not stored."""
        hits = np.flatnonzero((self.m1 == m1) & (self.m2 == m2))
        if hits.size == 0:
            raise KeyError(f"wavevector ({m1}, {m2}) is not a stored mode")
        return int(hits[0])

    # ------------------------------------------------------------ transforms

    def velocity_hat(self, coeffs: np.ndarray) -> np.ndarray:
        """Full-plane FFT arrays (..., 2, n, n) of both velocity components."""
        coeffs = np.asarray(coeffs, dtype=np.complex128)
        batch = coeffs.shape[:-1]
        vhat = np.zeros(batch + (2, self.n, self.n), dtype=np.complex128)
        for comp, direction in ((0, self.dir1), (1, self.dir2)):
            vals = coeffs * direction
            vhat[..., comp, self._ip[0], self._ip[1]] = vals
            vhat[..., comp, self._im[0], self._im[1]] = np.conj(vals)
        return vhat

    def velocity(self, coeffs: np.ndarray) -> np.ndarray:
        """Velocity fields (..., 2, n, n) at the collocation points."""
        vhat = self.velocity_hat(coeffs)
        return np.fft.ifft2(vhat, axes=(-2, -1)).real * self.n**2

    def gradients(self, coeffs: np.ndarray) -> np.ndarray:
        """Partial derivatives (..., 2, 2, n, n); entry [i, j] is d v_i / d x_j."""
        vhat = self.velocity_hat(coeffs)
        batch = vhat.shape[:-3]
        out = np.empty(batch + (2, 2, self.n, self.n), dtype=np.float64)
        for i in range(2):
            gx = np.fft.ifft2(vhat[..., i, :, :] * self._ikx, axes=(-2, -1)).real
            gy = np.fft.ifft2(vhat[..., i, :, :] * self._iky, axes=(-2, -1)).real
            out[..., i, 0, :, :] = gx * self.n**2
            out[..., i, 1, :, :] = gy * self.n**2
        return out

    def project(self, fields: np.ndarray) -> np.ndarray:
        """Stored-mode coefficients of a physical vector field (..., 2, n, n).

        Extracting the psi_m coefficient applies the Leray projection and
        the dealiasing truncation in one move: components along gradients
        and modes outside the stored set are dropped.
        """
        fields = np.asarray(fields)
        fhat = np.fft.fft2(fields, axes=(-2, -1)) / self.n**2
        c1 = fhat[..., 0, self._ip[0], self._ip[1]]
        c2 = fhat[..., 1, self._ip[0], self._ip[1]]
        return c1 * self.dir1 + c2 * self.dir2

    def advect(self, cu: np.ndarray, cv: np.ndarray) -> np.ndarray:
        """Stored-mode coefficients of the projected advection P((u . grad) v).

        Products are formed at the collocation points; because the stored
        set keeps 3 * max(|m1|, |m2|) < n, quadratic aliases fall outside
        it and the retained coefficients of the pointwise product are exact.
        """
        cu = np.asarray(cu, dtype=np.complex128)
        cv = np.asarray(cv, dtype=np.complex128)
        if cu.shape != cv.shape:
            raise ValueError("operands must have matching shapes")
        uhat = self.velocity_hat(cu)
        u = np.fft.ifft2(uhat, axes=(-2, -1)).real * self.n**2
        vhat = uhat if cv is cu else self.velocity_hat(cv)
        w = np.empty_like(u)
        for i in range(2):
            gx = np.fft.ifft2(vhat[..., i, :, :] * self._ikx, axes=(-2, -1)).real * self.n**2
            gy = np.fft.ifft2(vhat[..., i, :, :] * self._iky, axes=(-2, -1)).real * self.n**2
            w[..., i, :, :] = u[..., 0, :, :] * gx + u[..., 1, :, :] * gy
        return self.project(w)

    # ------------------------------------------------------------- operators

    def stokes_eigenvalues(self, nu: float) -> np.ndarray:
        """Per-mode eigenvalues nu * (2 pi |m| / length)**2 of the Stokes operator."""
        return nu * (2.0 * np.pi / self.length) ** 2 * self.msq

    def per_slot(self, per_mode: np.ndarray) -> np.ndarray:
        """Spread a per-mode array onto the real layout (both slots of a mode)."""
        return np.repeat(np.asarray(per_mode, dtype=np.float64), 2)

    def ring_mask(self, radius: float, strict: bool = True) -> np.ndarray:
        """Boolean per-mode mask of low wavevectors selected by a spectral ring.

        The cutoff keeps modes with |2 pi m|^2 < lambda * length^2 where
        lambda = pi^2 * radius^2, which at length 2 reduces to |m| < radius.
        With strict=False the boundary is included; the strict inequality is
        the default convention.
        """
        if radius <= 0:
            raise ValueError("ring radius must be positive")
        threshold = (radius * self.length / 2.0) ** 2
        if strict:
            return self.msq < threshold
        return self.msq <= threshold

    def __repr__(self) -> str:
        return f"SpectralGrid(n={self.n}, length={self.length}, n_modes={self.n_modes})"
