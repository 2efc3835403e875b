"""Two-sided trigonometric polynomials on the unit circle.

A series holds coefficients ``c[n]`` for ``n`` in ``[-N, N]`` and represents
``sum_n c[n] zeta^n`` for ``|zeta| = 1``.  Everything downstream (hypersurface
symbols, disc components, boundary operators) is carried by this type, so the
algebra here is kept exact: products are full convolutions, projections act on
coefficients, and no operation silently drops modes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "TrigSeries",
    "from_samples",
    "multiply",
    "hilbert_transform",
    "analytic_from_real_part",
    "divide_one_minus_zeta",
    "coeff_distance",
]

# Hard cap on truncation order; anything larger is a bug upstream.
MAX_ORDER = 1 << 16

_CIRCLE_TOL = 1e-12


def _as_coeff_array(coeffs) -> np.ndarray:
    arr = np.asarray(coeffs, dtype=complex)
    if arr.ndim != 1 or arr.size % 2 != 1:
        raise ValueError("coefficient array must be 1-d with odd length 2N+1")
    if arr.size > 2 * MAX_ORDER + 1:
        raise ValueError(f"series order exceeds MAX_ORDER={MAX_ORDER}")
    return arr


@dataclass(frozen=True)
class TrigSeries:
    """Trigonometric polynomial ``sum c[n] zeta^n``, ``n in [-N, N]``.

    ``coeffs`` is stored in ascending mode order ``-N .. N`` and is
    read-only after construction.
    """

    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = _as_coeff_array(self.coeffs)
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    # ---- constructors -------------------------------------------------

    @classmethod
    def zero(cls, n_max: int = 0) -> "TrigSeries":
        return cls(np.zeros(2 * n_max + 1, dtype=complex))

    @classmethod
    def constant(cls, value: complex) -> "TrigSeries":
        return cls(np.array([value], dtype=complex))

    @classmethod
    def monomial(cls, n: int, value: complex = 1.0) -> "TrigSeries":
        """The single mode ``value * zeta^n``."""
        k = abs(int(n))
        arr = np.zeros(2 * k + 1, dtype=complex)
        arr[k + n] = value
        return cls(arr)

    @classmethod
    def from_mode_dict(cls, modes: dict[int, complex]) -> "TrigSeries":
        if not modes:
            return cls.zero()
        k = max(abs(int(n)) for n in modes)
        arr = np.zeros(2 * k + 1, dtype=complex)
        for n, v in modes.items():
            arr[k + int(n)] += v
        return cls(arr)

    @classmethod
    def geometric(cls, ratio: complex, n_max: int, scale: complex = 1.0) -> "TrigSeries":
        """Truncated analytic geometric series ``scale * sum ratio^n zeta^n``."""
        if abs(ratio) >= 1.0:
            raise ValueError("geometric ratio must have modulus < 1")
        arr = np.zeros(2 * n_max + 1, dtype=complex)
        arr[n_max:] = scale * ratio ** np.arange(n_max + 1)
        return cls(arr)

    @classmethod
    def real_symmetrized(cls, coeffs) -> "TrigSeries":
        """Enforce ``c[n] = conj(c[-n])`` exactly by Hermitian averaging."""
        arr = _as_coeff_array(coeffs).copy()
        arr = 0.5 * (arr + np.conj(arr[::-1]))
        return cls(arr)

    # ---- basic structure ----------------------------------------------

    @property
    def n_max(self) -> int:
        return (self.coeffs.size - 1) // 2

    def coeff(self, n: int) -> complex:
        k = self.n_max
        if -k <= n <= k:
            return complex(self.coeffs[k + n])
        return 0.0 + 0.0j

    def pad_to(self, n_max: int) -> "TrigSeries":
        k = self.n_max
        if n_max < k:
            raise ValueError("pad_to cannot shrink; use truncate")
        arr = np.zeros(2 * n_max + 1, dtype=complex)
        arr[n_max - k : n_max + k + 1] = self.coeffs
        return TrigSeries(arr)

    def truncate(self, n_max: int) -> "TrigSeries":
        """Drop modes with ``|n| > n_max`` (no renormalization)."""
        k = self.n_max
        if n_max >= k:
            return self
        return TrigSeries(self.coeffs[k - n_max : k + n_max + 1])

    def trimmed(self, tol: float = 0.0) -> "TrigSeries":
        """Shrink the carrier to the smallest window holding all modes > tol."""
        k = self.n_max
        mask = np.abs(self.coeffs) > tol
        if not mask.any():
            return TrigSeries.zero()
        idx = np.nonzero(mask)[0]
        m = max(abs(int(idx[0]) - k), abs(int(idx[-1]) - k))
        return self.truncate(m)

    # ---- flags ----------------------------------------------------------

    def is_real(self, tol: float = 0.0) -> bool:
        return bool(np.max(np.abs(self.coeffs - np.conj(self.coeffs[::-1]))) <= tol)

    def is_analytic(self, tol: float = 0.0) -> bool:
        k = self.n_max
        if k == 0:
            return True
        return bool(np.max(np.abs(self.coeffs[:k])) <= tol)

    def is_coanalytic(self, tol: float = 0.0) -> bool:
        k = self.n_max
        if k == 0:
            return True
        return bool(np.max(np.abs(self.coeffs[k + 1 :])) <= tol)

    # ---- algebra ---------------------------------------------------------

    def __add__(self, other: "TrigSeries") -> "TrigSeries":
        k = max(self.n_max, other.n_max)
        return TrigSeries(self.pad_to(k).coeffs + other.pad_to(k).coeffs)

    def __sub__(self, other: "TrigSeries") -> "TrigSeries":
        k = max(self.n_max, other.n_max)
        return TrigSeries(self.pad_to(k).coeffs - other.pad_to(k).coeffs)

    def __neg__(self) -> "TrigSeries":
        return TrigSeries(-self.coeffs)

    def scale(self, factor: complex) -> "TrigSeries":
        return TrigSeries(self.coeffs * factor)

    def __mul__(self, other):
        if isinstance(other, TrigSeries):
            return multiply(self, other)
        return self.scale(other)

    __rmul__ = __mul__

    def shift(self, m: int) -> "TrigSeries":
        """Multiply by the monomial ``zeta^m`` (exact mode shift)."""
        k = self.n_max
        nk = k + abs(m)
        arr = np.zeros(2 * nk + 1, dtype=complex)
        arr[nk - k + m : nk + k + 1 + m] = self.coeffs
        return TrigSeries(arr)

    def conjugate(self) -> "TrigSeries":
        """Pointwise complex conjugate on the circle: ``c[n] -> conj(c[-n])``."""
        return TrigSeries(np.conj(self.coeffs[::-1]))

    def power(self, p: int) -> "TrigSeries":
        if p < 0:
            raise ValueError("negative powers are not representable")
        out = TrigSeries.constant(1.0)
        for _ in range(p):
            out = multiply(out, self)
        return out

    # ---- projections ----------------------------------------------------

    def szego_project(self) -> "TrigSeries":
        """Keep modes ``n >= 0`` (boundary values of the analytic part)."""
        arr = self.coeffs.copy()
        arr[: self.n_max] = 0.0
        return TrigSeries(arr)

    def negative_project(self) -> "TrigSeries":
        """Keep modes ``n < 0``; complements :meth:`szego_project` exactly."""
        arr = self.coeffs.copy()
        arr[self.n_max :] = 0.0
        return TrigSeries(arr)

    def mean(self) -> complex:
        """Average over the circle, i.e. the ``n = 0`` coefficient."""
        return self.coeff(0)

    # ---- evaluation -------------------------------------------------------

    def evaluate(self, points) -> np.ndarray:
        """Evaluate at points on the unit circle (|zeta| = 1 to 1e-12)."""
        pts = np.asarray(points, dtype=complex)
        scalar = pts.ndim == 0
        pts = np.atleast_1d(pts)
        if np.max(np.abs(np.abs(pts) - 1.0)) > _CIRCLE_TOL:
            raise ValueError("evaluation points must lie on the unit circle")
        k = self.n_max
        out = np.full(pts.shape, self.coeffs[k], dtype=complex)
        # Horner in zeta for positive modes, in conj(zeta) for negative ones.
        if k > 0:
            pos = np.zeros_like(pts)
            for n in range(k, 0, -1):
                pos = (pos + self.coeffs[k + n]) * pts
            neg = np.zeros_like(pts)
            cbar = np.conj(pts)
            for n in range(k, 0, -1):
                neg = (neg + self.coeffs[k - n]) * cbar
            out = out + pos + neg
        return out[0] if scalar else out

    def sample(self, num: int) -> np.ndarray:
        """Values at the ``num``-th roots of unity via an aliasing-free FFT."""
        if num < 2 * self.n_max + 1:
            raise ValueError("sample count must resolve all modes")
        buf = np.zeros(num, dtype=complex)
        k = self.n_max
        for n in range(-k, k + 1):
            buf[n % num] += self.coeffs[k + n]
        return np.fft.ifft(buf) * num

    def sup_norm(self, min_samples: int = 64) -> float:
        """Max modulus over at least ``max(4N, min_samples)`` circle samples."""
        num = max(4 * self.n_max + 4, min_samples)
        return float(np.max(np.abs(self.sample(num))))

    def coeff_decay(self) -> float:
        """Max |c[n]| over the top quartile of |n|; 0 means fully resolved."""
        k = self.n_max
        if k == 0:
            return 0.0
        q = max(1, int(np.ceil(0.75 * k)))
        tail = np.concatenate([self.coeffs[: k - q + 1], self.coeffs[k + q :]])
        return float(np.max(np.abs(tail)))

    def derivative_at(self, at: complex, order: int = 1) -> complex:
        """``order``-th derivative of the analytic extension at ``at``.

        Only valid for analytic series (no negative modes); the extension is
        the polynomial ``sum_{n>=0} c[n] z^n``.
        """
        if order < 0:
            raise ValueError("derivative order must be >= 0")
        if not self.is_analytic(1e-13 * max(1.0, float(np.max(np.abs(self.coeffs))))):
            raise ValueError("derivative_at requires an analytic series")
        k = self.n_max
        total = 0.0 + 0.0j
        for n in range(order, k + 1):
            fall = 1.0
            for i in range(order):
                fall *= n - i
            total += self.coeffs[k + n] * fall * at ** (n - order)
        return complex(total)

    # ---- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "N": self.n_max,
            "re": [float(v) for v in self.coeffs.real],
            "im": [float(v) for v in self.coeffs.imag],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TrigSeries":
        n = int(data["N"])
        re = np.asarray(data["re"], dtype=float)
        im = np.asarray(data["im"], dtype=float)
        if re.size != 2 * n + 1 or im.size != 2 * n + 1:
            raise ValueError("coefficient list length must be 2N+1")
        return cls(re + 1j * im)


# ---- module-level operations ------------------------------------------------


def multiply(a: TrigSeries, b: TrigSeries) -> TrigSeries:
    """Exact product; the result carries order ``Na + Nb``."""
    return TrigSeries(np.convolve(a.coeffs, b.coeffs))


def from_samples(values, n_max: int) -> tuple[TrigSeries, float]:
    """Series of order ``n_max`` from samples at the K-th roots of unity.

    ``K = len(values)`` must be a power of two with ``K >= 2*n_max + 2`` so the
    kept window is alias-free.  Returns the series and the aliased tail (max
    modulus over the discarded modes) as a diagnostic residual.
    """
    vals = np.asarray(values, dtype=complex)
    k = vals.size
    if k & (k - 1) != 0 or k < 2 * n_max + 2:
        raise ValueError("sample count must be a power of two >= 2*n_max + 2")
    spec = np.fft.fft(vals) / k
    arr = np.zeros(2 * n_max + 1, dtype=complex)
    for n in range(-n_max, n_max + 1):
        arr[n_max + n] = spec[n % k]
    kept = {n % k for n in range(-n_max, n_max + 1)}
    rest = [abs(spec[m]) for m in range(k) if m not in kept]
    tail = float(max(rest)) if rest else 0.0
    return TrigSeries(arr), tail


def hilbert_transform(a: TrigSeries) -> TrigSeries:
    """Boundary conjugation operator, normalized to kill constants.

    ``T(a) = i*a + i*mean(a) - 2i*szego_project(a)``; maps real series to
    real series, cos to sin and sin to -cos.
    """
    return a.scale(1j) + TrigSeries.constant(1j * a.mean()) - a.szego_project().scale(2j)


def analytic_from_real_part(p: TrigSeries, tol: float = 1e-9) -> TrigSeries:
    """The unique analytic g with ``Re g = p`` on the circle and ``g(1) = 0``.

    Requires ``p`` real-valued with ``p(1) = 0`` (to ``tol``); the recipe is
    ``g[n] = 2 p[n]`` for ``n >= 1``, ``g[0] = p[0]``, then subtract ``g(1)``.
    """
    scalebound = max(1.0, float(np.max(np.abs(p.coeffs))))
    if not p.is_real(tol * scalebound):
        raise ValueError("real part data must be a real-valued series")
    at_one = complex(np.sum(p.coeffs))
    if abs(at_one) > tol * scalebound:
        raise ValueError("real part data must vanish at zeta = 1")
    k = p.n_max
    arr = np.zeros(2 * k + 1, dtype=complex)
    arr[k] = p.coeffs[k]
    arr[k + 1 :] = 2.0 * p.coeffs[k + 1 :]
    arr[k] -= np.sum(arr)
    return TrigSeries(arr)


def divide_one_minus_zeta(a: TrigSeries, tol: float = 1e-9) -> TrigSeries:
    """Exact quotient ``a / (1 - zeta)`` for analytic ``a`` with ``a(1) = 0``.

    Coefficientwise this is a prefix sum; the top coefficient folds the
    (checked) residual ``a(1)``.
    """
    scalebound = max(1.0, float(np.max(np.abs(a.coeffs))))
    if not a.is_analytic(tol * scalebound):
        raise ValueError("quotient requires an analytic series")
    if abs(np.sum(a.coeffs)) > tol * scalebound:
        raise ValueError("quotient requires a(1) = 0")
    k = a.n_max
    if k == 0:
        return TrigSeries.zero()
    partial = np.cumsum(a.coeffs[k:])[:-1]
    arr = np.zeros(2 * (k - 1) + 1, dtype=complex)
    arr[k - 1 :] = partial
    return TrigSeries(arr)


def coeff_distance(a: TrigSeries, b: TrigSeries) -> float:
    """Max coefficientwise distance after aligning carriers."""
    k = max(a.n_max, b.n_max)
    return float(np.max(np.abs(a.pad_to(k).coeffs - b.pad_to(k).coeffs)))
