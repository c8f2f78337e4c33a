"""Discrete differential geometry of closed immersed planar curves.

A curve is sampled at ``N`` uniform parameter values ``u_i = i/N`` of the
circle ``R/Z``.  Arclength derivatives are formed as ``|gamma_u|^{-1} d/du``
applied recursively, with ``d/du`` computed either spectrally (default) or
by periodic second-order central differences.

Sign conventions: ``tau = gamma_s``, ``nu`` is ``tau`` rotated
counterclockwise by a right angle, ``k = <gamma_ss, nu>``.  A counterclockwise
circle of radius ``rho`` therefore has ``k = 1/rho`` and inward ``nu``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * np.pi

MIN_NODES = 16
DEFAULT_MESH_RATIO = 10.0
# relative magnitude below which Fourier coefficients are treated as round-off
DEFAULT_FILTER_TOL = 1e-13


class CurveError(ValueError):
    """Raised for inputs that are not valid discrete immersed closed curves."""


class MeshQualityError(CurveError):
    pass


class AmbiguousTurningNumber(CurveError):
    pass


@dataclass(frozen=True, eq=False)
class ClosedCurve:
    """Periodic array of planar nodes over the uniform grid ``u_i = i/N``."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise CurveError(f"points must have shape (N, 2), got {pts.shape}")
        if len(pts) < MIN_NODES:
            raise CurveError(f"need at least {MIN_NODES} nodes, got {len(pts)}")
        if not np.all(np.isfinite(pts)):
            raise CurveError("non-finite node coordinates")
        seg = np.linalg.norm(np.roll(pts, -1, axis=0) - pts, axis=1)
        if seg.min() <= 0.0:
            raise CurveError("consecutive nodes coincide (not an immersion)")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @classmethod
    def from_xy(cls, x, y) -> ClosedCurve:
        return cls(np.column_stack([x, y]))

    @property
    def N(self) -> int:
        return len(self.points)

    @property
    def u(self) -> np.ndarray:
        return np.arange(self.N) / self.N

    def point(self, i: int) -> np.ndarray:
        return self.points[i % self.N]

    def segment_lengths(self) -> np.ndarray:
        """Chord lengths ``|gamma_{i+1} - gamma_i|``."""
        return np.linalg.norm(np.roll(self.points, -1, axis=0) - self.points, axis=1)

    def mesh_ratio(self) -> float:
        seg = self.segment_lengths()
        return float(seg.max() / seg.min())

    def scaled(self, factor: float) -> ClosedCurve:
        return ClosedCurve(self.points * factor)

    def translated(self, shift) -> ClosedCurve:
        return ClosedCurve(self.points + np.asarray(shift, dtype=float))

    def rotated(self, angle: float) -> ClosedCurve:
        c, s = np.cos(angle), np.sin(angle)
        return ClosedCurve(self.points @ np.array([[c, s], [-s, c]]))

    def reversed(self) -> ClosedCurve:
        """Same image traversed in the opposite direction."""
        return ClosedCurve(np.roll(self.points[::-1], 1, axis=0))


# -- periodic differentiation -------------------------------------------------


def _spectral_filter(fh: np.ndarray, tol: float) -> np.ndarray:
    if tol <= 0:
        return fh
    mag = np.abs(fh)
    cut = tol * mag.max(axis=0, keepdims=True)
    return np.where(mag < cut, 0.0, fh)


def spectral_derivative(f: np.ndarray, filter_tol: float = DEFAULT_FILTER_TOL) -> np.ndarray:
    """``d/du`` of period-1 samples along axis 0 via the real FFT.

    Fourier coefficients smaller than ``filter_tol`` times the largest one
    are zeroed first, so round-off is not amplified by repeated
    differentiation.  The Nyquist mode of the derivative is set to zero.
    """
    f = np.asarray(f, dtype=float)
    n = f.shape[0]
    fh = _spectral_filter(np.fft.rfft(f, axis=0), filter_tol)
    ik = 2j * np.pi * np.arange(fh.shape[0])
    if n % 2 == 0:
        ik[-1] = 0.0
    if f.ndim > 1:
        ik = ik.reshape((-1,) + (1,) * (f.ndim - 1))
    return np.fft.irfft(ik * fh, n=n, axis=0)


def central_derivative(f: np.ndarray) -> np.ndarray:
    n = f.shape[0]
    return (np.roll(f, -1, axis=0) - np.roll(f, 1, axis=0)) * (n / 2.0)


def central_second_derivative(f: np.ndarray) -> np.ndarray:
    n = f.shape[0]
    return (np.roll(f, -1, axis=0) - 2.0 * f + np.roll(f, 1, axis=0)) * float(n * n)


# -- geometry -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GeometricQuantities:
    """Per-node frame, curvature hierarchy and quadrature weights of a curve."""

    speed: np.ndarray  # |gamma_u|
    ds: np.ndarray  # quadrature weights, sum = L
    tau: np.ndarray
    nu: np.ndarray
    k: np.ndarray
    k_s: np.ndarray
    k_ss: np.ndarray
    k_sss: np.ndarray
    L: float
    turning_integral: float  # (1/2pi) int k ds, unrounded
    method: str = "spectral"
    filter_tol: float = DEFAULT_FILTER_TOL
    _d: object = field(default=None, repr=False)

    @property
    def N(self) -> int:
        return len(self.k)

    def d_s(self, f: np.ndarray) -> np.ndarray:
        """Arclength derivative of a nodal field, same scheme as the curvature."""
        f = np.asarray(f, dtype=float)
        g = self.speed if f.ndim == 1 else self.speed[:, None]
        return self._d(f) / g

    def integrate(self, f: np.ndarray) -> float:
        return float(np.dot(np.asarray(f, dtype=float), self.ds))

    def average(self, f: np.ndarray) -> float:
        return self.integrate(f) / self.L

    def norm2_sq(self, f: np.ndarray) -> float:
        f = np.asarray(f, dtype=float)
        return self.integrate(f * f)


def compute_geometry(
    curve: ClosedCurve,
    method: str = "spectral",
    max_mesh_ratio: float | None = DEFAULT_MESH_RATIO,
    filter_tol: float = DEFAULT_FILTER_TOL,
) -> GeometricQuantities:
    """Tangent, normal, curvature and its first three arclength derivatives.

    ``method="spectral"`` differentiates in Fourier space (spectrally accurate
    for smooth curves); ``method="fd"`` uses periodic central differences and
    converges at second order.  Meshes whose max/min segment ratio exceeds
    ``max_mesh_ratio`` are refused (pass ``None`` to skip the check).
    """
    if not isinstance(curve, ClosedCurve):
        curve = ClosedCurve(curve)
    if max_mesh_ratio is not None:
        ratio = curve.mesh_ratio()
        if ratio > max_mesh_ratio:
            raise MeshQualityError(
                f"mesh ratio {ratio:.3g} exceeds {max_mesh_ratio:g}; redistribute first"
            )
    z = curve.points
    n = curve.N
    if method == "spectral":
        d = lambda f: spectral_derivative(f, filter_tol)  # noqa: E731
        zu = d(z)
        zuu = d(zu)
    elif method == "fd":
        d = central_derivative
        zu = central_derivative(z)
        zuu = central_second_derivative(z)
    else:
        raise ValueError(f"unknown differentiation method {method!r}")

    g = np.hypot(zu[:, 0], zu[:, 1])
    if g.min() <= 0.0:
        raise CurveError("vanishing parametric speed (not an immersion)")
    tau = zu / g[:, None]
    nu = np.column_stack([-tau[:, 1], tau[:, 0]])
    k = (zu[:, 0] * zuu[:, 1] - zu[:, 1] * zuu[:, 0]) / g**3
    k_s = d(k) / g
    k_ss = d(k_s) / g
    k_sss = d(k_ss) / g
    ds = g / n
    L = float(ds.sum())
    turning = float(np.dot(k, ds) / TWO_PI)
    return GeometricQuantities(
        speed=g, ds=ds, tau=tau, nu=nu, k=k, k_s=k_s, k_ss=k_ss, k_sss=k_sss,
        L=L, turning_integral=turning, method=method, filter_tol=filter_tol, _d=d,
    )


def signed_turning_number(geom: GeometricQuantities, tol: float = 0.1) -> int:
    """Nearest integer to ``(1/2pi) int k ds``; raises if it is not near one."""
    w = geom.turning_integral
    nearest = round(w)
    if abs(w - nearest) > tol:
        raise AmbiguousTurningNumber(
            f"(1/2pi) int k ds = {w:.4f} is {abs(w - nearest):.3f} from an integer; "
            "curve is under-resolved"
        )
    return int(nearest)


def turning_number(geom: GeometricQuantities, tol: float = 0.1) -> int:
    """Absolute turning number ``|(1/2pi) int k ds|``."""
    return abs(signed_turning_number(geom, tol))


@dataclass(frozen=True)
class ScalarDiagnostics:
    L: float
    E: float
    omega: int
    omega_signed: int
    kbar: float  # 2 pi omega_signed / L
    eps: float  # L^3 int k_s^2 ds
    Q: float  # int k_s^2 ds / (int k^2 ds)^3
    centre: tuple[float, float]
    int_ks2: float


def diagnostics(geom: GeometricQuantities, curve: ClosedCurve) -> ScalarDiagnostics:
    """Length, elastic energy, turning number, eps, Q and centre of mass."""
    ws = signed_turning_number(geom)
    L = geom.L
    int_k2 = geom.norm2_sq(geom.k)
    int_ks2 = geom.norm2_sq(geom.k_s)
    centre = geom.ds @ curve.points / L
    return ScalarDiagnostics(
        L=L,
        E=0.5 * int_k2,
        omega=abs(ws),
        omega_signed=ws,
        kbar=TWO_PI * ws / L,
        eps=L**3 * int_ks2,
        Q=int_ks2 / int_k2**3,
        centre=(float(centre[0]), float(centre[1])),
        int_ks2=int_ks2,
    )


def scalar_diagnostics(curve: ClosedCurve, **kw) -> ScalarDiagnostics:
    return diagnostics(compute_geometry(curve, **kw), curve)


def poincare_margin(geom: GeometricQuantities, f, avg_tol: float = 1e-8) -> tuple[float, float]:
    """Ratios of both sides of the zero-average Wirtinger inequalities.

    Returns ``||f||_2^2 / ((L/2pi)^2 ||f_s||_2^2)`` and
    ``||f||_inf^2 / ((L/2pi) ||f_s||_2^2)``; each is at most 1 in the continuum.
    """
    f = np.asarray(f, dtype=float)
    scale = max(float(np.abs(f).max()), np.finfo(float).tiny)
    if abs(geom.average(f)) > avg_tol * scale:
        raise ValueError(f"field has non-zero average {geom.average(f):.3g}; subtract it first")
    L = geom.L
    fs2 = geom.norm2_sq(geom.d_s(f))
    if fs2 == 0.0:
        return 0.0, 0.0
    ratio_l2 = geom.norm2_sq(f) / (L**2 / (4 * np.pi**2) * fs2)
    ratio_sup = float(np.abs(f).max()) ** 2 / (L / TWO_PI * fs2)
    return float(ratio_l2), float(ratio_sup)
