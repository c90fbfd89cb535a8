"""Scalar Wiener-Hopf splittings of functions sampled on a horizontal line.

Class-D functions decay only like ``1/alpha``, which a truncated grid resolves
poorly, so the slowly decaying tail is first fitted by terms
``exp(i*s*alpha) / (alpha - p)**j`` whose splits are known in closed form.
The fast-decaying remainder is split with the Plemelj formula, the principal
value integral being computed by the odd-point trapezoid rule as a linear
(zero-padded) FFT convolution, so no periodic images enter.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from whiter.analytic_core import HalfPlaneFunction, LineGrid, LineSamples
from whiter.errors import (
    ClassViolationError,
    EvaluationRegionError,
    NonzeroIndexError,
    SingularityError,
    WindingError,
)

TAIL_ORDER = 5
POLE_DISTANCE = 1.0
DECAY_RATIO = 0.25
NOISE_LEVEL = 1e-10
UNIT_LIMIT_TOL = 1e-6
FIT_ROWS = 2048


@dataclass(frozen=True)
class AdditiveSplit:
    plus: HalfPlaneFunction
    minus: HalfPlaneFunction

    def __iter__(self):
        return iter((self.plus, self.minus))


@dataclass(frozen=True)
class MultiplicativeSplit:
    plus_factor: HalfPlaneFunction
    minus_factor: HalfPlaneFunction
    log_split: AdditiveSplit


# --------------------------------------------------------------------------
# tail model


def _effective_shifts(shifts, grid: LineGrid) -> tuple[float, ...]:
    # a factor exp(i*s*x) that does not complete a period on the grid cannot be
    # told apart from a constant there; it is absorbed by the s = 0 terms
    out = {0.0}
    for s in shifts:
        s = float(s)
        if abs(s) * grid.half_width >= 2 * math.pi:
            out.add(s)
    return tuple(sorted(out))


@dataclass(frozen=True)
class TailModel:
    """Sum of ``coef * exp(i*s*z) / (z - pole)**power`` terms."""

    shifts: np.ndarray
    poles: np.ndarray
    powers: np.ndarray
    sides: np.ndarray  # +1 plus term, -1 minus term
    coefs: np.ndarray

    def __call__(self, z, side: int | None = None) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape, complex)
        groups: dict[tuple[float, complex], dict[int, complex]] = {}
        for s, p, j, sd, c in zip(self.shifts, self.poles, self.powers, self.sides, self.coefs):
            if side is None or sd == side:
                groups.setdefault((s, p), {})[int(j)] = c
        inv: dict[complex, np.ndarray] = {}
        osc: dict[float, np.ndarray] = {}
        for (s, p), by_power in groups.items():
            if p not in inv:
                inv[p] = 1.0 / (z - p)
            acc = _horner(inv[p], by_power)
            if s:
                if s not in osc:
                    osc[s] = np.exp(1j * s * z)
                acc *= osc[s]
            out += acc
        return out

    @classmethod
    def empty(cls):
        e = np.zeros(0)
        return cls(e, e.astype(complex), e.astype(int), e.astype(int), e.astype(complex))


def _horner(inv: np.ndarray, coefs: dict[int, complex]) -> np.ndarray:
    """``sum_j coefs[j] * inv**j`` by Horner's rule."""
    acc = np.zeros(inv.shape, complex)
    for j in range(max(coefs), 0, -1):
        acc += coefs.get(j, 0.0)
        acc *= inv
    return acc


def _basis_terms(grid: LineGrid, shifts, order: int, side: int | None):
    c = grid.offset
    terms = []
    for s in _effective_shifts(shifts, grid):
        # exp(i s z) decays upward for s > 0 (plus), downward for s < 0 (minus);
        # the non-oscillating terms take whichever side is asked for
        if s == 0:
            sd = side or 1
        else:
            sd = 1 if s > 0 else -1
        if side is not None and sd != side:
            continue
        pole = 1j * (c - POLE_DISTANCE) if sd > 0 else 1j * (c + POLE_DISTANCE)
        for j in range(1, order + 1):
            terms.append((s, pole, j, sd))
    return terms


def _fit_rows(grid: LineGrid, smax: float = 0.0) -> np.ndarray:
    """Indices of the tail region ``|x| >= X/2``, thinned to about FIT_ROWS points.

    The tail is smooth, so thinning costs nothing as long as the oscillating
    columns keep at least eight samples per period.
    """
    idx = np.flatnonzero(np.abs(grid.x) >= grid.half_width / 2)
    stride = max(1, idx.size // FIT_ROWS)
    if smax > 0:
        stride = min(stride, max(1, int(np.pi / (4 * smax * grid.spacing))))
    return idx[::stride]


def fit_tail(f: LineSamples, shifts=(0.0,), order: int = TAIL_ORDER, side: int | None = None) -> TailModel:
    """Least-squares fit of the asymptotic tail of ``f`` on ``|x| >= X/2``."""
    grid = f.grid
    terms = _basis_terms(grid, shifts, order, side)
    if not terms:
        return TailModel.empty()
    smax = max(abs(t[0]) for t in terms)
    rows = _fit_rows(grid, smax)
    z = grid.points[rows]
    cols = np.empty((z.size, len(terms)), complex)
    for k, (s, p, j, _) in enumerate(terms):
        if j == 1:
            base = np.exp(1j * s * z) / (z - p) if s else 1.0 / (z - p)
            cols[:, k] = base
        else:
            cols[:, k] = cols[:, k - 1] / (z - p)
    scale = np.linalg.norm(cols, axis=0)
    coefs, *_ = np.linalg.lstsq(cols / scale, f.values[rows], rcond=1e-12)
    coefs = coefs / scale
    s, p, j, sd = (np.array(v) for v in zip(*terms))
    return TailModel(s.astype(float), p.astype(complex), j.astype(int), sd.astype(int), coefs)


def _fft_size(n: int) -> int:
    return 1 << int(np.ceil(np.log2(3 * n - 2)))


@lru_cache(maxsize=32)
def _kernel_fft(n: int, h: float, delta: float) -> np.ndarray:
    """Transform of the quadrature kernel; ``delta = 0`` means the PV rule."""
    m = np.arange(-(n - 1), n)
    if delta == 0:
        ker = np.zeros(m.shape)
        odd = (m % 2) != 0
        ker[odd] = -2.0 / m[odd]  # 2h / (t_k - x_j) with t_k - x_j = -m h
    else:
        ker = h / (-m * h - 1j * delta)
    out = np.fft.fft(ker, _fft_size(n))
    out.setflags(write=False)
    return out


def _convolve(values: np.ndarray, ker_hat: np.ndarray) -> np.ndarray:
    """Linear convolution ``out[j] = sum_k kernel(j - k) * values[k]``."""
    n = values.size
    full = np.fft.ifft(np.fft.fft(values, ker_hat.size) * ker_hat)
    return full[n - 1 : 2 * n - 1]


def _principal_value(values: np.ndarray, h: float) -> np.ndarray:
    """``PV int f(t) / (t - x_j) dt`` by the odd-point trapezoid rule."""
    return _convolve(values.astype(complex), _kernel_fft(values.size, float(h), 0.0))


def _cauchy_offline(values: np.ndarray, h: float, delta: float) -> np.ndarray:
    """``int f(t) / (t - x_j - i delta) dt`` by the trapezoid rule, same grid."""
    if delta == 0:
        raise ValueError("off-line Cauchy integral needs delta != 0")
    return _convolve(values.astype(complex), _kernel_fft(values.size, float(h), float(delta)))


def _check_decay(f: LineSamples):
    v = np.abs(f.values)
    peak = v.max()
    edge = max(1, f.grid.n_points // 200)
    ends = max(v[:edge].max(), v[-edge:].max())
    # values at the level of rounding noise (the log of a symbol that is
    # identically 1, say) carry no information about decay
    if ends > DECAY_RATIO * peak and ends > NOISE_LEVEL:
        raise ClassViolationError(
            f"function does not decay at the truncation ends (|f| edge/peak = {ends / peak:.3g}); "
            "enlarge the grid or check the function class"
        )


# --------------------------------------------------------------------------
# public operations


def winding_index(k: LineSamples, return_residual: bool = False):
    """Index of ``k`` along the line: net change of ``arg k`` over ``2*pi``."""
    v = k.values
    mag = np.abs(v)
    if mag.min() <= 1e-13 * mag.max():
        j = int(np.argmin(mag))
        raise SingularityError(f"symbol vanishes near alpha={k.grid.points[j]:.6g}")
    phase = np.unwrap(np.angle(v))
    # close the curve through the point at infinity
    total = phase[-1] - phase[0] + np.angle(v[0] / v[-1])
    turns = total / (2 * np.pi)
    index = int(round(turns))
    residual = abs(turns - index)
    if residual > 0.1:
        raise WindingError(f"accumulated argument is {turns:.4f} turns, not an integer")
    return (index, residual) if return_residual else index


def additive_split(f: LineSamples, shifts=(0.0,), order: int = TAIL_ORDER) -> AdditiveSplit:
    """Split ``f = F+ + F-`` with ``F+`` analytic above the line, ``F-`` below."""
    _check_decay(f)
    grid = f.grid
    tail = fit_tail(f, shifts, order)
    rem = f.values - tail(grid.points)
    rem_plus = 0.5 * rem + _principal_value(rem, grid.spacing) / (2j * np.pi)
    plus = tail(grid.points, side=1) + rem_plus
    minus = f.values - plus
    eff = _effective_shifts(shifts, grid)
    return AdditiveSplit(
        HalfPlaneFunction("plus", LineSamples(grid, plus), tuple(s for s in eff if s >= 0)),
        HalfPlaneFunction("minus", LineSamples(grid, minus), tuple(s for s in eff if s <= 0)),
    )


def limit_at_infinity(k: LineSamples, order: int = TAIL_ORDER) -> complex:
    """Common limit of ``k`` as ``Re(alpha) -> +-inf``, by a tail fit with a constant term."""
    grid = k.grid
    rows = _fit_rows(grid)
    z = grid.points[rows]
    cols = [np.ones(z.size, complex)]
    for _, p, j, _ in _basis_terms(grid, (0.0,), order, side=1):
        cols.append(1.0 / (z - p) ** j)
    a = np.stack(cols, axis=1)
    scale = np.linalg.norm(a, axis=0)
    coefs, *_ = np.linalg.lstsq(a / scale, k.values[rows], rcond=1e-12)
    return complex(coefs[0] / scale[0])


def multiplicative_split(k: LineSamples, order: int = TAIL_ORDER) -> MultiplicativeSplit:
    """Factor ``k = K+ K-`` through the additive split of a continuous ``log k``.

    A limit ``k_inf != 1`` at infinity is divided out first and returned as
    part of ``K+``; ``K-`` always tends to one.
    """
    ind = winding_index(k)
    if ind != 0:
        raise NonzeroIndexError(f"index of symbol is {ind}; no factorisation in this class")
    kinf = limit_at_infinity(k, order)
    if abs(kinf - 1) < UNIT_LIMIT_TOL:
        # symbols of the class tend to 1; the fit is only good to ~1e-9
        kinf = 1.0
    if abs(kinf) < 1e-12 * k.max_abs():
        raise ClassViolationError("symbol tends to zero at infinity")
    v = k.values / kinf
    phase = np.unwrap(np.angle(v))
    # branch fixed so that log k -> 0 at the left end where k ~ 1
    phase -= 2 * np.pi * round(phase[0] / (2 * np.pi))
    logk = LineSamples(k.grid, np.log(np.abs(v)) + 1j * phase)
    parts = additive_split(logk, order=order)
    kp = LineSamples(k.grid, kinf * np.exp(parts.plus.values))
    km = LineSamples(k.grid, np.exp(parts.minus.values))
    return MultiplicativeSplit(
        HalfPlaneFunction("plus", kp), HalfPlaneFunction("minus", km), parts
    )


def min_clearance(grid: LineGrid, strip_width: float | None = None) -> float:
    """Smallest distance from the line at which off-line quadrature is trusted."""
    floor = 4.0 * grid.spacing
    if strip_width is None:
        return floor
    return max(0.05 * strip_width, floor)


def _side_sign(f: HalfPlaneFunction) -> int:
    return 1 if f.side == "plus" else -1


def _check_target(f: HalfPlaneFunction, target_offset: float, clearance: float):
    c = f.defining_line.offset
    dist = (target_offset - c) * _side_sign(f)
    if dist < clearance:
        where = "above" if f.side == "plus" else "below"
        raise EvaluationRegionError(
            f"{f.side} function on Im(alpha)={c} can only be continued {where} the line "
            f"by at least {clearance:.3g}; requested Im(alpha)={target_offset}"
        )


def cauchy_eval(f: HalfPlaneFunction, z, clearance: float | None = None):
    """Analytic continuation of a one-sided function by its Cauchy integral."""
    grid = f.defining_line
    z_arr = np.atleast_1d(np.asarray(z, dtype=complex))
    clear = min_clearance(grid) if clearance is None else clearance
    for zi in z_arr:
        _check_target(f, zi.imag, clear)
    sd = _side_sign(f)
    tail = fit_tail(f.boundary, f.shifts, side=sd)
    t = grid.points
    rem = f.values - tail(t)
    # trapezoid rule for (sign / 2 pi i) * int rem(t) / (t - z) dt
    kernel = 1.0 / (t[None, :] - z_arr[:, None])
    integral = grid.spacing * kernel @ rem
    out = sd * integral / (2j * np.pi) + tail(z_arr)
    return out if np.ndim(z) else complex(out[0])


def shift_line(f: HalfPlaneFunction, new_offset: float) -> LineSamples:
    """Samples of the continuation of ``f`` on ``Im(alpha) = new_offset``.

    The remainder after tail removal goes through the trapezoid Cauchy
    integral, evaluated for the whole grid at once as a convolution.
    """
    grid = f.defining_line
    _check_target(f, new_offset, clearance=min_clearance(grid))
    sd = _side_sign(f)
    new_grid = grid.at(new_offset)
    tail = fit_tail(f.boundary, f.shifts, side=sd)
    rem = f.values - tail(grid.points)
    delta = new_offset - grid.offset
    moved = sd * _cauchy_offline(rem, grid.spacing, delta) / (2j * np.pi) + tail(new_grid.points)
    return LineSamples(new_grid, moved)


def continue_to(f: HalfPlaneFunction, new_offset: float) -> HalfPlaneFunction:
    """``shift_line`` packaged as a one-sided function on the new line."""
    if new_offset == f.defining_line.offset:
        return f
    return HalfPlaneFunction(f.side, shift_line(f, new_offset), f.shifts)
