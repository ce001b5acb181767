"""Euclidean transition amplitudes G(x_fi, T; x_in, 0) by imaginary-time
evolution of the lattice Hamiltonian.

The evolver applies the second-order splitting

    exp(-dt H) ~ exp(-dt V/2) exp(-dt K) exp(-dt V/2)

to a discrete delta of weight 1/h^dim placed at the source node, with the
kinetic factor applied spectrally on a periodic grid. Kernels of a real
Hamiltonian acting on real data stay nonnegative up to roundoff, which is
what makes the downstream log-domain fitting well posed.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

from .errors import EmptyTable, GridTooCoarse, NegativeKernel, NotConverged, Underflow
from .model import ActionSpec, Potential1D

NEGATIVE_FLOOR = -1e-12
# Entries below this are dropped from tables: the evolution's accumulated FFT
# roundoff is ~1e-15 absolute, so log-amplitudes below ~1e-9 carry relative
# noise above 1e-6 and would dominate fit residuals.
UNDERFLOW_FLOOR = 1e-9


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform periodic grid, x_j = -L + j h with h = 2L/n (0 is a node for
    even n, and the FFT wavenumbers come in +/- pairs)."""

    dim: int
    half_extent: float
    points_per_axis: int

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError("dim must be 1 or 2")
        n = self.points_per_axis
        if n < 16 or n % 2 != 0:
            raise ValueError(f"points_per_axis must be even and >= 16, got {n}")
        if self.half_extent <= 0:
            raise ValueError("half_extent must be positive")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_extent / self.points_per_axis

    def nodes(self) -> np.ndarray:
        h = self.spacing
        return -self.half_extent + h * np.arange(self.points_per_axis)

    def wavenumbers(self) -> np.ndarray:
        return 2.0 * np.pi * sfft.fftfreq(self.points_per_axis, d=self.spacing)

    def node_index(self, value: float) -> int:
        """Index of the grid node at `value`; the point must lie on a node."""
        h = self.spacing
        j = int(round((value + self.half_extent) / h))
        if j < 0 or j >= self.points_per_axis or abs(self.nodes()[j] - value) > 1e-9:
            raise ValueError(f"{value} is not a grid node (h = {h})")
        return j

    def index_of(self, point) -> tuple:
        if self.dim == 1:
            return (self.node_index(float(point)),)
        x, y = point
        return (self.node_index(float(x)), self.node_index(float(y)))

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "half_extent": self.half_extent,
            "points_per_axis": self.points_per_axis,
            "spacing": self.spacing,
        }


def default_grid(dim: int) -> SpatialGrid:
    """Defaults chosen so integer and 0.1-step probe points are exact nodes."""
    if dim == 1:
        return SpatialGrid(dim=1, half_extent=6.4, points_per_axis=256)
    return SpatialGrid(dim=2, half_extent=6.4, points_per_axis=128)


@dataclass
class KernelSlice:
    """One evolved kernel: values[j] ~ G(x_j, T; x_in, 0) on the grid."""

    grid: SpatialGrid
    source: tuple
    duration: float
    values: np.ndarray

    def value_at(self, point) -> float:
        return float(self.values[self.grid.index_of(point)])


def _step_count(T: float, dt: float) -> int:
    steps = int(round(T / dt))
    if steps < 1 or abs(steps * dt - T) > 1e-9 * max(T, 1.0):
        raise ValueError(f"dt = {dt} does not divide T = {T} to within 1e-9")
    return steps


def _potential_on_grid(action: ActionSpec, grid: SpatialGrid) -> np.ndarray:
    x = grid.nodes()
    if grid.dim == 1:
        return action.potential.value(x)
    X, Y = np.meshgrid(x, x, indexing="ij")
    return action.potential.value(X, Y)


def _kinetic_factor(action: ActionSpec, grid: SpatialGrid, dt: float) -> np.ndarray:
    k = grid.wavenumbers()
    n = grid.points_per_axis
    if grid.dim == 1:
        k2 = (k**2)[: n // 2 + 1]  # rfft layout
    else:
        k2 = (k**2)[:, None] + (k**2)[None, : n // 2 + 1]
    return np.exp(-dt * k2 / (2.0 * action.mass))


def evolve_state(action: ActionSpec, grid: SpatialGrid, psi0: np.ndarray,
                 T: float, dt: float) -> np.ndarray:
    """Apply exp(-T H) to an arbitrary real state by repeated split steps."""
    steps = _step_count(T, dt)
    V = _potential_on_grid(action, grid)
    exp_v_half = np.exp(-0.5 * dt * V)
    exp_k = _kinetic_factor(action, grid, dt)
    n = grid.points_per_axis
    psi = np.array(psi0, dtype=float, copy=True)
    if grid.dim == 1:
        for _ in range(steps):
            psi *= exp_v_half
            psi = sfft.irfft(exp_k * sfft.rfft(psi), n=n)
            psi *= exp_v_half
    else:
        for _ in range(steps):
            psi *= exp_v_half
            psi = sfft.irfft2(exp_k * sfft.rfft2(psi), s=(n, n))
            psi *= exp_v_half
    return psi


def evolve_kernel(action: ActionSpec, grid: SpatialGrid, T: float, x_in,
                  dt: float = 1e-3, richardson_tol: float | None = None) -> KernelSlice:
    """Euclidean kernel from a delta source of weight 1/h^dim at x_in.

    With `richardson_tol` set, the evolution is repeated at dt/2 and the two
    kernels compared at the source node; disagreement beyond the tolerance
    raises GridTooCoarse.
    """
    if grid.dim != (1 if np.isscalar(x_in) else len(np.atleast_1d(x_in))):
        raise ValueError("source dimensionality does not match the grid")
    idx = grid.index_of(x_in)
    h = grid.spacing
    psi0 = np.zeros((grid.points_per_axis,) * grid.dim)
    psi0[idx] = 1.0 / h**grid.dim
    values = evolve_state(action, grid, psi0, T, dt)
    low = values.min()
    if low < NEGATIVE_FLOOR:
        raise NegativeKernel(f"kernel minimum {low} below {NEGATIVE_FLOOR}")
    # far-tail values may carry O(1e-15) FFT roundoff of either sign; they sit
    # far below the underflow floor and are dropped by every consumer
    if richardson_tol is not None:
        fine = evolve_state(action, grid, psi0, T, dt / 2.0)
        ref = float(fine[idx])
        err = abs(float(values[idx]) - ref) / max(abs(ref), 1e-300)
        if err > richardson_tol:
            raise GridTooCoarse(
                f"dt vs dt/2 differ by {err:.3e} at the source (tol {richardson_tol})")
    source = (float(x_in),) if grid.dim == 1 else (float(x_in[0]), float(x_in[1]))
    return KernelSlice(grid=grid, source=source, duration=T, values=values)


def amplitude(action: ActionSpec, grid: SpatialGrid, T: float, x_in, x_fi,
              dt: float = 1e-3) -> float:
    """G(x_fi, T; x_in, 0); both endpoints must be grid nodes.

    Raises Underflow when the value sits at or below the slice's roundoff
    floor (relative 1e-13 of the slice maximum, or absolute 1e-300), where
    it no longer represents a kernel value."""
    ks = evolve_kernel(action, grid, T, x_in, dt)
    G = ks.value_at(x_fi)
    floor = max(1e-300, 1e-13 * float(ks.values.max()))
    if G < floor:
        raise Underflow(f"amplitude {G} below the resolvable floor {floor:g}")
    return G


@dataclass
class AmplitudeTable:
    """Amplitudes over boundary pairs at one fixed duration.

    x_in/x_fi have shape (n_entries, dim); G is positive (underflowed
    entries are dropped and counted in metadata)."""

    duration: float
    x_in: np.ndarray
    x_fi: np.ndarray
    G: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.G)

    @property
    def dim(self) -> int:
        return self.x_in.shape[1]

    def entries(self):
        for a, b, g in zip(self.x_in, self.x_fi, self.G):
            yield (tuple(a), tuple(b), float(g))

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            if self.dim == 1:
                writer.writerow(["x_in", "x_fi", "T", "G"])
                for a, b, g in self.entries():
                    writer.writerow([repr(a[0]), repr(b[0]), repr(self.duration), repr(g)])
            else:
                writer.writerow(["x_in", "y_in", "x_fi", "y_fi", "T", "G"])
                for a, b, g in self.entries():
                    writer.writerow([repr(a[0]), repr(a[1]), repr(b[0]), repr(b[1]),
                                     repr(self.duration), repr(g)])

    def to_json(self) -> dict:
        return {
            "duration": self.duration,
            "entries": [
                {"x_in": list(a), "x_fi": list(b), "G": g} for a, b, g in self.entries()
            ],
            "metadata": self.metadata,
        }

    def save_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, sort_keys=True, indent=1)


def amplitude_table(action: ActionSpec, grid: SpatialGrid, T: float, boundary_set,
                    dt: float = 1e-3, pairs=None,
                    underflow_floor: float = UNDERFLOW_FLOOR,
                    richardson_tol: float | None = 1e-5) -> AmplitudeTable:
    """Table of amplitudes, one kernel evolution per distinct source.

    `boundary_set` is an array of endpoint positions; by default every
    ordered (x_in, x_fi) product pair is tabulated. An explicit `pairs`
    sequence of (x_in, x_fi) tuples overrides the product. The dt-halving
    probe runs once per table at the origin pair when `richardson_tol`
    is set (pass None to skip).
    """
    boundary = np.atleast_1d(np.asarray(boundary_set, dtype=float))
    if boundary.size == 0:
        raise ValueError("boundary_set must be nonempty")
    if grid.dim == 1:
        boundary = boundary.reshape(-1, 1)
    elif boundary.ndim != 2 or boundary.shape[1] != 2:
        raise ValueError("2-D boundary_set must have shape (n, 2)")

    if pairs is None:
        pair_list = [(tuple(a), tuple(b)) for a in boundary for b in boundary]
    else:
        pair_list = [(tuple(np.atleast_1d(a).astype(float)),
                      tuple(np.atleast_1d(b).astype(float))) for a, b in pairs]

    if richardson_tol is not None:
        origin = 0.0 if grid.dim == 1 else (0.0, 0.0)
        evolve_kernel(action, grid, T, origin, dt, richardson_tol=richardson_tol)

    sources = {}
    for a, _ in pair_list:
        sources.setdefault(a, None)
    for a in sources:
        key = a[0] if grid.dim == 1 else a
        sources[a] = evolve_kernel(action, grid, T, key, dt)

    kept_in, kept_fi, kept_g = [], [], []
    dropped = 0
    for a, b in pair_list:
        g = sources[a].value_at(b[0] if grid.dim == 1 else b)
        if g < underflow_floor:
            dropped += 1
            continue
        kept_in.append(a)
        kept_fi.append(b)
        kept_g.append(g)
    if not kept_g:
        raise EmptyTable(f"all {len(pair_list)} entries below {underflow_floor}")
    meta = {
        "grid": grid.to_json(),
        "dt": dt,
        "dropped_count": dropped,
        "underflow_floor": underflow_floor,
        "action": action.to_json(),
    }
    return AmplitudeTable(
        duration=T,
        x_in=np.array(kept_in, dtype=float),
        x_fi=np.array(kept_fi, dtype=float),
        G=np.array(kept_g, dtype=float),
        metadata=meta,
    )


def ground_state_projection(action: ActionSpec, grid: SpatialGrid, dt: float = 1e-3,
                            T_large: float = 20.0, window: float = 0.5,
                            tol: float = 1e-6):
    """Ground-state energy and wavefunction from long imaginary-time decay.

    Evolves a delta at the origin to T_large, then estimates E0 from the
    log-ratio of L2 norms over two successive windows; the estimates must
    agree to `tol`. The returned wavefunction satisfies sum |psi|^2 h^dim = 1.
    """
    h = grid.spacing
    origin = 0.0 if grid.dim == 1 else (0.0, 0.0)
    base = evolve_kernel(action, grid, T_large, origin, dt).values

    def l2(v):
        return math.sqrt(float(np.sum(v * v)) * h**grid.dim)

    n0 = l2(base)
    mid = evolve_state(action, grid, base, window, dt)
    n1 = l2(mid)
    late = evolve_state(action, grid, mid, window, dt)
    n2 = l2(late)
    e_first = -math.log(n1 / n0) / window
    e_second = -math.log(n2 / n1) / window
    if abs(e_first - e_second) > tol:
        raise NotConverged(
            f"E0 windows disagree: {e_first} vs {e_second} (tol {tol}); increase T_large")
    psi = late / l2(late)
    return e_second, psi


def free_kernel(m: float, T: float, x_in: float, x_fi: float, hbar: float = 1.0) -> float:
    """Closed-form Euclidean free-particle kernel (Gaussian)."""
    return math.sqrt(m / (2.0 * math.pi * hbar * T)) * math.exp(
        -m * (x_fi - x_in) ** 2 / (2.0 * hbar * T))


def harmonic_kernel(m: float, omega: float, T: float, x_in: float, x_fi: float,
                    hbar: float = 1.0) -> float:
    """Closed-form Euclidean harmonic-oscillator kernel (Mehler)."""
    s = math.sinh(omega * T)
    c = math.cosh(omega * T)
    pref = math.sqrt(m * omega / (2.0 * math.pi * hbar * s))
    expo = -(m * omega / (2.0 * hbar)) * ((x_in**2 + x_fi**2) * c - 2.0 * x_in * x_fi) / s
    return pref * math.exp(expo)


def dense_hamiltonian(action: ActionSpec, grid: SpatialGrid) -> np.ndarray:
    """Dense lattice Hamiltonian (spectral kinetic + diagonal potential).

    1-D only; intended as the diagonalization oracle for ground_state
    estimates on the same lattice."""
    if grid.dim != 1:
        raise ValueError("dense_hamiltonian supports 1-D grids only")
    n = grid.points_per_axis
    k2 = grid.wavenumbers() ** 2 / (2.0 * action.mass)
    K = sfft.ifft(k2[:, None] * sfft.fft(np.eye(n), axis=0), axis=0).real
    H = K + np.diag(_potential_on_grid(action, grid))
    return 0.5 * (H + H.T)
