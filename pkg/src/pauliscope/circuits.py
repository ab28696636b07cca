"""Circuit geometries, Haar gate sampling, noise placement and seeding.

Supported geometries:

* ``chain``  -- 1D brickwork: nearest-neighbour pairs (0,1),(2,3),... on even
  layers and (1,2),(3,4),... on odd layers, open boundaries.
* ``grid``   -- 2D brickwork on an Lx x Ly lattice (row-major site order);
  layers cycle through horizontal-even, horizontal-odd, vertical-even,
  vertical-odd pairings, open boundaries.
* ``rmpu``   -- staircase of overlapping (r+1)-site Haar blocks, one gate per
  layer on sites [l, l+r], m = N - r gates in total.

Noise placements:

* ``per_qubit_per_layer`` -- one single-qubit depolarizing channel of rate
  gamma on every qubit after each layer, so the worst-case fidelity factor is
  exactly (1-gamma)^(N t) ("error per cycle" gamma*N).
* ``per_gate_support``    -- one joint depolarizing channel of rate gamma on
  the full support of each gate, immediately after it (the staircase/RMPU
  convention; fidelity (1-gamma)^{#gates}).
* ``none``                -- noiseless.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict
from typing import Iterator, Optional, Sequence

import numpy as np

from .opsim import (
    GateMatrix,
    OperatorState,
    apply_depolarizing,
    apply_depolarizing_support,
    apply_gate,
    init_local_pauli,
)

GEOMETRIES = ("chain", "grid", "rmpu")
NOISE_PLACEMENTS = ("per_qubit_per_layer", "per_gate_support", "none")


@dataclass
class CircuitSpec:
    """Full description of one circuit ensemble point."""

    geometry: str = "chain"
    n_sites: int = 0
    depth: int = 1
    gamma: float = 0.0
    noise_placement: Optional[str] = None
    initial_site: Optional[int] = None
    initial_axis: str = "Z"
    master_seed: int = 0
    r: Optional[int] = None  # rmpu overlap
    lx: Optional[int] = None  # grid dimensions
    ly: Optional[int] = None

    def __post_init__(self):
        if self.geometry not in GEOMETRIES:
            raise ValueError(f"unknown geometry {self.geometry!r}")
        if self.geometry == "grid":
            if not (self.lx and self.ly):
                raise ValueError("grid geometry needs lx and ly")
            self.n_sites = self.lx * self.ly
        if self.n_sites < 2:
            raise ValueError("need at least 2 sites")
        if self.geometry == "rmpu":
            if self.r is None or not 1 <= self.r <= self.n_sites - 1:
                raise ValueError(f"rmpu needs 1 <= r <= N-1, got r={self.r}")
            self.depth = self.n_sites - self.r
        elif self.depth < 1:
            raise ValueError("depth must be >= 1")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma={self.gamma} outside [0, 1]")
        if self.noise_placement is None:
            self.noise_placement = (
                "per_gate_support" if self.geometry == "rmpu" else "per_qubit_per_layer"
            )
        if self.noise_placement not in NOISE_PLACEMENTS:
            raise ValueError(f"unknown noise placement {self.noise_placement!r}")
        if self.initial_site is None:
            self.initial_site = self._default_initial_site()
        if not 0 <= self.initial_site < self.n_sites:
            raise ValueError(f"initial_site {self.initial_site} out of range")
        if self.initial_axis not in ("X", "Y", "Z"):
            raise ValueError(f"initial_axis must be X/Y/Z, got {self.initial_axis!r}")

    def _default_initial_site(self) -> int:
        if self.geometry == "grid":
            return (self.ly // 2) * self.lx + self.lx // 2
        if self.geometry == "rmpu":
            # inside the first staircase block, where the analytic boundary
            # vector applies
            return 0
        return self.n_sites // 2

    @property
    def n_layers(self) -> int:
        return self.depth

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "CircuitSpec":
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown CircuitSpec keys: {sorted(unknown)}")
        return cls(**d)


def sample_haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via a Ginibre sample + QR with phase correction."""
    if dim < 2:
        raise ValueError("dim must be >= 2")
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim)))
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r)
    return q * (diag / np.abs(diag))


def layer_supports(spec: CircuitSpec, layer: int) -> list[tuple[int, ...]]:
    """Ordered gate supports of one layer."""
    if not 0 <= layer < spec.n_layers:
        raise ValueError(f"layer {layer} out of range (depth {spec.n_layers})")
    if spec.geometry == "chain":
        start = 0 if layer % 2 == 0 else 1
        return [(i, i + 1) for i in range(start, spec.n_sites - 1, 2)]
    if spec.geometry == "rmpu":
        return [tuple(range(layer, layer + spec.r + 1))]
    # grid: cycle H-even, H-odd, V-even, V-odd
    lx, ly = spec.lx, spec.ly
    kind = layer % 4
    out = []
    if kind in (0, 1):  # horizontal pairs within each row
        start = 0 if kind == 0 else 1
        for y in range(ly):
            for x in range(start, lx - 1, 2):
                out.append((y * lx + x, y * lx + x + 1))
    else:  # vertical pairs within each column
        start = 0 if kind == 2 else 1
        for x in range(lx):
            for y in range(start, ly - 1, 2):
                out.append((y * lx + x, (y + 1) * lx + x))
    return out


def gates_per_layer(spec: CircuitSpec) -> list[int]:
    return [len(layer_supports(spec, t)) for t in range(spec.n_layers)]


def circuit_fidelity(spec: CircuitSpec, depth: Optional[int] = None) -> float:
    """Worst-case fidelity factor accumulated after ``depth`` layers.

    per_qubit_per_layer: (1-gamma)^(N*t); per_gate_support: (1-gamma)^{#gates}.
    """
    t = spec.n_layers if depth is None else depth
    if spec.gamma == 0.0 or spec.noise_placement == "none":
        return 1.0
    if spec.noise_placement == "per_qubit_per_layer":
        return (1.0 - spec.gamma) ** (spec.n_sites * t)
    n_gates = sum(gates_per_layer(spec)[:t])
    return (1.0 - spec.gamma) ** n_gates


def realization_rng(master_seed: int, realization: int) -> np.random.Generator:
    """Independent, reproducible stream for one circuit realization."""
    return np.random.default_rng(np.random.SeedSequence([int(master_seed), int(realization)]))


def iter_circuit(
    spec: CircuitSpec, realization: int, lightcone: bool = True
) -> Iterator[tuple[int, OperatorState]]:
    """Evolve the initial local Pauli layer by layer, yielding (t, state).

    The yielded state is the live object; copy it if it must outlive the
    iteration.  Gates are drawn in (layer, gate) order from the realization
    stream, so identical (spec, realization) reproduce identical circuits.

    With ``lightcone=True`` gates whose support lies outside the causal cone
    of the initial site are sampled (keeping the stream layout fixed) but not
    applied: on the cone's complement the operator is the identity, so the
    gate conjugation and any per-gate noise act as exact identities.  This
    keeps out-of-cone Pauli coefficients exactly zero instead of accumulating
    rounding noise.
    """
    rng = realization_rng(spec.master_seed, realization)
    op = init_local_pauli(spec.n_sites, spec.initial_site, spec.initial_axis)
    noisy = spec.gamma > 0.0 and spec.noise_placement != "none"
    per_site_noise = noisy and spec.noise_placement == "per_qubit_per_layer"
    per_gate_noise = noisy and spec.noise_placement == "per_gate_support"
    cone = {spec.initial_site}
    for t in range(spec.n_layers):
        for support in layer_supports(spec, t):
            u = sample_haar_unitary(2 ** len(support), rng)
            if lightcone and cone.isdisjoint(support):
                continue
            cone.update(support)
            apply_gate(op, GateMatrix(support, u))
            if per_gate_noise:
                apply_depolarizing_support(op, spec.gamma, support)
        if per_site_noise:
            # noise on every qubit, idle ones included; on sites where the
            # operator is still the identity the channel is an exact no-op
            sites = sorted(cone) if lightcone else range(spec.n_sites)
            apply_depolarizing(op, spec.gamma, sites)
        yield t + 1, op


def run_circuit(spec: CircuitSpec, realization: int) -> OperatorState:
    """Heisenberg-evolve the initial operator through the full circuit."""
    op = init_local_pauli(spec.n_sites, spec.initial_site, spec.initial_axis)
    for _, op in iter_circuit(spec, realization):
        pass
    return op
