"""Crossbar network solver.

Models the readout circuit as a resistor graph: every stripe is a chain of
junction nodes joined by margin-segment resistors, every pressed taxel
bridges a column junction to a row junction, and the selected row connector
reaches ground through the reference resistor. Solving the nodal equations
over the whole graph lets sneak-path ghosting fall out of the physics
instead of being painted on afterwards.

Node layout for an R x C sensor (indices are 0-based everywhere):

    col_conn(j)     connector at the head of column stripe j
    col_junc(i, j)  column stripe j at its crossing with row i
    row_conn(i)     connector at the head of row stripe i
    row_junc(i, j)  row stripe i at its crossing with column j
    GND, VCC        rails

Column stripes contribute C*(R+1) nodes and row stripes R*(C+1), plus the
two rails.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.csgraph as csgraph
import scipy.sparse.linalg as spla

from .core import (
    Frame,
    ResistanceMatrix,
    SensorConfig,
    quantize_code,
    reading_from_network_resistance,
    series_margin_counts,
)


@dataclass(frozen=True)
class NetworkTopology:
    """Resistor graph for one (row, col) selection.

    Edges are stored as conductances; an infinite conductance marks an ideal
    wire (zero-resistance margin) that the solver contracts exactly. Fixed
    nodes carry Dirichlet voltages (VCC rail + selected column connector at
    vcc, GND at 0). The probe node is the selected row connector, whose
    voltage the ADC quantizes.
    """

    rows: int
    cols: int
    n_nodes: int
    edge_a: np.ndarray
    edge_b: np.ndarray
    edge_g: np.ndarray  # siemens; +inf = ideal wire
    fixed_nodes: np.ndarray
    fixed_volts: np.ndarray
    probe_node: int
    vcc_volts: float
    adc_full_scale: int

    @property
    def n_taxel_edges(self) -> int:
        # margin edges: R*C per stripe family; reference edge: 1
        return len(self.edge_g) - 2 * self.rows * self.cols - 1

    def node_labels(self) -> list[str]:
        return node_labels(self.rows, self.cols)


def _col_conn(rows: int, cols: int, j: int) -> int:
    return j


def _col_junc(rows: int, cols: int, i: int, j: int) -> int:
    return cols + j * rows + i


def _row_conn(rows: int, cols: int, i: int) -> int:
    return cols * (rows + 1) + i


def _row_junc(rows: int, cols: int, i: int, j: int) -> int:
    return cols * (rows + 1) + rows + i * cols + j


def _gnd(rows: int, cols: int) -> int:
    return cols * (rows + 1) + rows * (cols + 1)


def _vcc(rows: int, cols: int) -> int:
    return _gnd(rows, cols) + 1


def node_labels(rows: int, cols: int) -> list[str]:
    labels = [""] * (cols * (rows + 1) + rows * (cols + 1) + 2)
    for j in range(cols):
        labels[_col_conn(rows, cols, j)] = f"col_conn{j}"
        for i in range(rows):
            labels[_col_junc(rows, cols, i, j)] = f"col{j}_r{i}"
    for i in range(rows):
        labels[_row_conn(rows, cols, i)] = f"row_conn{i}"
        for j in range(cols):
            labels[_row_junc(rows, cols, i, j)] = f"row{i}_c{j}"
    labels[_gnd(rows, cols)] = "GND"
    labels[_vcc(rows, cols)] = "VCC"
    return labels


class _MatrixNetwork:
    """Edge arrays for one resistance matrix, shared across selections."""

    def __init__(self, config: SensorConfig, r: ResistanceMatrix):
        if not r.matches(config):
            raise ValueError("resistance matrix shape does not match config")
        self.config = config
        rows, cols = config.rows, config.cols
        g_margin = np.inf if config.r_margin_ohm == 0 else 1.0 / config.r_margin_ohm

        a, b, g = [], [], []
        for j in range(cols):
            chain = [_col_conn(rows, cols, j)] + [
                _col_junc(rows, cols, i, j) for i in range(rows)
            ]
            a.extend(chain[:-1])
            b.extend(chain[1:])
            g.extend([g_margin] * rows)
        for i in range(rows):
            chain = [_row_conn(rows, cols, i)] + [
                _row_junc(rows, cols, i, j) for j in range(cols)
            ]
            a.extend(chain[:-1])
            b.extend(chain[1:])
            g.extend([g_margin] * cols)
        taxel_i, taxel_j = np.nonzero(np.isfinite(r.values))
        for i, j in zip(taxel_i, taxel_j):
            a.append(_col_junc(rows, cols, i, j))
            b.append(_row_junc(rows, cols, i, j))
            g.append(1.0 / r.values[i, j])

        self.edge_a = np.asarray(a, dtype=np.int64)
        self.edge_b = np.asarray(b, dtype=np.int64)
        self.edge_g = np.asarray(g, dtype=float)

    def topology(self, sel_row: int, sel_col: int) -> NetworkTopology:
        config = self.config
        config.check_taxel(sel_row, sel_col)
        rows, cols = config.rows, config.cols
        ref_a = _row_conn(rows, cols, sel_row)
        gnd = _gnd(rows, cols)
        vcc = _vcc(rows, cols)
        return NetworkTopology(
            rows=rows,
            cols=cols,
            n_nodes=vcc + 1,
            edge_a=np.append(self.edge_a, ref_a),
            edge_b=np.append(self.edge_b, gnd),
            edge_g=np.append(self.edge_g, 1.0 / config.r_ref_ohm),
            fixed_nodes=np.array([vcc, _col_conn(rows, cols, sel_col), gnd]),
            fixed_volts=np.array([config.vcc_volts, config.vcc_volts, 0.0]),
            probe_node=_row_conn(rows, cols, sel_row),
            vcc_volts=config.vcc_volts,
            adc_full_scale=config.adc_full_scale,
        )


def build_topology(
    config: SensorConfig, r: ResistanceMatrix, sel_row: int, sel_col: int
) -> NetworkTopology:
    """Assemble the full readout graph for one multiplexer selection."""
    return _MatrixNetwork(config, r).topology(sel_row, sel_col)


def solve_full(topology: NetworkTopology) -> tuple[int, np.ndarray]:
    """Solve the nodal equations; return (adc_code, node voltages).

    Nodes with no conductive path to a driven node have indeterminate
    voltage and come back as NaN; they carry no current so the reading is
    unaffected. The probe node always reaches GND through the reference
    resistor, so the reading itself is always defined.
    """
    n = topology.n_nodes
    a, b, g = topology.edge_a, topology.edge_b, topology.edge_g

    # Contract ideal wires (infinite conductance) with union-find so zero
    # margin resistance stays exact instead of becoming a huge conductance.
    parent = np.arange(n)

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for ea, eb in zip(a[np.isinf(g)], b[np.isinf(g)]):
        ca, cb = find(ea), find(eb)
        if ca != cb:
            parent[ca] = cb
    rep = np.fromiter((find(x) for x in range(n)), dtype=np.int64, count=n)

    finite = np.isfinite(g)
    ea, eb, gg = rep[a[finite]], rep[b[finite]], g[finite]
    keep = ea != eb  # self-loops after contraction carry no information
    ea, eb, gg = ea[keep], eb[keep], gg[keep]

    fixed_v = np.full(n, np.nan)
    for node, v in zip(rep[topology.fixed_nodes], topology.fixed_volts):
        if not np.isnan(fixed_v[node]) and fixed_v[node] != v:
            raise RuntimeError("ideal wire shorts two different rail voltages")
        fixed_v[node] = v
    is_fixed = ~np.isnan(fixed_v)

    # Prune components that contain no driven node: their voltages are
    # indeterminate and must not enter the linear system.
    adj = sp.coo_matrix((gg, (ea, eb)), shape=(n, n))
    _, comp = csgraph.connected_components(adj, directed=False)
    determined = np.isin(comp, comp[is_fixed])

    unknown = determined & ~is_fixed & (np.arange(n) == rep)
    unknown_nodes = np.nonzero(unknown)[0]
    idx_of = np.full(n, -1)
    idx_of[unknown_nodes] = np.arange(len(unknown_nodes))

    volts = np.full(n, np.nan)
    if len(unknown_nodes):
        m = len(unknown_nodes)
        ia, ib = idx_of[ea], idx_of[eb]
        in_a, in_b = ia >= 0, ib >= 0
        diag = np.zeros(m)
        np.add.at(diag, ia[in_a], gg[in_a])
        np.add.at(diag, ib[in_b], gg[in_b])
        both = in_a & in_b
        rhs = np.zeros(m)
        a_only = in_a & ~in_b  # fixed neighbor on the b side
        b_only = in_b & ~in_a
        np.add.at(rhs, ia[a_only], gg[a_only] * fixed_v[eb[a_only]])
        np.add.at(rhs, ib[b_only], gg[b_only] * fixed_v[ea[b_only]])
        lap = sp.csc_matrix(
            (
                np.concatenate([diag, -gg[both], -gg[both]]),
                (
                    np.concatenate([np.arange(m), ia[both], ib[both]]),
                    np.concatenate([np.arange(m), ib[both], ia[both]]),
                ),
            ),
            shape=(m, m),
        )
        solution = spla.spsolve(lap, rhs)
        if np.ndim(solution) == 0:
            solution = np.array([float(solution)])
        if not np.all(np.isfinite(solution)):
            raise RuntimeError("nodal system singular after component pruning")
        volts[unknown_nodes] = solution

    volts[is_fixed] = fixed_v[is_fixed]
    volts = volts[rep]  # fan representative voltages back out to members

    v_probe = volts[topology.probe_node]
    code = quantize_code(topology.adc_full_scale * v_probe / topology.vcc_volts)
    return code, volts


def solve_naive(
    config: SensorConfig, r: ResistanceMatrix, sel_row: int, sel_col: int
) -> int:
    """Sneak-path-free model: the addressed taxel plus its series margins."""
    if not r.matches(config):
        raise ValueError("resistance matrix shape does not match config")
    r_taxel = r.values[sel_row, sel_col]
    if not np.isfinite(r_taxel):
        return 0
    n_col, n_row = series_margin_counts(config, sel_row, sel_col)
    r_net = (n_col + n_row) * config.r_margin_ohm + r_taxel
    return reading_from_network_resistance(r_net, config.r_ref_ohm)


def scan_frame_static(
    config: SensorConfig,
    r: ResistanceMatrix,
    t_start_us: float = 0.0,
    t_write_us: float | None = None,
    t_read_us: float | None = None,
) -> Frame:
    """Scan all selections row-major over a frozen matrix.

    Each taxel's sample instant is the end of its read delay, so timestamps
    step by exactly t_write + t_read through the frame.
    """
    tw = config.t_write_us if t_write_us is None else t_write_us
    tr = config.t_read_us if t_read_us is None else t_read_us
    net = _MatrixNetwork(config, r)
    counts = np.zeros((config.rows, config.cols), dtype=np.int64)
    times = np.zeros((config.rows, config.cols))
    k = 0
    for i in range(config.rows):
        for j in range(config.cols):
            counts[i, j], _ = solve_full(net.topology(i, j))
            k += 1
            times[i, j] = t_start_us + k * (tw + tr)
    return Frame(t_start_us=int(round(t_start_us)), counts=counts, per_taxel_time_us=times)


def voltages_csv(topology: NetworkTopology, volts: np.ndarray) -> str:
    """Node-voltage dump (debugging aid for the CLI)."""
    lines = ["node,voltage_v"]
    for label, v in zip(topology.node_labels(), volts):
        lines.append(f"{label},{'' if np.isnan(v) else repr(float(v))}")
    return "\n".join(lines) + "\n"
