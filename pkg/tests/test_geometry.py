"""Node placement and the nested traffic/hopping grid."""

import math

import numpy as np
import pytest

from d2dcachesim.config import NetworkConfig, derive_scales
from d2dcachesim.geometry import (
    CellGrid,
    NodePlacement,
    build_grid,
    cell_occupancy_stats,
    cells_adjacent,
    hop_side_count,
    place_nodes,
    write_placement_csv,
)
from d2dcachesim.rng import STREAM_PLACEMENT, child_seed, trial_seed


def scales_for(n, eta, **kw):
    base = dict(n=n, alpha=0.8, beta=0.2, a1=1.0, a2=1.0, seed=0)
    base.update(kw)
    return derive_scales(NetworkConfig(**base), eta_override=eta)


class TestPlaceNodes:
    def test_single_node_in_box(self):
        p = place_nodes(1, 5)
        assert 0.0 <= p.x[0] < 1.0 and 0.0 <= p.y[0] < 1.0

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            place_nodes(0, 1)

    def test_deterministic(self):
        a, b = place_nodes(1000, 7), place_nodes(1000, 7)
        assert np.array_equal(a.x, b.x) and np.array_equal(a.y, b.y)

    def test_left_half_fraction(self):
        # Binomial CI: sd = 1.58e-3 at 1e5 points; 0.005 is ~3 sigma.
        p = place_nodes(10 ** 5, 99)
        assert abs(np.mean(p.x < 0.5) - 0.5) < 0.005
        assert np.all((p.x >= 0) & (p.x < 1) & (p.y >= 0) & (p.y < 1))


class TestGridConstruction:
    def test_global_cell_when_eta_zero(self):
        g = build_grid(place_nodes(100, 1), scales_for(100, 0.0))
        assert g.k_c == 1

    def test_side_count_rounds_to_nearest(self):
        # 4096**0.25 = 8 exactly
        g = build_grid(place_nodes(4096, 1), scales_for(4096, 0.5))
        assert g.k_c == 8
        # 65536**0.2 = 9.19 -> 9 (ceiling would give 10)
        g = build_grid(place_nodes(65536, 1), scales_for(65536, 0.4))
        assert g.k_c == 9

    def test_partition_property(self):
        g = build_grid(place_nodes(5000, 3), scales_for(5000, 0.4))
        hop_counts = np.bincount(g.hop_id, minlength=g.hop_side_count ** 2)
        tr_counts = np.bincount(g.traffic_id, minlength=g.k_c ** 2)
        assert hop_counts.sum() == 5000 and tr_counts.sum() == 5000

    def test_nesting(self):
        g = build_grid(place_nodes(5000, 3), scales_for(5000, 0.4))
        assert np.array_equal(g.traffic_col, g.hop_col // g.k_h)
        assert np.array_equal(g.traffic_row, g.hop_row // g.k_h)
        assert g.k_h >= 1

    def test_half_open_boundaries(self):
        # With 4 hopping cells per side, x = 0.25 sits in the second column.
        scales = scales_for(4096, 0.5)
        k_c, k_h = hop_side_count(scales)
        count = k_c * k_h
        edge = 1.0 / count
        p = NodePlacement(
            x=np.array([0.0, edge - 1e-12, edge, 1.0 - 1e-12]),
            y=np.zeros(4),
        )
        g = CellGrid(
            k_c=k_c,
            k_h=k_h,
            hop_col=np.minimum((p.x * count).astype(np.int64), count - 1).astype(
                np.int32
            ),
            hop_row=np.zeros(4, dtype=np.int32),
        )
        assert g.hop_col.tolist() == [0, 0, 1, count - 1]

    def test_hop_cells_not_larger_than_nominal_when_nested(self):
        scales = scales_for(16384, 0.35)
        k_c, k_h = hop_side_count(scales)
        if k_h > 1:
            actual_area = (1.0 / (k_c * k_h)) ** 2
            assert actual_area <= scales.a_h * (1.0 + 1e-12)

    def test_single_cell_fallback_keeps_radius_feasible(self):
        # Regime V style geometry: traffic cells near the hopping scale
        # collapse to one hopping cell whose diagonal stays below r.
        cfg = NetworkConfig(n=4096, alpha=0.5, beta=0.5, a1=2.0, a2=1.0, seed=0)
        scales = derive_scales(cfg, eta_override=1 - math.log(30) / math.log(4096))
        k_c, k_h = hop_side_count(scales)
        assert k_h == 1
        diag = math.sqrt(2.0) / k_c
        assert diag <= scales.r

    def test_mismatched_sizes_rejected(self):
        with pytest.raises(ValueError):
            build_grid(place_nodes(100, 1), scales_for(200, 0.4))


class TestOccupancy:
    def test_single_node_single_cell(self):
        cfg = NetworkConfig(n=1, alpha=1.0, beta=0.0, a1=1.0, a2=1.0, seed=0)
        scales = derive_scales(cfg)
        g = build_grid(place_nodes(1, 1), scales)
        st = cell_occupancy_stats(g)
        assert (st.hop_min, st.hop_max) == (1, 1)
        assert (st.traffic_min, st.traffic_max) == (1, 1)

    def test_hopping_cells_nonempty_at_scale(self):
        # Hopping cells of area ~2*log(n)/n hold ~2*log(n) nodes; at n=16384
        # an empty cell has probability ~1e-5 per trial.
        n = 16384
        scales = scales_for(n, 0.0)
        for t in range(20):
            ts = trial_seed(17, n, t)
            g = build_grid(place_nodes(n, child_seed(ts, STREAM_PLACEMENT)), scales)
            st = cell_occupancy_stats(g)
            assert st.hop_min >= 1

    def test_traffic_counts_concentrate(self):
        # Poisson(655) across 25 cells stays within 20% of the mean.
        n = 16384
        scales = scales_for(n, 0.4)
        hits = 0
        for t in range(20):
            ts = trial_seed(23, n, t)
            g = build_grid(place_nodes(n, child_seed(ts, STREAM_PLACEMENT)), scales)
            st = cell_occupancy_stats(g)
            nominal = n ** 0.6
            if 0.8 * nominal <= st.traffic_min and st.traffic_max <= 1.2 * nominal:
                hits += 1
        assert hits >= 19


def test_adjacency_is_one_axis_unit_step():
    assert cells_adjacent(2, 3, 3, 3)
    assert cells_adjacent(2, 3, 2, 2)
    assert not cells_adjacent(2, 3, 3, 4)  # diagonal
    assert not cells_adjacent(2, 3, 2, 3)  # identical
    assert not cells_adjacent(0, 0, 2, 0)  # two apart


def test_placement_csv_dump(tmp_path):
    scales = scales_for(50, 0.4)
    p = place_nodes(50, 9)
    g = build_grid(p, scales)
    path = tmp_path / "geometry.csv"
    write_placement_csv(path, p, g)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "node_id,x,y,traffic_cell,hopping_cell"
    assert len(lines) == 51
    first = lines[1].split(",")
    assert int(first[0]) == 0
    assert float(first[1]) == p.x[0]
