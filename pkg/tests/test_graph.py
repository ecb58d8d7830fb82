import numpy as np
import pytest

from kolsim.agents import Reaction
from kolsim.errors import NoSuchPeriod, PeriodOutOfOrder
from kolsim.graph import init_graph


def comment(user, content="ad", inclination=3, text="nice one"):
    return (user, Reaction("comment", text, content, inclination), "kol")


def ignore(user, content="ad"):
    return (user, Reaction("ignore", "", content), "kol")


class TestInit:
    def test_initial_snapshot(self):
        g = init_graph("kol_1", "ad_1", "the ad text")
        snap = g.snapshot(0)
        assert snap.num_vertices == 1
        assert snap.num_edges == 1
        assert g.vertices_at(0) == {"kol_1"}
        root = g.edges_at(0)[0]
        assert root.target is None
        assert root.inclination is None
        assert root.is_root

    def test_future_snapshot_rejected(self):
        g = init_graph("kol", "ad")
        with pytest.raises(NoSuchPeriod):
            g.snapshot(1)

    def test_init_deterministic(self):
        a = init_graph("kol", "ad", "x")
        b = init_graph("kol", "ad", "x")
        assert a.edges() == b.edges()
        assert a.vertices() == b.vertices()


class TestAppend:
    def test_three_new_commenters(self):
        g = init_graph("kol", "ad")
        snap = g.append_period([comment("u1"), comment("u2"), comment("u3")], 1)
        assert snap.num_vertices == 4
        assert snap.num_edges == 4

    def test_duplicate_within_period_dropped(self):
        g = init_graph("kol", "ad")
        snap = g.append_period([comment("u1"), comment("u1")], 1)
        assert snap.num_edges == 2
        assert g.duplicates_dropped == 1

    def test_same_user_other_period_allowed(self):
        g = init_graph("kol", "ad")
        g.append_period([comment("u1")], 1)
        snap = g.append_period([comment("u1")], 2)
        assert snap.num_edges == 3
        assert g.duplicates_dropped == 0

    def test_all_ignores_noop(self):
        g = init_graph("kol", "ad")
        before = g.snapshot(0)
        snap = g.append_period([ignore("u1"), ignore("u2")], 1)
        assert snap.num_vertices == before.num_vertices
        assert snap.num_edges == before.num_edges

    def test_out_of_order_rejected(self):
        g = init_graph("kol", "ad")
        with pytest.raises(PeriodOutOfOrder):
            g.append_period([comment("u1")], 2)
        g.append_period([], 1)
        with pytest.raises(PeriodOutOfOrder):
            g.append_period([], 1)


class TestInvariants:
    def test_monotone_growth_random_sequence(self):
        rng = np.random.default_rng(8)
        g = init_graph("kol", "ad")
        prev_v, prev_e = 1, 1
        for t in range(1, 25):
            batch = []
            for _ in range(rng.integers(0, 6)):
                uid = f"u{rng.integers(10)}"
                if rng.random() < 0.6:
                    batch.append(comment(uid, content=f"c{rng.integers(3)}"))
                else:
                    batch.append(ignore(uid))
            snap = g.append_period(batch, t)
            assert snap.num_vertices >= prev_v
            assert snap.num_edges >= prev_e
            assert g.vertices_at(t) >= g.vertices_at(t - 1)
            assert set(map(id, g.edges_at(t - 1))) <= set(map(id, g.edges_at(t)))
            prev_v, prev_e = snap.num_vertices, snap.num_edges

    def test_edge_uniqueness_key(self):
        rng = np.random.default_rng(9)
        g = init_graph("kol", "ad")
        for t in range(1, 15):
            batch = [comment(f"u{rng.integers(4)}", content=f"c{rng.integers(2)}")
                     for _ in range(rng.integers(1, 8))]
            g.append_period(batch, t)
        keys = [(e.commenter, e.content_id, e.period) for e in g.edges()]
        assert len(keys) == len(set(keys))

    def test_every_commenter_in_vertices(self):
        g = init_graph("kol", "ad")
        g.append_period([comment("u1"), comment("u2")], 1)
        g.append_period([comment("u3")], 2)
        for t in (1, 2):
            vertices = g.vertices_at(t)
            for e in g.edges_at(t):
                assert e.commenter in vertices


class TestExports:
    def test_exports_written(self, tmp_path):
        g = init_graph("kol", "ad", "hello ad")
        g.append_period([comment("u1"), comment("u2")], 1)
        edges_path = tmp_path / "edges.jsonl"
        index_path = tmp_path / "periods.json"
        list_path = tmp_path / "edges.tsv"
        g.export_edges_jsonl(edges_path)
        g.export_periods_index(index_path)
        g.export_edge_list(list_path)
        assert len(edges_path.read_text().splitlines()) == 3
        assert len(list_path.read_text().splitlines()) == 2  # root excluded
        assert "duplicates_dropped" in index_path.read_text()
