"""Period-indexed dynamic interaction graph.

Snapshots grow monotonically: each period appends newly commenting users
and comment edges on top of the previous period. Deltas are stored;
cumulative views are derived. A (commenter, content, period) triple is
unique; duplicates are dropped silently and counted.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import NoSuchPeriod, PeriodOutOfOrder


@dataclass(frozen=True)
class CommentEdge:
    commenter: str
    text: str
    target: str | None          # author being replied to; None for the ad root
    content_id: str
    period: int
    inclination: int | None     # None only on the ad root edge

    @property
    def is_root(self):
        return self.target is None and self.inclination is None


@dataclass
class GraphSnapshot:
    period: int
    num_vertices: int
    num_edges: int
    new_vertices: tuple
    new_edges: tuple


class InteractionGraph:
    """Append-only comment graph for one campaign."""

    def __init__(self, influencer, ad_content_id, ad_text):
        root = CommentEdge(
            commenter=influencer,
            text=ad_text,
            target=None,
            content_id=ad_content_id,
            period=0,
            inclination=None,
        )
        self.influencer = influencer
        self.ad_content_id = ad_content_id
        self.duplicates_dropped = 0
        self._vertices = {influencer}
        self._edge_keys = {(influencer, ad_content_id, 0)}
        self._snapshots = [
            GraphSnapshot(0, 1, 1, new_vertices=(influencer,), new_edges=(root,))
        ]

    @property
    def last_period(self):
        return self._snapshots[-1].period

    def snapshot(self, period):
        if not 0 <= period <= self.last_period:
            raise NoSuchPeriod(period, self.last_period)
        return self._snapshots[period]

    def vertices_at(self, period):
        snap = self.snapshot(period)  # bounds check
        out = set()
        for s in self._snapshots[: snap.period + 1]:
            out.update(s.new_vertices)
        return out

    def edges_at(self, period):
        snap = self.snapshot(period)
        out = []
        for s in self._snapshots[: snap.period + 1]:
            out.extend(s.new_edges)
        return out

    def vertices(self):
        return set(self._vertices)

    def edges(self):
        return self.edges_at(self.last_period)

    def comment_edges(self):
        """All non-root edges in period order."""
        return [e for e in self.edges() if not e.is_root]

    def append_period(self, reactions, period):
        """Add one period of reactions.

        `reactions` holds (user_id, Reaction, target_author) triples;
        ignore reactions contribute nothing. Returns the new snapshot.
        """
        if period != self.last_period + 1:
            raise PeriodOutOfOrder(period, self.last_period + 1)
        new_edges = []
        new_vertices = []
        for user_id, reaction, target_author in reactions:
            if not reaction.is_comment:
                continue
            key = (user_id, reaction.target_content, period)
            if key in self._edge_keys:
                self.duplicates_dropped += 1
                continue
            self._edge_keys.add(key)
            new_edges.append(
                CommentEdge(
                    commenter=user_id,
                    text=reaction.text,
                    target=target_author,
                    content_id=reaction.target_content,
                    period=period,
                    inclination=reaction.inclination,
                )
            )
            if user_id not in self._vertices:
                self._vertices.add(user_id)
                new_vertices.append(user_id)
        prev = self._snapshots[-1]
        snap = GraphSnapshot(
            period=period,
            num_vertices=prev.num_vertices + len(new_vertices),
            num_edges=prev.num_edges + len(new_edges),
            new_vertices=tuple(new_vertices),
            new_edges=tuple(new_edges),
        )
        self._snapshots.append(snap)
        return snap

    # --- exports -------------------------------------------------------------

    def export_edges_jsonl(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            for edge in self.edges():
                fh.write(json.dumps({
                    "commenter": edge.commenter,
                    "text": edge.text,
                    "target": edge.target,
                    "content_id": edge.content_id,
                    "period": edge.period,
                    "inclination": edge.inclination,
                }, sort_keys=True, ensure_ascii=False) + "\n")

    def export_periods_index(self, path):
        index = [
            {"period": s.period, "num_vertices": s.num_vertices, "num_edges": s.num_edges}
            for s in self._snapshots
        ]
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(
                {"influencer": self.influencer,
                 "duplicates_dropped": self.duplicates_dropped,
                 "periods": index},
                fh, indent=2, sort_keys=True, ensure_ascii=False,
            )
            fh.write("\n")

    def export_edge_list(self, path):
        """Plain-text (commenter, target, period, inclination) rows."""
        with open(path, "w", encoding="utf-8") as fh:
            for edge in self.comment_edges():
                fh.write(
                    f"{edge.commenter}\t{edge.target}\t{edge.period}\t{edge.inclination}\n"
                )


def init_graph(influencer, ad_content_id, ad_text=""):
    """Fresh campaign graph: the influencer vertex plus the ad root edge."""
    return InteractionGraph(influencer, ad_content_id, ad_text)
