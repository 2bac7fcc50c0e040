"""Matplotlib renderings of reports, analysis tables, and subgraph exports.

Figures are written next to the delimited outputs they visualize.  They are
a convenience view: the CSV/JSON/DOT files remain the canonical artifacts
(and the only ones covered by byte-level determinism).
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import networkx as nx

from .evaluate import AnalysisTable, EvalReport, SubgraphExport
from .kg import KnowledgeGraph

_ROLE_COLORS = {"query": "#d62728", "predicted": "#2ca02c", "path": "#1f77b4"}


def save_metrics_figure(report: EvalReport, path: str | Path) -> None:
    """Grouped Hits@1 / MRR bars, one group per strategy row."""
    labels = [row.label for row in report.rows]
    hits = [row.hits_at_1 for row in report.rows]
    mrr = [row.mrr for row in report.rows]
    positions = range(len(labels))
    width = 0.38

    fig, ax = plt.subplots(figsize=(max(6.0, 1.2 * len(labels)), 4.0))
    ax.bar([p - width / 2 for p in positions], hits, width, label="Hits@1")
    ax.bar([p + width / 2 for p in positions], mrr, width, label="MRR")
    ax.set_xticks(list(positions))
    ax.set_xticklabels(labels, rotation=30, ha="right")
    ax.set_ylim(0.0, 1.0)
    ax.set_ylabel("score")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def save_table_figure(
    table: AnalysisTable,
    path: str | Path,
    value_column: str,
    group_columns: tuple[str, ...],
) -> None:
    """Bar chart of one numeric table column, labeled by the group columns.

    Rows with an empty value (infeasible settings) are skipped.
    """
    col_index = {name: i for i, name in enumerate(table.columns)}
    value_i = col_index[value_column]
    label_is = [col_index[c] for c in group_columns]
    labels = []
    values = []
    for row in table.rows:
        if row[value_i] in (None, ""):
            continue
        labels.append(" / ".join(str(row[i]) for i in label_is))
        values.append(float(row[value_i]))
    if not values:
        return

    fig, ax = plt.subplots(figsize=(max(6.0, 0.5 * len(values)), 4.0))
    ax.bar(range(len(values)), values, color="#1f77b4")
    ax.set_xticks(range(len(values)))
    ax.set_xticklabels(labels, rotation=60, ha="right", fontsize=8)
    ax.set_ylim(0.0, 1.0)
    ax.set_ylabel(value_column)
    ax.set_title(table.name)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def save_subgraph_figure(
    subgraph: SubgraphExport, graph: KnowledgeGraph, path: str | Path
) -> None:
    """Draw the prediction neighborhood: query red, predictions green,
    connecting-path entities blue."""
    g = nx.DiGraph()
    roles = {}
    for entity, role in subgraph.nodes:
        name = graph.entity_name(entity)
        roles[name] = role
        g.add_node(name)
    edge_labels = {}
    for edge in subgraph.edges:
        head = graph.entity_name(edge.head)
        tail = graph.entity_name(edge.tail)
        g.add_edge(head, tail)
        edge_labels[(head, tail)] = graph.relation_surface(edge.relation)

    layout = nx.spring_layout(g, seed=7)
    colors = [_ROLE_COLORS[roles[n]] for n in g.nodes]
    fig, ax = plt.subplots(figsize=(7.0, 6.0))
    nx.draw_networkx_nodes(g, layout, node_color=colors, node_size=420, ax=ax)
    nx.draw_networkx_edges(g, layout, ax=ax, arrowsize=12, edge_color="#888888")
    nx.draw_networkx_labels(g, layout, font_size=7, ax=ax)
    if len(edge_labels) <= 25:
        nx.draw_networkx_edge_labels(g, layout, edge_labels=edge_labels, font_size=6, ax=ax)
    ax.set_axis_off()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
