"""Bundled example networks."""

from __future__ import annotations

from importlib import resources

from .network import WeightedDigraph, load_network

NAMES = ("six_node_clean", "six_node_blunder", "campaign_x", "campaign_x_blunder", "triangle")


def path(name: str):
    if name not in NAMES:
        raise KeyError(f"unknown dataset {name!r}; choose from {NAMES}")
    return resources.files(__package__) / "data" / f"{name}.csv"


def text(name: str) -> str:
    return path(name).read_text(encoding="utf-8")


def load(name: str, coordinate: str = "x") -> WeightedDigraph:
    return load_network(text(name), coordinate)
