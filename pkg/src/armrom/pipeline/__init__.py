"""Configuration, snapshot storage and the offline / online / bench / report stages."""
from .config import RunConfig, from_dict, load, save
from .core import bench, offline, online, report, summarize, draw_test_points
from .store import SnapshotStore, read_arms, write_arms

__all__ = ["RunConfig", "from_dict", "load", "save", "bench", "offline", "online", "report",
           "summarize", "draw_test_points", "SnapshotStore", "read_arms", "write_arms"]
