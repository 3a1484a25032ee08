"""In-pipe inspection robot mission stack.

Layers, top to bottom: mission authoring, route (re)planning over the sewer
map, fusion of symbolic plans with map data, a job-level executive with
blockage/danger/malfunction recovery, and a deterministic fault-injecting
simulator standing in for the physical robot.
"""

__version__ = "0.1.0"

from importlib import resources


def fixture_path(name: str):
    """Path to a packaged fixture file (e.g. 'ais_test_env.kis')."""
    return resources.files("inpipe") / "fixtures" / name
