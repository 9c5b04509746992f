"""Geometric problems posed as growth scenarios."""

from .hull import HullParams, HullResult, approximate_hull
from .maze import MazeResult, corridor, generate_maze, solve_maze
from .spanning import SpanningResult, approximate_spanning_tree
from .subdivision import Region, subdivide_polygon
from .voronoi import Labeling, agreement, approximate_voronoi
from .ymaze import YMazeResult, solve_ymaze, ymaze_terrain

__all__ = ["HullParams", "HullResult", "Labeling", "MazeResult", "Region", "SpanningResult",
           "YMazeResult", "agreement", "approximate_hull", "approximate_spanning_tree",
           "approximate_voronoi", "corridor", "generate_maze", "solve_maze", "solve_ymaze",
           "subdivide_polygon", "ymaze_terrain"]
