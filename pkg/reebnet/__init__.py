"""
reebnet package: graph-based topological data analysis over prediction lenses
"""
