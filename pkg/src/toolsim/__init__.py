"""Stateful, conversational tool-use evaluation harness.

A simulated device world with state-dependent tools, a three-role message
bus with visibility-controlled sub-views, and milestone/minefield scoring of
arbitrary trajectories via constrained optimal matching.
"""

__version__ = "0.1.0"
