"""
coopnet - multi-stream cooperative relay network simulator.

Monte-Carlo outage estimation for decode-and-forward multi-stream cooperation
with optimal node selection, four reference relaying schemes, and the
closed-form outage bound, DMT and TRT results used to cross-check them.
"""

__version__ = "0.1.0"
