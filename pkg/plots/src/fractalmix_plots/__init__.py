"""Figure scripts for fractalmix CSV artifacts.

Pure readers: each script consumes one or more declared CSV schemas, writes
SVG + PNG figures plus a fits.json sidecar with every fitted number, and
never modifies its inputs.  Fits reuse the fractalmix fitting helpers, so a
slope printed on a figure is bit-identical to the one the experiment
reported.
"""

__version__ = "0.1.0"
