"""Static figures for the semiweyl experiment CSVs.

This package never imports the experiment code; the CSV files (and their
fixed headers) are the whole interface.
"""

__version__ = "0.1.0"
