"""Figure generation for the experiment output files (sweep CSV, summary JSON).

Reads exactly the schemas the experiment harness writes, never recomputes
its mathematics, and renders deterministic images.
"""

from .schema import SchemaError

__version__ = "0.1.0"
