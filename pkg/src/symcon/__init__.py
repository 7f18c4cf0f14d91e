"""Desk-scale laboratory for consensus protocols over symbiotic radio.

Closed-form success/latency/overhead/energy models for PBFT- and
RAFT-style consensus with backscatter-enhanced links, a seeded Monte
Carlo protocol simulator that executes the same phase choreography, a
catalog of published variants, and a sweep runner with CSV/SVG output.
"""

__version__ = "0.1.0"

__all__ = ["__version__"]
