"""Mechanical checks for twisted spin and pin bordism.

Modules: ``f2algebra`` (truncated F2 cohomology rings), ``bundles``
(virtual bundles and Stiefel-Whitney classes), ``rewriter`` (Thom-spectrum
rewriting with replayable certificates), ``ranks`` (rational Poincare
series and long exact sequences), ``catalog`` and ``cli``.
"""

__version__ = "0.1.0"
