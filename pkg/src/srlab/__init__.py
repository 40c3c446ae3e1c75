"""Greedy sparse linear representation over random overcomplete dictionaries.

Modules: ``core`` (signals, seeded sampling), ``dictionary``, ``approx``
(greedy / OMP / exhaustive representations and distortion estimators),
``bounds`` (closed-form distortion bounds, base-2 logs), ``quantizer``,
``refine`` (successive-refinement Gaussian codec) and ``cli``.
"""
__version__ = "0.1.0"
