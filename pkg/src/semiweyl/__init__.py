"""semiweyl: a numerical laboratory for semiclassical functional calculus.

Modules
-------
symbolfam    bumps, order functions, h-indexed cutoff window families
weylquant    Weyl quantization on a line grid, Fourier quantization on tori
moyal        composition (star product) expansion terms and order checks
schrodinger  flat-torus Schrodinger operators and the spectral oracle
hsfunc       almost-analytic extensions and the resolvent-integral calculus
experiments  trace-formula and shrinking-window counting experiments
cli          configuration parsing, dispatch, CSV emission
"""

__version__ = "0.1.0"
