"""aerofactor: pollution-source analytics over spatiotemporal sensor data.

Extracts latent pollution sources from a (time, station, species) tensor
through non-negative factorization, summarizes and clusters stations with
a two-step dimensionality reduction, characterizes each cluster against
the rest contrastively, and serves the linked feature/space/time views
over HTTP or as batch exports.
"""

__version__ = "0.1.0"
