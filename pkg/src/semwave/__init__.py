"""Semantic wavefunction simulator.

Modules: ``state`` (grids and wavefunctions), ``potentials``, ``propagator``
(time evolution and stationary states), ``gauge`` (U(1) layer and Noether
charge), ``units`` (dimensional analysis), ``semantics`` (toy token layer and
retrieval-augmented prompt composition) and ``cli``.
"""

__version__ = "0.1.0"
