"""Reeb bypass toolkit

Numerical and combinatorial tools for the Reeb dynamics of contact bypass
attachments: explicit contact models and their Reeb flow, Conley-Zehnder
indices of chords and orbits, periodic orbits as cyclic words on Reeb
chords, chord diagram calculus of dividing sets, generator counts of
sutured contact homology, and horseshoe certificates for section maps.
"""

__version__ = '0.1.1'
