"""Generators of sutured contact homology for thickened surfaces and solid
tori, in closed form and from chord diagram combinatorics.

All differentials vanish on the surviving generators, so homology is
reported as lists of generators: a number of primitive orbits per homotopy
class together with their multiples up to a cap.
"""

import json
import logging
import math

from reebcli.chord_diagrams import BOTTOM, TOP, attach, check_C4_C5, parallel_diagram
from reebcli.chord_diagrams import region_census, ArcSpec, Rejection
from reebcli.errors import HistoryError, ParameterError, PreconditionError


logger = logging.getLogger(__name__)


# ------------------------------------------------------------------------------
#
# Constants
#
# ------------------------------------------------------------------------------

"""Provenance labels of rank reports."""
THICKENED_SURFACE = 'thickened_surface'
AFTER_BYPASS = 'after_bypass'
PARALLEL_TORUS = 'parallel_torus'
C5_TORUS = 'c5_torus'

"""Homotopy class labels of solid torus generators."""
CORE_POSITIVE = '{*}xS1'
CORE_NEGATIVE = '{*}x(-S1)'

# Minimum distance between two attachment positions
MIN_SPACING = 3

# Degree of every multiple of an even hyperbolic orbit without rotation
EVEN_DEGREE = 0


# ------------------------------------------------------------------------------
#
# Reports
#
# ------------------------------------------------------------------------------

class RankClass(object):
    """Generators in one homotopy class.

    Attributes
    ----------
    label : string
    primitive_count : int
    degrees : list(int)
        Degree of every listed generator (primitive orbits and their
        multiples up to the cap)
    """
    def __init__(self, label, primitive_count, degrees):
        if primitive_count < 0:
            raise ValueError('invalid count: ' + str(primitive_count))
        self.label = label
        self.primitive_count = primitive_count
        self.degrees = list(degrees)

    def __repr__(self):
        return 'RankClass(%s, %d)' % (self.label, self.primitive_count)

    def to_dict(self):
        return {'class': self.label, 'primitive_count': self.primitive_count, 'degrees': self.degrees}


class RankReport(object):
    """Generators of sutured contact homology per homotopy class.

    Attributes
    ----------
    provenance : string
    classes : list(reebcli.homology_ranks.RankClass)
    n_plus, n_minus : int or None
        Primitive counts in the two core directions of a solid torus
    """
    def __init__(self, provenance, classes, n_plus=None, n_minus=None):
        self.provenance = provenance
        self.classes = classes
        self.n_plus = n_plus
        self.n_minus = n_minus

    def __repr__(self):
        return 'RankReport(%s, %d)' % (self.provenance, self.count)

    @property
    def count(self):
        """Total number of primitive generators."""
        return sum([c.primitive_count for c in self.classes])

    @property
    def total(self):
        return self.count

    def get(self, label):
        for c in self.classes:
            if c.label == label:
                return c
        return None

    def to_dict(self):
        obj = {'provenance': self.provenance, 'classes': [c.to_dict() for c in self.classes]}
        if not self.n_plus is None:
            obj['n_plus'] = self.n_plus
            obj['n_minus'] = self.n_minus
        return obj

    def write_json(self, filename):
        with open(filename, 'w') as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)


def _tower(count, multiples):
    return [EVEN_DEGREE] * (count * multiples)


def _check_multiples(multiples):
    if multiples < 1:
        raise ValueError('invalid multiple cap: ' + str(multiples))


def thickened_surface_ranks(n_components, multiples=1):
    """Generators for the thickened convex surface with dividing set
    Gamma_0, ..., Gamma_n: one even orbit homotopic to every Gamma_k and
    its multiples.
    """
    if n_components < 0:
        raise ValueError('invalid number of components: ' + str(n_components))
    _check_multiples(multiples)
    classes = [
        RankClass('Gamma_' + str(k), 1, _tower(1, multiples)) for k in range(n_components + 1)
    ]
    return RankReport(THICKENED_SURFACE, classes)


def after_bypass_ranks(n_components, multiples=1):
    """Generators after a bypass attachment along an arc meeting three
    distinct dividing curves: the tower of Gamma_0 disappears.
    """
    if n_components < 1:
        raise PreconditionError('bypass arc requires further dividing curves besides Gamma_0')
    _check_multiples(multiples)
    classes = [
        RankClass('Gamma_' + str(k), 1, _tower(1, multiples)) for k in range(1, n_components + 1)
    ]
    return RankReport(AFTER_BYPASS, classes)


def _torus_report(provenance, n_plus, n_minus, multiples):
    classes = [
        RankClass(CORE_POSITIVE, n_plus, _tower(n_plus, multiples)),
        RankClass(CORE_NEGATIVE, n_minus, _tower(n_minus, multiples))
    ]
    return RankReport(provenance, classes, n_plus=n_plus, n_minus=n_minus)


def parallel_torus_ranks(n, multiples=1):
    """Generators of the solid torus whose meridian disc carries n parallel
    dividing arcs.
    """
    if n < 1:
        raise ValueError('invalid number of chords: ' + str(n))
    _check_multiples(multiples)
    n_plus = int(math.ceil((n - 1) / 2.0))
    return _torus_report(PARALLEL_TORUS, n_plus, n - 1 - n_plus, multiples)


def _torus_census(d):
    """Census of a diagram in the sign convention of the solid torus
    counts: regions are signed opposite to the diagram's base sign.
    """
    result = check_C4_C5(d)
    if not result.passed:
        raise PreconditionError('diagram violates the partition condition: ' + result.reason)
    return region_census(d.with_base_sign(-d.base_sign), witness=result.witness)


def c5_torus_ranks(d, multiples=1):
    """Generators of the solid torus with meridian chord diagram d:
    n_+/- = chi(S_+/-) + #{-/+ non-extremal bigons} - #{+/- bigons}.
    """
    _check_multiples(multiples)
    census = _torus_census(d)
    n_plus = census.chi_plus + census.bigons(sign=-1, extremal=False) - census.bigons(sign=1)
    n_minus = census.chi_minus + census.bigons(sign=1, extremal=False) - census.bigons(sign=-1)
    if n_plus < 0 or n_minus < 0:
        raise PreconditionError('negative generator count ' + str((n_plus, n_minus)))
    return _torus_report(C5_TORUS, n_plus, n_minus, multiples)


# ------------------------------------------------------------------------------
#
# Attachment sequences
#
# ------------------------------------------------------------------------------

class AttachmentHistory(object):
    """Bypass attachments on the parallel diagram with size chords.

    Attachment k glues the chords k + 1 and k + 2 (the two arcs around the
    orbit delta_k) at their ends on the given side.

    Attributes
    ----------
    size : int
    positions : list(int)
    sides : list(int)
    """
    def __init__(self, size, positions, sides=None):
        positions = list(positions)
        sides = list(sides) if not sides is None else [BOTTOM] * len(positions)
        if len(sides) != len(positions):
            raise ValueError('invalid sides: ' + str(sides))
        for s in sides:
            if not s in [BOTTOM, TOP]:
                raise ValueError('invalid side: ' + str(s))
        for k in positions:
            if not 1 <= k <= size - 3:
                raise ParameterError(
                    'attachment position ' + str(k) + ' outside of [1, ' + str(size - 3) + ']',
                    position=k
                )
        for a, b in zip(positions[:-1], positions[1:]):
            if b - a < MIN_SPACING:
                raise ParameterError(
                    'attachment positions ' + str((a, b)) + ' closer than ' + str(MIN_SPACING),
                    positions=[a, b]
                )
        self.size = size
        self.positions = positions
        self.sides = sides

    def __repr__(self):
        return 'AttachmentHistory(%d, %s)' % (self.size, str(self.positions))

    @property
    def sigma_plus(self):
        return set([k for k in self.positions if k % 2 == 0])

    @property
    def sigma_minus(self):
        return set([k for k in self.positions if k % 2 == 1])

    def to_dict(self):
        return {'size': self.size, 'positions': self.positions, 'sides': self.sides}

    @staticmethod
    def from_dict(obj):
        return AttachmentHistory(obj['size'], obj['positions'], sides=obj.get('sides'))


def attach_sequence(size, positions, sides=None, base_sign=1):
    """Diagram obtained from the parallel diagram by the given sequence of
    bypass attachments, with its attachment history.

    Returns
    -------
    reebcli.chord_diagrams.ChordDiagram
    """
    history = AttachmentHistory(size, positions, sides=sides)
    d = parallel_diagram(size, base_sign=base_sign)
    # Current index of every surviving point of the parallel diagram
    current = dict([(p, p) for p in range(2 * size)])
    for k, side in zip(history.positions, history.sides):
        if side == BOTTOM:
            ends = (k, k + 1)
        else:
            ends = (2 * size - k - 2, 2 * size - k - 1)
        arc = ArcSpec(current[ends[0]], current[ends[1]])
        d, kept = attach(d, arc)
        if isinstance(d, Rejection):
            raise ParameterError('attachment at ' + str(k) + ' rejected: ' + d.reason, position=k)
        index = dict([(old, new) for new, old in enumerate(kept)])
        current = dict([(p, index[c]) for p, c in current.items() if c in index])
        logger.debug('attached bypass at %d on side %+d', k, side)
    d.history = history
    return d


class BlockIdentity(object):
    """Both sides of the dimension identity for the two core directions.

    Attributes
    ----------
    passed : bool
    sides : dict
        Sign (+1, -1) to (left hand side, right hand side)
    """
    def __init__(self, sides):
        self.sides = sides
        self.passed = all([lhs == rhs for lhs, rhs in sides.values()])

    def __repr__(self):
        return 'BlockIdentity(%s, %s)' % ('pass' if self.passed else 'fail', str(self.sides))

    @property
    def margins(self):
        return dict([(s, lhs - rhs) for s, (lhs, rhs) in self.sides.items()])

    def to_dict(self):
        return {
            'passed': self.passed,
            'plus': list(self.sides[1]),
            'minus': list(self.sides[-1])
        }


def block_identity_check(d, sigma_plus=None, sigma_minus=None):
    """Evaluate dim(E_+/-) + #sigma_+/- + #{+/- extremal bigons} =
    chi(S_+/-) + #sigma_-/+ for a diagram produced by attach_sequence.

    E_+ (E_-) is spanned by the orbits delta_k, 0 <= k <= size - 2, with k
    even (odd) and k not an attachment position of that parity.

    Parameters
    ----------
    d : reebcli.chord_diagrams.ChordDiagram
    sigma_plus, sigma_minus : set(int), optional
        Attachment positions by parity; taken from the history by default

    Returns
    -------
    reebcli.homology_ranks.BlockIdentity
    """
    if d.history is None:
        raise HistoryError('diagram without attachment history')
    history = d.history
    sigma = {
        1: set(sigma_plus) if not sigma_plus is None else history.sigma_plus,
        -1: set(sigma_minus) if not sigma_minus is None else history.sigma_minus
    }
    census = _torus_census(d)
    chi = {1: census.chi_plus, -1: census.chi_minus}
    sides = dict()
    for s in [1, -1]:
        parity = 0 if s > 0 else 1
        dim = len([k for k in range(history.size - 1) if k % 2 == parity and not k in sigma[s]])
        lhs = dim + len(sigma[s]) + census.bigons(sign=s, extremal=True)
        rhs = chi[s] + len(sigma[-s])
        sides[s] = (lhs, rhs)
    return BlockIdentity(sides)
