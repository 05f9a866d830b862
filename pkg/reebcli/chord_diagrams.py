"""Chord diagrams of dividing sets on a convex meridian disc.

A diagram with n chords pairs the boundary points 0, ..., 2n-1 (numbered
counterclockwise) by disjoint chords. Boundary interval i is the arc from
point i to point i+1 (mod 2n); interval 2n-1 is the marked interval whose
region carries the base sign. Regions of the disc complement are computed by
walking along boundary intervals and chords.
"""

import json
import logging


logger = logging.getLogger(__name__)


# ------------------------------------------------------------------------------
#
# Constants
#
# ------------------------------------------------------------------------------

"""Bounds on the number of chords of enumerated diagrams."""
MIN_ENUMERATION_SIZE = 1
MAX_ENUMERATION_SIZE = 10

"""Rejection reasons of bypass attachments."""
# The two ends on the arc belong to the same chord; gluing closes a curve
OVERTWISTED = 'overtwisted'

"""Sides of the parallel diagram used by attachment sequences."""
BOTTOM = 1
TOP = -1


# ------------------------------------------------------------------------------
#
# Diagrams
#
# ------------------------------------------------------------------------------

def _crossing(a, b, c, d):
    """True if the chords (a, b) and (c, d), a < b, c < d, interleave."""
    return (a < c < b < d) or (c < a < d < b)


class ChordDiagram(object):
    """Non-crossing perfect matching of 2n cyclically ordered points.

    Attributes
    ----------
    n : int
        Number of chords
    match : tuple(int)
        Partner of every boundary point
    base_sign : int
        Sign (+1 or -1) of the region containing the marked interval
    history : reebcli.homology_ranks.AttachmentHistory or None
        Bypass attachments that produced the diagram, if recorded
    boundary_components : int
        Longitudinal dividing curves on the boundary torus, one through
        every boundary point of the disc
    """
    def __init__(self, chords, base_sign=1, history=None, boundary_components=None):
        """Initialize and validate the matching.

        Parameters
        ----------
        chords : list((int, int))
            Pairs of boundary points
        base_sign : int, optional
        history : reebcli.homology_ranks.AttachmentHistory, optional
        boundary_components : int, optional
            Defaults to 2n
        """
        if not base_sign in [-1, 1]:
            raise ValueError('invalid base sign: ' + str(base_sign))
        n = len(chords)
        match = [None] * (2 * n)
        for pair in chords:
            a, b = pair
            if a == b or not 0 <= a < 2 * n or not 0 <= b < 2 * n:
                raise ValueError('invalid chord: ' + str(pair))
            if not match[a] is None or not match[b] is None:
                raise ValueError('invalid matching: point used twice in ' + str(pair))
            match[a] = b
            match[b] = a
        pairs = sorted([tuple(sorted(c)) for c in chords])
        for i in range(n):
            for j in range(i + 1, n):
                if _crossing(pairs[i][0], pairs[i][1], pairs[j][0], pairs[j][1]):
                    raise ValueError('invalid matching: chords ' + str(pairs[i]) + ' and ' + str(pairs[j]) + ' cross')
        if boundary_components is None:
            boundary_components = 2 * n
        elif boundary_components != 2 * n:
            raise ValueError('invalid boundary component count: ' + str(boundary_components))
        self.n = n
        self.match = tuple(match)
        self.boundary_components = boundary_components
        self.base_sign = base_sign
        self.history = history

    def __repr__(self):
        return 'ChordDiagram(%s, %+d)' % (str(self.chords), self.base_sign)

    def __eq__(self, other):
        return (
            isinstance(other, ChordDiagram)
            and self.match == other.match
            and self.base_sign == other.base_sign
        )

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash((self.match, self.base_sign))

    @property
    def chords(self):
        """Chords (a, b) with a < b, numbered 1, 2, ... in the order of
        their smaller endpoint.
        """
        return [(a, b) for a, b in enumerate(self.match) if a < b]

    def chord(self, index):
        """Chord with the given (one-based) number."""
        chords = self.chords
        if not 1 <= index <= len(chords):
            raise ValueError('invalid chord number: ' + str(index))
        return chords[index - 1]

    def rotate(self, r):
        """Diagram with every point p moved to p + r (mod 2n)."""
        m = 2 * self.n
        return ChordDiagram(
            [((a + r) % m, (b + r) % m) for a, b in self.chords],
            base_sign=self.base_sign
        )

    def with_base_sign(self, base_sign):
        return ChordDiagram(self.chords, base_sign=base_sign, history=self.history)

    def to_dict(self):
        return {
            'n': self.n,
            'matching': [list(c) for c in self.chords],
            'base_sign': self.base_sign,
            'boundary_components': self.boundary_components
        }

    @staticmethod
    def from_dict(obj):
        d = ChordDiagram(
            [tuple(c) for c in obj['matching']],
            base_sign=obj.get('base_sign', 1),
            boundary_components=obj.get('boundary_components')
        )
        if 'n' in obj and obj['n'] != d.n:
            raise ValueError('invalid diagram: n=' + str(obj['n']) + ' for ' + str(d.n) + ' chords')
        return d


def load_diagram(filename):
    with open(filename, 'r') as f:
        return ChordDiagram.from_dict(json.load(f))


def save_diagram(d, filename):
    with open(filename, 'w') as f:
        json.dump(d.to_dict(), f, indent=2, sort_keys=True)


def parallel_diagram(n, base_sign=1):
    """Diagram of n parallel chords (i, 2n-1-i)."""
    if n < 1:
        raise ValueError('invalid number of chords: ' + str(n))
    return ChordDiagram([(i, 2 * n - 1 - i) for i in range(n)], base_sign=base_sign)


def is_parallel(d):
    """True if every region meets at most two chords, i.e., the diagram is a
    rotation of a parallel diagram.
    """
    return all([len(r) <= 2 for r in _region_cycles(d)])


def _matchings(points):
    """Non-crossing perfect matchings of an ordered list of points."""
    if len(points) == 0:
        yield []
        return
    first = points[0]
    for k in range(1, len(points), 2):
        for inner in _matchings(points[1:k]):
            for outer in _matchings(points[k + 1:]):
                yield [(first, points[k])] + inner + outer


def enumerate_diagrams(n, base_sign=1):
    """All chord diagrams with n chords (relative to the boundary labeling).

    Returns
    -------
    list(reebcli.chord_diagrams.ChordDiagram)
    """
    if not MIN_ENUMERATION_SIZE <= n <= MAX_ENUMERATION_SIZE:
        raise ValueError('invalid number of chords: ' + str(n))
    return [ChordDiagram(m, base_sign=base_sign) for m in _matchings(list(range(2 * n)))]


# ------------------------------------------------------------------------------
#
# Bypass attachment
#
# ------------------------------------------------------------------------------

class ArcSpec(object):
    """Attaching arc given by two adjacent boundary points start and
    end = start + 1 (mod 2n), the ends of two distinct chords crossed by the
    arc.
    """
    def __init__(self, start, end):
        self.start = int(start)
        self.end = int(end)

    def __repr__(self):
        return 'ArcSpec(%d, %d)' % (self.start, self.end)

    def to_dict(self):
        return {'start': self.start, 'end': self.end}

    @staticmethod
    def across_chords(d, i, j):
        """Arc joining adjacent ends of the chords number i and j; the
        first such pair of ends in boundary order is used.
        """
        ends = set(d.chord(i) + d.chord(j))
        if i == j:
            raise ValueError('invalid arc: chord ' + str(i) + ' twice')
        m = 2 * d.n
        for p in range(m):
            q = (p + 1) % m
            if p in ends and q in ends and d.match[p] != q:
                return ArcSpec(p, q)
        raise ValueError('invalid arc: chords ' + str((i, j)) + ' have no adjacent ends')


class Rejection(object):
    """Degenerate bypass attachment.

    Attributes
    ----------
    reason : string
        OVERTWISTED
    arc : reebcli.chord_diagrams.ArcSpec
    diagram : reebcli.chord_diagrams.ChordDiagram
    """
    def __init__(self, reason, arc, diagram):
        self.reason = reason
        self.arc = arc
        self.diagram = diagram

    def __repr__(self):
        return 'Rejection(%s, %r)' % (self.reason, self.arc)

    def to_dict(self):
        return {'rejected': self.reason, 'arc': self.arc.to_dict(), 'diagram': self.diagram.to_dict()}


def _check_arc(d, arc):
    m = 2 * d.n
    for p in [arc.start, arc.end]:
        if not 0 <= p < m:
            raise ValueError('invalid arc endpoint: ' + str(p))
    if arc.end != (arc.start + 1) % m:
        raise ValueError('invalid arc: points ' + str((arc.start, arc.end)) + ' not adjacent')


def attach(d, arc):
    """Glue the two chord ends on the arc. The partners of the glued ends
    are joined by a new chord; remaining points are renumbered in order, so
    the marked interval is preserved. The two longitudinal boundary curves
    through the glued ends are joined with the bypass, so the result has two
    boundary components less.

    Returns
    -------
    (reebcli.chord_diagrams.ChordDiagram or reebcli.chord_diagrams.Rejection, list(int))
        Result and the old point of every new point
    """
    _check_arc(d, arc)
    if d.match[arc.start] == arc.end:
        logger.info('rejected bypass along %r: closed dividing curve', arc)
        return Rejection(OVERTWISTED, arc, d), None
    removed = set([arc.start, arc.end])
    kept = [p for p in range(2 * d.n) if not p in removed]
    index = dict([(p, i) for i, p in enumerate(kept)])
    chords = []
    for a, b in d.chords:
        if a in removed or b in removed:
            continue
        chords.append((index[a], index[b]))
    chords.append((index[d.match[arc.start]], index[d.match[arc.end]]))
    result = ChordDiagram(
        chords,
        base_sign=d.base_sign,
        boundary_components=d.boundary_components - 2
    )
    logger.debug('boundary components %d -> %d', d.boundary_components, result.boundary_components)
    return result, kept


def attach_bypass(d, arc):
    """Bypass attachment along an arc: the two chords crossed by the arc are
    glued into one, leaving n - 1 chords.

    Parameters
    ----------
    d : reebcli.chord_diagrams.ChordDiagram
    arc : reebcli.chord_diagrams.ArcSpec

    Returns
    -------
    reebcli.chord_diagrams.ChordDiagram or reebcli.chord_diagrams.Rejection
    """
    result, _ = attach(d, arc)
    return result


# ------------------------------------------------------------------------------
#
# Regions
#
# ------------------------------------------------------------------------------

class Region(object):
    """Connected component of the disc minus the chords.

    Attributes
    ----------
    sign : int
    intervals : tuple(int)
        Boundary intervals on the region boundary
    is_bigon : bool
        Region meets exactly one chord
    is_extremal : bool
        Bigon containing an endpoint of the partition interval I1
    """
    def __init__(self, sign, intervals, is_extremal=False):
        self.sign = sign
        self.intervals = tuple(intervals)
        self.is_bigon = len(self.intervals) == 1
        self.is_extremal = is_extremal

    def __repr__(self):
        return 'Region(%+d, %s%s)' % (
            self.sign, str(self.intervals), ', extremal' if self.is_extremal else ''
        )

    def to_dict(self):
        return {
            'sign': self.sign,
            'intervals': list(self.intervals),
            'bigon': self.is_bigon,
            'extremal': self.is_extremal
        }


class RegionCensus(object):
    """Regions of a diagram with their signs.

    Attributes
    ----------
    regions : list(reebcli.chord_diagrams.Region)
        Ordered starting with the region of the marked interval
    chi_plus, chi_minus : int
        Euler characteristic of the positive and negative part of the disc
    """
    def __init__(self, regions):
        self.regions = regions
        self.chi_plus = len([r for r in regions if r.sign > 0])
        self.chi_minus = len([r for r in regions if r.sign < 0])

    def bigons(self, sign=None, extremal=None):
        """Number of bigons, optionally restricted by sign and by the
        extremal flag.
        """
        count = 0
        for r in self.regions:
            if not r.is_bigon:
                continue
            if not sign is None and r.sign != sign:
                continue
            if not extremal is None and r.is_extremal != extremal:
                continue
            count += 1
        return count

    def to_dict(self):
        return {
            'regions': [r.to_dict() for r in self.regions],
            'chi_plus': self.chi_plus,
            'chi_minus': self.chi_minus
        }


def _region_cycles(d):
    """Regions as cycles of boundary intervals. Interval i is followed by the
    interval starting at the partner of point i + 1.
    """
    m = 2 * d.n
    seen = [False] * m
    cycles = []
    for start in range(m):
        if seen[start]:
            continue
        cycle = []
        i = start
        while not seen[i]:
            seen[i] = True
            cycle.append(i)
            i = d.match[(i + 1) % m]
        cycles.append(cycle)
    return cycles


def interval_sign(d, i):
    """Sign of the region containing boundary interval i: the base sign,
    flipped once for every chord separating the interval from the marked
    interval.
    """
    nested = len([1 for a, b in d.chords if a <= i < b])
    return d.base_sign * (-1) ** nested


def region_census(d, witness=None):
    """Regions, signs and bigons of a diagram.

    Parameters
    ----------
    d : reebcli.chord_diagrams.ChordDiagram
    witness : (int, int), optional
        Boundary intervals containing the endpoints of I1; the bigons
        containing them are flagged extremal. Defaults to the witness of
        check_C4_C5 when the diagram passes.

    Returns
    -------
    reebcli.chord_diagrams.RegionCensus
    """
    if witness is None:
        result = check_C4_C5(d)
        witness = result.witness if result.passed else ()
    m = 2 * d.n
    regions = []
    for cycle in _region_cycles(d):
        sign = interval_sign(d, cycle[0])
        extremal = len(cycle) == 1 and cycle[0] in witness
        regions.append(Region(sign, sorted(cycle, key=lambda i: (i + 1) % m), is_extremal=extremal))
    regions.sort(key=lambda r: (r.intervals[0] + 1) % m)
    return RegionCensus(regions)


# ------------------------------------------------------------------------------
#
# Conditions on the dividing set
#
# ------------------------------------------------------------------------------

class C5Result(object):
    """Outcome of the search for a boundary partition.

    Attributes
    ----------
    passed : bool
    witness : (int, int) or None
        Boundary intervals containing the two endpoints of I1; I1 consists
        of the points strictly between them
    reason : string or None
    """
    def __init__(self, passed, witness=None, reason=None):
        self.passed = passed
        self.witness = witness
        self.reason = reason

    def __repr__(self):
        if self.passed:
            return 'C5Result(pass, %s)' % str(self.witness)
        return 'C5Result(fail, %s)' % self.reason

    def __bool__(self):
        return self.passed

    def to_dict(self):
        obj = {'passed': self.passed}
        if not self.witness is None:
            obj['witness'] = list(self.witness)
        if not self.reason is None:
            obj['reason'] = self.reason
        return obj


def _strip_counts(d, g1, g2):
    """Number of chords not crossing the partition cut at intervals g1 and
    g2, per component of the disc minus the crossing chords.
    """
    m = 2 * d.n
    side1 = [(g1 + 1 + j) % m for j in range((g2 - g1) % m)]
    side2 = [(g1 - j) % m for j in range(m - len(side1))]
    in_side1 = set(side1)
    crossing = set([p for p in range(m) if (p in in_side1) != (d.match[p] in in_side1)])
    strip = dict()
    for side in [side1, side2]:
        k = 0
        for p in side:
            if p in crossing:
                k += 1
            else:
                strip[p] = k
    counts = dict()
    for a, b in d.chords:
        if a in crossing:
            continue
        counts[strip[a]] = counts.get(strip[a], 0) + 1
    return counts


def check_C4_C5(d):
    """Search a partition of the boundary into intervals I1 and I2 with the
    endpoints of I1 in two bigons such that, after cutting along the chords
    joining I1 to I2, every component contains at most one of the remaining
    chords. Pairs of bigons are scanned in increasing interval order.

    Returns
    -------
    reebcli.chord_diagrams.C5Result
    """
    if d.n < 1:
        return C5Result(False, reason='empty dividing set')
    bigons = sorted([c[0] for c in _region_cycles(d) if len(c) == 1])
    if len(bigons) < 2:
        return C5Result(False, reason='fewer than two bigons')
    for i in range(len(bigons)):
        for j in range(i + 1, len(bigons)):
            counts = _strip_counts(d, bigons[i], bigons[j])
            if all([c <= 1 for c in counts.values()]):
                return C5Result(True, witness=(bigons[i], bigons[j]))
    return C5Result(
        False,
        reason='no pair of bigons separates the dividing set into components with at most one curve'
    )
