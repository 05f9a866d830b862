"""Periodic orbits of a bypass attachment as cyclic words on Reeb chords.

Every cyclic word a = a_1 ... a_k on the chord letters with action
l(a) = T(a_1) + ... + T(a_k) below the bound K corresponds to one periodic
orbit. The module enumerates these words, grades them by the Conley-Zehnder
index (the sum of the chord indices), decides which multiple covers are bad,
and collects the generator counts of a homotopy class.
"""

import csv
import json
import logging

from reebcli.cz_index import EVEN, ODD, HYPERBOLIC, OrbitParity, is_good, word_index
from reebcli.errors import BoundaryError
from reebcli.reeb_flow import load_chords


logger = logging.getLogger(__name__)


# ------------------------------------------------------------------------------
#
# Constants
#
# ------------------------------------------------------------------------------

# Distance between K and a word action below which K is on the boundary
ACTION_TOL = 1e-9

# Factor of the period window [l - 9k tau, l + 9k tau] of a word of length k
WINDOW_FACTOR = 9.0

# Separator of letters in exported words
LETTER_SEPARATOR = ' '

"""Orbit table columns."""
ORBIT_COLUMNS = ['word', 'action', 'cz', 'homotopy', 'parity', 'good', 'window_lo', 'window_hi']


# ------------------------------------------------------------------------------
#
# Words
#
# ------------------------------------------------------------------------------

class ChordDatum(object):
    """Letter of the chord alphabet.

    Attributes
    ----------
    label : string
    period : float
    mu_tilde : int
    homotopy_weight : int
        Power of the reference class carried by the chord (the winding),
        0 for contractible chords
    """
    def __init__(self, label, period, mu_tilde, homotopy_weight=0):
        if period <= 0:
            raise ValueError('invalid period: ' + str(period))
        self.label = label
        self.period = float(period)
        self.mu_tilde = int(mu_tilde)
        self.homotopy_weight = int(homotopy_weight)

    def __repr__(self):
        return 'ChordDatum(%s, T=%g, mu=%d, h=%d)' % (
            self.label, self.period, self.mu_tilde, self.homotopy_weight
        )

    def to_dict(self):
        return {
            'label': self.label,
            'period': self.period,
            'mu_tilde': self.mu_tilde,
            'homotopy_weight': self.homotopy_weight
        }

    @staticmethod
    def from_dict(obj):
        return ChordDatum(
            obj['label'],
            obj['period'],
            obj['mu_tilde'],
            homotopy_weight=obj.get('homotopy_weight', 0)
        )


class CyclicWord(object):
    """Word up to cyclic permutation, stored in canonical rotation.

    Attributes
    ----------
    letters : tuple
        Minimal rotation of the word
    root : tuple
        Primitive root u with letters = u^multiplicity
    multiplicity : int
    """
    def __init__(self, letters, root, multiplicity):
        self.letters = tuple(letters)
        self.root = tuple(root)
        self.multiplicity = multiplicity

    def __repr__(self):
        return 'CyclicWord(%s)' % str(self)

    def __str__(self):
        return LETTER_SEPARATOR.join([str(a) for a in self.letters])

    def __len__(self):
        return len(self.letters)

    def __eq__(self, other):
        return isinstance(other, CyclicWord) and self.letters == other.letters

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash(self.letters)

    @property
    def is_primitive(self):
        return self.multiplicity == 1


def _minimal_rotation(seq, key):
    ranked = [key(a) for a in seq]
    best = 0
    for i in range(1, len(seq)):
        if ranked[i:] + ranked[:i] < ranked[best:] + ranked[:best]:
            best = i
    return seq[best:] + seq[:best]


def canonical_rotation(seq, key=None):
    """Canonical representative of the cyclic class of a nonempty sequence.

    Parameters
    ----------
    seq : sequence
    key : callable, optional
        Sort key of the letters; letters are compared directly by default

    Returns
    -------
    reebcli.symbolic_orbits.CyclicWord
    """
    seq = tuple(seq)
    if len(seq) == 0:
        raise ValueError('invalid word: empty')
    key = key if not key is None else (lambda a: a)
    letters = _minimal_rotation(seq, key)
    n = len(letters)
    for d in range(1, n + 1):
        if n % d == 0 and letters[:d] * (n // d) == letters:
            return CyclicWord(letters, letters[:d], n // d)


def compositions_up_to_cyclic(l):
    """Compositions of l into positive parts, up to cyclic permutation.

    Returns
    -------
    list(tuple)
        Canonical rotations, sorted by number of parts then lexicographically
    """
    if l < 1:
        raise ValueError('invalid size: ' + str(l))
    classes = set()
    def extend(prefix, rest):
        if rest == 0:
            classes.add(_minimal_rotation(tuple(prefix), lambda a: a))
            return
        for part in range(1, rest + 1):
            extend(prefix + [part], rest - part)
    extend([], l)
    return sorted(classes, key=lambda c: (len(c), c))


def composition_family(l, period=1.0):
    """Chords c_1, ..., c_l of index one, c_k of winding k and period
    k * period. Orbit classes of this alphabet in the class of winding l are
    the cyclic compositions of l.

    Returns
    -------
    list(reebcli.symbolic_orbits.ChordDatum)
    """
    if l < 1:
        raise ValueError('invalid size: ' + str(l))
    return [ChordDatum('c' + str(k), k * period, 1, homotopy_weight=k) for k in range(1, l + 1)]


def chord_data(chords, mu_tildes):
    """Chord alphabet of detected Reeb chords.

    Parameters
    ----------
    chords : list(reebcli.reeb_flow.TransverseChord)
    mu_tildes : dict
        Chord index by label

    Returns
    -------
    list(reebcli.symbolic_orbits.ChordDatum)
    """
    result = []
    for chord in chords:
        if not chord.label in mu_tildes:
            raise ValueError('invalid letter: ' + str(chord.label))
        result.append(
            ChordDatum(chord.label, chord.period, mu_tildes[chord.label], chord.winding)
        )
    return result


def load_chord_data(filename, mu_tildes):
    """Chord alphabet from a chord list written by the flow module."""
    return chord_data(load_chords(filename), mu_tildes)


# ------------------------------------------------------------------------------
#
# Orbits
#
# ------------------------------------------------------------------------------

class OrbitRecord(object):
    """Periodic orbit of a cyclic word.

    Attributes
    ----------
    word : reebcli.symbolic_orbits.CyclicWord
    action : float
    cz : int
    homotopy : int
    parity : string
    good : bool
    period_window : (float, float)
    """
    def __init__(self, word, action, cz, homotopy, parity, good, period_window):
        self.word = word
        self.action = action
        self.cz = cz
        self.homotopy = homotopy
        self.parity = parity
        self.good = good
        self.period_window = tuple(period_window)

    def __repr__(self):
        return 'Orbit(%s, l=%g, cz=%d)' % (str(self.word), self.action, self.cz)

    def to_dict(self):
        return {
            'word': list(self.word.letters),
            'action': self.action,
            'cz': self.cz,
            'homotopy': self.homotopy,
            'parity': self.parity,
            'good': self.good,
            'window': list(self.period_window)
        }


def orbit_record(word, chords, tau=0.0):
    """Orbit record of a cyclic word over a chord alphabet.

    Parameters
    ----------
    word : reebcli.symbolic_orbits.CyclicWord
    chords : dict
        ChordDatum by label
    tau : float, optional
        Period tolerance of a single chord passage

    Returns
    -------
    reebcli.symbolic_orbits.OrbitRecord
    """
    mu = dict([(label, c.mu_tilde) for label, c in chords.items()])
    action = sum([chords[a].period for a in word.letters])
    cz = word_index(word.letters, mu)
    root_cz = word_index(word.root, mu)
    primitive = OrbitParity(EVEN if root_cz % 2 == 0 else ODD, HYPERBOLIC)
    homotopy = sum([chords[a].homotopy_weight for a in word.letters])
    width = WINDOW_FACTOR * len(word) * tau
    return OrbitRecord(
        word,
        action,
        cz,
        homotopy,
        EVEN if cz % 2 == 0 else ODD,
        is_good(primitive, word.multiplicity),
        (action - width, action + width)
    )


def enumerate_orbits(chords, K, tau=0.0):
    """All cyclic words with action smaller than K.

    Parameters
    ----------
    chords : list(reebcli.symbolic_orbits.ChordDatum)
    K : float
        Action bound, not equal to the action of any word
    tau : float, optional
        Period tolerance of a single chord passage

    Returns
    -------
    list(reebcli.symbolic_orbits.OrbitRecord)
        Sorted by action, then by word
    """
    labels = [c.label for c in chords]
    if len(set(labels)) != len(labels):
        raise ValueError('invalid chord list: duplicate labels')
    alphabet = sorted(chords, key=lambda c: (c.period, c.label))
    rank = dict([(c.label, i) for i, c in enumerate(alphabet)])
    by_label = dict([(c.label, c) for c in alphabet])
    key = lambda a: rank[a]
    words = set()
    # Depth-first over all sequences; periods are sorted so the loop over
    # letters stops at the first letter exceeding the remaining action.
    stack = [((), 0.0)]
    while stack:
        prefix, action = stack.pop()
        for c in alphabet:
            total = action + c.period
            if abs(total - K) < ACTION_TOL:
                raise BoundaryError(
                    'action bound ' + str(K) + ' equals the action of a word',
                    word=list(prefix + (c.label,))
                )
            if total > K:
                break
            word = prefix + (c.label,)
            words.add(canonical_rotation(word, key))
            stack.append((word, total))
    records = [orbit_record(w, by_label, tau) for w in words]
    records.sort(key=lambda r: (r.action, [rank[a] for a in r.word.letters]))
    logger.info('enumerated %d orbits with action < %g', len(records), K)
    return records


def homotopy_classes(records):
    """Sorted list of homotopy classes occurring among the records."""
    return sorted(set([r.homotopy for r in records]))


def graded_block(records, homotopy, include_bad=False):
    """Generator count per Conley-Zehnder degree in a homotopy class.

    Degrees of bad orbits appear with their good count (possibly zero)
    unless include_bad is set.

    Returns
    -------
    dict
    """
    block = dict()
    for r in records:
        if r.homotopy != homotopy:
            continue
        block.setdefault(r.cz, 0)
        if r.good or include_bad:
            block[r.cz] += 1
    return block


def block_with_generator(records, homotopy):
    """Graded block of the good orbits of a class together with the even
    generator of degree zero contributed by the bypass.
    """
    block = graded_block(records, homotopy)
    block[0] = block.get(0, 0) + 1
    return block


def euler_characteristic(block):
    """Alternating sum of the generator counts of a graded block."""
    return sum([(-1) ** (degree % 2) * count for degree, count in block.items()])


# ------------------------------------------------------------------------------
#
# Export
#
# ------------------------------------------------------------------------------

def write_orbits_csv(records, filename):
    """Write an orbit table with columns ORBIT_COLUMNS."""
    with open(filename, 'w', newline='') as f:
        writer = csv.writer(f)
        writer.writerow(ORBIT_COLUMNS)
        for r in records:
            writer.writerow([
                str(r.word),
                repr(r.action),
                r.cz,
                r.homotopy,
                r.parity,
                'true' if r.good else 'false',
                repr(r.period_window[0]),
                repr(r.period_window[1])
            ])


def orbits_to_dict(records):
    return {'orbits': [r.to_dict() for r in records]}


def write_orbits_json(records, filename):
    with open(filename, 'w') as f:
        json.dump(orbits_to_dict(records), f, indent=2, sort_keys=True)
