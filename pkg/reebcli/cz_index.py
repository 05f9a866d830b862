"""Conley-Zehnder index of paths of 2x2 symplectic matrices, the chord index
mu tilde, and the parity classification of periodic orbits.

A path is given by its samples (t_i, M_i) starting at the identity. Rotation
angles are recovered from the samples by continuous unwrapping, which
requires samples dense enough that the angle moves by less than pi/2 between
consecutive samples.
"""

import csv
import logging
import math

import numpy as np

from reebcli.errors import DegeneracyError, HypothesisError, NumericalError
from reebcli.errors import PreconditionError, ResolutionError


logger = logging.getLogger(__name__)


# ------------------------------------------------------------------------------
#
# Constants
#
# ------------------------------------------------------------------------------

"""Angle variants."""
# Rotation part of the polar decomposition M = S O
POLAR = 'polar'
# Argument of the image M e1 of the first basis vector
IMAGE = 'image'

ANGLE_VARIANTS = [POLAR, IMAGE]

"""Parity and type labels."""
EVEN = 'even'
ODD = 'odd'
HYPERBOLIC = 'hyperbolic'
ELLIPTIC = 'elliptic'

"""Tolerances."""
# Largest tolerated |det M - 1|
DET_TOL = 1e-6
# Endpoints with |det(M - I)| below this value are degenerate
NONDEGENERACY_TOL = 1e-8
# Traces within this distance of +/-2 are degenerate
TRACE_TOL = 1e-9
# Angles within this distance of a multiple of pi are on the boundary
BOUNDARY_TOL = 1e-9
# Largest tolerated distance of the extended angle to a multiple of pi
ROUNDING_TOL = 0.01
# Largest angle increment between samples of the canonical extension
EXTENSION_STEP = math.pi / 8.0

TWO_PI = 2.0 * math.pi

"""Final stretch of the hyperbolic extension target diag(2, 1/2)."""
TARGET_STRETCH = math.log(2.0)

"""Default cone parameters of the hyperbolicity criterion."""
DEFAULT_CONE_WIDTH = 0.05
DEFAULT_CONE_THETA0 = 0.3
DEFAULT_STRETCH = 3.0


# ------------------------------------------------------------------------------
#
# Symplectic paths
#
# ------------------------------------------------------------------------------

class SymplecticPath(object):
    """Sampled path of 2x2 symplectic matrices starting at the identity.

    Attributes
    ----------
    times : numpy.array
        Sample times, starting at 0 and strictly monotone
    matrices : numpy.array
        Sample matrices, shape (n, 2, 2)
    """
    def __init__(self, times, matrices):
        """Initialize and validate the samples.

        Parameters
        ----------
        times : sequence of float
        matrices : sequence of 2x2 arrays
        """
        times = np.asarray(times, dtype=float)
        matrices = np.asarray(matrices, dtype=float).reshape((-1, 2, 2))
        if len(times) == 0 or len(times) != len(matrices):
            raise ValueError('invalid number of samples: ' + str((len(times), len(matrices))))
        if times[0] != 0:
            raise ValueError('invalid start time: ' + str(float(times[0])))
        if len(times) > 1:
            steps = np.diff(times)
            if not (np.all(steps > 0) or np.all(steps < 0)):
                raise ValueError('sample times not strictly monotone')
        if np.max(np.abs(matrices[0] - np.identity(2))) > DET_TOL:
            raise ValueError('invalid initial matrix: ' + str(matrices[0].tolist()))
        dets = np.linalg.det(matrices)
        worst = int(np.argmax(np.abs(dets - 1.0)))
        if abs(dets[worst] - 1.0) >= DET_TOL:
            raise ValueError(
                'invalid symplectic matrix at t=' + str(float(times[worst])) + ': det=' + str(float(dets[worst]))
            )
        self.times = times
        self.matrices = matrices

    def __len__(self):
        return len(self.times)

    def __repr__(self):
        return 'SymplecticPath(n=%d, T=%g)' % (len(self), self.duration)

    @property
    def duration(self):
        return float(abs(self.times[-1]))

    @property
    def endpoint(self):
        """Final matrix of the path."""
        return self.matrices[-1]

    @staticmethod
    def from_matrices(matrices, times=None):
        """Path from a list of matrices sampled at equidistant times in
        [0, 1] unless sample times are given.
        """
        if times is None:
            times = np.linspace(0.0, 1.0, len(matrices)) if len(matrices) > 1 else [0.0]
        return SymplecticPath(times, matrices)

    @staticmethod
    def from_function(func, t_final, n):
        """Path sampling func(t) at n equidistant times in [0, t_final]."""
        times = np.linspace(0.0, t_final, n)
        return SymplecticPath(times, [func(t) for t in times])

    def write_csv(self, filename):
        """Write the samples as CSV rows t,m11,m12,m21,m22."""
        with open(filename, 'w', newline='') as f:
            writer = csv.writer(f)
            writer.writerow(['t', 'm11', 'm12', 'm21', 'm22'])
            for t, M in zip(self.times, self.matrices):
                writer.writerow([repr(float(t))] + [repr(float(v)) for v in M.ravel()])

    @staticmethod
    def read_csv(filename):
        """Read a path written by write_csv.

        Returns
        -------
        reebcli.cz_index.SymplecticPath
        """
        times = []
        matrices = []
        with open(filename, 'r', newline='') as f:
            reader = csv.DictReader(f)
            for row in reader:
                times.append(float(row['t']))
                matrices.append([
                    [float(row['m11']), float(row['m12'])],
                    [float(row['m21']), float(row['m22'])]
                ])
        return SymplecticPath(times, matrices)


def _raw_angles(matrices, variant):
    if variant == POLAR:
        return np.arctan2(
            matrices[:, 1, 0] - matrices[:, 0, 1],
            matrices[:, 0, 0] + matrices[:, 1, 1]
        )
    elif variant == IMAGE:
        return np.arctan2(matrices[:, 1, 0], matrices[:, 0, 0])
    raise ValueError('invalid angle variant: ' + str(variant))


def _unwrap(raw):
    if len(raw) == 1:
        return np.array([0.0])
    increments = np.angle(np.exp(1j * np.diff(raw)))
    worst = int(np.argmax(np.abs(increments)))
    if abs(increments[worst]) >= math.pi / 2.0:
        raise ResolutionError(
            'angle increment ' + str(float(increments[worst])) + ' at sample ' + str(int(worst))
            + ' exceeds pi/2; sample the path more densely',
            sample=worst
        )
    return np.concatenate([[0.0], np.cumsum(increments)])


def rotation_angle(path, variant=POLAR):
    """Continuous rotation angle along the path, starting at 0.

    The polar variant is the angle of the orthogonal factor O of the polar
    decomposition M = S O (S symmetric positive definite). The image variant
    is the argument of M e1.

    Parameters
    ----------
    path : reebcli.cz_index.SymplecticPath
    variant : string, optional
        POLAR or IMAGE

    Returns
    -------
    numpy.array
        Angle at every sample time
    """
    return _unwrap(_raw_angles(path.matrices, variant))


def _angle_at(path, theta, duration):
    """Angle interpolated at flow time duration."""
    times = np.abs(path.times)
    if duration < 0 or duration > times[-1] * (1.0 + 1e-12) + 1e-12:
        raise PreconditionError(
            'duration ' + str(float(duration)) + ' outside of path [0, ' + str(float(times[-1])) + ']'
        )
    return float(np.interp(duration, times, theta))


# ------------------------------------------------------------------------------
#
# Conley-Zehnder index
#
# ------------------------------------------------------------------------------

def _rot(angle):
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


def _polar(M):
    """Polar decomposition M = S O(phi) of a matrix with positive
    determinant. Returns (S, phi) with phi in (-pi, pi].
    """
    phi = math.atan2(M[1, 0] - M[0, 1], M[0, 0] + M[1, 1])
    S = np.dot(M, _rot(phi).T)
    return 0.5 * (S + S.T), phi


def canonical_extension(M, theta):
    """Samples of a path inside Sp* from M to diag(2, 1/2) (trace > 2) or to
    -I (trace < 2).

    The path first rotates the orthogonal factor of M to the nearest
    admissible angle, then shrinks the symmetric factor to diag(2, 1/2) or
    to the identity. Along the first stage the trace moves away from 2, along
    the second stage its sign and bound are preserved, so the path never
    meets a matrix with eigenvalue one.

    Parameters
    ----------
    M : numpy.array
        Nondegenerate endpoint
    theta : float
        Lifted polar angle of M

    Returns
    -------
    (list(numpy.array), float)
        Extension samples (excluding M) and the lifted target angle
    """
    S, phi = _polar(M)
    w, Q = np.linalg.eigh(S)
    # eigh returns ascending eigenvalues; put the expanding direction first
    w = w[::-1]
    Q = Q[:, ::-1]
    if np.linalg.det(Q) < 0:
        Q[:, 1] = -Q[:, 1]
    r0 = 0.5 * math.log(w[0] / w[1])
    q0 = math.atan2(Q[1, 0], Q[0, 0])
    trace = np.trace(M)
    if trace > 2:
        target = TWO_PI * round(theta / TWO_PI)
        r1 = TARGET_STRETCH
    else:
        target = TWO_PI * math.floor(theta / TWO_PI) + math.pi
        r1 = 0.0
    samples = []
    n = max(16, int(math.ceil(abs(target - theta) / EXTENSION_STEP)))
    for s in np.linspace(0.0, 1.0, n + 1)[1:]:
        samples.append(np.dot(S, _rot(theta + s * (target - theta))))
    for s in np.linspace(0.0, 1.0, 17)[1:]:
        Qs = _rot((1.0 - s) * q0)
        r = r0 + s * (r1 - r0)
        Ss = np.dot(Qs, np.dot(np.diag([math.exp(r), math.exp(-r)]), Qs.T))
        samples.append(np.dot(Ss, _rot(target)))
    return samples, target


def conley_zehnder(path):
    """Conley-Zehnder index of a path with nondegenerate endpoint.

    The path is extended inside Sp* to diag(2, 1/2) or -I by the canonical
    extension; the index is the total polar angle of the extended path
    divided by pi.

    Parameters
    ----------
    path : reebcli.cz_index.SymplecticPath

    Returns
    -------
    int
    """
    M = path.endpoint
    if abs(np.linalg.det(M - np.identity(2))) <= NONDEGENERACY_TOL:
        raise DegeneracyError(
            'degenerate endpoint: det(M - I)=' + str(float(np.linalg.det(M - np.identity(2)))),
            endpoint=M.tolist()
        )
    theta = rotation_angle(path, POLAR)
    extension, _ = canonical_extension(M, theta[-1])
    raw = _raw_angles(np.array([M] + extension), POLAR)
    full = theta[-1] + _unwrap(raw)
    value = full[-1] / math.pi
    index = int(round(value))
    if abs(value - index) >= ROUNDING_TOL:
        raise NumericalError(
            'extended angle not a multiple of pi: ' + str(float(value)),
            endpoint=M.tolist()
        )
    logger.debug('conley-zehnder index %d (end angle %g)', index, theta[-1])
    return index


def mu_tilde(path, duration=None):
    """Index of a chord path: the integer k with the image angle of e1 at
    the given duration in (k pi, (k + 1) pi].

    Angles within BOUNDARY_TOL of a multiple k pi are read as k pi + 0 and
    yield k with a warning.

    Parameters
    ----------
    path : reebcli.cz_index.SymplecticPath
    duration : float, optional
        Defaults to the duration of the path

    Returns
    -------
    int
    """
    duration = path.duration if duration is None else duration
    theta = _angle_at(path, rotation_angle(path, IMAGE), duration)
    k = int(round(theta / math.pi))
    if abs(theta - k * math.pi) < BOUNDARY_TOL:
        logger.warning('chord angle %g on the boundary of the index interval', theta)
        return k
    return int(math.ceil(theta / math.pi)) - 1


def angle_localized_index(path):
    """Index read off the image angle of e1 at the endpoint.

    If the index is odd and the angle lies in [2k pi + pi/2, 2k pi + 3pi/2]
    the index is 2k + 1; if it is even and the angle lies in
    [2k pi - pi/2, 2k pi + pi/2] the index is 2k. The parity is taken from
    the endpoint.

    Returns
    -------
    int
    """
    parity = classify(path.endpoint)
    alpha = rotation_angle(path, IMAGE)[-1]
    if parity.is_even:
        k = math.floor((alpha + math.pi / 2.0) / TWO_PI)
        if alpha <= TWO_PI * k + math.pi / 2.0:
            return int(2 * k)
    else:
        k = math.floor((alpha - math.pi / 2.0) / TWO_PI)
        if alpha <= TWO_PI * k + 1.5 * math.pi:
            return int(2 * k + 1)
    raise PreconditionError(
        'image angle ' + str(alpha) + ' not localized for ' + parity.parity + ' index'
    )


# ------------------------------------------------------------------------------
#
# Parity
#
# ------------------------------------------------------------------------------

class OrbitParity(object):
    """Parity class of the linearized return map of a periodic orbit.

    Attributes
    ----------
    parity : string
        EVEN (two positive real eigenvalues) or ODD
    type : string
        HYPERBOLIC or ELLIPTIC
    eigen_data : (float, float) or None
        Real eigenvalues (lambda, 1/lambda) with |lambda| > 1 for hyperbolic
        maps, (modulus, argument) for elliptic maps. None for hyperbolic
        classes known only by their parity.
    """
    def __init__(self, parity, type, eigen_data=None):
        if not parity in [EVEN, ODD]:
            raise ValueError('invalid parity: ' + str(parity))
        if not type in [HYPERBOLIC, ELLIPTIC]:
            raise ValueError('invalid orbit type: ' + str(type))
        self.parity = parity
        self.type = type
        if eigen_data is None and type == ELLIPTIC:
            raise ValueError('elliptic class requires eigen data')
        if type == ELLIPTIC and parity == EVEN:
            raise ValueError('invalid parity of elliptic class: ' + str(parity))
        self.eigen_data = tuple(eigen_data) if not eigen_data is None else None

    def __repr__(self):
        return 'OrbitParity(%s, %s, %s)' % (self.parity, self.type, str(self.eigen_data))

    def __eq__(self, other):
        return (
            isinstance(other, OrbitParity)
            and self.parity == other.parity
            and self.type == other.type
        )

    def __ne__(self, other):
        return not self == other

    @property
    def is_even(self):
        return self.parity == EVEN

    @property
    def is_hyperbolic(self):
        return self.type == HYPERBOLIC

    @property
    def sign(self):
        """Sign of the real eigenvalues of a hyperbolic map, None otherwise."""
        if not self.is_hyperbolic:
            return None
        if self.eigen_data is None:
            return 1 if self.is_even else -1
        return 1 if self.eigen_data[0] > 0 else -1

    def power(self, m):
        """Parity class of the m-th iterate."""
        if m < 1:
            raise ValueError('invalid multiplicity: ' + str(m))
        if self.is_hyperbolic:
            parity = EVEN if self.is_even or m % 2 == 0 else ODD
            if self.eigen_data is None:
                return OrbitParity(parity, HYPERBOLIC)
            lam = self.eigen_data[0] ** m
            return OrbitParity(parity, HYPERBOLIC, (lam, 1.0 / lam))
        rho, arg = self.eigen_data
        angle = math.fmod(m * arg, TWO_PI)
        if abs(math.sin(angle)) < TRACE_TOL:
            raise DegeneracyError('iterate ' + str(m) + ' of elliptic map is degenerate', m=m)
        return OrbitParity(ODD, ELLIPTIC, (rho ** m, angle))

    def to_dict(self):
        obj = {'parity': self.parity, 'type': self.type}
        if not self.eigen_data is None:
            obj['eigen_data'] = list(self.eigen_data)
        return obj

    @staticmethod
    def from_dict(obj):
        return OrbitParity(obj['parity'], obj['type'], obj.get('eigen_data'))


def classify(M):
    """Parity class of a 2x2 symplectic matrix.

    Parameters
    ----------
    M : array-like

    Returns
    -------
    reebcli.cz_index.OrbitParity
    """
    M = np.asarray(M, dtype=float)
    det = np.linalg.det(M)
    if abs(det - 1.0) >= DET_TOL:
        raise ValueError('invalid symplectic matrix: det=' + str(det))
    trace = float(np.trace(M))
    if abs(abs(trace) - 2.0) < TRACE_TOL:
        raise DegeneracyError('degenerate trace: ' + str(trace), trace=trace)
    if abs(trace) > 2:
        root = math.sqrt(trace * trace - 4.0)
        lam = 0.5 * (trace + math.copysign(root, trace))
        parity = EVEN if trace > 0 else ODD
        return OrbitParity(parity, HYPERBOLIC, (lam, 1.0 / lam))
    return OrbitParity(ODD, ELLIPTIC, (1.0, math.acos(0.5 * trace)))


def is_good(primitive, m):
    """True if the m-th iterate of a primitive orbit has the parity of the
    primitive orbit. Only even iterates of negative hyperbolic orbits are
    bad.
    """
    if m < 1:
        raise ValueError('invalid multiplicity: ' + str(m))
    if not primitive.is_hyperbolic:
        return True
    return primitive.power(m).parity == primitive.parity


def cone_hyperbolic(
    M, f, cone_width=DEFAULT_CONE_WIDTH, theta0=DEFAULT_CONE_THETA0, stretch=DEFAULT_STRETCH
):
    """Sign of the eigenvalues of a symplectic matrix certified hyperbolic by
    the cone criterion.

    The hypotheses are: M e1 lies in the cone of half angle cone_width
    around e1 with norm at least stretch, and f as well as M f lie in the
    cone of half angle theta0 around e2.

    Parameters
    ----------
    M : array-like
    f : array-like
    cone_width : float, optional
    theta0 : float, optional
    stretch : float, optional

    Returns
    -------
    int
        +1 or -1, the sign of <e1, M e1>
    """
    M = np.asarray(M, dtype=float)
    f = np.asarray(f, dtype=float)
    u = M[:, 0]
    if abs(u[1]) > math.tan(cone_width) * abs(u[0]):
        raise HypothesisError('image of e1 outside of the horizontal cone', image=u.tolist())
    if np.linalg.norm(u) < stretch:
        raise HypothesisError('image of e1 not stretched', norm=float(np.linalg.norm(u)))
    for v in [f, np.dot(M, f)]:
        if abs(v[0]) > math.tan(theta0) * abs(v[1]):
            raise HypothesisError('vector outside of the vertical cone', vector=v.tolist())
    parity = classify(M)
    sign = 1 if u[0] > 0 else -1
    if not parity.is_hyperbolic or parity.sign != sign:
        raise HypothesisError(
            'cone width ' + str(cone_width) + ' too large for theta0 ' + str(theta0),
            trace=float(np.trace(M))
        )
    return sign


def word_index(word, mu_tildes):
    """Index of the periodic orbit of a word: the sum of the chord indices
    of its letters.

    Parameters
    ----------
    word : sequence of string
    mu_tildes : dict
        Chord index by letter

    Returns
    -------
    int
    """
    total = 0
    for letter in word:
        if not letter in mu_tildes:
            raise ValueError('invalid letter: ' + str(letter))
        total += mu_tildes[letter]
    return total
