"""Section maps of a bypass attachment as generalized horseshoes.

The Reeb flow induces partial maps on the boundary section S_Z: the map phi
of the bypass and the map psi of the manifold. Both decompose into branches
between rectangles. The module certifies by dense sampling that such a
decomposition has the structure of a K-hyperbolic surface or of a dominated
hyperbolic bypass, composes the two maps along words of chord letters, and
locates the unique fixed point of every composite.

Points of the section are given in coordinates (x, z). With
I_max = [-z_max, z_max] the sets

    R_lambda = union over k = -1..4 of [k pi/2 + lambda, (k+1) pi/2 - lambda] x I_max
    Q_lambda = union over k = 0..2 of [k pi - lambda/2, k pi + lambda/2] x I_max

separate the hyperbolic part of the dynamics from the drift along the
dividing set.
"""

import csv
import json
import logging
import math
from collections import namedtuple
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy.optimize import brentq, fsolve
from scipy.spatial.distance import pdist

from reebcli.errors import HypothesisError, NumericalError, ParameterError
from reebcli.errors import PreconditionError, ReebError, format_point
from reebcli.model_geometry import TWO_PI, Z_MAX
from reebcli.reeb_flow import PLANE_Y, Escape, FlowSettings, Section
from reebcli.reeb_flow import first_return
from reebcli.symbolic_orbits import LETTER_SEPARATOR, ChordDatum, enumerate_orbits


logger = logging.getLogger(__name__)


# ------------------------------------------------------------------------------
#
# Constants
#
# ------------------------------------------------------------------------------

"""Fibre families of rectangles."""
HORIZONTAL = 'horizontal'
VERTICAL = 'vertical'

FIBER_KINDS = [HORIZONTAL, VERTICAL]

"""Branch kinds."""
# Branch inside a strip of Q_lambda, drifting along the dividing set
DRIFT = 'drift'
# Branch between rectangles of R_lambda
RECTANGLE = 'rectangle'

BRANCH_KINDS = [DRIFT, RECTANGLE]

"""Certificate kinds."""
K_HYPERBOLIC = 'k_hyperbolic'
HYPERBOLIC_BYPASS = 'hyperbolic_bypass'
MANIFOLD_DOMINATION = 'manifold_domination'
BYPASS_DOMINATION = 'bypass_domination'
FIXED_POINT = 'fixed_point'

"""Certificate conditions."""
Q_CONTAINMENT = 'q_containment'
STRIP_DRIFT = 'strip_drift'
RECTANGLES = 'rectangles'
FIBRE_REVERSAL = 'fibre_reversal'
INJECTIVE = 'injective'
X_TO_Y = 'x_to_y'
FULL_WIDTH = 'full_width'
FIBRE_CONES = 'fibre_cones'
CONE_IMAGES = 'cone_images'
EXPANSION = 'expansion'
RETURN_TIME = 'return_time'
CONE_INVARIANCE = 'cone_invariance'
VERTICAL_STRETCH = 'vertical_stretch'
HORIZONTAL_STRETCH = 'horizontal_stretch'
GRAPH_CONTRACTION = 'graph_contraction'

"""Sampling."""
# Samples per side of a domain in certificates
DEFAULT_SAMPLE_N = 64
# Samples per side of the graph transform grid
DEFAULT_GRID_N = 32
# Samples per side for the pairwise injectivity test
INJECTIVITY_SAMPLE_N = 24
# Rays per cone when testing cone images
CONE_RAYS = 9
# Relative shrinking of boundary rays of open cones
RAY_SHRINK = 1e-9
# Samples per edge of mapped rectangles
MAPPED_EDGE_SAMPLES = 17
# Central difference step of numeric differentials
FD_STEP = 1e-6

"""Tolerances."""
CORNER_TOL = 1e-8
CONTAINS_TOL = 1e-9
# Largest deviation of image fibres in local rectangle coordinates
FIBRE_TOL = 1e-3
# Largest mismatch between a rectangle and the width of its component
FULL_WIDTH_TOL = 1e-5
NEWTON_TOL = 1e-10
# Largest distance between fixed points found from different seeds
SEED_TOL = 1e-9
# Tolerance of the domain test of fixed point orbits
DOMAIN_TOL = 1e-7
MAX_GRAPH_ITERATIONS = 200
GRAPH_TOL = 1e-14

"""Synthetic models."""
LAMBDA_MAX = math.pi / 8.0
DEFAULT_LAMBDA = 0.3
DEFAULT_NU = 0.2
DEFAULT_TAU = 1.0
DEFAULT_A = 1.0
DEFAULT_ETA = 0.1
DEFAULT_MU = 0.3
DEFAULT_PERIODS = (1.0, 1.3)
# Letters of the synthetic manifold map, one per component of Y
LETTERS = ['a', 'b']
# Factor between the constructed and the required stretch
SAFETY = 1.5
# Largest band height of the bypass branches relative to z_max
BAND_FRACTION = 0.4
# Strip width of the manifold branches relative to its admissible maximum
STRIP_FRACTION = 0.5
# Drifts of the Q_lambda branches relative to z_max
BYPASS_DRIFT = 1.0 / 8.0
MANIFOLD_DRIFT = 1.0 / 5.0
# Distance between synthetic rectangles and the boundary of their sets
INSET = 1e-6
MAX_WARP = 0.3
# Default stretch factor a > 2 of the fixed point theorem
DEFAULT_EXPANSION = 2.5
DEFAULT_ESCAPE_ITER = 1000
# Half size of the domains of chord induced branches
RETURN_MAP_RADIUS = 1e-3

VERTICAL_ANGLE = 0.5 * math.pi

"""Fixed point table columns."""
FIXED_POINT_COLUMNS = ['word', 'x', 'z', 'period', 'cz_index']


SectionPoint = namedtuple('SectionPoint', ['x', 'z'])


# ------------------------------------------------------------------------------
#
# Regions of the section
#
# ------------------------------------------------------------------------------

def _check_lambda(lam):
    if not 0 < lam < LAMBDA_MAX:
        raise ParameterError('lambda ' + str(lam) + ' outside of (0, pi/8)', lam=lam)


def q_strip(x):
    """Index k in {0, 1, 2} of the strip of Q_lambda closest to x."""
    return min(2, max(0, int(round(x / math.pi))))


def q_margin(p, lam, z_max):
    """Signed slack of p inside Q_lambda (negative outside)."""
    k = q_strip(p[0])
    return min(0.5 * lam - abs(p[0] - k * math.pi), z_max - abs(p[1]))


def r_component(x):
    """Index k in {-1, ..., 4} of the component of R_lambda closest to x."""
    return min(4, max(-1, int(math.floor(x / (0.5 * math.pi)))))


def component_bounds(k, lam):
    """x-interval of the k-th component of R_lambda."""
    return (0.5 * math.pi * k + lam, 0.5 * math.pi * (k + 1) - lam)


def r_margin(p, lam, z_max):
    """Signed slack of p inside R_lambda (negative outside)."""
    lo, hi = component_bounds(r_component(p[0]), lam)
    return min(p[0] - lo, hi - p[0], z_max - abs(p[1]))


def xy_margin(p, z_max, offset=0.0):
    """Signed slack of p inside X (offset 0) or Y (offset pi).

    X is [0, pi/4] x [-z_max, 0) together with [pi/4, 3pi/4] x I_max and
    [3pi/4, pi] x (0, z_max].
    """
    x = p[0] - offset
    z = p[1]
    return min(
        x,
        math.pi - x,
        z_max - abs(z),
        max(x - 0.25 * math.pi, -z),
        max(0.75 * math.pi - x, z)
    )


# ------------------------------------------------------------------------------
#
# Cones
#
# ------------------------------------------------------------------------------

class Cone(object):
    """Open cone {w : |<w, v>| < width |<w, u>|} where u is the unit vector
    at the given angle from the x-axis and (u, v) is orthonormal.

    Attributes
    ----------
    angle : float
    width : float
    """
    def __init__(self, angle, width):
        if width <= 0:
            raise ValueError('invalid cone width: ' + str(width))
        self.angle = float(angle)
        self.width = float(width)
        self.u = np.array([math.cos(angle), math.sin(angle)])
        self.v = np.array([-math.sin(angle), math.cos(angle)])

    def __repr__(self):
        return 'Cone(%g, %g)' % (self.angle, self.width)

    @staticmethod
    def horizontal(width):
        return Cone(0.0, width)

    @staticmethod
    def vertical(width):
        return Cone(VERTICAL_ANGLE, width)

    def margin(self, w):
        """Slack of a vector in the cone, normalized by its length."""
        w = np.asarray(w, dtype=float)
        norm = np.linalg.norm(w)
        if norm == 0:
            return 0.0
        return (self.width * abs(np.dot(w, self.u)) - abs(np.dot(w, self.v))) / norm

    def contains(self, w):
        return self.margin(w) > 0

    def rays(self, n=CONE_RAYS):
        """Unit-width samples u + t v of the cone, t in (-width, width)."""
        ts = np.linspace(-1.0, 1.0, n) * self.width * (1.0 - RAY_SHRINK)
        return [self.u + t * self.v for t in ts]

    def image_margin(self, M, target):
        """Smallest slack of the image of the cone under M in target.

        Images of the rays must lie on one side of the target cone;
        otherwise the image sweeps through the normal of the target
        direction and the slack is -1.
        """
        images = [np.dot(M, r) for r in self.rays()]
        sides = set([np.sign(np.dot(w, target.u)) for w in images])
        if len(sides) > 1:
            return -1.0
        return min([target.margin(w) for w in images])

    def min_stretch(self, M):
        """Smallest ratio |M w| / |w| over the rays of the cone."""
        return min([np.linalg.norm(np.dot(M, r)) / np.linalg.norm(r) for r in self.rays()])

    def to_dict(self):
        return {'angle': self.angle, 'width': self.width}


class ConeSpec(object):
    """Cone field with a constant centre direction, or centred on the
    tangent (or normal) of a curve z -> (gamma(z), z).

    Attributes
    ----------
    width : float
    angle : float or None
    curve : callable or None
    perpendicular : bool
    """
    def __init__(self, width, angle=None, curve=None, perpendicular=False):
        if width <= 0:
            raise ValueError('invalid cone width: ' + str(width))
        if (angle is None) == (curve is None):
            raise ValueError('cone field requires either a direction or a curve')
        self.width = float(width)
        self.angle = angle
        self.curve = curve
        self.perpendicular = perpendicular

    def at(self, p):
        """Cone of the field at a point of the section.

        Returns
        -------
        reebcli.horseshoe.Cone
        """
        if self.curve is None:
            angle = self.angle
        else:
            z = p[1]
            dx = (self.curve(z + FD_STEP) - self.curve(z - FD_STEP)) / (2.0 * FD_STEP)
            angle = math.atan2(1.0, dx)
        if self.perpendicular:
            angle += 0.5 * math.pi
        return Cone(angle, self.width)


def _field(center, width):
    if callable(center):
        return ConeSpec(width, curve=center)
    return ConeSpec(width, angle=center)


# ------------------------------------------------------------------------------
#
# Rectangles
#
# ------------------------------------------------------------------------------

class _Curve(object):
    """Polyline parametrized proportionally to arc length on [0, 1]."""
    def __init__(self, points):
        points = np.asarray(points, dtype=float).reshape((-1, 2))
        if len(points) < 2:
            raise ValueError('invalid boundary curve: less than two points')
        lengths = np.hypot(*np.diff(points, axis=0).T)
        if np.any(lengths <= 0):
            raise ValueError('invalid boundary curve: repeated point')
        params = np.concatenate([[0.0], np.cumsum(lengths)])
        self.points = points
        self.params = params / params[-1]

    def at(self, t):
        return np.array([
            np.interp(t, self.params, self.points[:, 0]),
            np.interp(t, self.params, self.points[:, 1])
        ])

    def sample(self, n):
        return np.array([self.at(t) for t in np.linspace(0.0, 1.0, n)])


class Rect(object):
    """Curvilinear rectangle of the section: the Coons patch spanned by four
    boundary curves.

    The bottom and top curves run from the left to the right boundary, the
    left and right curves from the bottom to the top. Horizontal fibres are
    the images of [0, 1] x {s}, vertical fibres the images of {s} x [0, 1].

    Attributes
    ----------
    bottom, top, left, right : numpy.array
        Boundary polylines, shape (m, 2)
    fiber_kind : string
    box : (float, float, float, float) or None
        Bounds (x_lo, x_hi, z_lo, z_hi) of axis-aligned rectangles
    orientation : int
        Sign of the Jacobian of the parametrization
    """
    def __init__(self, bottom, top, left, right, fiber_kind=HORIZONTAL):
        if not fiber_kind in FIBER_KINDS:
            raise ValueError('invalid fiber kind: ' + str(fiber_kind))
        self._bottom = _Curve(bottom)
        self._top = _Curve(top)
        self._left = _Curve(left)
        self._right = _Curve(right)
        self.fiber_kind = fiber_kind
        pairs = [
            (self._bottom.at(0.0), self._left.at(0.0)),
            (self._bottom.at(1.0), self._right.at(0.0)),
            (self._top.at(0.0), self._left.at(1.0)),
            (self._top.at(1.0), self._right.at(1.0))
        ]
        for a, b in pairs:
            if np.max(np.abs(a - b)) > CORNER_TOL:
                raise ValueError('invalid rectangle: boundary curves do not meet at ' + str(a.tolist()))
        self.corners = [pairs[0][0], pairs[1][0], pairs[2][0], pairs[3][0]]
        self.box = self._detect_box()
        self.orientation = self._check_orientation()

    def __repr__(self):
        x_lo, x_hi, z_lo, z_hi = self.bounds
        return 'Rect([%g, %g] x [%g, %g], %s)' % (x_lo, x_hi, z_lo, z_hi, self.fiber_kind)

    @staticmethod
    def axis_aligned(x_lo, x_hi, z_lo, z_hi, fiber_kind=HORIZONTAL):
        """Rectangle [x_lo, x_hi] x [z_lo, z_hi]."""
        if not x_lo < x_hi or not z_lo < z_hi:
            raise ValueError('invalid rectangle bounds: ' + format_point((x_lo, x_hi, z_lo, z_hi)))
        return Rect(
            [[x_lo, z_lo], [x_hi, z_lo]],
            [[x_lo, z_hi], [x_hi, z_hi]],
            [[x_lo, z_lo], [x_lo, z_hi]],
            [[x_hi, z_lo], [x_hi, z_hi]],
            fiber_kind=fiber_kind
        )

    def _detect_box(self):
        curves = [self._bottom, self._top, self._left, self._right]
        if any([len(c.points) != 2 for c in curves]):
            return None
        (x0, z0), (x1, _), (_, z1) = self.corners[0], self.corners[1], self.corners[2]
        expected = [[x0, z0], [x1, z0], [x0, z1], [x1, z1]]
        if np.max(np.abs(np.array(self.corners) - np.array(expected))) > CORNER_TOL:
            return None
        if not x0 < x1 or not z0 < z1:
            return None
        return (float(x0), float(x1), float(z0), float(z1))

    def _jacobian_det(self, u, v):
        h = 1e-4
        du = (self.point(u + h, v) - self.point(u - h, v)) / (2.0 * h)
        dv = (self.point(u, v + h) - self.point(u, v - h)) / (2.0 * h)
        return du[0] * dv[1] - du[1] * dv[0]

    def _check_orientation(self):
        if not self.box is None:
            return 1
        grid = np.linspace(0.05, 0.95, 7)
        dets = np.array([self._jacobian_det(u, v) for u in grid for v in grid])
        if np.all(dets > 0):
            return 1
        if np.all(dets < 0):
            return -1
        raise ValueError('invalid rectangle: degenerate parametrization')

    @property
    def bounds(self):
        """(x_lo, x_hi, z_lo, z_hi) of the boundary curves."""
        if not self.box is None:
            return self.box
        pts = np.concatenate([c.points for c in [self._bottom, self._top, self._left, self._right]])
        return (
            float(np.min(pts[:, 0])), float(np.max(pts[:, 0])),
            float(np.min(pts[:, 1])), float(np.max(pts[:, 1]))
        )

    @property
    def center(self):
        return self.point(0.5, 0.5)

    def point(self, u, v):
        """Point with local coordinates (u, v)."""
        if not self.box is None:
            x_lo, x_hi, z_lo, z_hi = self.box
            return np.array([x_lo + u * (x_hi - x_lo), z_lo + v * (z_hi - z_lo)])
        P00, P10, P01, P11 = self.corners
        return (
            (1.0 - v) * self._bottom.at(u) + v * self._top.at(u)
            + (1.0 - u) * self._left.at(v) + u * self._right.at(v)
            - ((1.0 - u) * (1.0 - v) * P00 + u * (1.0 - v) * P10 + (1.0 - u) * v * P01 + u * v * P11)
        )

    def local(self, p):
        """Local coordinates (u, v) of a point, or None if the patch
        inversion fails.
        """
        p = np.asarray(p, dtype=float)
        if not self.box is None:
            x_lo, x_hi, z_lo, z_hi = self.box
            return np.array([(p[0] - x_lo) / (x_hi - x_lo), (p[1] - z_lo) / (z_hi - z_lo)])
        uv, _, ier, _ = fsolve(lambda uv: self.point(uv[0], uv[1]) - p, [0.5, 0.5], full_output=True)
        if ier != 1:
            return None
        return uv

    def contains(self, p, tol=CONTAINS_TOL):
        uv = self.local(p)
        if uv is None:
            return False
        return bool(-tol <= uv[0] <= 1.0 + tol and -tol <= uv[1] <= 1.0 + tol)

    def fiber(self, s, n=DEFAULT_SAMPLE_N):
        """Sample points of the fibre with parameter s."""
        ts = np.linspace(0.0, 1.0, n)
        if self.fiber_kind == HORIZONTAL:
            return np.array([self.point(t, s) for t in ts])
        return np.array([self.point(s, t) for t in ts])

    def grid(self, n):
        """Points with local coordinates on an n x n grid, boundary
        included.
        """
        ts = np.linspace(0.0, 1.0, n)
        return np.array([self.point(u, v) for u in ts for v in ts])

    def overlaps(self, other):
        """Test whether the bounding boxes of two rectangles overlap."""
        a = self.bounds
        b = other.bounds
        return a[0] < b[1] and b[0] < a[1] and a[2] < b[3] and b[2] < a[3]

    def mapped(self, func, reverse=False, n=MAPPED_EDGE_SAMPLES):
        """Rectangle bounded by the images of the boundary curves.

        With reverse set the local coordinates of the image are
        (u', v') = (v, 1 - u): horizontal fibres of this rectangle are mapped
        to vertical fibres of the image.
        """
        edges = dict()
        for name, curve in [('bottom', self._bottom), ('top', self._top), ('left', self._left), ('right', self._right)]:
            edges[name] = np.array([func(p) for p in curve.sample(n)])
        if reverse:
            return Rect(
                edges['right'],
                edges['left'],
                edges['bottom'][::-1],
                edges['top'][::-1],
                fiber_kind=self.fiber_kind
            )
        return Rect(edges['bottom'], edges['top'], edges['left'], edges['right'], fiber_kind=self.fiber_kind)

    def to_dict(self):
        if not self.box is None:
            return {'box': list(self.box), 'fiber_kind': self.fiber_kind}
        return {
            'bottom': self._bottom.points.tolist(),
            'top': self._top.points.tolist(),
            'left': self._left.points.tolist(),
            'right': self._right.points.tolist(),
            'fiber_kind': self.fiber_kind
        }

    @staticmethod
    def from_dict(obj):
        fiber_kind = obj.get('fiber_kind', HORIZONTAL)
        if 'box' in obj:
            return Rect.axis_aligned(*obj['box'], fiber_kind=fiber_kind)
        return Rect(obj['bottom'], obj['top'], obj['left'], obj['right'], fiber_kind=fiber_kind)


# ------------------------------------------------------------------------------
#
# Section maps
#
# ------------------------------------------------------------------------------

class SectionBranch(object):
    """Labeled branch of a partial map of the section.

    Attributes
    ----------
    label : string
    kind : string
        DRIFT or RECTANGLE
    domain, image : reebcli.horseshoe.Rect
    strip : int or None
        Strip index k of drift branches
    period : float or None
        Period T(a_j) of the chord of a manifold branch
    d_in, d_out : float or callable
        Centres of the cones around the fibres of domain and image: an
        angle, or a curve z -> x
    """
    def __init__(
        self, label, kind, domain, image, evaluate, differential=None, inverse=None,
        return_time=None, strip=None, period=None, d_in=VERTICAL_ANGLE, d_out=VERTICAL_ANGLE
    ):
        if not kind in BRANCH_KINDS:
            raise ValueError('invalid branch kind: ' + str(kind))
        if kind == DRIFT and strip is None:
            raise ValueError('drift branch ' + str(label) + ' without strip index')
        self.label = label
        self.kind = kind
        self.domain = domain
        self.image = image
        self.strip = strip
        self.period = period
        self.d_in = d_in
        self.d_out = d_out
        self._evaluate = evaluate
        self._differential = differential
        self._inverse = inverse
        self._return_time = return_time

    def __repr__(self):
        return 'SectionBranch(%s, %s)' % (self.label, self.kind)

    @property
    def has_differential(self):
        return not self._differential is None

    def _call(self, func, p):
        try:
            return np.asarray(func(np.asarray(p, dtype=float)), dtype=float)
        except ReebError as ex:
            ex.details.setdefault('branch', self.label)
            raise
        except (ArithmeticError, ValueError) as ex:
            raise NumericalError(
                'evaluation of branch ' + str(self.label) + ' failed: ' + str(ex),
                branch=self.label
            )

    def map(self, p):
        return self._call(self._evaluate, p)

    def jacobian(self, p):
        """Differential at p, by central differences if the branch has no
        differential evaluator.
        """
        if self.has_differential:
            return self._call(self._differential, p).reshape((2, 2))
        p = np.asarray(p, dtype=float)
        jac = np.zeros((2, 2))
        for j in range(2):
            dp = np.zeros(2)
            dp[j] = FD_STEP
            jac[:, j] = (self.map(p + dp) - self.map(p - dp)) / (2.0 * FD_STEP)
        return jac

    def preimage(self, q):
        if not self._inverse is None:
            return self._call(self._inverse, q)
        q = np.asarray(q, dtype=float)
        p, _, ier, msg = fsolve(lambda p: self.map(p) - q, self.domain.center, full_output=True)
        if ier != 1:
            raise NumericalError('inversion of branch ' + str(self.label) + ' failed: ' + msg, branch=self.label)
        return p

    def time(self, p):
        """Return time at p."""
        if not self._return_time is None:
            return float(self._return_time(np.asarray(p, dtype=float)))
        return self.period if not self.period is None else 0.0


class SectionMapModel(object):
    """Partial map of the section decomposed into labeled branches with
    pairwise disjoint domains.

    Attributes
    ----------
    branches : list(reebcli.horseshoe.SectionBranch)
    name : string
    lam : float or None
        Width parameter lambda of R_lambda and Q_lambda the model refers to
    z_max : float
    tau : float or None
        Return time tolerance of the model
    parameters : dict
        Construction parameters of synthetic models
    """
    def __init__(self, branches, name='section_map', lam=None, z_max=Z_MAX, tau=None, parameters=None):
        labels = [b.label for b in branches]
        if len(set(labels)) != len(labels):
            raise ValueError('invalid map model: duplicate branch labels')
        for i, a in enumerate(branches):
            for b in branches[i + 1:]:
                if _domains_overlap(a.domain, b.domain):
                    raise ValueError('invalid map model: overlapping domains ' + str((a.label, b.label)))
        self.branches = list(branches)
        self.name = name
        self.lam = lam
        self.z_max = z_max
        self.tau = tau
        self.parameters = parameters if not parameters is None else dict()

    def __repr__(self):
        return 'SectionMapModel(%s, %s)' % (self.name, str([b.label for b in self.branches]))

    def branch(self, label):
        for b in self.branches:
            if b.label == label:
                return b
        raise ValueError('invalid branch label: ' + str(label))

    def branches_of(self, kind):
        return [b for b in self.branches if b.kind == kind]

    @property
    def letters(self):
        """Labels of the rectangle branches."""
        return [b.label for b in self.branches_of(RECTANGLE)]

    def locate(self, p, kind=None):
        """Branch whose domain contains p, or None."""
        for b in self.branches:
            if (kind is None or b.kind == kind) and b.domain.contains(p):
                return b
        return None

    def image(self, p):
        """(branch, image point) of p, or None outside of the domain."""
        b = self.locate(p)
        if b is None:
            return None
        return b, b.map(p)

    def preimage(self, q):
        """(branch, preimage) of q, or None outside of the image."""
        for b in self.branches:
            if b.image.contains(q):
                return b, b.preimage(q)
        return None

    def return_time(self, p):
        b = self.locate(p)
        if b is None:
            raise PreconditionError('point outside of the domain of ' + self.name, point=list(p))
        return b.time(p)


def _domains_overlap(a, b):
    if not a.overlaps(b):
        return False
    ts = np.linspace(0.0, 1.0, 9)[1:-1]
    for u in ts:
        for v in ts:
            if b.contains(a.point(u, v), tol=-CONTAINS_TOL):
                return True
    return False


def affine_branch(
    label, kind, domain, matrix, offset, strip=None, period=None, return_time=None, reverse=None
):
    """Branch p -> matrix p + offset.

    The image rectangle is the image of the domain, with reversed fibres for
    rectangle branches unless reverse is given.

    Returns
    -------
    reebcli.horseshoe.SectionBranch
    """
    M = np.array(matrix, dtype=float).reshape((2, 2))
    b = np.array(offset, dtype=float).reshape(2)
    if abs(np.linalg.det(M)) < 1e-14:
        raise ValueError('invalid affine branch: singular matrix')
    M_inv = np.linalg.inv(M)
    reverse = reverse if not reverse is None else kind == RECTANGLE
    evaluate = lambda p: np.dot(M, p) + b
    image = domain.mapped(evaluate, reverse=reverse, n=2)
    return SectionBranch(
        label,
        kind,
        domain,
        image,
        evaluate,
        differential=lambda p: M,
        inverse=lambda q: np.dot(M_inv, q - b),
        return_time=(lambda p: return_time) if not return_time is None else None,
        strip=strip,
        period=period
    )


def map_model_from_dict(obj):
    """Section map of affine branches from its dictionary serialization.

    Returns
    -------
    reebcli.horseshoe.SectionMapModel
    """
    branches = []
    for b in obj.get('branches', []):
        branches.append(affine_branch(
            b['label'],
            b.get('kind', RECTANGLE),
            Rect.from_dict(b['domain']),
            b['matrix'],
            b['offset'],
            strip=b.get('strip'),
            period=b.get('period'),
            return_time=b.get('return_time'),
            reverse=b.get('reverse')
        ))
    return SectionMapModel(
        branches,
        name=obj.get('name', 'section_map'),
        lam=obj.get('lambda'),
        z_max=obj.get('z_max', Z_MAX),
        tau=obj.get('tau')
    )


def load_map_model(filename):
    """Read a section map of affine branches from a JSON file."""
    with open(filename, 'r') as f:
        return map_model_from_dict(json.load(f))


# ------------------------------------------------------------------------------
#
# Certificates
#
# ------------------------------------------------------------------------------

class HyperbolicCertificate(object):
    """Sampled conditions with their worst-case margins. A condition with
    margin None holds vacuously (no branch to test).

    Attributes
    ----------
    kind : string
    parameters : dict
    conditions : dict
        Condition name to margin
    """
    def __init__(self, kind, parameters=None):
        self.kind = kind
        self.parameters = parameters if not parameters is None else dict()
        self.conditions = dict()

    def __repr__(self):
        return 'HyperbolicCertificate(%s, %s)' % (self.kind, 'pass' if self.passed else 'fail')

    def add(self, condition, margin):
        self.conditions[condition] = float(margin) if not margin is None else None

    def holds(self, condition):
        margin = self.conditions[condition]
        return margin is None or margin > 0

    @property
    def passed(self):
        return all([self.holds(c) for c in self.conditions])

    @property
    def failed(self):
        return [c for c in self.conditions if not self.holds(c)]

    def to_dict(self):
        return {
            'kind': self.kind,
            'parameters': self.parameters,
            'passed': self.passed,
            'conditions': dict([
                (c, {'pass': self.holds(c), 'margin': m}) for c, m in self.conditions.items()
            ])
        }

    def write_json(self, filename):
        with open(filename, 'w') as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)


def _map_branches(func, branches, workers):
    if workers > 1 and len(branches) > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            return list(executor.map(func, branches))
    return [func(b) for b in branches]


def _worst(values):
    values = [v for v in values if not v is None]
    return min(values) if values else None


def _drift_conditions(cert, branches, lam, z_max, n, workers):
    """Q_lambda containment, strip confinement and z-monotonicity."""
    def sample(b):
        containment = []
        drift = []
        for p in b.domain.grid(n):
            q = b.map(p)
            containment.append(min(q_margin(p, lam, z_max), q_margin(q, lam, z_max)))
            k = q_strip(p[0])
            sign = 1.0 if k % 2 == 0 else -1.0
            drift.append(min(0.5 * lam - abs(q[0] - k * math.pi), sign * (q[1] - p[1])))
        return min(containment), min(drift)
    results = _map_branches(sample, branches, workers)
    cert.add(Q_CONTAINMENT, _worst([r[0] for r in results]))
    cert.add(STRIP_DRIFT, _worst([r[1] for r in results]))


def _fibre_deviation(b, n):
    """Largest deviation of the images of domain fibres from fibres of the
    other family of the image.
    """
    span, other = (1, 0) if b.domain.fiber_kind == HORIZONTAL else (0, 1)
    worst = 0.0
    for s in np.linspace(0.0, 1.0, n):
        local = [b.image.local(b.map(p)) for p in b.domain.fiber(s, n)]
        if any([uv is None for uv in local]):
            return 1.0
        local = np.array(local)
        deviation = max(
            abs(1.0 - abs(local[-1, span] - local[0, span])),
            float(np.ptp(local[:, other]))
        )
        worst = max(worst, deviation)
    return worst


def _injectivity_margin(b, n):
    images = np.array([b.map(p) for p in b.domain.grid(min(n, INJECTIVITY_SAMPLE_N))])
    return float(np.min(pdist(images)))


def _rectangle_conditions(cert, branches, lam, z_max, n, workers):
    """R_lambda containment, fibre reversal and injectivity."""
    def sample(b):
        margins = []
        for p in b.domain.grid(n):
            margins.append(min(r_margin(p, lam, z_max), r_margin(b.map(p), lam, z_max)))
        return (
            min(margins),
            FIBRE_TOL - _fibre_deviation(b, n),
            _injectivity_margin(b, n)
        )
    results = _map_branches(sample, branches, workers)
    cert.add(RECTANGLES, _worst([r[0] for r in results]))
    cert.add(FIBRE_REVERSAL, _worst([r[1] for r in results]))
    cert.add(INJECTIVE, _worst([r[2] for r in results]))


def verify_k_hyperbolic(section_map, lam, sample_n=DEFAULT_SAMPLE_N, workers=1):
    """Certify that a manifold map makes the section K-hyperbolic.

    Drift branches (psi_0) must map Q_lambda into itself, keep every point
    in its strip and move z down on odd strips and up on even strips.
    Rectangle branches (psi_j, j >= 1) must map rectangles of R_lambda to
    rectangles of R_lambda and reverse their fibres.

    Parameters
    ----------
    section_map : reebcli.horseshoe.SectionMapModel
    lam : float
    sample_n : int, optional
        Samples per side of every domain
    workers : int, optional

    Returns
    -------
    reebcli.horseshoe.HyperbolicCertificate
    """
    _check_lambda(lam)
    if sample_n < 2:
        raise ValueError('invalid sample size: ' + str(sample_n))
    cert = HyperbolicCertificate(
        K_HYPERBOLIC,
        {'lambda': lam, 'sample_n': sample_n, 'model': section_map.name}
    )
    z_max = section_map.z_max
    _drift_conditions(cert, section_map.branches_of(DRIFT), lam, z_max, sample_n, workers)
    _rectangle_conditions(cert, section_map.branches_of(RECTANGLE), lam, z_max, sample_n, workers)
    logger.info('%s: K-hyperbolic certificate %s', section_map.name, 'passed' if cert.passed else 'failed')
    return cert


def verify_hyperbolic_bypass(section_map, lam, sample_n=DEFAULT_SAMPLE_N, workers=1):
    """Certify the rectangle structure of a bypass map.

    Drift branches (phi_0) satisfy the Q_lambda conditions of
    verify_k_hyperbolic. Rectangle branches (phi_ij) map subsets of X to
    subsets of Y, have domain and image as wide as their component of
    R_lambda, and reverse their fibres.

    Returns
    -------
    reebcli.horseshoe.HyperbolicCertificate
    """
    _check_lambda(lam)
    if sample_n < 2:
        raise ValueError('invalid sample size: ' + str(sample_n))
    cert = HyperbolicCertificate(
        HYPERBOLIC_BYPASS,
        {'lambda': lam, 'sample_n': sample_n, 'model': section_map.name}
    )
    z_max = section_map.z_max
    _drift_conditions(cert, section_map.branches_of(DRIFT), lam, z_max, sample_n, workers)
    rects = section_map.branches_of(RECTANGLE)
    def sample(b):
        xy = min([
            min(xy_margin(p, z_max), xy_margin(b.map(p), z_max, offset=math.pi))
            for p in b.domain.grid(sample_n)
        ])
        mismatch = 0.0
        for rect in [b.domain, b.image]:
            x_lo, x_hi, _, _ = rect.bounds
            lo, hi = component_bounds(r_component(0.5 * (x_lo + x_hi)), lam)
            mismatch = max(mismatch, abs(x_lo - lo) + abs(hi - x_hi))
        return xy, FULL_WIDTH_TOL - mismatch
    results = _map_branches(sample, rects, workers)
    cert.add(X_TO_Y, _worst([r[0] for r in results]))
    cert.add(FULL_WIDTH, _worst([r[1] for r in results]))
    _rectangle_conditions(cert, rects, lam, z_max, sample_n, workers)
    logger.info('%s: hyperbolic bypass certificate %s', section_map.name, 'passed' if cert.passed else 'failed')
    return cert


def _positive(name, value):
    if value <= 0:
        raise ParameterError('parameter ' + name + ' must be positive: ' + str(value), **{name: value})


def verify_dominated(section_map, omega, sample_n=DEFAULT_SAMPLE_N, workers=1):
    """Certify the cone and return time conditions of a dominated map.

    For a manifold map omega = (mu, nu, tau): fibres of domain and image lie
    in the nu-cones of the lines D_1 and D_2 of the branch, the branch maps
    the horizontal nu-cone into the mu-cone of D_2 (its inverse into the
    mu-cone of D_1), and return times differ from the chord period T(a_j) by
    less than tau.

    For a bypass map omega = (nu, tau, A, eta): the branch and its inverse
    map the vertical A-cone into the horizontal nu-cone, expand it by more
    than 1/eta, and return times are bounded by 8 tau.

    Parameters
    ----------
    section_map : reebcli.horseshoe.SectionMapModel
    omega : tuple
        (mu, nu, tau) or (nu, tau, A, eta)
    sample_n : int, optional
    workers : int, optional

    Returns
    -------
    reebcli.horseshoe.HyperbolicCertificate
    """
    omega = tuple(omega)
    rects = section_map.branches_of(RECTANGLE)
    for b in rects:
        if not b.has_differential:
            raise PreconditionError('branch ' + str(b.label) + ' without differential evaluator', branch=b.label)
    if len(omega) == 3:
        mu, nu, tau = omega
        for name, value in [('mu', mu), ('nu', nu), ('tau', tau)]:
            _positive(name, value)
        for b in rects:
            if b.period is None:
                raise PreconditionError('branch ' + str(b.label) + ' without chord period', branch=b.label)
        cert = HyperbolicCertificate(MANIFOLD_DOMINATION, {'mu': mu, 'nu': nu, 'tau': tau})
        horizontal = Cone.horizontal(nu)
        e1 = np.array([1.0, 0.0])
        def sample(b):
            fibres, cones, times = [], [], []
            for p in b.domain.grid(sample_n):
                M = b.jacobian(p)
                M_inv = np.linalg.inv(M)
                q = b.map(p)
                fibres.append(min(
                    _field(b.d_out, nu).at(q).margin(np.dot(M, e1)),
                    _field(b.d_in, nu).at(p).margin(np.dot(M_inv, e1))
                ))
                cones.append(min(
                    horizontal.image_margin(M, _field(b.d_out, mu).at(q)),
                    horizontal.image_margin(M_inv, _field(b.d_in, mu).at(p))
                ))
                times.append(tau - abs(b.time(p) - b.period))
            return min(fibres), min(cones), min(times)
        results = _map_branches(sample, rects, workers)
        cert.add(FIBRE_CONES, _worst([r[0] for r in results]))
        cert.add(CONE_IMAGES, _worst([r[1] for r in results]))
        cert.add(RETURN_TIME, _worst([r[2] for r in results]))
    elif len(omega) == 4:
        nu, tau, A, eta = omega
        for name, value in [('nu', nu), ('tau', tau), ('A', A), ('eta', eta)]:
            _positive(name, value)
        cert = HyperbolicCertificate(BYPASS_DOMINATION, {'nu': nu, 'tau': tau, 'A': A, 'eta': eta})
        horizontal = Cone.horizontal(nu)
        vertical = Cone.vertical(A)
        def sample(b):
            cones, stretch, times = [], [], []
            for p in b.domain.grid(sample_n):
                M = b.jacobian(p)
                M_inv = np.linalg.inv(M)
                cones.append(min(
                    vertical.image_margin(M, horizontal),
                    vertical.image_margin(M_inv, horizontal)
                ))
                stretch.append(min(vertical.min_stretch(M), vertical.min_stretch(M_inv)) - 1.0 / eta)
                times.append(8.0 * tau - b.time(p))
            return min(cones), min(stretch), min(times)
        results = _map_branches(sample, rects, workers)
        cert.add(CONE_IMAGES, _worst([r[0] for r in results]))
        cert.add(EXPANSION, _worst([r[1] for r in results]))
        cert.add(RETURN_TIME, _worst([r[2] for r in results]))
    else:
        raise ValueError('invalid domination parameters: ' + str(omega))
    logger.info('%s: %s certificate %s', section_map.name, cert.kind, 'passed' if cert.passed else 'failed')
    return cert


# ------------------------------------------------------------------------------
#
# Synthetic models
#
# ------------------------------------------------------------------------------

def _warp(t, w):
    return t + w * t * (1.0 - t)


def _dwarp(t, w):
    return 1.0 + w * (1.0 - 2.0 * t)


def _unwarp(g, w):
    if w == 0:
        return g
    return ((1.0 + w) - math.sqrt((1.0 + w) ** 2 - 4.0 * w * g)) / (2.0 * w)


def _swap_branch(label, dom, img, fiber_kind, warp, return_time, period=None):
    """Branch exchanging the roles of x and z between two boxes.

    The height in the domain determines the x-position in the image and the
    x-position in the domain the (reversed) height in the image, both
    distorted by the warp t -> t + w t (1 - t).
    """
    x0, x1, z0, z1 = dom
    X0, X1, Z0, Z1 = img
    def evaluate(p):
        tx = (p[0] - x0) / (x1 - x0)
        tz = (p[1] - z0) / (z1 - z0)
        return np.array([X0 + (X1 - X0) * _warp(tz, warp), Z1 - (Z1 - Z0) * _warp(tx, warp)])
    def differential(p):
        tx = (p[0] - x0) / (x1 - x0)
        tz = (p[1] - z0) / (z1 - z0)
        return np.array([
            [0.0, (X1 - X0) * _dwarp(tz, warp) / (z1 - z0)],
            [-(Z1 - Z0) * _dwarp(tx, warp) / (x1 - x0), 0.0]
        ])
    def inverse(q):
        tz = _unwarp((q[0] - X0) / (X1 - X0), warp)
        tx = _unwarp((Z1 - q[1]) / (Z1 - Z0), warp)
        return np.array([x0 + tx * (x1 - x0), z0 + tz * (z1 - z0)])
    def time(p):
        return return_time((p[0] - x0) / (x1 - x0), (p[1] - z0) / (z1 - z0))
    return SectionBranch(
        label,
        RECTANGLE,
        Rect.axis_aligned(x0, x1, z0, z1, fiber_kind=fiber_kind),
        Rect.axis_aligned(X0, X1, Z0, Z1, fiber_kind=fiber_kind),
        evaluate,
        differential=differential,
        inverse=inverse,
        return_time=time,
        period=period
    )


def _drift_branch(label, k, lam, z_max, drift):
    """Translation along the k-th strip of Q_lambda, upwards on even and
    downwards on odd strips.
    """
    sign = 1.0 if k % 2 == 0 else -1.0
    x_lo = k * math.pi - 0.5 * lam + INSET
    x_hi = k * math.pi + 0.5 * lam - INSET
    if sign > 0:
        z_lo, z_hi = -z_max + INSET, z_max - INSET - drift
    else:
        z_lo, z_hi = -z_max + INSET + drift, z_max - INSET
    return affine_branch(
        label,
        DRIFT,
        Rect.axis_aligned(x_lo, x_hi, z_lo, z_hi),
        np.identity(2),
        [0.0, sign * drift],
        strip=k,
        reverse=False
    )


def _component_box(k, lam, z_lo, z_hi):
    lo, hi = component_bounds(k, lam)
    return (lo + INSET, hi - INSET, z_lo, z_hi)


def _band(upper, idx, h, gap, z_max):
    lo = -z_max + gap + idx * (h + gap)
    if upper:
        return (-(lo + h), -lo)
    return (lo, lo + h)


def _check_synthetic(lam, warp, drift_scale, z_max, **kwargs):
    _check_lambda(lam)
    for name, value in kwargs.items():
        _positive(name, value)
    _positive('drift_scale', drift_scale)
    _positive('z_max', z_max)
    if not 0 <= warp <= MAX_WARP:
        raise ParameterError('warp ' + str(warp) + ' outside of [0, ' + str(MAX_WARP) + ']', warp=warp)


def synthetic_bypass_map(
    lam=DEFAULT_LAMBDA, nu=DEFAULT_NU, tau=DEFAULT_TAU, A=DEFAULT_A, eta=DEFAULT_ETA,
    warp=0.0, sigma_scale=1.0, drift_scale=1.0, z_max=Z_MAX
):
    """Synthetic bypass map phi that is a dominated hyperbolic bypass for
    the given constants.

    The map has three drift branches phi0_k on the strips of Q_lambda and
    four rectangle branches phi_ij from a band of the i-th component of X to
    a band of the (2 + j)-th component of R_lambda (the j-th component of Y).
    Rectangle branches stretch heights by sigma into widths, with sigma
    chosen large enough for the cone and expansion conditions.

    Parameters
    ----------
    lam : float
        Width parameter in (0, pi/8)
    nu, tau, A, eta : float
        Constants of the dominated bypass: cone widths nu < A, return time
        bound 8 tau and expansion 1 / eta, eta < 1
    warp : float, optional
        Nonlinear distortion of the rectangle branches in [0, 0.3]
    sigma_scale : float, optional
        Factor applied to the stretch
    drift_scale : float, optional
        Factor applied to the drift of the Q_lambda branches
    z_max : float, optional

    Returns
    -------
    reebcli.horseshoe.SectionMapModel
    """
    _check_synthetic(lam, warp, drift_scale, z_max, nu=nu, tau=tau, A=A, eta=eta, sigma_scale=sigma_scale)
    if eta >= 1:
        raise ParameterError('expansion constant eta must be smaller than 1: ' + str(eta), eta=eta)
    if A <= nu:
        raise ParameterError('cone width A must exceed nu: ' + str((A, nu)), A=A, nu=nu)
    width = 0.5 * math.pi - 2.0 * lam
    sigma = sigma_scale * max(
        SAFETY * math.sqrt(1.0 + A * A) / eta,
        SAFETY * math.sqrt(A / nu),
        width / (BAND_FRACTION * z_max)
    )
    h = width / sigma
    gap = (z_max - 2.0 * h) / 3.0
    if gap <= INSET:
        raise ParameterError('bands of height ' + str(h) + ' do not fit into the section', sigma=sigma)
    drift = drift_scale * BYPASS_DRIFT * z_max
    branches = [_drift_branch('phi0_' + str(k), k, lam, z_max, drift) for k in range(3)]
    for i in range(2):
        for j in range(2):
            z0, z1 = _band(i % 2 == 1, j, h, gap, z_max)
            Z0, Z1 = _band(j % 2 == 1, i, h, gap, z_max)
            branches.append(_swap_branch(
                'phi_%d%d' % (i, j),
                _component_box(i, lam, z0, z1),
                _component_box(2 + j, lam, Z0, Z1),
                VERTICAL,
                warp,
                lambda tx, tz: tau * (1.0 + tx)
            ))
    logger.debug('synthetic bypass map with stretch %g and bands of height %g', sigma, h)
    return SectionMapModel(
        branches,
        name='synthetic_bypass',
        lam=lam,
        z_max=z_max,
        tau=tau,
        parameters={
            'lambda': lam, 'nu': nu, 'tau': tau, 'A': A, 'eta': eta,
            'warp': warp, 'sigma': sigma, 'drift': drift
        }
    )


def synthetic_manifold_map(
    lam=DEFAULT_LAMBDA, periods=DEFAULT_PERIODS, mu=DEFAULT_MU, nu=DEFAULT_NU, tau=DEFAULT_TAU,
    warp=0.0, drift_scale=1.0, z_max=Z_MAX
):
    """Synthetic manifold map psi making the section K-hyperbolic with
    (mu, nu, tau)-dominated rectangle branches.

    The letter 'a' (and 'b') maps the component of Y on the same side as
    the first (second) component of X onto a thin full-height strip of that
    component of X. Letters return after their period T plus at most tau/2.

    Returns
    -------
    reebcli.horseshoe.SectionMapModel
    """
    periods = tuple(periods)
    if not 1 <= len(periods) <= len(LETTERS):
        raise ParameterError('synthetic manifold map supports one or two chords', periods=list(periods))
    for T in periods:
        _positive('period', T)
    _check_synthetic(lam, warp, drift_scale, z_max, mu=mu, nu=nu, tau=tau)
    width = 0.5 * math.pi - 2.0 * lam
    strip = STRIP_FRACTION * min(width, 4.0 * z_max * z_max * mu / (nu * width))
    drift = drift_scale * MANIFOLD_DRIFT * z_max
    branches = [_drift_branch('psi0_' + str(k), k, lam, z_max, drift) for k in range(3)]
    z_lo, z_hi = -z_max + INSET, z_max - INSET
    for n, T in enumerate(periods):
        center = 0.5 * math.pi * n + 0.25 * math.pi
        branches.append(_swap_branch(
            LETTERS[n],
            _component_box(2 + n, lam, z_lo, z_hi),
            (center - 0.5 * strip, center + 0.5 * strip, z_lo, z_hi),
            HORIZONTAL,
            warp,
            lambda tx, tz, T=T: T + 0.5 * tau * (2.0 * tz - 1.0),
            period=T
        ))
    return SectionMapModel(
        branches,
        name='synthetic_manifold',
        lam=lam,
        z_max=z_max,
        tau=tau,
        parameters={
            'lambda': lam, 'mu': mu, 'nu': nu, 'tau': tau, 'periods': list(periods),
            'warp': warp, 'strip': strip, 'drift': drift
        }
    )


class SyntheticParameters(object):
    """Constants and construction parameters of the synthetic pair of maps.

    Attributes
    ----------
    lam, nu, tau, A, eta, mu : float
        Certified constants
    periods : tuple(float)
    warp, sigma_scale, drift_scale : float
        Construction parameters, subject to perturbation
    z_max : float
    """
    def __init__(
        self, lam=DEFAULT_LAMBDA, nu=DEFAULT_NU, tau=DEFAULT_TAU, A=DEFAULT_A, eta=DEFAULT_ETA,
        mu=DEFAULT_MU, periods=DEFAULT_PERIODS, warp=0.0, sigma_scale=1.0, drift_scale=1.0, z_max=Z_MAX
    ):
        self.lam = lam
        self.nu = nu
        self.tau = tau
        self.A = A
        self.eta = eta
        self.mu = mu
        self.periods = tuple(periods)
        self.warp = warp
        self.sigma_scale = sigma_scale
        self.drift_scale = drift_scale
        self.z_max = z_max

    def __repr__(self):
        return 'SyntheticParameters(%r)' % self.to_dict()

    def perturbed(self, rng, eps):
        """Copy with construction parameters and periods perturbed by
        relative amounts of at most eps.
        """
        u = lambda: rng.uniform(-1.0, 1.0)
        return SyntheticParameters(
            lam=self.lam,
            nu=self.nu,
            tau=self.tau,
            A=self.A,
            eta=self.eta,
            mu=self.mu,
            periods=[T * (1.0 + eps * u()) for T in self.periods],
            warp=min(MAX_WARP, abs(self.warp + eps * u())),
            sigma_scale=self.sigma_scale * (1.0 + eps * u()),
            drift_scale=self.drift_scale * (1.0 + eps * u()),
            z_max=self.z_max
        )

    def to_dict(self):
        return {
            'lambda': self.lam,
            'nu': self.nu,
            'tau': self.tau,
            'A': self.A,
            'eta': self.eta,
            'mu': self.mu,
            'periods': list(self.periods),
            'warp': self.warp,
            'sigma_scale': self.sigma_scale,
            'drift_scale': self.drift_scale,
            'z_max': self.z_max
        }

    @staticmethod
    def from_dict(obj):
        return SyntheticParameters(
            lam=obj.get('lambda', DEFAULT_LAMBDA),
            nu=obj.get('nu', DEFAULT_NU),
            tau=obj.get('tau', DEFAULT_TAU),
            A=obj.get('A', DEFAULT_A),
            eta=obj.get('eta', DEFAULT_ETA),
            mu=obj.get('mu', DEFAULT_MU),
            periods=obj.get('periods', DEFAULT_PERIODS),
            warp=obj.get('warp', 0.0),
            sigma_scale=obj.get('sigma_scale', 1.0),
            drift_scale=obj.get('drift_scale', 1.0),
            z_max=obj.get('z_max', Z_MAX)
        )


def synthetic_models(params=None):
    """Pair (phi, psi) of synthetic bypass and manifold maps."""
    params = params if not params is None else SyntheticParameters()
    phi = synthetic_bypass_map(
        lam=params.lam, nu=params.nu, tau=params.tau, A=params.A, eta=params.eta,
        warp=params.warp, sigma_scale=params.sigma_scale, drift_scale=params.drift_scale,
        z_max=params.z_max
    )
    psi = synthetic_manifold_map(
        lam=params.lam, periods=params.periods, mu=params.mu, nu=params.nu, tau=params.tau,
        warp=params.warp, drift_scale=params.drift_scale, z_max=params.z_max
    )
    return phi, psi


def certify_maps(phi, psi, params, sample_n=DEFAULT_SAMPLE_N, workers=1):
    """The four certificates of a bypass and manifold map pair.

    Returns
    -------
    list(reebcli.horseshoe.HyperbolicCertificate)
    """
    return [
        verify_hyperbolic_bypass(phi, params.lam, sample_n=sample_n, workers=workers),
        verify_dominated(phi, (params.nu, params.tau, params.A, params.eta), sample_n=sample_n, workers=workers),
        verify_k_hyperbolic(psi, params.lam, sample_n=sample_n, workers=workers),
        verify_dominated(psi, (params.mu, params.nu, params.tau), sample_n=sample_n, workers=workers)
    ]


def certify_synthetic(params=None, sample_n=DEFAULT_SAMPLE_N, workers=1):
    params = params if not params is None else SyntheticParameters()
    phi, psi = synthetic_models(params)
    return certify_maps(phi, psi, params, sample_n=sample_n, workers=workers)


class StabilityReport(object):
    """Outcome of re-certifying perturbed synthetic models.

    Attributes
    ----------
    eps : float
    trials : int
    failures : list(dict)
        Trial index, perturbed parameters and failed conditions of every
        failing trial
    scope : string
    """
    def __init__(self, eps, trials, failures, seed):
        self.eps = eps
        self.trials = trials
        self.failures = failures
        self.seed = seed
        self.scope = 'parameter perturbations of the synthetic construction only'

    @property
    def passed(self):
        return len(self.failures) == 0

    def to_dict(self):
        return {
            'eps': self.eps,
            'trials': self.trials,
            'seed': self.seed,
            'passed': self.passed,
            'failures': self.failures,
            'scope': self.scope
        }


def stability_check(params=None, eps=0.01, trials=10, seed=0, sample_n=16, workers=1):
    """Re-certify randomly perturbed synthetic models with the constants of
    the unperturbed model.

    Returns
    -------
    reebcli.horseshoe.StabilityReport
    """
    if eps < 0:
        raise ParameterError('perturbation size must not be negative: ' + str(eps), eps=eps)
    params = params if not params is None else SyntheticParameters()
    rng = np.random.default_rng(seed)
    failures = []
    for trial in range(trials):
        perturbed = params.perturbed(rng, eps)
        try:
            failed = []
            for cert in certify_synthetic(perturbed, sample_n=sample_n, workers=workers):
                failed.extend([cert.kind + '.' + c for c in cert.failed])
        except ParameterError as ex:
            failed = ['construction: ' + ex.message]
        if failed:
            failures.append({'trial': trial, 'parameters': perturbed.to_dict(), 'failed': failed})
    logger.info('stability check eps=%g: %d of %d trials failed', eps, len(failures), trials)
    return StabilityReport(eps, trials, failures, seed)


# ------------------------------------------------------------------------------
#
# Words and fixed points
#
# ------------------------------------------------------------------------------

class CompositeMap(object):
    """Composite F_a of the branches along a word a = a_1 ... a_k: the bypass
    branch leading into a_1, then psi_{a_1}, the bypass branch from a_1 to
    a_2, then psi_{a_2}, and so on.

    Attributes
    ----------
    word : tuple(string)
    factors : list(reebcli.horseshoe.SectionBranch)
        Branches in order of application
    lam : float or None
        Restriction of the domain to R_lambda
    """
    def __init__(self, word, factors, lam=None, z_max=Z_MAX):
        self.word = tuple(word)
        self.factors = list(factors)
        self.lam = lam
        self.z_max = z_max

    def __repr__(self):
        return 'CompositeMap(%s)' % LETTER_SEPARATOR.join(self.word)

    @property
    def itinerary(self):
        return [b.label for b in self.factors]

    def run_extended(self, p):
        """Points p_0 = p, p_1, ..., p_n along the factors, without any
        domain restriction.
        """
        points = [np.asarray(p, dtype=float)]
        for b in self.factors:
            points.append(b.map(points[-1]))
        return points

    def run(self, p, tol=CONTAINS_TOL):
        """Points along the factors, or None if one of them leaves the
        domain of its factor.
        """
        p = np.asarray(p, dtype=float)
        if not self.lam is None and r_margin(p, self.lam, self.z_max) < -tol:
            return None
        points = [p]
        for b in self.factors:
            if not b.domain.contains(points[-1], tol=tol):
                return None
            points.append(b.map(points[-1]))
        return points

    def contains(self, p):
        return not self.run(p) is None

    def evaluate(self, p):
        points = self.run(p)
        if points is None:
            raise PreconditionError(
                'point outside of the domain of the composite map of ' + LETTER_SEPARATOR.join(self.word),
                point=list(p)
            )
        return points[-1]

    def return_time(self, p):
        """Accumulated return time along the factors."""
        points = self.run_extended(p)
        return sum([b.time(q) for b, q in zip(self.factors, points[:-1])])

    def differential(self, p):
        M = np.identity(2)
        for b, q in zip(self.factors, self.run_extended(p)[:-1]):
            M = np.dot(b.jacobian(q), M)
        return M

    def input_height(self, x, zeta):
        """Height z such that F(x, z) has height zeta, using the factors
        beyond their domains where necessary.
        """
        z0, z1 = self.factors[0].domain.bounds[2:]
        length = z1 - z0
        f = lambda z: self.run_extended((x, z))[-1][1] - zeta
        for ext in [0.0, 0.5 * length, length, 2.0 * length, 4.0 * length]:
            a, b = z0 - ext, z1 + ext
            fa, fb = f(a), f(b)
            if fa == 0:
                return a
            if fb == 0:
                return b
            if fa * fb < 0:
                return brentq(f, a, b, xtol=1e-15, rtol=4.0 * np.finfo(float).eps)
        raise HypothesisError(
            'composite map does not cross height ' + str(zeta),
            word=list(self.word),
            x=x
        )

    def is_empty(self, sample_n=8):
        """Test whether the domain misses every sampled crossing of the first
        domain with heights of the last image.
        """
        if not self.factors:
            return False
        x_lo, x_hi = self.factors[0].domain.bounds[:2]
        z_lo, z_hi = self.factors[-1].image.bounds[2:]
        for x in np.linspace(x_lo, x_hi, sample_n):
            for zeta in np.linspace(z_lo, z_hi, sample_n):
                try:
                    z = self.input_height(x, zeta)
                except HypothesisError:
                    continue
                if self.contains((x, z)):
                    return False
        return True


def _letters(word):
    if hasattr(word, 'letters'):
        return list(word.letters)
    if isinstance(word, str):
        return word.split(LETTER_SEPARATOR) if LETTER_SEPARATOR in word else list(word)
    return list(word)


def compose_word_map(phi, psi, word, lam=None):
    """Composite map of a word over the rectangle branches of psi.

    The bypass branch in front of psi_{a_i} is the unique rectangle branch
    of phi whose domain meets the image of psi_{a_(i-1)} (cyclically) and
    whose image meets the domain of psi_{a_i}.

    Parameters
    ----------
    phi, psi : reebcli.horseshoe.SectionMapModel
    word : sequence of string, string or reebcli.symbolic_orbits.CyclicWord
    lam : float, optional
        Defaults to the width parameter of phi

    Returns
    -------
    reebcli.horseshoe.CompositeMap
    """
    letters = _letters(word)
    lam = lam if not lam is None else phi.lam
    chords = []
    for a in letters:
        b = psi.branch(a)
        if b.kind != RECTANGLE:
            raise ValueError('invalid letter: ' + str(a))
        chords.append(b)
    factors = []
    for i, cur in enumerate(chords):
        prev = chords[i - 1]
        candidates = [
            b for b in phi.branches_of(RECTANGLE)
            if b.domain.overlaps(prev.image) and b.image.overlaps(cur.domain)
        ]
        if len(candidates) != 1:
            raise HypothesisError(
                'no unique bypass branch from ' + prev.label + ' to ' + cur.label,
                candidates=[b.label for b in candidates]
            )
        factors.extend([candidates[0], cur])
    return CompositeMap(letters, factors, lam=lam, z_max=phi.z_max)


class FixedPoint(object):
    """Fixed point of a composite map.

    Attributes
    ----------
    word : tuple(string)
    orbit : list(numpy.array)
        Fixed point followed by its images under the factors
    period : float
        Accumulated return time
    certificate : reebcli.horseshoe.HyperbolicCertificate
    cz : int or None
    window : (float, float) or None
    """
    def __init__(self, word, orbit, period, certificate, cz=None, window=None):
        self.word = tuple(word)
        self.orbit = orbit
        self.period = period
        self.certificate = certificate
        self.cz = cz
        self.window = window

    def __repr__(self):
        return 'FixedPoint(%s, (%.12f, %.12f))' % (LETTER_SEPARATOR.join(self.word), self.point.x, self.point.z)

    @property
    def point(self):
        return SectionPoint(float(self.orbit[0][0]), float(self.orbit[0][1]))

    @property
    def in_window(self):
        if self.window is None:
            return None
        return self.window[0] <= self.period <= self.window[1]

    def to_dict(self):
        return {
            'word': list(self.word),
            'x': self.point.x,
            'z': self.point.z,
            'period': self.period,
            'cz_index': self.cz,
            'window': list(self.window) if not self.window is None else None,
            'in_window': self.in_window,
            'orbit': [list(map(float, p)) for p in self.orbit],
            'certificate': self.certificate.to_dict()
        }


def _shoot_fixed_point(F, seeds):
    """Multiple shooting for the closed orbit p_(i+1) = f_i(p_i) of the
    factors, or None if Newton's method fails to converge.
    """
    n = len(F.factors)
    def residual(X):
        P = X.reshape((n, 2))
        return np.concatenate([F.factors[i].map(P[i]) - P[(i + 1) % n] for i in range(n)])
    def jacobian(X):
        P = X.reshape((n, 2))
        J = np.zeros((2 * n, 2 * n))
        for i in range(n):
            j = (i + 1) % n
            J[2 * i:2 * i + 2, 2 * i:2 * i + 2] += F.factors[i].jacobian(P[i])
            J[2 * i:2 * i + 2, 2 * j:2 * j + 2] -= np.identity(2)
        return J
    x0 = np.concatenate([np.asarray(s, dtype=float) for s in seeds])
    try:
        X, _, ier, _ = fsolve(residual, x0, fprime=jacobian, xtol=NEWTON_TOL, full_output=True)
        error = np.max(np.abs(residual(X)))
    except ReebError:
        return None
    if ier != 1 and error > NEWTON_TOL:
        return None
    if not np.isfinite(error) or error > 10.0 * NEWTON_TOL:
        return None
    return X[:2]


def _cross_iteration(F):
    """Fixed point of the map (x, zeta) -> (F(x, z).x, z) where z is the
    input height of (x, zeta); contracting under the fixed point
    hypotheses.
    """
    x_lo, x_hi = F.factors[0].domain.bounds[:2]
    z_lo, z_hi = F.factors[-1].image.bounds[2:]
    x, zeta = 0.5 * (x_lo + x_hi), 0.5 * (z_lo + z_hi)
    for _ in range(MAX_GRAPH_ITERATIONS):
        z = F.input_height(x, zeta)
        x_next = F.run_extended((x, z))[-1][0]
        step = max(abs(x_next - x), abs(z - zeta))
        x, zeta = x_next, z
        if step < GRAPH_TOL:
            break
    return np.array([x, F.input_height(x, zeta)])


def _certify_crossing(F, A, nu, expansion, grid_n):
    cert = HyperbolicCertificate(
        FIXED_POINT,
        {'word': list(F.word), 'A': A, 'nu': nu, 'expansion': expansion, 'grid_n': grid_n}
    )
    x_lo, x_hi = F.factors[0].domain.bounds[:2]
    z_lo, z_hi = F.factors[-1].image.bounds[2:]
    vertical = Cone.vertical(A)
    horizontal = Cone.horizontal(nu)
    invariance, v_stretch, h_stretch, contraction = [], [], [], []
    for x in np.linspace(x_lo, x_hi, grid_n):
        for zeta in np.linspace(z_lo, z_hi, grid_n):
            z = F.input_height(x, zeta)
            M = F.differential((x, z))
            if abs(M[1, 1]) < np.finfo(float).eps:
                raise HypothesisError('composite map does not stretch heights', word=list(F.word), x=x, z=z)
            M_inv = np.linalg.inv(M)
            invariance.append(min(
                vertical.image_margin(M, vertical),
                horizontal.image_margin(M_inv, horizontal)
            ))
            v_stretch.append(min([abs(np.dot(M, r)[1]) / abs(r[1]) for r in vertical.rays()]) - expansion)
            h_stretch.append(min([abs(np.dot(M_inv, r)[0]) / abs(r[0]) for r in horizontal.rays()]) - expansion)
            a, b, c, d = M[0, 0], M[0, 1], M[1, 0], M[1, 1]
            cross = np.array([[a - b * c / d, b / d], [-c / d, 1.0 / d]])
            contraction.append(1.0 - np.linalg.norm(cross, 2))
    cert.add(CONE_INVARIANCE, min(invariance))
    cert.add(VERTICAL_STRETCH, min(v_stretch))
    cert.add(HORIZONTAL_STRETCH, min(h_stretch))
    cert.add(GRAPH_CONTRACTION, min(contraction))
    return cert


def unique_fixed_point(F, cones=None, expansion=DEFAULT_EXPANSION, grid_n=DEFAULT_GRID_N, seeds=0, seed=0):
    """Unique fixed point of a composite map.

    The hypotheses are checked on a grid of pairs (x, zeta) of positions in
    the first domain and heights of the last image: the vertical A-cone is
    invariant under dF (the horizontal nu-cone under its inverse), heights
    stretch by at least the expansion a > 2 along vertical cones (widths
    along horizontal cones under the inverse), and the induced graph
    transform contracts. The fixed point is then located by Newton's method
    on the closed orbit through the factors seeded at the domain centres,
    with the graph transform iteration as fallback.

    Parameters
    ----------
    F : reebcli.horseshoe.CompositeMap
    cones : (float, float), optional
        Cone widths (A, nu)
    expansion : float, optional
    grid_n : int, optional
    seeds : int, optional
        Number of additional random seeds whose solutions must agree
    seed : int, optional
        Random seed

    Returns
    -------
    reebcli.horseshoe.FixedPoint
    """
    if expansion <= 2:
        raise ParameterError('expansion must exceed 2: ' + str(expansion), expansion=expansion)
    if not F.factors:
        raise PreconditionError('composite map of the empty word has no isolated fixed point')
    A, nu = cones if not cones is None else (DEFAULT_A, DEFAULT_NU)
    cert = _certify_crossing(F, A, nu, expansion, grid_n)
    if not cert.passed:
        raise HypothesisError(
            'fixed point hypotheses fail for ' + LETTER_SEPARATOR.join(F.word) + ': ' + ', '.join(cert.failed),
            word=list(F.word),
            certificate=cert.to_dict()
        )
    point = _shoot_fixed_point(F, [b.domain.center for b in F.factors])
    if point is None:
        logger.info('Newton iteration failed for %s, falling back to graph transform', LETTER_SEPARATOR.join(F.word))
        start = _cross_iteration(F)
        point = _shoot_fixed_point(F, F.run_extended(start)[:-1])
        if point is None:
            raise NumericalError('fixed point of ' + LETTER_SEPARATOR.join(F.word) + ' not found', word=list(F.word))
    orbit = F.run(point, tol=DOMAIN_TOL)
    if orbit is None:
        raise HypothesisError(
            'fixed point of ' + LETTER_SEPARATOR.join(F.word) + ' outside of the composite domain',
            word=list(F.word),
            point=point.tolist()
        )
    rng = np.random.default_rng(seed)
    for _ in range(seeds):
        starts = [b.domain.point(rng.uniform(), rng.uniform()) for b in F.factors]
        other = _shoot_fixed_point(F, starts)
        if other is None or np.max(np.abs(other - point)) > SEED_TOL:
            raise NumericalError(
                'fixed points of ' + LETTER_SEPARATOR.join(F.word) + ' from different seeds disagree',
                word=list(F.word),
                point=point.tolist(),
                other=other.tolist() if not other is None else None
            )
    period = F.return_time(point)
    logger.debug('fixed point of %s at (%.12f, %.12f), period %g', LETTER_SEPARATOR.join(F.word), point[0], point[1], period)
    return FixedPoint(F.word, orbit, period, cert)


def fixed_point_table(
    phi, psi, K, cones=None, mu_tildes=None, expansion=DEFAULT_EXPANSION,
    grid_n=DEFAULT_GRID_N, seeds=0, seed=0, workers=1
):
    """Fixed points of the composite maps of all cyclic words with action
    smaller than K.

    Letters are the rectangle branches of psi with their chord periods and
    word indices from mu_tildes (1 for letters without entry). Period windows
    use the return time tolerance of psi.

    Returns
    -------
    list(reebcli.horseshoe.FixedPoint)
    """
    mu_tildes = mu_tildes if not mu_tildes is None else dict()
    chords = []
    for label in psi.letters:
        period = psi.branch(label).period
        if period is None:
            raise PreconditionError('letter ' + str(label) + ' without chord period', branch=label)
        chords.append(ChordDatum(label, period, mu_tildes.get(label, 1)))
    records = enumerate_orbits(chords, K, tau=psi.tau if not psi.tau is None else 0.0)
    def solve(record):
        F = compose_word_map(phi, psi, record.word)
        fp = unique_fixed_point(F, cones=cones, expansion=expansion, grid_n=grid_n, seeds=seeds, seed=seed)
        fp.cz = record.cz
        fp.window = record.period_window
        if not fp.in_window:
            logger.warning('period %g of %s outside of %s', fp.period, str(record.word), str(fp.window))
        return fp
    if workers > 1 and len(records) > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            points = list(executor.map(solve, records))
    else:
        points = [solve(r) for r in records]
    logger.info('%d fixed points for action bound %g', len(points), K)
    return points


def write_fixed_points_csv(points, filename):
    with open(filename, 'w', newline='') as f:
        writer = csv.writer(f)
        writer.writerow(FIXED_POINT_COLUMNS)
        for fp in points:
            writer.writerow([
                LETTER_SEPARATOR.join(fp.word),
                repr(fp.point.x),
                repr(fp.point.z),
                repr(fp.period),
                fp.cz if not fp.cz is None else ''
            ])


def fixed_points_to_dict(points):
    return {'fixedPoints': [fp.to_dict() for fp in points]}


# ------------------------------------------------------------------------------
#
# Drift through Q_lambda
#
# ------------------------------------------------------------------------------

class EscapeReport(object):
    """Heights of the drift iterates of a point of Q_lambda.

    Attributes
    ----------
    strip : int
    scheme : string
        'forward' or 'backward'
    heights : list(float)
    exit_iteration : int or None
        Number of steps before the iterate left the drift domains, None if
        it did not leave within the iteration bound
    violations : list(dict)
    """
    def __init__(self, strip, scheme, heights, exit_iteration, violations):
        self.strip = strip
        self.scheme = scheme
        self.heights = heights
        self.exit_iteration = exit_iteration
        self.violations = violations

    @property
    def monotone(self):
        return len(self.violations) == 0

    def to_dict(self):
        return {
            'strip': self.strip,
            'scheme': self.scheme,
            'heights': self.heights,
            'exitIteration': self.exit_iteration,
            'violations': self.violations,
            'monotone': self.monotone
        }


def _drift_preimage(section_map, q):
    for b in section_map.branches_of(DRIFT):
        if b.image.contains(q):
            return b, b.preimage(q)
    return None, None


def q_lambda_escape(phi, psi, p, max_iter=DEFAULT_ESCAPE_ITER, lam=None):
    """Follow a point of Q_lambda under the drift branches until it leaves.

    Points in the upper half of an odd strip or the lower half of an even
    strip are followed backwards (preimages under psi and phi in turn),
    all others forwards (images under phi and psi in turn). Heights must
    change strictly monotonically and the iterates must stay in the strip.

    Returns
    -------
    reebcli.horseshoe.EscapeReport
    """
    lam = lam if not lam is None else phi.lam
    _check_lambda(lam)
    z_max = phi.z_max
    q = np.asarray(p, dtype=float)
    if q_margin(q, lam, z_max) < 0:
        raise PreconditionError('point outside of Q_lambda: ' + format_point(p), point=list(p))
    k = q_strip(q[0])
    odd = k % 2 == 1
    backward = (odd and q[1] >= 0) or (not odd and q[1] <= 0)
    if backward:
        maps = [psi, phi]
        direction = 1.0 if odd else -1.0
    else:
        maps = [phi, psi]
        direction = -1.0 if odd else 1.0
    heights = [float(q[1])]
    violations = []
    exit_iteration = None
    for i in range(max_iter):
        section_map = maps[i % 2]
        if backward:
            b, q_next = _drift_preimage(section_map, q)
        else:
            b = section_map.locate(q, kind=DRIFT)
            q_next = b.map(q) if not b is None else None
        if b is None:
            exit_iteration = i
            break
        if q_strip(q_next[0]) != k or q_margin(q_next, lam, z_max) < 0:
            violations.append({'iteration': i, 'reason': 'strip', 'point': q_next.tolist()})
        if direction * (q_next[1] - q[1]) <= 0:
            violations.append({'iteration': i, 'reason': 'monotone', 'point': q_next.tolist()})
        heights.append(float(q_next[1]))
        q = q_next
    return EscapeReport(k, 'backward' if backward else 'forward', heights, exit_iteration, violations)


# ------------------------------------------------------------------------------
#
# Maps induced by the flow
#
# ------------------------------------------------------------------------------

class _FlowReturn(object):
    """Return map of the boundary surface near the start of a chord."""
    def __init__(self, model, chord, settings):
        self.model = model
        self.chord = chord
        self.settings = settings
        self.section = Section(PLANE_Y, model.box.y_surface, orientation=1)
        self._cache = dict()

    def _shoot(self, p):
        key = (float(p[0]), float(p[1]))
        if not key in self._cache:
            p0 = (key[0], self.model.box.y_surface, key[1])
            result = first_return(self.model, p0, self.section, self.settings)
            if isinstance(result, Escape):
                raise NumericalError(
                    'trajectory near chord ' + self.chord.label + ' escapes through ' + result.face,
                    point=list(p0)
                )
            point, t = result
            self._cache[key] = (np.array([point.x, point.z - TWO_PI * self.chord.winding]), t)
        return self._cache[key]

    def __call__(self, p):
        return self._shoot(p)[0]

    def time(self, p):
        return self._shoot(p)[1]


def chord_return_map(model, chords, settings=None, radius=RETURN_MAP_RADIUS, lam=None):
    """Section map of the return to the boundary surface near the chords.

    Every chord contributes one rectangle branch on a square of half size
    radius around its start point (x, z), mapped by the first return of the
    Reeb flow with the chord's z-lift removed.

    Returns
    -------
    reebcli.horseshoe.SectionMapModel
    """
    settings = settings if not settings is None else FlowSettings()
    branches = []
    labels = set()
    for i, chord in enumerate(chords):
        label = chord.label if not chord.label in labels else chord.label + '_' + str(i)
        labels.add(label)
        flow = _FlowReturn(model, chord, settings)
        domain = Rect.axis_aligned(
            chord.start.x - radius,
            chord.start.x + radius,
            chord.start.z - radius,
            chord.start.z + radius
        )
        try:
            image = domain.mapped(flow, reverse=True)
        except ValueError as ex:
            raise NumericalError('image of the domain of chord ' + label + ' is not a rectangle: ' + str(ex), chord=label)
        branches.append(SectionBranch(
            label,
            RECTANGLE,
            domain,
            image,
            flow,
            return_time=flow.time,
            period=chord.period
        ))
    return SectionMapModel(branches, name='chord_return', lam=lam, tau=None)
