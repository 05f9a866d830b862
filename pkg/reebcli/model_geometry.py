"""Explicit contact forms of the bypass models and their Reeb vector fields.

Every model in this module is a member of the single family

    alpha = g(x, y) dx + f(x) dy + (1 + K(x) l(y) m(z)) cos(x) dz

in chart coordinates (x, y, z). The standard form is f = sin, g = 0, K = 0.
The perturbed forms add a convexity profile l along the dividing curves
selected by the cut-off sum K, the bypass adapted form switches the
perturbation off in bands of z selected by m, and the solid torus forms
replace sin by a slope profile f and add a shear term g. All partial
derivatives are available in closed form, so the Reeb field is evaluated as
curl(alpha) / (alpha . curl(alpha)).
"""

import json
import logging
import math
from collections import namedtuple

import numpy as np

from reebcli.errors import DomainError, SingularityError, format_point


logger = logging.getLogger(__name__)


# ------------------------------------------------------------------------------
#
# Constants
#
# ------------------------------------------------------------------------------

"""Profile families."""
CUTOFF_K = 'cutoff_k'
CONVEX_L = 'convex_l'
CUTOFF_M = 'cutoff_m'
SLOPE_F = 'slope_f'
SHEAR_G = 'shear_g'

PROFILE_FAMILIES = [CUTOFF_K, CONVEX_L, CUTOFF_M, SLOPE_F, SHEAR_G]

"""Model variants."""
STANDARD = 'Standard'
ALPHA_P = 'ThickenedPerturbed_alpha_p'
ALPHA_B = 'BypassAdapted_alpha_b'
TORUS = 'SolidTorus_alpha'
TORUS_P = 'SolidTorus_alpha_p'
TORUS_B = 'SolidTorus_alpha_b'

VARIANTS = [STANDARD, ALPHA_P, ALPHA_B, TORUS, TORUS_P, TORUS_B]

# Short names accepted on the command line
VARIANT_ALIASES = {
    'standard': STANDARD,
    'alpha_p': ALPHA_P,
    'alpha_b': ALPHA_B,
    'torus': TORUS,
    'torus_p': TORUS_P,
    'torus_b': TORUS_B
}

"""Bypass configurations of the alpha_b model."""
THREE_COMPONENTS = 'three_components'
TRIVIAL = 'trivial'
OVERTWISTED = 'overtwisted'

BYPASS_CONFIGURATIONS = [THREE_COMPONENTS, TRIVIAL, OVERTWISTED]

"""Default profile parameters."""
# Plateau and support half-widths of the cut-off k around a dividing curve
K_PLATEAU = 0.35
K_SUPPORT = 0.55
# Convexity profile l(y) = eps (cosh(beta y) - 1)
L_AMPLITUDE = 0.01
L_RATE = 2.0
# Half-width of the band where m vanishes and of its transition layer
M_PLATEAU = 0.1
M_SUPPORT = 0.2
# Slope profile equals sin on |x - k pi| <= F_INNER and +/-1 beyond F_OUTER
F_INNER = 0.3
F_OUTER = 0.6
# Shear term g supported near x = -3 pi / 4
G_AMPLITUDE = 0.05
G_PLATEAU = 0.05
G_SUPPORT = 0.15

"""Default chart boxes."""
# Interval I_b of the thickened surface chart
IB_MIN = -3.0 * math.pi / 4.0
IB_MAX = 11.0 * math.pi / 4.0
# Half width of the neighbourhood U_0 of a dividing curve
U0_HALF_WIDTH = math.pi / 4.0
# Half height z_max of the section interval I_max
Z_MAX = 0.1
# y-level of the boundary surface S_Z
Y_SURFACE = 1.0
# Solid torus: number of dividing curves and boundary margin
TORUS_N = 4
TORUS_ETA = 0.3
# z-level of the second attaching arc strand in the trivial and overtwisted
# configurations
BYPASS_Z1 = 1.0

# Contact volumes below this value are treated as singular
SINGULAR_VOLUME = 1e-12
# Tolerance for box membership of points produced by event localization
BOX_TOLERANCE = 1e-9
# Circumference of the S^1 factor
TWO_PI = 2.0 * math.pi


# ------------------------------------------------------------------------------
#
# Smooth step
#
# ------------------------------------------------------------------------------

def _sigma(t):
    """exp(-1/t) for t > 0 and 0 otherwise, with its derivative."""
    if t <= 0.0:
        return 0.0, 0.0
    value = math.exp(-1.0 / t)
    return value, value / (t * t)


def smooth_step(t):
    """Smooth monotone step s(t) = sigma(t) / (sigma(t) + sigma(1 - t)).

    The step is 0 for t <= 0, 1 for t >= 1, and C-infinity everywhere.

    Parameters
    ----------
    t : float

    Returns
    -------
    (float, float)
        Value s(t) and derivative s'(t)
    """
    a, da = _sigma(t)
    b, db = _sigma(1.0 - t)
    denom = a + b
    # a and b never vanish together
    value = a / denom
    derivative = (da * b + a * db) / (denom * denom)
    return value, derivative


# ------------------------------------------------------------------------------
#
# Profiles
#
# ------------------------------------------------------------------------------

class BumpProfile(object):
    """Parameterized one-variable profile function. The family determines the
    variable the profile acts on: x for cutoff_k, slope_f and shear_g, y for
    convex_l, and z for cutoff_m. The shear profile additionally depends on
    y through the step s(2y).

    Attributes
    ----------
    family : string
        One of PROFILE_FAMILIES
    center : float
        Center of the plateau (or the minimum of convex_l)
    plateau : float
        Plateau half-width
    support : float
        Support half-width (end of the transition layer)
    amplitude : float
        Amplitude factor
    rate : float
        Growth rate beta of convex_l (ignored by the other families)
    """
    def __init__(self, family, center=0.0, plateau=0.0, support=1.0, amplitude=1.0, rate=None):
        """Initialize and validate the profile parameters.

        Parameters
        ----------
        family : string
        center : float, optional
        plateau : float, optional
        support : float, optional
        amplitude : float, optional
        rate : float, optional
        """
        if not family in PROFILE_FAMILIES:
            raise ValueError('invalid profile family: ' + str(family))
        if family != CONVEX_L:
            if plateau < 0 or support <= plateau:
                raise ValueError('invalid plateau/support: ' + str((plateau, support)))
        if amplitude <= 0:
            raise ValueError('invalid amplitude: ' + str(amplitude))
        if family == CONVEX_L:
            rate = L_RATE if rate is None else rate
            if rate <= 0:
                raise ValueError('invalid rate: ' + str(rate))
        if family == CUTOFF_K and amplitude > 1.0:
            raise ValueError('invalid cut-off amplitude: ' + str(amplitude))
        self.family = family
        self.center = float(center)
        self.plateau = float(plateau)
        self.support = float(support)
        self.amplitude = float(amplitude)
        self.rate = None if rate is None else float(rate)

    def __repr__(self):
        return '%s(center=%g, plateau=%g, support=%g, amplitude=%g)' % (
            self.family, self.center, self.plateau, self.support, self.amplitude
        )

    def _bump(self, t):
        """Plateau bump centred at center: 1 near the center, 0 beyond the
        support. Returns value and derivative with respect to t.
        """
        u = t - self.center
        width = self.support - self.plateau
        s, ds = smooth_step((abs(u) - self.plateau) / width)
        sign = 1.0 if u >= 0 else -1.0
        return 1.0 - s, -ds * sign / width

    def evaluate(self, t, y=None):
        """Evaluate the profile and its derivative.

        Parameters
        ----------
        t : float
            Value of the profile variable
        y : float, optional
            Second variable of the shear profile

        Returns
        -------
        (float, float)
            Profile value and derivative with respect to t (for the shear
            profile: value and derivative with respect to y)
        """
        if self.family == CUTOFF_K:
            value, derivative = self._bump(t)
            return self.amplitude * value, self.amplitude * derivative
        elif self.family == CONVEX_L:
            u = self.rate * (t - self.center)
            return (
                self.amplitude * (math.cosh(u) - 1.0),
                self.amplitude * self.rate * math.sinh(u)
            )
        elif self.family == CUTOFF_M:
            # Signed distance to the band center on the circle of length 2 pi
            u = (t - self.center + math.pi) % TWO_PI - math.pi
            width = self.support - self.plateau
            s, ds = smooth_step((abs(u) - self.plateau) / width)
            sign = 1.0 if u >= 0 else -1.0
            return s, ds * sign / width
        elif self.family == SLOPE_F:
            return self._slope(t)
        else:
            bump, _ = self._bump(t)
            s, ds = smooth_step(2.0 * y)
            return self.amplitude * bump * s, self.amplitude * bump * 2.0 * ds

    def _slope(self, x):
        """Slope profile: sin(x) near the multiples of pi, the sign of sin(x)
        on the plateaus in between.
        """
        k = round(x / math.pi)
        u = x - k * math.pi
        sin_x = math.sin(x)
        if u == 0.0:
            return sin_x, math.cos(x)
        target = (1.0 if k % 2 == 0 else -1.0) * (1.0 if u > 0 else -1.0)
        width = self.support - self.plateau
        w, dw = smooth_step((abs(u) - self.plateau) / width)
        dw = dw * (1.0 if u > 0 else -1.0) / width
        value = sin_x + w * (target - sin_x)
        derivative = math.cos(x) * (1.0 - w) + dw * (target - sin_x)
        return value, derivative

    def second_derivative_at_center(self):
        """Second derivative of convex_l at its minimum, l''(center).

        Returns
        -------
        float
        """
        if self.family != CONVEX_L:
            raise ValueError('invalid family for l\'\': ' + str(self.family))
        return self.amplitude * self.rate * self.rate

    def to_dict(self):
        """Dictionary serialization of the profile.

        Returns
        -------
        dict
        """
        obj = {
            'family': self.family,
            'center': self.center,
            'plateau': self.plateau,
            'support': self.support,
            'amplitude': self.amplitude
        }
        if not self.rate is None:
            obj['rate'] = self.rate
        return obj

    @staticmethod
    def from_dict(obj):
        """Create profile from its dictionary serialization.

        Parameters
        ----------
        obj : dict

        Returns
        -------
        reebcli.model_geometry.BumpProfile
        """
        return BumpProfile(
            obj['family'],
            center=obj.get('center', 0.0),
            plateau=obj.get('plateau', 0.0),
            support=obj.get('support', 1.0),
            amplitude=obj.get('amplitude', 1.0),
            rate=obj.get('rate')
        )


# ------------------------------------------------------------------------------
#
# Models
#
# ------------------------------------------------------------------------------

"""Point in chart coordinates."""
ChartPoint = namedtuple('ChartPoint', ['x', 'y', 'z'])


class ModelBox(object):
    """Chart bounds of a contact model.

    Attributes
    ----------
    x_min, x_max : float
    y_min, y_max : float
    z_min, z_max : float
        Bounds of the z-interval. Ignored for membership tests when z is the
        lift of an S^1 coordinate.
    z_periodic : bool
        True if z is the lift of an S^1 coordinate of circumference 2 pi
    y_surface : float
        y-level of the boundary surface S_Z
    n : int
        Number of dividing curves (solid torus) or extra components
    eta : float
        Boundary margin of the solid torus chart
    """
    def __init__(
        self, x_min, x_max, y_min=-1.0, y_max=1.0, z_min=-Z_MAX, z_max=Z_MAX,
        z_periodic=True, y_surface=Y_SURFACE, n=None, eta=None
    ):
        if not x_min < x_max or not y_min < y_max or not z_min < z_max:
            raise ValueError('invalid box bounds: ' + str((x_min, x_max, y_min, y_max, z_min, z_max)))
        if not y_min <= y_surface <= y_max:
            raise ValueError('invalid surface level: ' + str(y_surface))
        self.x_min = float(x_min)
        self.x_max = float(x_max)
        self.y_min = float(y_min)
        self.y_max = float(y_max)
        self.z_min = float(z_min)
        self.z_max = float(z_max)
        self.z_periodic = bool(z_periodic)
        self.y_surface = float(y_surface)
        self.n = n
        self.eta = eta

    def contains(self, p, tol=BOX_TOLERANCE):
        """Test whether a point lies inside the box (up to tolerance).

        Parameters
        ----------
        p : sequence of float
            Chart point (x, y, z)
        tol : float, optional

        Returns
        -------
        bool
        """
        x, y, z = p[0], p[1], p[2]
        if x < self.x_min - tol or x > self.x_max + tol:
            return False
        if y < self.y_min - tol or y > self.y_max + tol:
            return False
        if not self.z_periodic and (z < self.z_min - tol or z > self.z_max + tol):
            return False
        return True

    def faces(self):
        """List of box faces as (name, coordinate index, value, outward sign).

        Returns
        -------
        list((string, int, float, int))
        """
        result = [
            ('x_min', 0, self.x_min, -1),
            ('x_max', 0, self.x_max, 1),
            ('y_min', 1, self.y_min, -1),
            ('y_max', 1, self.y_max, 1)
        ]
        if not self.z_periodic:
            result.append(('z_min', 2, self.z_min, -1))
            result.append(('z_max', 2, self.z_max, 1))
        return result

    def to_dict(self):
        obj = {
            'x_min': self.x_min,
            'x_max': self.x_max,
            'y_min': self.y_min,
            'y_max': self.y_max,
            'z_min': self.z_min,
            'z_max': self.z_max,
            'z_periodic': self.z_periodic,
            'y_surface': self.y_surface
        }
        if not self.n is None:
            obj['n'] = self.n
        if not self.eta is None:
            obj['eta'] = self.eta
        return obj

    @staticmethod
    def from_dict(obj):
        return ModelBox(
            obj['x_min'],
            obj['x_max'],
            y_min=obj.get('y_min', -1.0),
            y_max=obj.get('y_max', 1.0),
            z_min=obj.get('z_min', -Z_MAX),
            z_max=obj.get('z_max', Z_MAX),
            z_periodic=obj.get('z_periodic', True),
            y_surface=obj.get('y_surface', Y_SURFACE),
            n=obj.get('n'),
            eta=obj.get('eta')
        )


class ContactModel(object):
    """Parameterized explicit contact form. Instances are immutable after
    construction.

    Attributes
    ----------
    variant : string
        One of VARIANTS
    box : reebcli.model_geometry.ModelBox
        Chart bounds
    profiles : dict(string: reebcli.model_geometry.BumpProfile)
        Profiles by role name. All cutoff_k profiles are summed into K, all
        cutoff_m profiles are multiplied into m.
    """
    def __init__(self, variant, box, profiles=None):
        """Initialize the model and group its profiles by family.

        Parameters
        ----------
        variant : string
        box : reebcli.model_geometry.ModelBox
        profiles : dict, optional
        """
        if not variant in VARIANTS:
            raise ValueError('invalid variant: ' + str(variant))
        self.variant = variant
        self.box = box
        self.profiles = dict(profiles) if not profiles is None else dict()
        # Group profiles by family. Role names are sorted for a deterministic
        # summation order.
        by_family = dict([(f, []) for f in PROFILE_FAMILIES])
        for role in sorted(self.profiles):
            prof = self.profiles[role]
            by_family[prof.family].append(prof)
        for family in [CONVEX_L, SLOPE_F, SHEAR_G]:
            if len(by_family[family]) > 1:
                raise ValueError('invalid number of ' + family + ' profiles: ' + str(len(by_family[family])))
        self._k = by_family[CUTOFF_K]
        self._m = by_family[CUTOFF_M]
        self._l = by_family[CONVEX_L][0] if by_family[CONVEX_L] else None
        self._f = by_family[SLOPE_F][0] if by_family[SLOPE_F] else None
        self._g = by_family[SHEAR_G][0] if by_family[SHEAR_G] else None

    def __repr__(self):
        return 'ContactModel(%s, %s)' % (self.variant, sorted(self.profiles))

    @property
    def convexity(self):
        """The convex_l profile, or None."""
        return self._l

    @property
    def cutoffs(self):
        """List of cutoff_k profiles in role-name order."""
        return list(self._k)

    @property
    def bands(self):
        """List of cutoff_m profiles in role-name order."""
        return list(self._m)

    def coefficients(self, x, y, z):
        """Coefficients of the form and of its curl at a chart point. No box
        check is performed.

        Returns
        -------
        (tuple, tuple)
            Form coefficients (a_x, a_y, a_z) and curl coefficients
            (c_x, c_y, c_z), where d alpha(u, v) = curl . (u x v)
        """
        k_val, k_dx = 0.0, 0.0
        for prof in self._k:
            v, dv = prof.evaluate(x)
            k_val += v
            k_dx += dv
        if not self._l is None and k_val != 0.0:
            l_val, l_dy = self._l.evaluate(y)
        else:
            l_val, l_dy = 0.0, 0.0
        m_val = 1.0
        for prof in self._m:
            v, _ = prof.evaluate(z)
            m_val *= v
        if not self._f is None:
            f_val, f_dx = self._f.evaluate(x)
        else:
            f_val, f_dx = math.sin(x), math.cos(x)
        if not self._g is None:
            g_val, g_dy = self._g.evaluate(x, y)
        else:
            g_val, g_dy = 0.0, 0.0
        cos_x = math.cos(x)
        sin_x = math.sin(x)
        p_val = 1.0 + k_val * l_val * m_val
        form = (g_val, f_val, p_val * cos_x)
        curl = (
            k_val * l_dy * m_val * cos_x,
            p_val * sin_x - k_dx * l_val * m_val * cos_x,
            f_dx - g_dy
        )
        return form, curl

    def to_dict(self):
        """Dictionary serialization following the model JSON document
        {variant, box, profiles}.

        Returns
        -------
        dict
        """
        return {
            'variant': self.variant,
            'box': self.box.to_dict(),
            'profiles': dict([(role, self.profiles[role].to_dict()) for role in self.profiles])
        }

    @staticmethod
    def from_dict(obj):
        """Create model from its dictionary serialization.

        Parameters
        ----------
        obj : dict

        Returns
        -------
        reebcli.model_geometry.ContactModel
        """
        profiles = dict()
        for role, prof in obj.get('profiles', dict()).items():
            profiles[role] = BumpProfile.from_dict(prof)
        return ContactModel(obj['variant'], ModelBox.from_dict(obj['box']), profiles)


class ClosedOrbit(object):
    """Closed Reeb orbit Gamma_k x {y0} of a perturbed model.

    Attributes
    ----------
    label : string
    point : reebcli.model_geometry.ChartPoint
        Point of the orbit on z = 0
    period : float
    direction : int
        Sign of the z-component of the Reeb field along the orbit
    expected_trace : float or None
        2 cosh(T sqrt(l''(0))) where the linearization is hyperbolic with
        constant rate, None when bands of m cross the orbit
    """
    def __init__(self, label, point, period, direction, expected_trace=None):
        self.label = label
        self.point = ChartPoint(*point)
        self.period = period
        self.direction = direction
        self.expected_trace = expected_trace

    def __repr__(self):
        return '%s(x=%g, T=%g)' % (self.label, self.point.x, self.period)

    def to_dict(self):
        return {
            'label': self.label,
            'point': list(self.point),
            'period': self.period,
            'direction': self.direction,
            'expected_trace': self.expected_trace
        }


# ------------------------------------------------------------------------------
#
# Operations
#
# ------------------------------------------------------------------------------

def _check_box(model, p):
    if not model.box.contains(p):
        raise DomainError('point outside of model box: ' + format_point(p), point=list(p))


def evaluate_form(model, p):
    """Coefficients (a_x, a_y, a_z) of the contact form at a chart point.

    Parameters
    ----------
    model : reebcli.model_geometry.ContactModel
    p : sequence of float

    Returns
    -------
    (float, float, float)
    """
    _check_box(model, p)
    form, _ = model.coefficients(p[0], p[1], p[2])
    return form


def contact_form_derivative(model, p):
    """Coefficients of d alpha as the curl vector c, i.e.,
    d alpha(u, v) = c . (u x v).
    """
    _check_box(model, p)
    _, curl = model.coefficients(p[0], p[1], p[2])
    return curl


def d_alpha(model, p, u, v):
    """Evaluate d alpha(u, v) at p."""
    curl = contact_form_derivative(model, p)
    return float(np.dot(curl, np.cross(u, v)))


def contact_volume(model, p):
    """Value of alpha ^ d alpha / (dx ^ dy ^ dz) at p.

    Parameters
    ----------
    model : reebcli.model_geometry.ContactModel
    p : sequence of float

    Returns
    -------
    float
    """
    _check_box(model, p)
    form, curl = model.coefficients(p[0], p[1], p[2])
    return form[0] * curl[0] + form[1] * curl[1] + form[2] * curl[2]


def reeb_vector(model, x, y, z):
    """Reeb field without box check. Used by the integrators, whose stages
    may evaluate the field marginally outside of the box.
    """
    form, curl = model.coefficients(x, y, z)
    vol = form[0] * curl[0] + form[1] * curl[1] + form[2] * curl[2]
    if vol < SINGULAR_VOLUME:
        raise SingularityError(
            'contact volume vanishes at ' + format_point((x, y, z)),
            point=[x, y, z],
            volume=vol
        )
    return (curl[0] / vol, curl[1] / vol, curl[2] / vol)


def reeb_field(model, p):
    """Reeb vector field R_alpha(p).

    Parameters
    ----------
    model : reebcli.model_geometry.ContactModel
    p : sequence of float

    Returns
    -------
    (float, float, float)
    """
    _check_box(model, p)
    return reeb_vector(model, p[0], p[1], p[2])


def verify_reeb(model, p, h=1e-6):
    """Finite-difference check of the defining equations alpha(R) = 1 and
    i_R d alpha = 0. The exterior derivative is recomputed by central
    differences of the form coefficients, independently of the closed-form
    curl used by reeb_field.

    Parameters
    ----------
    model : reebcli.model_geometry.ContactModel
    p : sequence of float
    h : float, optional
        Finite difference step

    Returns
    -------
    (float, float)
        |alpha(R) - 1| and the largest component of |i_R d alpha|
    """
    R = np.array(reeb_field(model, p))
    a = np.array(model.coefficients(p[0], p[1], p[2])[0])
    # Jacobian of the coefficient vector: jac[i, j] = d a_i / d x_j
    jac = np.zeros((3, 3))
    for j in range(3):
        dp = np.zeros(3)
        dp[j] = h
        a_plus = np.array(model.coefficients(*(np.array(p, dtype=float) + dp))[0])
        a_minus = np.array(model.coefficients(*(np.array(p, dtype=float) - dp))[0])
        jac[:, j] = (a_plus - a_minus) / (2.0 * h)
    # d alpha as antisymmetric matrix w[i, j] = d_i a_j - d_j a_i
    omega = jac.T - jac
    return abs(float(np.dot(a, R)) - 1.0), float(np.max(np.abs(np.dot(R, omega))))


def volume_grid_check(model, n=20):
    """Minimum contact volume over an n x n x n grid of the chart box. For
    periodic z the grid covers one period.

    Parameters
    ----------
    model : reebcli.model_geometry.ContactModel
    n : int, optional

    Returns
    -------
    (float, reebcli.model_geometry.ChartPoint)
        Minimum volume and the grid point where it is attained
    """
    box = model.box
    xs = np.linspace(box.x_min, box.x_max, n)
    ys = np.linspace(box.y_min, box.y_max, n)
    if box.z_periodic:
        zs = np.linspace(0.0, TWO_PI, n, endpoint=False)
    else:
        zs = np.linspace(box.z_min, box.z_max, n)
    best, arg = None, None
    for x in xs:
        for y in ys:
            for z in zs:
                form, curl = model.coefficients(x, y, z)
                vol = form[0] * curl[0] + form[1] * curl[1] + form[2] * curl[2]
                if best is None or vol < best:
                    best, arg = vol, ChartPoint(float(x), float(y), float(z))
    return best, arg


def closed_orbits(model):
    """Closed Reeb orbits Gamma_k x {y0} of the perturbed models: one orbit
    per cut-off center c where the form restricts to sin(x) dy + cos(x) dz
    with sin(c) = 0. The orbit is traversed along z in the direction of cos(c).

    Parameters
    ----------
    model : reebcli.model_geometry.ContactModel

    Returns
    -------
    list(reebcli.model_geometry.ClosedOrbit)
    """
    result = []
    if model.convexity is None:
        return result
    y0 = model.convexity.center
    for i, prof in enumerate(model.cutoffs):
        c = prof.center
        p = (c, y0, 0.0)
        if not model.box.contains(p):
            continue
        R = reeb_vector(model, *p)
        if abs(R[0]) > 1e-12 or abs(R[1]) > 1e-12:
            logger.debug('cut-off center %g does not carry a closed orbit', c)
            continue
        period = TWO_PI / abs(R[2])
        expected = None
        if not model.bands:
            rate = math.sqrt(model.convexity.second_derivative_at_center() * prof.amplitude)
            expected = 2.0 * math.cosh(period * rate)
        k = int(round(c / math.pi))
        result.append(
            ClosedOrbit('Gamma_' + str(k), p, period, 1 if R[2] > 0 else -1, expected)
        )
    return result


# ------------------------------------------------------------------------------
#
# Model factories and JSON documents
#
# ------------------------------------------------------------------------------

def _cutoff(center):
    return BumpProfile(CUTOFF_K, center=center, plateau=K_PLATEAU, support=K_SUPPORT)


def _band(center, plateau=M_PLATEAU, support=M_SUPPORT):
    return BumpProfile(CUTOFF_M, center=center, plateau=plateau, support=support)


def _convex(amplitude, rate):
    return BumpProfile(CONVEX_L, center=0.0, amplitude=amplitude, rate=rate)


def bypass_bands(configuration=THREE_COMPONENTS, z1=BYPASS_Z1):
    """cutoff_m profiles switching off the perturbation along the attaching
    arc. The trivial configuration uses a single band covering both arc
    strands, the overtwisted configuration one band per strand.

    Returns
    -------
    dict(string: reebcli.model_geometry.BumpProfile)
    """
    if configuration == THREE_COMPONENTS:
        return {'m0': _band(0.0)}
    elif configuration == TRIVIAL:
        width = M_SUPPORT - M_PLATEAU
        half = 0.5 * z1 + M_PLATEAU
        return {'m0': _band(0.5 * z1, plateau=half, support=half + width)}
    elif configuration == OVERTWISTED:
        return {'m0': _band(0.0), 'm1': _band(z1)}
    raise ValueError('invalid bypass configuration: ' + str(configuration))


def default_model(
    variant, n=None, eta=TORUS_ETA, l_amplitude=L_AMPLITUDE, l_rate=L_RATE,
    configuration=THREE_COMPONENTS, z1=BYPASS_Z1, shear_amplitude=G_AMPLITUDE
):
    """Build a model variant with the default profiles.

    The perturbed thickened surface model lives on the neighbourhood U_0 of
    one dividing curve unless n > 0 is given, in which case the chart covers
    the dividing curves x = 0, pi, ..., n pi. The solid torus models cover
    x in [-pi + eta, n pi - eta].

    Parameters
    ----------
    variant : string
        Variant name or short alias
    n : int, optional
    eta : float, optional
    l_amplitude : float, optional
    l_rate : float, optional
    configuration : string, optional
        Bypass configuration of the alpha_b model
    z1 : float, optional
        z-level of the second attaching arc strand
    shear_amplitude : float, optional

    Returns
    -------
    reebcli.model_geometry.ContactModel
    """
    variant = VARIANT_ALIASES.get(variant, variant)
    if not variant in VARIANTS:
        raise ValueError('invalid variant: ' + str(variant))
    if variant == STANDARD:
        return ContactModel(STANDARD, ModelBox(IB_MIN, IB_MAX))
    elif variant in [ALPHA_P, ALPHA_B]:
        profiles = {'l': _convex(l_amplitude, l_rate)}
        if variant == ALPHA_P and n:
            box = ModelBox(IB_MIN, n * math.pi + 3.0 * math.pi / 4.0, n=n)
            for k in range(n + 1):
                profiles['k' + str(k)] = _cutoff(k * math.pi)
        else:
            box = ModelBox(-U0_HALF_WIDTH, U0_HALF_WIDTH)
            profiles['k0'] = _cutoff(0.0)
        if variant == ALPHA_B:
            profiles.update(bypass_bands(configuration, z1))
        return ContactModel(variant, box, profiles)
    n = TORUS_N if n is None else n
    if n < 1:
        raise ValueError('invalid number of dividing curves: ' + str(n))
    if not 0 < eta < math.pi / 4.0:
        raise ValueError('invalid margin: ' + str(eta))
    box = ModelBox(-math.pi + eta, n * math.pi - eta, n=n, eta=eta)
    profiles = {
        'f': BumpProfile(SLOPE_F, plateau=F_INNER, support=F_OUTER),
        'g': BumpProfile(
            SHEAR_G,
            center=-3.0 * math.pi / 4.0,
            plateau=G_PLATEAU,
            support=G_SUPPORT,
            amplitude=shear_amplitude
        )
    }
    if variant in [TORUS_P, TORUS_B]:
        profiles['l'] = _convex(l_amplitude, l_rate)
        for k in range(n):
            profiles['k' + str(k)] = _cutoff(k * math.pi)
    if variant == TORUS_B:
        for j in range(n):
            profiles['m' + str(j)] = _band(TWO_PI * j / n)
    return ContactModel(variant, box, profiles)


def load_model(filename):
    """Read a model JSON document.

    Parameters
    ----------
    filename : string

    Returns
    -------
    reebcli.model_geometry.ContactModel
    """
    with open(filename, 'r') as f:
        return ContactModel.from_dict(json.load(f))


def save_model(model, filename):
    """Write a model JSON document."""
    with open(filename, 'w') as f:
        json.dump(model.to_dict(), f, indent=2, sort_keys=True)
