"""Numerical Reeb flow: trajectories, section return maps, shooting for Reeb
chords of the attaching arc, and the linearized flow on the contact planes.

Integration uses scipy.integrate.solve_ivp with an embedded Runge-Kutta pair.
Box faces and sections are expressed as event functions; crossings are
localized by the root finder of solve_ivp on the dense output.
"""

import csv
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from reebcli.cz_index import SymplecticPath
from reebcli.errors import DomainError, FrameError, NumericalError, format_point
from reebcli.errors import StiffnessError, TangencyError
from reebcli.model_geometry import BOX_TOLERANCE, ChartPoint, TWO_PI
from reebcli.model_geometry import THREE_COMPONENTS, TRIVIAL, OVERTWISTED, BYPASS_Z1
from reebcli.model_geometry import reeb_vector


logger = logging.getLogger(__name__)


# ------------------------------------------------------------------------------
#
# Constants
#
# ------------------------------------------------------------------------------

"""Default integrator settings."""
DEFAULT_ABS_TOL = 1e-12
DEFAULT_REL_TOL = 1e-10
DEFAULT_MAX_TIME = 50.0
DEFAULT_MAX_STEP = 0.25
DEFAULT_MIN_STEP = 1e-12
DEFAULT_EVENT_TOL = 1e-10
# Embedded Runge-Kutta pair of order 8(5,3) with dense output
DEFAULT_METHOD = 'DOP853'

"""Section kinds."""
PLANE_X = 'plane_x'
PLANE_Y = 'plane_y'
PLANE_Z = 'plane_z'
RECTANGLE = 'rectangle'

SECTION_KINDS = [PLANE_X, PLANE_Y, PLANE_Z, RECTANGLE]

"""Chord shooting."""
# Default number of samples per arc strand
DEFAULT_GRID_N = 512
# Bisection steps locating the boundary of the returning region
BISECTION_STEPS = 48
# Tolerance of the root polishing on the arc parameter
ROOT_XTOL = 1e-14
# Finite difference step for the image tangent of the arc
MARGIN_STEP = 1e-8
# Field components below this value mark the tangency locus Gamma
TANGENCY_TOL = 1e-9
# Maximum number of grid doublings when stabilizing the chord count
MAX_DOUBLINGS = 4

"""Linearized flow."""
# Finite difference step of the Jacobian of the Reeb field
JACOBIAN_STEP = 1e-6
# Largest tolerated determinant drift before renormalization
DET_DRIFT = 1e-6
# Largest flow time between two samples of a symplectic path
SAMPLE_SPACING = 0.05
# Minimum number of samples of a symplectic path
MIN_SAMPLES = 64
# Minimum value of d alpha(e1, e2) before normalization
FRAME_TOL = 1e-12

# Maximum number of restarts after a crossing outside a rectangle section
MAX_RESTARTS = 1000

COORDINATES = {PLANE_X: 0, PLANE_Y: 1, PLANE_Z: 2}


# ------------------------------------------------------------------------------
#
# Settings, sections, and results
#
# ------------------------------------------------------------------------------

class FlowSettings(object):
    """Integrator settings.

    Attributes
    ----------
    abs_tol : float
    rel_tol : float
    max_time : float
        Largest flow time of returns and chord periods
    max_step : float
    min_step : float
        Step sizes below this value are reported as stiffness
    event_tol : float
        Localization tolerance of section crossings
    method : string
        solve_ivp method name
    lambda0 : float or None
        Width of the exclusion band around the dividing set for chord
        endpoints. None disables the exclusion.
    workers : int
        Number of worker processes used for shooting
    """
    def __init__(
        self, abs_tol=DEFAULT_ABS_TOL, rel_tol=DEFAULT_REL_TOL, max_time=DEFAULT_MAX_TIME,
        max_step=DEFAULT_MAX_STEP, min_step=DEFAULT_MIN_STEP, event_tol=DEFAULT_EVENT_TOL,
        method=DEFAULT_METHOD, lambda0=None, workers=1
    ):
        if abs_tol <= 0 or rel_tol <= 0 or event_tol <= 0:
            raise ValueError('invalid tolerances: ' + str((abs_tol, rel_tol, event_tol)))
        if not 0 < min_step < max_step:
            raise ValueError('invalid step bounds: ' + str((min_step, max_step)))
        if max_time <= 0:
            raise ValueError('invalid max time: ' + str(max_time))
        if not lambda0 is None and lambda0 < 0:
            raise ValueError('invalid exclusion band: ' + str(lambda0))
        if workers < 1:
            raise ValueError('invalid number of workers: ' + str(workers))
        self.abs_tol = float(abs_tol)
        self.rel_tol = float(rel_tol)
        self.max_time = float(max_time)
        self.max_step = float(max_step)
        self.min_step = float(min_step)
        self.event_tol = float(event_tol)
        self.method = method
        self.lambda0 = lambda0
        self.workers = int(workers)

    def copy(self, **kwargs):
        """Copy of the settings with some values replaced.

        Returns
        -------
        reebcli.reeb_flow.FlowSettings
        """
        obj = self.to_dict()
        obj.update(kwargs)
        return FlowSettings.from_dict(obj)

    def to_dict(self):
        return {
            'abs_tol': self.abs_tol,
            'rel_tol': self.rel_tol,
            'max_time': self.max_time,
            'max_step': self.max_step,
            'min_step': self.min_step,
            'event_tol': self.event_tol,
            'method': self.method,
            'lambda0': self.lambda0,
            'workers': self.workers
        }

    @staticmethod
    def from_dict(obj):
        return FlowSettings(**obj)


class Section(object):
    """Plane section of the chart box, optionally restricted to a rectangle.

    Attributes
    ----------
    kind : string
        One of SECTION_KINDS
    value : float
        Value c of the fixed coordinate
    orientation : int
        +1 (crossings with increasing coordinate), -1, or 0 (both)
    axis : int
        Index of the fixed coordinate
    bounds : ((float, float), (float, float)) or None
        Bounds of the two remaining coordinates (in increasing index order)
        for rectangle sections
    """
    def __init__(self, kind, value, orientation=0, axis=None, bounds=None):
        if not kind in SECTION_KINDS:
            raise ValueError('invalid section kind: ' + str(kind))
        if not orientation in [-1, 0, 1]:
            raise ValueError('invalid orientation: ' + str(orientation))
        if kind == RECTANGLE:
            if axis is None or bounds is None:
                raise ValueError('rectangle section requires axis and bounds')
            self.axis = int(axis)
            self.bounds = tuple([tuple(b) for b in bounds])
        else:
            self.axis = COORDINATES[kind]
            self.bounds = None
        self.kind = kind
        self.value = float(value)
        self.orientation = orientation

    def __repr__(self):
        return '%s(%d=%g, %+d)' % (self.kind, self.axis, self.value, self.orientation)

    @property
    def normal(self):
        """Unit normal of the section plane."""
        n = np.zeros(3)
        n[self.axis] = 1.0
        return n

    def in_bounds(self, p, tol=0.0):
        """Test whether a crossing point lies inside the rectangle bounds.
        Always true for unbounded planes.
        """
        if self.bounds is None:
            return True
        others = [i for i in range(3) if i != self.axis]
        for idx, (lo, hi) in zip(others, self.bounds):
            if p[idx] < lo - tol or p[idx] > hi + tol:
                return False
        return True

    def to_dict(self):
        obj = {'kind': self.kind, 'value': self.value, 'orientation': self.orientation}
        if not self.bounds is None:
            obj['axis'] = self.axis
            obj['bounds'] = [list(b) for b in self.bounds]
        return obj


class EventRecord(object):
    """Section crossing recorded along a trajectory."""
    def __init__(self, section, t, point, direction):
        self.section = section
        self.t = t
        self.point = ChartPoint(*point)
        self.direction = direction

    def __repr__(self):
        return 'Event(%r, t=%g)' % (self.section, self.t)


class Trajectory(object):
    """Sampled Reeb trajectory.

    Attributes
    ----------
    times : numpy.array
        Sample times, strictly monotone (decreasing for backward flow)
    points : numpy.array
        Sample points, shape (n, 3)
    events : list(reebcli.reeb_flow.EventRecord)
    exit_face : string or None
        Box face through which the trajectory left the chart, if any
    """
    def __init__(self, times, points, events=None, exit_face=None):
        self.times = np.asarray(times, dtype=float)
        self.points = np.asarray(points, dtype=float).reshape((-1, 3))
        self.events = events if not events is None else list()
        self.exit_face = exit_face

    @property
    def end(self):
        """Final point of the trajectory."""
        return ChartPoint(*self.points[-1])

    @property
    def duration(self):
        return float(self.times[-1] - self.times[0])

    @property
    def is_escape(self):
        return not self.exit_face is None


class Escape(object):
    """Trajectory left the box (or ran out of time) before the section was
    crossed.

    Attributes
    ----------
    face : string
        Exit face name, or 'timeout'
    point : reebcli.model_geometry.ChartPoint
    time : float
    """
    def __init__(self, face, point, time):
        self.face = face
        self.point = ChartPoint(*point)
        self.time = time

    def __repr__(self):
        return 'Escape(%s, t=%g)' % (self.face, self.time)

    @property
    def is_timeout(self):
        return self.face == 'timeout'

    def to_dict(self):
        return {'face': self.face, 'point': list(self.point), 'time': self.time}


class ArcStrand(object):
    """Straight strand {z = const, x in [x_lo, x_hi]} of the attaching arc on
    the boundary surface.

    Attributes
    ----------
    z : float
    x_lo, x_hi : float
    prefix : string
        Label prefix of chords ending on the strand
    orientation : int
        Orientation of the strand relative to the x-axis
    """
    def __init__(self, z, x_lo, x_hi, prefix, orientation=1):
        if not x_lo < x_hi:
            raise ValueError('invalid strand interval: ' + str((x_lo, x_hi)))
        if not orientation in [-1, 1]:
            raise ValueError('invalid orientation: ' + str(orientation))
        self.z = float(z)
        self.x_lo = float(x_lo)
        self.x_hi = float(x_hi)
        self.prefix = prefix
        self.orientation = orientation

    def __repr__(self):
        return 'ArcStrand(%s, z=%g, [%g, %g])' % (self.prefix, self.z, self.x_lo, self.x_hi)

    def contains_x(self, x, tol=0.0):
        return self.x_lo - tol <= x <= self.x_hi + tol


class AttachingArc(object):
    """Attaching arc given as a list of strands on the boundary surface."""
    def __init__(self, strands):
        if len(strands) == 0:
            raise ValueError('attaching arc without strands')
        self.strands = list(strands)

    def __repr__(self):
        return 'AttachingArc(%r)' % self.strands


class TransverseChord(object):
    """Reeb chord of the attaching arc.

    Attributes
    ----------
    start : reebcli.model_geometry.ChartPoint
        Endpoint a- where the chord leaves the surface
    end : reebcli.model_geometry.ChartPoint
        Endpoint a+ where the chord returns to the surface
    period : float
    winding : int
        Net lift of z along the chord divided by 2 pi
    transversality_margin : float
        Sine of the angle between the flowed arc and the arc at the endpoint
    label : string
    orientation : int
        Orientation of the strand containing the endpoint a+
    """
    def __init__(self, start, end, period, winding, transversality_margin, label, orientation=1):
        self.start = ChartPoint(*start)
        self.end = ChartPoint(*end)
        self.period = float(period)
        self.winding = int(winding)
        self.transversality_margin = float(transversality_margin)
        self.label = label
        self.orientation = orientation

    def __repr__(self):
        return '%s(T=%.6f, w=%d)' % (self.label, self.period, self.winding)

    def to_dict(self):
        return {
            'label': self.label,
            'start': list(self.start),
            'end': list(self.end),
            'period': self.period,
            'winding': self.winding,
            'margin': self.transversality_margin,
            'orientation': self.orientation
        }

    @staticmethod
    def from_dict(obj):
        return TransverseChord(
            obj['start'],
            obj['end'],
            obj['period'],
            obj['winding'],
            obj['margin'],
            obj['label'],
            orientation=obj.get('orientation', 1)
        )


# ------------------------------------------------------------------------------
#
# Integration
#
# ------------------------------------------------------------------------------

def _rhs(model):
    def fun(t, y):
        return reeb_vector(model, y[0], y[1], y[2])
    return fun


def _face_event(idx, value, outward):
    """Terminal event vanishing on a box face, decreasing when the trajectory
    moves outward.
    """
    if outward > 0:
        def event(t, y):
            return value - y[idx]
    else:
        def event(t, y):
            return y[idx] - value
    event.terminal = True
    event.direction = -1
    return event


def _section_event(section, terminal, sign):
    idx = section.axis
    value = section.value
    def event(t, y):
        return y[idx] - value
    event.terminal = terminal
    event.direction = section.orientation * sign
    return event


def _solve(model, p0, t_final, settings, events, **kwargs):
    sol = solve_ivp(
        _rhs(model),
        (0.0, t_final),
        np.asarray(p0, dtype=float),
        method=settings.method,
        rtol=settings.rel_tol,
        atol=settings.abs_tol,
        max_step=settings.max_step,
        events=events if events else None,
        **kwargs
    )
    if sol.status == -1:
        raise StiffnessError('integration failed: ' + str(sol.message), point=list(p0))
    if len(sol.t) > 2:
        steps = np.abs(np.diff(sol.t))[:-1]
        if len(steps) > 0 and np.min(steps) < settings.min_step:
            raise StiffnessError('step size below ' + str(settings.min_step), point=list(p0))
    return sol


def _normal_speed(model, p, axis):
    return reeb_vector(model, p[0], p[1], p[2])[axis]


def _advance(model, p, dt, settings):
    """Flow a point for a short time without events."""
    sol = _solve(model, p, dt, settings, None)
    return sol.y[:, -1]


def _outside_face(model, p):
    """Name of a box face violated by p, or None."""
    for name, idx, value, outward in model.box.faces():
        if outward * (p[idx] - value) > BOX_TOLERANCE:
            return name
    return None


def integrate(model, p0, t_final, settings=None, sections=None):
    """Integrate the Reeb flow from p0 for time t_final (negative for the
    backward flow). Integration stops at t_final or when the trajectory leaves
    the chart box. Crossings of the given sections are recorded.

    Parameters
    ----------
    model : reebcli.model_geometry.ContactModel
    p0 : sequence of float
    t_final : float
    settings : reebcli.reeb_flow.FlowSettings, optional
    sections : list(reebcli.reeb_flow.Section), optional

    Returns
    -------
    reebcli.reeb_flow.Trajectory
    """
    settings = settings if not settings is None else FlowSettings()
    sections = sections if not sections is None else list()
    if not model.box.contains(p0):
        raise DomainError('initial point outside of model box: ' + format_point(p0), point=list(p0))
    if t_final == 0:
        return Trajectory([0.0], [p0])
    sign = 1.0 if t_final > 0 else -1.0
    faces = model.box.faces()
    events = [_face_event(idx, value, outward) for _, idx, value, outward in faces]
    for section in sections:
        ev = _section_event(section, False, sign)
        # Record crossings in both directions; orientation filtering below
        ev.direction = 0
        events.append(ev)
    sol = _solve(model, p0, t_final, settings, events)
    exit_face = None
    records = []
    for i, (t_ev, y_ev) in enumerate(zip(sol.t_events, sol.y_events)):
        if i < len(faces):
            if sol.status == 1 and len(t_ev) > 0:
                exit_face = faces[i][0]
            continue
        section = sections[i - len(faces)]
        for t, y in zip(t_ev, y_ev):
            if abs(t) < settings.event_tol or not section.in_bounds(y):
                continue
            speed = _normal_speed(model, y, section.axis)
            direction = 1 if speed > 0 else -1
            if section.orientation != 0 and direction != section.orientation:
                continue
            records.append(EventRecord(section, float(t), y, direction))
    return Trajectory(sol.t, sol.y.T, events=records, exit_face=exit_face)


def first_return(model, p0, section, settings=None, backward=False):
    """First transverse crossing of a section in forward (or backward) time.

    A box face lying in the section plane and facing the crossing direction
    is superseded by the section. Crossings at the start point and crossings
    outside the bounds of a rectangle section are skipped.

    Parameters
    ----------
    model : reebcli.model_geometry.ContactModel
    p0 : sequence of float
    section : reebcli.reeb_flow.Section
    settings : reebcli.reeb_flow.FlowSettings, optional
    backward : bool, optional

    Returns
    -------
    (reebcli.model_geometry.ChartPoint, float) or reebcli.reeb_flow.Escape
        Crossing point and (positive) flow time, or the escape record
    """
    settings = settings if not settings is None else FlowSettings()
    if not model.box.contains(p0):
        raise DomainError('initial point outside of model box: ' + format_point(p0), point=list(p0))
    sign = -1.0 if backward else 1.0
    faces = []
    for face in model.box.faces():
        name, idx, value, outward = face
        superseded = (
            idx == section.axis
            and abs(value - section.value) < settings.event_tol
            and (section.orientation == 0 or section.orientation * sign == outward)
        )
        if not superseded:
            faces.append(face)
    events = [_face_event(idx, value, outward) for _, idx, value, outward in faces]
    events.append(_section_event(section, True, sign))
    p = np.asarray(p0, dtype=float)
    elapsed = 0.0
    for _ in range(MAX_RESTARTS):
        remaining = settings.max_time - elapsed
        if remaining <= 0:
            return Escape('timeout', p, elapsed)
        sol = _solve(model, p, sign * remaining, settings, events)
        if sol.status == 0:
            return Escape('timeout', sol.y[:, -1], settings.max_time)
        for i in range(len(faces)):
            if len(sol.t_events[i]) > 0:
                return Escape(faces[i][0], sol.y_events[i][-1], elapsed + abs(sol.t_events[i][-1]))
        t_hit = abs(sol.t_events[-1][-1])
        hit = sol.y_events[-1][-1]
        speed = _normal_speed(model, hit, section.axis)
        if t_hit >= settings.event_tol and section.in_bounds(hit):
            if abs(speed) < settings.event_tol:
                raise TangencyError(
                    'tangential section crossing at ' + format_point(hit),
                    point=list(hit),
                    speed=float(speed)
                )
            return ChartPoint(*hit), elapsed + t_hit
        # Lift off the section before restarting
        if abs(speed) < settings.event_tol:
            raise TangencyError('trajectory tangent to section at ' + format_point(hit), point=list(hit))
        dt = 10.0 * settings.event_tol / abs(speed)
        p = _advance(model, hit, sign * dt, settings)
        elapsed += t_hit + dt
        face = _outside_face(model, p)
        if not face is None:
            return Escape(face, p, elapsed)
        logger.debug('restart after crossing at t=%g outside of section bounds', elapsed)
    raise NumericalError('too many restarts of first return from ' + format_point(p0))


# ------------------------------------------------------------------------------
#
# Linearized flow
#
# ------------------------------------------------------------------------------

def contact_frame(model, p):
    """Symplectic frame (e1, e2) of the contact plane at p.

    e1 is the projection of d/dx along the Reeb field onto ker(alpha), e2 is
    the projection of curl(alpha) x e1, and both are rescaled so that
    d alpha(e1, e2) = 1.

    Parameters
    ----------
    model : reebcli.model_geometry.ContactModel
    p : sequence of float

    Returns
    -------
    (numpy.array, numpy.array)
    """
    form, curl = model.coefficients(p[0], p[1], p[2])
    form = np.array(form)
    curl = np.array(curl)
    R = np.array(reeb_vector(model, p[0], p[1], p[2]))
    e1 = np.array([1.0, 0.0, 0.0])
    e1 = e1 - np.dot(form, e1) * R
    v = np.cross(curl, e1)
    e2 = v - np.dot(form, v) * R
    omega = float(np.dot(curl, np.cross(e1, e2)))
    if omega <= FRAME_TOL:
        raise FrameError('degenerate contact frame at ' + format_point(p), point=list(p), value=omega)
    scale = 1.0 / math.sqrt(omega)
    return e1 * scale, e2 * scale


def _jacobian(model, p, h=JACOBIAN_STEP):
    """Central difference Jacobian of the Reeb field."""
    jac = np.zeros((3, 3))
    for j in range(3):
        dp = np.zeros(3)
        dp[j] = h
        plus = reeb_vector(model, *(p + dp))
        minus = reeb_vector(model, *(p - dp))
        jac[:, j] = (np.array(plus) - np.array(minus)) / (2.0 * h)
    return jac


def _rotation(angle):
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


def linearized_flow(model, p0, t_final, frame=None, settings=None, twist=0.0):
    """Linearized Reeb flow on the contact planes along the trajectory of p0.

    The variational equations are integrated alongside the base trajectory.
    At every sample the differential is expressed in the frame at the base
    point, M = [[d alpha(w1, e2), d alpha(w2, e2)], [d alpha(e1, w1),
    d alpha(e1, w2)]] with w_i the image of the initial frame vector e_i, and
    renormalized to determinant one. A non-zero twist composes the path with
    a rotation by twist * pi * t / t_final, the change of trivialization
    along chords.

    Parameters
    ----------
    model : reebcli.model_geometry.ContactModel
    p0 : sequence of float
    t_final : float
    frame : callable, optional
        frame(model, p) -> (e1, e2); defaults to contact_frame
    settings : reebcli.reeb_flow.FlowSettings, optional
    twist : float, optional

    Returns
    -------
    reebcli.cz_index.SymplecticPath
    """
    settings = settings if not settings is None else FlowSettings()
    frame = frame if not frame is None else contact_frame
    if t_final == 0:
        return SymplecticPath([0.0], [np.identity(2)])
    n = max(MIN_SAMPLES, int(math.ceil(abs(t_final) / SAMPLE_SPACING))) + 1
    t_eval = np.linspace(0.0, t_final, n)
    def fun(t, y):
        p = y[:3]
        phi = y[3:].reshape((3, 3))
        dp = reeb_vector(model, p[0], p[1], p[2])
        dphi = np.dot(_jacobian(model, p), phi)
        return np.concatenate([dp, dphi.ravel()])
    y0 = np.concatenate([np.asarray(p0, dtype=float), np.identity(3).ravel()])
    sol = solve_ivp(
        fun,
        (0.0, t_final),
        y0,
        method=settings.method,
        rtol=settings.rel_tol,
        atol=settings.abs_tol,
        max_step=settings.max_step,
        t_eval=t_eval
    )
    if sol.status == -1:
        raise StiffnessError('variational integration failed: ' + str(sol.message), point=list(p0))
    e1_0, e2_0 = frame(model, p0)
    matrices = []
    for k in range(len(sol.t)):
        p = sol.y[:3, k]
        phi = sol.y[3:, k].reshape((3, 3))
        e1, e2 = frame(model, p)
        w1 = np.dot(phi, e1_0)
        w2 = np.dot(phi, e2_0)
        _, curl = model.coefficients(p[0], p[1], p[2])
        curl = np.array(curl)
        def omega(u, v):
            return float(np.dot(curl, np.cross(u, v)))
        M = np.array([
            [omega(w1, e2), omega(w2, e2)],
            [omega(e1, w1), omega(e1, w2)]
        ])
        det = np.linalg.det(M)
        if det <= 0:
            raise FrameError('frame lost orientation at t=' + str(float(sol.t[k])), point=list(p))
        if abs(det - 1.0) > DET_DRIFT:
            raise NumericalError(
                'determinant drift ' + str(float(abs(det - 1.0))) + ' at t=' + str(float(sol.t[k])),
                point=list(p)
            )
        M = M / math.sqrt(det)
        if twist != 0:
            M = np.dot(_rotation(twist * math.pi * sol.t[k] / t_final), M)
        matrices.append(M)
    return SymplecticPath(sol.t, matrices)


def monodromy(model, orbit, settings=None):
    """Linearized return map along a closed orbit over one period.

    Parameters
    ----------
    model : reebcli.model_geometry.ContactModel
    orbit : reebcli.model_geometry.ClosedOrbit
    settings : reebcli.reeb_flow.FlowSettings, optional

    Returns
    -------
    reebcli.cz_index.SymplecticPath
    """
    return linearized_flow(model, orbit.point, orbit.period, settings=settings)


def frame_twist(model, chord, settings=None):
    """Half turns between the chart frame and the trivialization adapted to
    the chord: one per crossing of the tangency locus along the chord, minus
    one when the chord ends on a strand oriented against the x-axis.
    """
    traj = integrate(model, chord.start, chord.period, settings=settings)
    speeds = np.array([reeb_vector(model, *p)[1] for p in traj.points[1:-1]])
    signs = np.sign(speeds[np.abs(speeds) > TANGENCY_TOL])
    crossings = int(np.count_nonzero(signs[1:] != signs[:-1])) if len(signs) > 1 else 0
    return crossings + (chord.orientation - 1) // 2


def chord_linearization(model, chord, settings=None):
    """Symplectic path along a chord in the trivialization adapted to the
    chord.

    Parameters
    ----------
    model : reebcli.model_geometry.ContactModel
    chord : reebcli.reeb_flow.TransverseChord
    settings : reebcli.reeb_flow.FlowSettings, optional

    Returns
    -------
    reebcli.cz_index.SymplecticPath
    """
    twist = frame_twist(model, chord, settings=settings)
    return linearized_flow(model, chord.start, chord.period, settings=settings, twist=twist)


# ------------------------------------------------------------------------------
#
# Reeb chords of the attaching arc
#
# ------------------------------------------------------------------------------

def bypass_arc(configuration=THREE_COMPONENTS, x_max=math.pi / 4.0, z1=BYPASS_Z1):
    """Attaching arc of the alpha_b model inside the neighbourhood U_0.

    The arc crosses the dividing curve x = 0 along the strand z = 0. In the
    trivial and overtwisted configurations it comes back to U_0 along a
    second strand z = z1 on the side x >= 0, traversed against the x-axis.

    Parameters
    ----------
    configuration : string, optional
    x_max : float, optional
    z1 : float, optional

    Returns
    -------
    reebcli.reeb_flow.AttachingArc
    """
    strands = [ArcStrand(0.0, -x_max, x_max, 'c', 1)]
    if configuration in [TRIVIAL, OVERTWISTED]:
        strands.append(ArcStrand(z1, 0.0, x_max, 'd', -1))
    elif configuration != THREE_COMPONENTS:
        raise ValueError('invalid bypass configuration: ' + str(configuration))
    return AttachingArc(strands)


class _Shot(object):
    """Outcome of shooting from one arc parameter. Returns that cross the
    surface tangentially count as non-returning.
    """
    def __init__(self, s, result):
        self.s = s
        if isinstance(result, TangencyError):
            self.kind = 'tangent'
            self.point = None
            self.period = None
        elif isinstance(result, Escape):
            self.kind = 'timeout' if result.is_timeout else 'escape'
            self.point = result.point
            self.period = None
        else:
            self.kind = 'return'
            self.point, self.period = result

    @property
    def returns(self):
        return self.kind == 'return'


def _shoot(args):
    model, strand, s, settings = args
    p0 = (s, model.box.y_surface, strand.z)
    speed = reeb_vector(model, *p0)[1]
    if speed >= 0:
        # Leaves the chart immediately
        return _Shot(s, Escape('y_max', p0, 0.0))
    section = Section(PLANE_Y, model.box.y_surface, orientation=1)
    try:
        return _Shot(s, first_return(model, p0, section, settings))
    except TangencyError as ex:
        logger.debug('shot from s=%.12f ends tangentially: %s', s, ex)
        return _Shot(s, ex)


def _map(func, tasks, workers):
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            return list(executor.map(func, tasks))
    return [func(t) for t in tasks]


def dividing_set(model, z, n=256):
    """x-positions of the tangency locus Gamma (R_y = 0) on the boundary
    surface at height z.
    """
    box = model.box
    y = box.y_surface
    def speed(x):
        return reeb_vector(model, x, y, z)[1]
    xs = np.linspace(box.x_min, box.x_max, n)
    values = [speed(x) for x in xs]
    result = []
    for i in range(n - 1):
        if values[i] == 0.0:
            result.append(float(xs[i]))
        elif values[i] * values[i + 1] < 0:
            result.append(brentq(speed, xs[i], xs[i + 1], xtol=1e-14))
    if values[-1] == 0.0:
        result.append(float(xs[-1]))
    return result


def _shots_for_strand(model, strand, grid_n, settings):
    y = model.box.y_surface
    samples = []
    for s in np.linspace(strand.x_lo, strand.x_hi, grid_n):
        if abs(reeb_vector(model, s, y, strand.z)[1]) > TANGENCY_TOL:
            samples.append(float(s))
    tasks = [(model, strand, s, settings) for s in samples]
    shots = _map(_shoot, tasks, settings.workers)
    # Bisect every boundary of the returning region. Returning probes are
    # kept as additional samples, which densifies the grid near the
    # boundary where return times diverge.
    extra = []
    for a, b in zip(shots[:-1], shots[1:]):
        if a.returns == b.returns:
            continue
        inside, outside = (a, b) if a.returns else (b, a)
        for _ in range(BISECTION_STEPS):
            s = 0.5 * (inside.s + outside.s)
            if abs(reeb_vector(model, s, y, strand.z)[1]) <= TANGENCY_TOL:
                # Boundary at the tangency locus on the arc
                break
            mid = _shoot((model, strand, s, settings))
            if mid.returns:
                inside = mid
                extra.append(mid)
            else:
                outside = mid
        logger.debug('returning region boundary near s=%.12f', 0.5 * (inside.s + outside.s))
    shots = sorted(shots + extra, key=lambda shot: shot.s)
    return shots


def _margin(model, strand, s, settings):
    """Sine of the angle between the image of the arc and the arc (the arc
    strands are parallel to the x-axis).
    """
    h = MARGIN_STEP
    plus = _shoot((model, strand, s + h, settings))
    minus = _shoot((model, strand, s - h, settings))
    if not plus.returns or not minus.returns:
        raise NumericalError('chord endpoint too close to the returning region boundary', s=s)
    dx = plus.point.x - minus.point.x
    dz = plus.point.z - minus.point.z
    return abs(dz) / math.hypot(dx, dz)


def _polish(model, strand, target, a, b, settings):
    """Root of z_end(s) - target between two returning samples."""
    def residual(s):
        shot = _shoot((model, strand, s, settings))
        if not shot.returns:
            raise NumericalError('shot does not return during root polishing', s=s)
        return shot.point.z - target
    s = brentq(residual, a.s, b.s, xtol=ROOT_XTOL, rtol=4.0 * np.finfo(float).eps)
    return s, _shoot((model, strand, s, settings))


def _excluded(model, chord, lambda0):
    """True if an endpoint of the chord lies within lambda0 of the dividing
    set.
    """
    for p in [chord.start, chord.end]:
        for x in dividing_set(model, p.z):
            if abs(p.x - x) < lambda0:
                return True
    return False


def _find_chords_once(model, arc, K, grid_n, settings):
    chords = []
    for start in arc.strands:
        shots = _shots_for_strand(model, start, grid_n, settings)
        for a, b in zip(shots[:-1], shots[1:]):
            if not a.returns or not b.returns:
                continue
            z_lo = min(a.point.z, b.point.z)
            z_hi = max(a.point.z, b.point.z)
            for end in arc.strands:
                j_lo = int(math.ceil((z_lo - end.z) / TWO_PI))
                j_hi = int(math.floor((z_hi - end.z) / TWO_PI))
                for j in range(j_lo, j_hi + 1):
                    target = end.z + TWO_PI * j
                    if (a.point.z - target) * (b.point.z - target) > 0:
                        continue
                    try:
                        s, shot = _polish(model, start, target, a, b, settings)
                    except NumericalError as ex:
                        logger.warning('crossing of z=%g between s=%.12f and s=%.12f skipped: %s', target, a.s, b.s, ex)
                        continue
                    if not end.contains_x(shot.point.x, tol=10.0 * settings.event_tol):
                        continue
                    if shot.period >= K:
                        continue
                    winding = int(math.floor((target - start.z) / TWO_PI + 1e-9))
                    chord = TransverseChord(
                        (s, model.box.y_surface, start.z),
                        shot.point,
                        shot.period,
                        winding,
                        _margin(model, start, s, settings),
                        end.prefix + str(winding),
                        orientation=end.orientation
                    )
                    logger.debug('found chord %r', chord)
                    chords.append(chord)
    # Merge duplicates found from adjacent sample pairs
    chords.sort(key=lambda c: (c.end.z, c.end.x, c.start.x))
    merged = []
    tol = 10.0 * settings.event_tol
    for chord in chords:
        if merged:
            last = merged[-1]
            close = (
                np.max(np.abs(np.array(last.start) - np.array(chord.start))) < tol
                and np.max(np.abs(np.array(last.end) - np.array(chord.end))) < tol
            )
            if close:
                continue
        merged.append(chord)
    result = []
    for chord in merged:
        if not settings.lambda0 is None and _excluded(model, chord, settings.lambda0):
            logger.warning('chord %s dropped: endpoint within %g of the dividing set', chord.label, settings.lambda0)
            continue
        result.append(chord)
    result.sort(key=lambda c: (c.label[0], c.winding, c.end.z))
    return result


def find_chords(model, arc, K, grid_n=DEFAULT_GRID_N, settings=None, stabilize=True):
    """Reeb chords of the attaching arc with period smaller than K.

    Shoots from grid_n samples of every arc strand (tangency points
    excluded) until the trajectory returns to the boundary surface, bisects
    the boundaries of the returning region, and polishes every crossing of
    the lifted arc strands by Brent's method on the z-coordinate of the
    return point.

    Parameters
    ----------
    model : reebcli.model_geometry.ContactModel
    arc : reebcli.reeb_flow.AttachingArc
    K : float
        Bound on the chord periods
    grid_n : int, optional
        Number of samples per strand
    settings : reebcli.reeb_flow.FlowSettings, optional
    stabilize : bool, optional
        Double grid_n until the chord count is unchanged twice in a row

    Returns
    -------
    list(reebcli.reeb_flow.TransverseChord)
    """
    if K <= 0:
        raise ValueError('invalid action bound: ' + str(K))
    if grid_n < 2:
        raise ValueError('invalid grid size: ' + str(grid_n))
    settings = settings if not settings is None else FlowSettings()
    settings = settings.copy(max_time=K)
    chords = _find_chords_once(model, arc, K, grid_n, settings)
    if stabilize:
        stable = 0
        for _ in range(MAX_DOUBLINGS):
            grid_n *= 2
            refined = _find_chords_once(model, arc, K, grid_n, settings)
            stable = stable + 1 if len(refined) == len(chords) else 0
            chords = refined
            if stable == 2:
                break
        else:
            logger.warning('chord count not stable after %d grid doublings', MAX_DOUBLINGS)
    logger.info('found %d chords with period < %g', len(chords), K)
    return chords


# ------------------------------------------------------------------------------
#
# Export
#
# ------------------------------------------------------------------------------

def write_trajectory_csv(trajectory, filename):
    """Write trajectory samples as CSV with columns t,x,y,z."""
    with open(filename, 'w', newline='') as f:
        writer = csv.writer(f)
        writer.writerow(['t', 'x', 'y', 'z'])
        for t, p in zip(trajectory.times, trajectory.points):
            writer.writerow([repr(float(t))] + [repr(float(v)) for v in p])


def chords_to_dict(chords):
    """JSON document {chords: [...]} for a list of chords."""
    return {'chords': [c.to_dict() for c in chords]}


def write_chords_json(chords, filename):
    with open(filename, 'w') as f:
        json.dump(chords_to_dict(chords), f, indent=2, sort_keys=True)


def load_chords(filename):
    """Read chords from a JSON document written by write_chords_json.

    Returns
    -------
    list(reebcli.reeb_flow.TransverseChord)
    """
    with open(filename, 'r') as f:
        obj = json.load(f)
    return [TransverseChord.from_dict(c) for c in obj.get('chords', [])]
