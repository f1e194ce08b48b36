"""
This file is part of intuiphys.

intuiphys is free software: you can redistribute it and/or modify it
under the terms of the GNU General Public License as published by the
Free Software Foundation, either version 3 of the License, or (at your
option) any later version.

intuiphys is distributed in the hope that it will be useful, but
WITHOUT ANY WARRANTY; without even the implied warranty of
MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the GNU
General Public License for more details.

You should have received a copy of the GNU General Public License
along with intuiphys.  If not, see <https://www.gnu.org/licenses/>.

Copyright 2024-2026
The intuiphys developers
"""

import enum
import math
import logging
from collections import namedtuple
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np
from scipy import ndimage

log = logging.getLogger(__name__)

# separation tolerance (px) for contact and validity checks
TOLERANCE = 1e-6

DEFAULT_SUBSTEPS = 4
DEFAULT_RADIUS = 2.0

# a ball rattling in a concave corner can generate several contacts in
# one substep; past this it is left in place for the remainder
MAX_EVENTS_PER_SUBSTEP = 16

# sphere tracing against curved shapes
TRACE_TOLERANCE = 1e-4
TRACE_STEP = 0.7
TRACE_MIN_ADVANCE = 0.05
TRACE_MAX_ITER = 64

# overlap accepted against interpolated mask geometry
MASK_TOLERANCE = 0.05

##################################################


class PhysicsError(Exception):
    """Base class for intuiphys physics exceptions."""
    def __init__(self, msg):
        self.msg = msg

    def __str__(self):
        return self.msg


class InvalidState(PhysicsError):
    pass


class EmptyMask(PhysicsError):
    pass

##################################################


class ObstacleType(enum.Enum):
    """How a ball interacts with an obstacle."""
    BOUNCE = 'B'
    ABOVE = 'A'
    UNDER = 'U'

    @property
    def label(self):
        return self.name.lower()


@dataclass(frozen=True)
class BoardSpec:
    """Board lattice with a wall band around the playable interior.

    Pixel centres sit at integer coordinates; positions are (x, y) =
    (column, row).  The interior wall faces are half a pixel outside
    the outermost interior cells.

    """
    height: int
    width: int
    wall_thickness: int = 2

    def __post_init__(self):
        if self.height < 16 or self.width < 16:
            raise PhysicsError(f"Board must be at least 16x16, got {self.height}x{self.width}.")
        if self.wall_thickness < 1:
            raise PhysicsError("Wall thickness must be at least 1.")
        if min(self.height, self.width) - 2 * self.wall_thickness < 1:
            raise PhysicsError("Board has no playable interior.")

    @property
    def shape(self):
        return (self.height, self.width)

    @property
    def diagonal(self):
        return math.hypot(self.height, self.width)

    @property
    def interior(self):
        """Interior wall faces as (x_min, y_min, x_max, y_max)."""
        w = self.wall_thickness
        return (w - 0.5, w - 0.5, self.width - w - 0.5, self.height - w - 0.5)

    def wall_mask(self):
        """Boolean H x W mask of the wall band."""
        w = self.wall_thickness
        mask = np.ones(self.shape, dtype=bool)
        mask[w:self.height - w, w:self.width - w] = False
        return mask

    def grid(self):
        """Pixel centre coordinates (xx, yy), each H x W."""
        yy, xx = np.mgrid[0:self.height, 0:self.width]
        return xx.astype(np.float64), yy.astype(np.float64)

    def contains(self, x, y, margin=0.0):
        x_min, y_min, x_max, y_max = self.interior
        return (x_min + margin <= x <= x_max - margin and
                y_min + margin <= y <= y_max - margin)

##################################################
# obstacle shapes


@dataclass(frozen=True)
class RotatedRect:
    """Rectangle with centre, half extents and rotation (radians)."""
    center: tuple
    half_extents: tuple
    angle: float = 0.0

    tolerance = TOLERANCE

    def __post_init__(self):
        if min(self.half_extents) <= 0:
            raise PhysicsError("Rectangle half extents must be positive.")

    @cached_property
    def _cos(self):
        return math.cos(self.angle)

    @cached_property
    def _sin(self):
        return math.sin(self.angle)

    @property
    def centroid(self):
        return tuple(self.center)

    def to_local(self, x, y):
        dx = x - self.center[0]
        dy = y - self.center[1]
        return self._cos * dx + self._sin * dy, -self._sin * dx + self._cos * dy

    def to_world(self, lx, ly):
        """Rotate a local vector into the world frame."""
        return self._cos * lx - self._sin * ly, self._sin * lx + self._cos * ly

    def bounds(self):
        hx, hy = self.half_extents
        c, s = abs(self._cos), abs(self._sin)
        ex = c * hx + s * hy
        ey = s * hx + c * hy
        cx, cy = self.center
        return (cx - ex, cy - ey, cx + ex, cy + ey)

    def occupancy(self, board, grow=0.0):
        """Cells whose centre lies inside the (optionally grown) rectangle."""
        xx, yy = board.grid()
        dx = xx - self.center[0]
        dy = yy - self.center[1]
        lx = self._cos * dx + self._sin * dy
        ly = -self._sin * dx + self._cos * dy
        hx, hy = self.half_extents
        return (np.abs(lx) <= hx + grow) & (np.abs(ly) <= hy + grow)

    def distance(self, x, y):
        """Signed distance from point to rectangle and outward unit normal."""
        hx, hy = self.half_extents
        lx, ly = self.to_local(x, y)
        ax = abs(lx) - hx
        ay = abs(ly) - hy
        if ax > 0 or ay > 0:
            ddx = lx - min(max(lx, -hx), hx)
            ddy = ly - min(max(ly, -hy), hy)
            d = math.hypot(ddx, ddy)
            nx, ny = ddx / d, ddy / d
        elif ax > ay:
            d = ax
            nx, ny = math.copysign(1.0, lx), 0.0
        else:
            d = ay
            nx, ny = 0.0, math.copysign(1.0, ly)
        wx, wy = self.to_world(nx, ny)
        return d, wx, wy

    def time_of_impact(self, x, y, vx, vy, radius, t_max):
        """Earliest time in [0, t_max] the moving disc touches the rectangle.

        Returns (t, nx, ny) with the outward world normal at contact, or
        None.  Only approaching contacts count.

        """
        hx, hy = self.half_extents
        qx, qy = self.to_local(x, y)
        dx = self._cos * vx + self._sin * vy
        dy = -self._sin * vx + self._cos * vy
        r = radius
        best = None

        def consider(t, nx, ny):
            nonlocal best
            if t > t_max:
                return
            t = max(t, 0.0)
            if best is None or t < best[0]:
                best = (t, nx, ny)

        # faces
        if dx < 0 and qx >= hx + r - TOLERANCE:
            t = (hx + r - qx) / dx
            if abs(qy + t * dy) <= hy:
                consider(t, 1.0, 0.0)
        if dx > 0 and qx <= -hx - r + TOLERANCE:
            t = (-hx - r - qx) / dx
            if abs(qy + t * dy) <= hy:
                consider(t, -1.0, 0.0)
        if dy < 0 and qy >= hy + r - TOLERANCE:
            t = (hy + r - qy) / dy
            if abs(qx + t * dx) <= hx:
                consider(t, 0.0, 1.0)
        if dy > 0 and qy <= -hy - r + TOLERANCE:
            t = (-hy - r - qy) / dy
            if abs(qx + t * dx) <= hx:
                consider(t, 0.0, -1.0)

        # corners
        a = dx * dx + dy * dy
        if a > 0:
            for cx in (-hx, hx):
                for cy in (-hy, hy):
                    ox = qx - cx
                    oy = qy - cy
                    b = ox * dx + oy * dy
                    if b >= 0:
                        continue
                    c = ox * ox + oy * oy - r * r
                    disc = b * b - a * c
                    if disc < 0:
                        continue
                    t = (-b - math.sqrt(disc)) / a
                    if t < 0 and math.sqrt(max(ox * ox + oy * oy, 0.0)) < r - TOLERANCE:
                        continue
                    px = ox + max(t, 0.0) * dx
                    py = oy + max(t, 0.0) * dy
                    if px * cx < 0 or py * cy < 0:
                        continue
                    norm = math.hypot(px, py)
                    consider(t, px / norm, py / norm)

        if best is None:
            return None
        t, nx, ny = best
        wx, wy = self.to_world(nx, ny)
        return t, wx, wy


class MaskShape:
    """Arbitrary obstacle given by a board-sized occupancy mask.

    Collision geometry comes from the signed distance field, sampled
    with bilinear interpolation; normals are central differences of
    the interpolated field.

    """
    tolerance = MASK_TOLERANCE

    def __init__(self, occupancy, sdf=None, anchor=None):
        self.occupancy = np.asarray(occupancy, dtype=bool)
        if sdf is None:
            sdf = sdf_from_mask(self.occupancy)
        self.sdf = np.asarray(sdf, dtype=np.float64)
        if anchor is None:
            rows, cols = np.nonzero(self.occupancy)
            anchor = (float(cols.mean()), float(rows.mean()))
        self.anchor = (float(anchor[0]), float(anchor[1]))
        rows, cols = np.nonzero(self.occupancy)
        self._bounds = (cols.min() - 0.5, rows.min() - 0.5,
                        cols.max() + 0.5, rows.max() + 0.5)

    def __repr__(self):
        return '<intuiphys {} anchor={} cells={}>'.format(
            self.__class__.__name__, self.anchor, int(self.occupancy.sum()))

    def __eq__(self, other):
        if not isinstance(other, MaskShape):
            return NotImplemented
        return (self.anchor == other.anchor and
                np.array_equal(self.occupancy, other.occupancy) and
                np.array_equal(self.sdf, other.sdf))

    __hash__ = None

    @property
    def centroid(self):
        return self.anchor

    def bounds(self):
        return self._bounds

    def occupancy_on(self, board, grow=0.0):
        if grow <= 0:
            return self.occupancy.copy()
        return self.sdf <= grow

    def sample(self, x, y):
        """Bilinearly interpolated signed distance at (x, y)."""
        h, w = self.sdf.shape
        x = min(max(x, 0.0), w - 1.0)
        y = min(max(y, 0.0), h - 1.0)
        x0 = min(int(x), w - 2) if w > 1 else 0
        y0 = min(int(y), h - 2) if h > 1 else 0
        fx = x - x0
        fy = y - y0
        s = self.sdf
        top = s[y0, x0] * (1 - fx) + s[y0, x0 + 1] * fx
        bottom = s[y0 + 1, x0] * (1 - fx) + s[y0 + 1, x0 + 1] * fx
        return top * (1 - fy) + bottom * fy

    def normal(self, x, y, h=0.5):
        gx = (self.sample(x + h, y) - self.sample(x - h, y)) / (2 * h)
        gy = (self.sample(x, y + h) - self.sample(x, y - h)) / (2 * h)
        norm = math.hypot(gx, gy)
        if norm == 0:
            # flat plateau: push away from the anchor
            gx = x - self.anchor[0]
            gy = y - self.anchor[1]
            norm = math.hypot(gx, gy) or 1.0
            if gx == 0 and gy == 0:
                gx = 1.0
        return gx / norm, gy / norm

    def distance(self, x, y):
        nx, ny = self.normal(x, y)
        return self.sample(x, y), nx, ny

    def time_of_impact(self, x, y, vx, vy, radius, t_max):
        speed = math.hypot(vx, vy)
        if speed == 0:
            return None
        t = 0.0
        for _ in range(TRACE_MAX_ITER):
            px = x + vx * t
            py = y + vy * t
            gap = self.sample(px, py) - radius
            if gap <= TRACE_TOLERANCE:
                nx, ny = self.normal(px, py)
                if vx * nx + vy * ny < 0:
                    return t, nx, ny
                t += TRACE_MIN_ADVANCE / speed
            else:
                t += TRACE_STEP * gap / speed
            if t > t_max:
                return None
        return None


def sdf_from_mask(occupancy):
    """Signed Euclidean distance (px) of an occupancy mask.

    Distances are measured between cell centres and shifted by half a
    cell, so the zero level lies halfway between an occupied and a
    free cell: an isolated occupied cell has value -0.5 and a free
    cell k cells away has k - 0.5.  Cells outside the grid count as
    free.

    """
    occupancy = np.asarray(occupancy, dtype=bool)
    if occupancy.ndim != 2 or not occupancy.any():
        raise EmptyMask("Occupancy mask is empty.")
    padded = np.pad(occupancy, 1, constant_values=False)
    outside = ndimage.distance_transform_edt(~padded)
    inside = ndimage.distance_transform_edt(padded)
    sdf = np.where(padded, 0.5 - inside, outside - 0.5)
    return sdf[1:-1, 1:-1]

##################################################


@dataclass(frozen=True)
class Obstacle:
    shape: object
    kind: ObstacleType
    color_index: int

    @property
    def solid(self):
        return self.kind is ObstacleType.BOUNCE

    def occupancy(self, board):
        if isinstance(self.shape, MaskShape):
            return self.shape.occupancy.copy()
        return self.shape.occupancy(board)


@dataclass(frozen=True)
class SolidBackground:
    color_index: int


@dataclass(frozen=True)
class TextureBackground:
    texture_id: int


@dataclass(frozen=True)
class Scenario:
    board: BoardSpec
    obstacles: tuple = ()
    background: object = SolidBackground(0)
    seed: int = 0

    def without_obstacles(self):
        return replace(self, obstacles=())

    def with_kind(self, kind):
        """Copy with every obstacle set to `kind`."""
        return replace(self, obstacles=tuple(
            replace(o, kind=kind) for o in self.obstacles))


@dataclass(frozen=True)
class BallState:
    position: tuple
    velocity: tuple
    radius: float = DEFAULT_RADIUS

    @property
    def speed(self):
        return math.hypot(*self.velocity)


# target is an obstacle index, 'wall' or 'ball'
Contact = namedtuple('Contact', ['frame', 'ball', 'target'])


class Run:
    """A scenario with per-ball trajectories of T frames."""

    def __init__(self, scenario, trajectories, velocities, radii,
                 final_velocities=None, events=()):
        self.scenario = scenario
        self.trajectories = np.asarray(trajectories, dtype=np.float64)
        self.velocities = np.asarray(velocities, dtype=np.float64)
        self.radii = tuple(float(r) for r in radii)
        if final_velocities is None:
            final_velocities = self.velocities
        self.final_velocities = np.asarray(final_velocities, dtype=np.float64)
        self.events = tuple(Contact(*e) for e in events)
        if self.trajectories.ndim != 3 or self.trajectories.shape[2] != 2:
            raise PhysicsError("Trajectories must have shape (balls, T, 2).")
        if self.T < 1:
            raise PhysicsError("Run must have at least one frame.")

    def __repr__(self):
        return '<intuiphys {} balls={} T={}>'.format(
            self.__class__.__name__, self.n_balls, self.T)

    def __eq__(self, other):
        if not isinstance(other, Run):
            return NotImplemented
        return (self.scenario == other.scenario and
                np.array_equal(self.trajectories, other.trajectories) and
                np.array_equal(self.velocities, other.velocities) and
                np.array_equal(self.final_velocities, other.final_velocities) and
                self.radii == other.radii and
                self.events == other.events)

    __hash__ = None

    @property
    def n_balls(self):
        return self.trajectories.shape[0]

    @property
    def T(self):
        return self.trajectories.shape[1]

    def positions(self, t):
        """Ball positions at frame t as an (n_balls, 2) array."""
        return self.trajectories[:, t, :]

    def truncate(self, T):
        """The first T frames of this run."""
        if not 1 <= T <= self.T:
            raise PhysicsError(f"Cannot truncate a {self.T}-frame run to {T} frames.")
        return Run(self.scenario, self.trajectories[:, :T], self.velocities, self.radii,
                   events=[e for e in self.events if e.frame < T])

    def initial_states(self):
        return [BallState(tuple(self.trajectories[i, 0]), tuple(self.velocities[i]), r)
                for i, r in enumerate(self.radii)]

    def first_contact(self, kinds=(ObstacleType.BOUNCE,)):
        """Frame of the first contact with an obstacle of one of `kinds`, or None."""
        for event in self.events:
            if isinstance(event.target, int) and \
                    self.scenario.obstacles[event.target].kind in kinds:
                return event.frame
        return None

##################################################
# integrator


class _Body:
    __slots__ = ('x', 'y', 'vx', 'vy', 'r')

    def __init__(self, state):
        self.x, self.y = (float(v) for v in state.position)
        self.vx, self.vy = (float(v) for v in state.velocity)
        self.r = float(state.radius)

    def state(self):
        return BallState((self.x, self.y), (self.vx, self.vy), self.r)


class _World:
    """Collision geometry of a scenario: walls plus Bounce obstacles."""

    def __init__(self, scenario):
        self.scenario = scenario
        self.interior = scenario.board.interior
        self.solids = [(i, o.shape) for i, o in enumerate(scenario.obstacles) if o.solid]

    def check(self, body, index):
        if not body.r > 0:
            raise InvalidState(f"Ball {index} has non-positive radius {body.r}.")
        x_min, y_min, x_max, y_max = self.interior
        r = body.r
        if (body.x < x_min + r - TOLERANCE or body.x > x_max - r + TOLERANCE or
                body.y < y_min + r - TOLERANCE or body.y > y_max - r + TOLERANCE):
            raise InvalidState(f"Ball {index} at ({body.x}, {body.y}) overlaps the wall.")
        for j, shape in self.solids:
            d, _, _ = shape.distance(body.x, body.y)
            if d < r - shape.tolerance:
                raise InvalidState(f"Ball {index} at ({body.x}, {body.y}) overlaps obstacle {j}.")

    def _wall_contact(self, body, t_max):
        x_min, y_min, x_max, y_max = self.interior
        r = body.r
        best = None
        for pos, vel, lo, hi, axis in ((body.x, body.vx, x_min + r, x_max - r, 0),
                                       (body.y, body.vy, y_min + r, y_max - r, 1)):
            if vel > 0:
                t, sign = (hi - pos) / vel, -1.0
            elif vel < 0:
                t, sign = (lo - pos) / vel, 1.0
            else:
                continue
            t = max(t, 0.0)
            if t <= t_max and (best is None or t < best[0]):
                normal = (sign, 0.0) if axis == 0 else (0.0, sign)
                best = (t, normal[0], normal[1], 'wall')
        return best

    def first_contact(self, body, t_max):
        best = self._wall_contact(body, t_max)
        if best is not None:
            t_max = best[0]
        ex = body.x + body.vx * t_max
        ey = body.y + body.vy * t_max
        lo_x = min(body.x, ex) - body.r
        hi_x = max(body.x, ex) + body.r
        lo_y = min(body.y, ey) - body.r
        hi_y = max(body.y, ey) + body.r
        for index, shape in self.solids:
            bx0, by0, bx1, by1 = shape.bounds()
            if hi_x < bx0 - 1 or lo_x > bx1 + 1 or hi_y < by0 - 1 or lo_y > by1 + 1:
                continue
            hit = shape.time_of_impact(body.x, body.y, body.vx, body.vy, body.r, t_max)
            if hit is not None and (best is None or hit[0] < best[0]):
                best = (hit[0], hit[1], hit[2], index)
                t_max = hit[0]
        return best

    def advance(self, body, dt, frame, ball, events):
        remaining = dt
        for _ in range(MAX_EVENTS_PER_SUBSTEP):
            hit = self.first_contact(body, remaining)
            if hit is None:
                body.x += body.vx * remaining
                body.y += body.vy * remaining
                return
            t, nx, ny, target = hit
            body.x += body.vx * t
            body.y += body.vy * t
            dot = body.vx * nx + body.vy * ny
            body.vx -= 2.0 * dot * nx
            body.vy -= 2.0 * dot * ny
            remaining -= t
            events.append(Contact(frame, ball, target))
        log.debug("ball %d pinned after %d contacts in frame %d", ball, MAX_EVENTS_PER_SUBSTEP, frame)

    def constrain(self, body):
        """Project a penetrating ball back to contact separation."""
        x_min, y_min, x_max, y_max = self.interior
        r = body.r
        for _ in range(8):
            moved = False
            for _, shape in self.solids:
                d, nx, ny = shape.distance(body.x, body.y)
                if d < r:
                    body.x += (r - d) * nx
                    body.y += (r - d) * ny
                    moved = True
            if not moved:
                break
        body.x = min(max(body.x, x_min + r), x_max - r)
        body.y = min(max(body.y, y_min + r), y_max - r)

    def collide_pair(self, a, b, dt):
        """Equal-mass elastic exchange if a and b overlap and approach.

        The pair is rewound to the touching time, velocity components
        along the line of centres are exchanged, and both advance again.

        """
        px = b.x - a.x
        py = b.y - a.y
        R = a.r + b.r
        dist2 = px * px + py * py
        if dist2 >= R * R:
            return False
        wx = b.vx - a.vx
        wy = b.vy - a.vy
        pw = px * wx + py * wy
        if pw >= 0:
            return False
        ww = wx * wx + wy * wy
        tau = (pw + math.sqrt(max(pw * pw - ww * (dist2 - R * R), 0.0))) / ww
        tau = min(max(tau, 0.0), dt)
        a.x -= a.vx * tau
        a.y -= a.vy * tau
        b.x -= b.vx * tau
        b.y -= b.vy * tau
        nx = b.x - a.x
        ny = b.y - a.y
        norm = math.hypot(nx, ny)
        if norm == 0:
            nx, ny = 1.0, 0.0
        else:
            nx, ny = nx / norm, ny / norm
        an = a.vx * nx + a.vy * ny
        bn = b.vx * nx + b.vy * ny
        a.vx += (bn - an) * nx
        a.vy += (bn - an) * ny
        b.vx += (an - bn) * nx
        b.vy += (an - bn) * ny
        a.x += a.vx * tau
        a.y += a.vy * tau
        b.x += b.vx * tau
        b.y += b.vy * tau
        return True

    def frame(self, bodies, substeps, frame, events):
        """Advance all bodies by one frame of unit duration."""
        n = substeps
        for body in bodies:
            speed = math.hypot(body.vx, body.vy)
            if speed > 0:
                n = max(n, math.ceil(speed / body.r))
        if n > substeps:
            log.debug("frame %d: %d substeps to keep displacement under radius", frame, n)
        dt = 1.0 / n
        for _ in range(n):
            for i, body in enumerate(bodies):
                self.advance(body, dt, frame, i, events)
                self.constrain(body)
            for i in range(len(bodies)):
                for j in range(i + 1, len(bodies)):
                    if self.collide_pair(bodies[i], bodies[j], dt):
                        events.append(Contact(frame, i, 'ball'))
                        events.append(Contact(frame, j, 'ball'))
                        self.constrain(bodies[i])
                        self.constrain(bodies[j])


def _bodies(world, balls):
    bodies = [_Body(b) for b in balls]
    for i, body in enumerate(bodies):
        world.check(body, i)
    return bodies


def step(scenario, balls, substeps=DEFAULT_SUBSTEPS):
    """Advance balls by one frame.

    The frame is split into `substeps` equal sub-advances (more if a
    ball would otherwise move further than its radius in one).  Walls
    and Bounce obstacles reflect velocities specularly; Above and
    Under obstacles are ignored.  Raises InvalidState if a ball starts
    out overlapping a wall or a Bounce obstacle.

    """
    if substeps < 1:
        raise PhysicsError("substeps must be at least 1.")
    world = _World(scenario)
    bodies = _bodies(world, balls)
    world.frame(bodies, substeps, 1, [])
    return [b.state() for b in bodies]


def simulate(scenario, initial, T, substeps=DEFAULT_SUBSTEPS):
    """Simulate T frames (frame 0 is the initial state) and return a Run."""
    if T < 1:
        raise PhysicsError("T must be at least 1.")
    if substeps < 1:
        raise PhysicsError("substeps must be at least 1.")
    world = _World(scenario)
    bodies = _bodies(world, initial)
    trajectories = np.empty((len(bodies), T, 2), dtype=np.float64)
    velocities = np.array([[b.vx, b.vy] for b in bodies], dtype=np.float64).reshape(-1, 2)
    events = []
    for i, body in enumerate(bodies):
        trajectories[i, 0] = (body.x, body.y)
    for t in range(1, T):
        world.frame(bodies, substeps, t, events)
        for i, body in enumerate(bodies):
            trajectories[i, t] = (body.x, body.y)
    final = np.array([[b.vx, b.vy] for b in bodies], dtype=np.float64).reshape(-1, 2)
    return Run(scenario, trajectories, velocities, [b.r for b in bodies],
               final_velocities=final, events=events)


def simulate_without_obstacles(scenario, initial, T, substeps=DEFAULT_SUBSTEPS):
    """Simulate as if the board held no obstacles (walls retained)."""
    return simulate(scenario.without_obstacles(), initial, T, substeps=substeps)


def encountered_kinds(run, ball=None):
    """Obstacle kinds a run's balls interacted with.

    Bounce obstacles count on contact; Above and Under obstacles when
    a ball's disc overlaps them at some frame.

    """
    balls = range(run.n_balls) if ball is None else [ball]
    obstacles = run.scenario.obstacles
    kinds = set()
    for event in run.events:
        if event.ball in balls and isinstance(event.target, int):
            kinds.add(obstacles[event.target].kind)
    for index, obstacle in enumerate(obstacles):
        if obstacle.solid or obstacle.kind in kinds:
            continue
        for b in balls:
            r = run.radii[b]
            if any(obstacle.shape.distance(x, y)[0] < r for x, y in run.trajectories[b]):
                kinds.add(obstacle.kind)
                break
    return kinds
