//! Minkowski events, pure Lorentz boosts and the causelike order tag.
//!
//! Units have `c = 1` and the metric signature is `(+, −, −, −)`.
//!
//! Nothing here derives an [`OrderTag`] from coordinates: for causally
//! separated events the time order depends on the frame, and the order of
//! the associated jump hypersurfaces is an input hypothesis.

use std::fmt;

use crate::error::{Error, Result};
use crate::EPS_NUM;

/// Which quantum-jump hypersurface comes first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OrderTag {
    /// The L-measurement jump precedes the R-measurement jump.
    LFirst,
    /// The R-measurement jump precedes the L-measurement jump.
    RFirst,
}

impl OrderTag {
    pub const BOTH: [OrderTag; 2] = [OrderTag::LFirst, OrderTag::RFirst];

    pub fn reversed(self) -> OrderTag {
        match self {
            OrderTag::LFirst => OrderTag::RFirst,
            OrderTag::RFirst => OrderTag::LFirst,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            OrderTag::LFirst => "l-first",
            OrderTag::RFirst => "r-first",
        }
    }
}

impl fmt::Display for OrderTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Event {
    pub fn new(t: f64, x: f64, y: f64, z: f64) -> Result<Self> {
        if ![t, x, y, z].iter().all(|c| c.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { t, x, y, z })
    }

    pub fn origin() -> Self {
        Self {
            t: 0.0,
            x: 0.0,
            y: 0.0,
            z: 0.0,
        }
    }

    pub fn from_array(c: [f64; 4]) -> Result<Self> {
        Self::new(c[0], c[1], c[2], c[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.t, self.x, self.y, self.z]
    }

    fn spatial(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

/// Pure boost with velocity `v` (`|v| < 1`) followed by a translation `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Boost {
    velocity: [f64; 3],
    offset: [f64; 4],
}

/// Largest admissible boost speed.
pub const MAX_SPEED: f64 = 1.0 - 1e-12;

impl Boost {
    pub fn new(velocity: [f64; 3], offset: [f64; 4]) -> Result<Self> {
        if !velocity.iter().chain(offset.iter()).all(|c| c.is_finite()) {
            return Err(Error::NonFinite);
        }
        let speed = norm3(velocity);
        if speed >= MAX_SPEED {
            return Err(Error::Superluminal(speed));
        }
        Ok(Self { velocity, offset })
    }

    pub fn identity() -> Self {
        Self {
            velocity: [0.0; 3],
            offset: [0.0; 4],
        }
    }

    pub fn velocity(&self) -> [f64; 3] {
        self.velocity
    }

    pub fn offset(&self) -> [f64; 4] {
        self.offset
    }

    pub fn speed(&self) -> f64 {
        norm3(self.velocity)
    }

    pub fn gamma(&self) -> f64 {
        1.0 / (1.0 - dot3(self.velocity, self.velocity)).sqrt()
    }

    /// `x̄ = Λ x + a`
    pub fn apply(&self, p: &Event) -> Event {
        let v = self.velocity;
        let v2 = dot3(v, v);
        let r = p.spatial();
        let (t, spatial) = if v2 == 0.0 {
            (p.t, r)
        } else {
            let g = self.gamma();
            let vr = dot3(v, r);
            let k = (g - 1.0) * vr / v2 - g * p.t;
            (g * (p.t - vr), [r[0] + k * v[0], r[1] + k * v[1], r[2] + k * v[2]])
        };
        let a = self.offset;
        Event {
            t: t + a[0],
            x: spatial[0] + a[1],
            y: spatial[1] + a[2],
            z: spatial[2] + a[3],
        }
    }
}

pub fn apply_boost(b: &Boost, p: &Event) -> Event {
    b.apply(p)
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm3(a: [f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}

fn separation(p: &Event, q: &Event) -> (f64, [f64; 3]) {
    (p.t - q.t, [p.x - q.x, p.y - q.y, p.z - q.z])
}

/// `(Δt)² − |Δx|²`
pub fn interval(p: &Event, q: &Event) -> f64 {
    let (dt, dx) = separation(p, q);
    dt * dt - dot3(dx, dx)
}

/// Strictly spacelike separation. Pairs on the light cone count as causally
/// connected; the cone is widened by a relative `EPS_NUM` so that rounding
/// cannot turn a lightlike pair spacelike.
pub fn causally_separated(p: &Event, q: &Event) -> bool {
    let (dt, dx) = separation(p, q);
    let scale = dt * dt + dot3(dx, dx);
    interval(p, q) < -EPS_NUM * scale
}

/// Overshoot of the reversing boost speed past `|Δt| / |Δx|`.
pub const REVERSAL_OVERSHOOT: f64 = 0.5;

/// A boost along the spatial separation under which the time order of two
/// causally separated events is the opposite of the fiducial one.
///
/// With `s = |Δt|/|Δx| < 1` the speed is `min((1 + κ)s, (1 + s)/2)`, κ = 0.5.
/// For simultaneous events any speed works and `κ` itself is used; the
/// returned boost then makes the two times differ.
pub fn find_order_reversing_boost(p: &Event, q: &Event) -> Result<Boost> {
    if !causally_separated(p, q) {
        return Err(Error::NotSpacelike(interval(p, q)));
    }
    let (dt, dx) = separation(p, q);
    let dist = norm3(dx);
    let dir = [dx[0] / dist, dx[1] / dist, dx[2] / dist];
    let s = dt.abs() / dist;
    let (speed, sign) = if dt == 0.0 {
        (REVERSAL_OVERSHOOT, 1.0)
    } else {
        (((1.0 + REVERSAL_OVERSHOOT) * s).min(0.5 * (1.0 + s)), dt.signum())
    };
    let v = sign * speed;
    Boost::new([v * dir[0], v * dir[1], v * dir[2]], [0.0; 4])
}
