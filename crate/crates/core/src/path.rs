//! The valley path from a stable fixed point to an adjacent saddle and the
//! one-dimensional noisy map along it.
//!
//! Arclength is measured from the fixed point (`s = 0`) toward the `+y`
//! saddle (`s = s_sp`). The escape domain `[-s_sp, s_sp]` is completed by
//! mirror symmetry, and beyond the saddles the reduced potential continues
//! as a downward parabola with the curvature found at the saddle.

use std::io::Write;

use crate::dynamics::{
    fixed_points, potential, potential_grad, potential_hessian, CriticalKind, CriticalPoint,
    MapParams, State2D,
};
use crate::error::{Error, Result};
use crate::noise::NoiseStream;
use crate::scalar::{lit, Real};

/// How the path between the fixed point and the saddle is constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathMethod {
    /// Unstable manifold of the saddle, followed down to the fixed point.
    UnstableManifold,
    /// Straight segment from the fixed point to the saddle.
    Chord,
}

#[derive(Debug, Clone, Copy)]
pub struct PathOptions {
    pub method: PathMethod,
    /// Maximum arclength spacing of the resampled vertices.
    pub spacing: f64,
    /// Initial offset from the saddle along its unstable direction.
    pub delta: f64,
    /// Arrival tolerance at the fixed point.
    pub arrival: f64,
}

impl Default for PathOptions {
    fn default() -> Self {
        Self {
            method: PathMethod::UnstableManifold,
            spacing: 1e-3,
            delta: 1e-6,
            arrival: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ValleyPath<T> {
    /// Rescaled-frame vertices from the fixed point to the saddle.
    pub vertices: Vec<State2D<T>>,
    /// Cumulative arclength, uniformly spaced, starting at zero.
    pub arclength: Vec<T>,
    /// Unit tangent per vertex, pointing toward the saddle.
    pub tangents: Vec<(T, T)>,
}

impl<T: Real> ValleyPath<T> {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn total_length(&self) -> T {
        *self.arclength.last().expect("non-empty path")
    }

    /// Reflection through the x axis: the path to the mirrored saddle.
    pub fn mirrored(&self) -> Self {
        Self {
            vertices: self.vertices.iter().map(State2D::mirrored).collect(),
            arclength: self.arclength.clone(),
            tangents: self.tangents.iter().map(|&(tx, ty)| (tx, -ty)).collect(),
        }
    }

    /// CSV with columns `s,x,y,U`.
    pub fn write_csv<W: Write>(&self, p: &MapParams<T>, mut w: W) -> std::io::Result<()> {
        writeln!(w, "s,x,y,U")?;
        for (v, s) in self.vertices.iter().zip(&self.arclength) {
            writeln!(w, "{},{},{},{}", s, v.x, v.y, potential(v, p))?;
        }
        Ok(())
    }
}

/// Builds the path from `fp` to `sp`.
pub fn trace_valley_path<T: Real>(
    p: &MapParams<T>,
    fp: &CriticalPoint<T>,
    sp: &CriticalPoint<T>,
    opts: &PathOptions,
) -> Result<ValleyPath<T>> {
    if fp.kind != CriticalKind::Stable || sp.kind != CriticalKind::Saddle {
        return Err(Error::InvalidParameter {
            name: "path endpoints",
            reason: format!(
                "need a stable point and a saddle, got {:?} and {:?}",
                fp.kind, sp.kind
            ),
        });
    }
    let polyline = match opts.method {
        PathMethod::Chord => vec![fp.location, sp.location],
        PathMethod::UnstableManifold => follow_unstable_manifold(p, fp, sp, opts)?,
    };
    Ok(resample(&polyline, lit(opts.spacing)))
}

fn follow_unstable_manifold<T: Real>(
    p: &MapParams<T>,
    fp: &CriticalPoint<T>,
    sp: &CriticalPoint<T>,
    opts: &PathOptions,
) -> Result<Vec<State2D<T>>> {
    let others: Vec<State2D<T>> = fixed_points(p)
        .stable()
        .map(|c| c.location)
        .filter(|z| z.distance(&fp.location) > lit(1e-6))
        .collect();
    let (mut vx, mut vy) = sp.unstable_direction(p);
    let toward = (fp.location.x - sp.location.x, fp.location.y - sp.location.y);
    if vx * toward.0 + vy * toward.1 < T::zero() {
        vx = -vx;
        vy = -vy;
    }
    let max_move: T = lit(opts.spacing * 0.25);
    let delta: T = lit(opts.delta);
    let arrival: T = lit(opts.arrival);
    let capture: T = lit(1e-4);
    for sign in [T::one(), -T::one()] {
        let mut z = State2D::rescaled(
            sp.location.x + sign * delta * vx,
            sp.location.y + sign * delta * vy,
        );
        let mut line = vec![sp.location, z];
        let mut arrived = false;
        for _ in 0..5_000_000 {
            let g = potential_grad(&z, p);
            let (dx, dy) = (-p.tau1 * g.0, -p.tau2 * g.1);
            let step = dx.hypot(dy);
            // fractional steps keep consecutive vertices finer than the resampling grid
            let k = (step / max_move).ceil().max(T::one());
            z = State2D::rescaled(z.x + dx / k, z.y + dy / k);
            line.push(z);
            if z.distance(&fp.location) <= arrival {
                arrived = true;
                break;
            }
            if others.iter().any(|o| o.distance(&z) <= capture) {
                break;
            }
        }
        if arrived {
            *line.last_mut().expect("non-empty") = fp.location;
            line.reverse();
            return Ok(line);
        }
        log::debug!(
            "unstable branch {} missed the fixed point, flipping",
            to_sign(sign)
        );
    }
    Err(Error::WrongBranch)
}

fn to_sign<T: Real>(s: T) -> &'static str {
    if s > T::zero() {
        "+"
    } else {
        "-"
    }
}

/// Uniform-arclength resampling of a polyline by linear interpolation.
fn resample<T: Real>(line: &[State2D<T>], max_spacing: T) -> ValleyPath<T> {
    let mut pts: Vec<State2D<T>> = Vec::with_capacity(line.len());
    let mut cum: Vec<T> = Vec::with_capacity(line.len());
    for z in line {
        match pts.last() {
            Some(prev) => {
                let d = prev.distance(z);
                if d > T::zero() {
                    cum.push(*cum.last().expect("non-empty") + d);
                    pts.push(*z);
                }
            }
            None => {
                cum.push(T::zero());
                pts.push(*z);
            }
        }
    }
    let total = *cum.last().expect("non-empty polyline");
    let n = (total / max_spacing).ceil().to_usize().unwrap_or(1).max(1);
    let h = total / T::from_usize(n).expect("grid size");
    let seg_tangent = |j: usize| {
        let (a, b) = (pts[j], pts[j + 1]);
        let d = a.distance(&b);
        ((b.x - a.x) / d, (b.y - a.y) / d)
    };
    let mut vertices = Vec::with_capacity(n + 1);
    let mut arclength = Vec::with_capacity(n + 1);
    let mut tangents = Vec::with_capacity(n + 1);
    let mut j = 0;
    for i in 0..=n {
        let s = if i == n {
            total
        } else {
            h * T::from_usize(i).expect("index")
        };
        while j + 2 < pts.len() && cum[j + 1] < s {
            j += 1;
        }
        let w = ((s - cum[j]) / (cum[j + 1] - cum[j]))
            .max(T::zero())
            .min(T::one());
        let v = if i == 0 {
            pts[0]
        } else if i == n {
            pts[pts.len() - 1]
        } else {
            State2D::rescaled(
                pts[j].x + w * (pts[j + 1].x - pts[j].x),
                pts[j].y + w * (pts[j + 1].y - pts[j].y),
            )
        };
        vertices.push(v);
        arclength.push(s);
        tangents.push(seg_tangent(j));
    }
    ValleyPath {
        vertices,
        arclength,
        tangents,
    }
}

/// The one-dimensional noisy map `s' = s - tau U'(s) + xi` along a valley path.
#[derive(Debug, Clone)]
pub struct ReducedSystem<T> {
    pub path: ValleyPath<T>,
    /// Potential at each vertex.
    pub u_of_s: Vec<T>,
    /// Arclength derivative at each vertex.
    pub du_of_s: Vec<T>,
    /// Second arclength derivative at each vertex.
    pub d2u_of_s: Vec<T>,
    /// Effective step parameter (`tau2`).
    pub tau: T,
    pub s_fp: T,
    pub s_sp: T,
    spacing: T,
}

/// Tolerance for potential decreases along the path (rounding only).
const MONOTONE_SLACK: f64 = 1e-12;

impl<T: Real> ReducedSystem<T> {
    pub fn build(path: ValleyPath<T>, p: &MapParams<T>) -> Result<Self> {
        let n = path.len();
        if n < 3 {
            return Err(Error::InvalidParameter {
                name: "path",
                reason: format!("{n} vertices are too few"),
            });
        }
        let u: Vec<T> = path.vertices.iter().map(|v| potential(v, p)).collect();
        if let Some(i) = (1..n).find(|&i| u[i] < u[i - 1] - lit(MONOTONE_SLACK)) {
            return Err(Error::NonMonotonePath { index: i });
        }
        let h = path.arclength[1] - path.arclength[0];
        let two_h = h + h;
        let directional = |i: usize| {
            let g = potential_grad(&path.vertices[i], p);
            let t = path.tangents[i];
            g.0 * t.0 + g.1 * t.1
        };
        let mut du = vec![T::zero(); n];
        du[0] = directional(0);
        du[n - 1] = directional(n - 1);
        for i in 1..n - 1 {
            du[i] = (u[i + 1] - u[i - 1]) / two_h;
        }
        let mut d2u = vec![T::zero(); n];
        // mirror image through the fixed point: U(-h) = U(h)
        d2u[0] = (u[1] - u[0]) * lit(2.0) / (h * h);
        for i in 1..n - 1 {
            d2u[i] = (u[i + 1] - u[i] - u[i] + u[i - 1]) / (h * h);
        }
        // the gradient vanishes at the saddle, so the path curvature is t^T H t
        let hs = potential_hessian(&path.vertices[n - 1], p);
        let t = path.tangents[n - 1];
        d2u[n - 1] =
            t.0 * t.0 * hs[0][0] + lit::<T>(2.0) * t.0 * t.1 * hs[0][1] + t.1 * t.1 * hs[1][1];
        let s_sp = path.total_length();
        Ok(Self {
            path,
            u_of_s: u,
            du_of_s: du,
            d2u_of_s: d2u,
            tau: p.tau2,
            s_fp: T::zero(),
            s_sp,
            spacing: h,
        })
    }

    pub fn spacing(&self) -> T {
        self.spacing
    }

    /// `U(s_sp) - U(s_fp)`.
    pub fn barrier(&self) -> T {
        self.u_of_s[self.u_of_s.len() - 1] - self.u_of_s[0]
    }

    /// Curvature of the reduced potential at the fixed point.
    pub fn curvature_fp(&self) -> T {
        self.d2u_of_s[0]
    }

    /// Curvature at the saddle (negative).
    pub fn curvature_sp(&self) -> T {
        self.d2u_of_s[self.d2u_of_s.len() - 1]
    }

    /// Grid cell and offset for `0 <= r <= s_sp`.
    fn locate(&self, r: T) -> (usize, T) {
        let last = self.u_of_s.len() - 1;
        let x = r / self.spacing;
        let i = x.floor().to_usize().unwrap_or(0).min(last - 1);
        (i, x - T::from_usize(i).expect("index"))
    }

    /// Reduced potential, cubic Hermite inside the domain.
    pub fn potential_at(&self, s: T) -> T {
        let r = s.abs();
        if r >= self.s_sp {
            let d = r - self.s_sp;
            return self.u_of_s[self.u_of_s.len() - 1]
                + lit::<T>(0.5) * self.curvature_sp() * d * d;
        }
        let (i, w) = self.locate(r);
        let h = self.spacing;
        let (w2, w3) = (w * w, w * w * w);
        let two: T = lit(2.0);
        let three: T = lit(3.0);
        let h00 = two * w3 - three * w2 + T::one();
        let h10 = w3 - two * w2 + w;
        let h01 = -two * w3 + three * w2;
        let h11 = w3 - w2;
        h00 * self.u_of_s[i]
            + h10 * h * self.du_of_s[i]
            + h01 * self.u_of_s[i + 1]
            + h11 * h * self.du_of_s[i + 1]
    }

    /// `U'(s)` by linear interpolation, odd under `s -> -s`.
    pub fn derivative_at(&self, s: T) -> T {
        let r = s.abs();
        let d = if r >= self.s_sp {
            self.curvature_sp() * (r - self.s_sp)
        } else {
            let (i, w) = self.locate(r);
            self.du_of_s[i] + w * (self.du_of_s[i + 1] - self.du_of_s[i])
        };
        if s < T::zero() {
            -d
        } else {
            d
        }
    }

    /// `U''(s)` by linear interpolation, even under `s -> -s`.
    pub fn second_derivative_at(&self, s: T) -> T {
        let r = s.abs();
        if r >= self.s_sp {
            return self.curvature_sp();
        }
        let (i, w) = self.locate(r);
        self.d2u_of_s[i] + w * (self.d2u_of_s[i + 1] - self.d2u_of_s[i])
    }

    /// Noiseless part of one reduced step, `s - tau U'(s)`.
    #[inline]
    pub fn drift_map(&self, s: T) -> T {
        s - self.tau * self.derivative_at(s)
    }

    /// One step of the reduced noisy map.
    #[inline]
    pub fn step(&self, s: T, noise: Option<&mut NoiseStream<T>>) -> T {
        let xi = noise.map_or(T::zero(), |n| n.sample());
        self.drift_map(s) + xi
    }
}

/// Traces the path to the `+y` saddle adjacent to the `+x` fixed point and
/// builds its reduced system.
pub fn reduced_system_for<T: Real>(
    p: &MapParams<T>,
    opts: &PathOptions,
) -> Result<ReducedSystem<T>> {
    let fps = crate::dynamics::coexisting_fixed_points(p)?;
    let fp = fps.x_axis(true);
    let sp = fps
        .saddle(true, true)
        .expect("coexistence regime has saddles");
    ReducedSystem::build(trace_valley_path(p, fp, sp, opts)?, p)
}
