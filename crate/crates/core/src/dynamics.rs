//! The weakly nonlinear coupled map, its rescaled gradient form, the
//! potential landscape and the critical points of the noiseless dynamics.
//!
//! Raw map:
//!
//! ```text
//! x' = (1 + tau1) x (1 - a x^2 - b y^2) + xi1
//! y' = (1 + tau2) y (1 - a y^2 - b x^2) + xi2
//! ```
//!
//! With `x = sqrt(tau2) X`, `y = sqrt(tau1) Y` and first order in the rates,
//! the map becomes the gradient step `X' = X - tau1 dU/dX`,
//! `Y' = Y - tau2 dU/dY` on
//!
//! ```text
//! U(X, Y) = -(X^2 + Y^2)/2 + (a/4)(tau2/tau1 X^4 + tau1/tau2 Y^4) + b X^2 Y^2 / 2
//! ```

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{four, lit, to_f64, two, Field, Real};

/// Rates above this are outside the weak-nonlinearity regime.
pub const WEAK_NONLINEARITY_LIMIT: f64 = 0.2;

/// Model constants plus the noise variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapParams<T> {
    pub tau1: T,
    pub tau2: T,
    pub a: T,
    pub b: T,
    /// Variance of each Gaussian noise component.
    pub epsilon: T,
}

impl<T: Field> MapParams<T> {
    pub fn new(tau1: T, tau2: T, a: T, b: T, epsilon: T) -> Result<Self> {
        let zero = T::zero();
        let one = T::one();
        let open_unit = |name: &'static str, v: T| {
            if v > zero && v < one {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    name,
                    reason: format!("{v:?} is not in (0, 1)"),
                })
            }
        };
        open_unit("tau1", tau1)?;
        open_unit("tau2", tau2)?;
        open_unit("a", a)?;
        open_unit("b", b)?;
        if epsilon < zero {
            return Err(Error::InvalidParameter {
                name: "epsilon",
                reason: format!("variance {epsilon:?} is negative"),
            });
        }
        // 1/5
        let limit = one / (four::<T>() + one);
        if tau1 > limit || tau2 > limit {
            warn!(
                "tau1 = {tau1:?}, tau2 = {tau2:?}: rates above {WEAK_NONLINEARITY_LIMIT} leave the weak-nonlinearity regime"
            );
        }
        Ok(Self {
            tau1,
            tau2,
            a,
            b,
            epsilon,
        })
    }

    /// Parameterization by a common rate: `tau2 = tau`, `tau1 = tau12 * tau`.
    pub fn from_ratio(tau: T, tau12: T, a: T, b: T, epsilon: T) -> Result<Self> {
        Self::new(tau12 * tau, tau, a, b, epsilon)
    }

    /// `tau1 / tau2`.
    pub fn tau12(&self) -> T {
        self.tau1 / self.tau2
    }

    pub fn with_epsilon(self, epsilon: T) -> Self {
        Self { epsilon, ..self }
    }

    /// `a/b < tau12 < b/a` with `b > a`: two competing stable attractors
    /// separated by saddles.
    pub fn in_coexistence_window(&self) -> bool {
        let r = self.tau12();
        self.b > self.a && self.a / self.b < r && r < self.b / self.a
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Frame {
    Raw,
    Rescaled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State2D<T> {
    pub x: T,
    pub y: T,
    pub frame: Frame,
}

impl<T: Real> State2D<T> {
    pub fn raw(x: T, y: T) -> Self {
        Self {
            x,
            y,
            frame: Frame::Raw,
        }
    }

    pub fn rescaled(x: T, y: T) -> Self {
        Self {
            x,
            y,
            frame: Frame::Rescaled,
        }
    }

    pub fn distance(&self, other: &Self) -> T {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Reflection through the x axis.
    pub fn mirrored(&self) -> Self {
        Self {
            y: -self.y,
            ..*self
        }
    }

    fn expect_frame(&self, expected: Frame) -> Result<()> {
        if self.frame == expected {
            Ok(())
        } else {
            Err(Error::FrameMismatch {
                expected,
                found: self.frame,
            })
        }
    }
}

/// One step of the raw cubic map, optionally with an additive noise pair.
pub fn step_raw<T: Real>(
    s: &State2D<T>,
    p: &MapParams<T>,
    noise: Option<(T, T)>,
) -> Result<State2D<T>> {
    s.expect_frame(Frame::Raw)?;
    let (n1, n2) = noise.unwrap_or((T::zero(), T::zero()));
    let (x, y) = (s.x, s.y);
    let one = T::one();
    Ok(State2D::raw(
        (one + p.tau1) * x * (one - p.a * x * x - p.b * y * y) + n1,
        (one + p.tau2) * y * (one - p.a * y * y - p.b * x * x) + n2,
    ))
}

fn check_rates<T: Real>(p: &MapParams<T>) -> Result<()> {
    if p.tau1 <= T::zero() || p.tau2 <= T::zero() {
        return Err(Error::InvalidParameter {
            name: "tau",
            reason: "rescaling needs tau1 > 0 and tau2 > 0".into(),
        });
    }
    Ok(())
}

/// Raw to rescaled coordinates: `X = x / sqrt(tau2)`, `Y = y / sqrt(tau1)`.
pub fn rescale<T: Real>(s: &State2D<T>, p: &MapParams<T>) -> Result<State2D<T>> {
    s.expect_frame(Frame::Raw)?;
    check_rates(p)?;
    Ok(State2D::rescaled(s.x / p.tau2.sqrt(), s.y / p.tau1.sqrt()))
}

/// Inverse of [`rescale`].
pub fn unscale<T: Real>(s: &State2D<T>, p: &MapParams<T>) -> Result<State2D<T>> {
    s.expect_frame(Frame::Rescaled)?;
    check_rates(p)?;
    Ok(State2D::raw(s.x * p.tau2.sqrt(), s.y * p.tau1.sqrt()))
}

/// The potential `U(X, Y)` in rescaled coordinates.
pub fn potential<T: Real>(s: &State2D<T>, p: &MapParams<T>) -> T {
    debug_assert_eq!(s.frame, Frame::Rescaled);
    let (x2, y2) = (s.x * s.x, s.y * s.y);
    let r = p.tau12();
    let half = lit::<T>(0.5);
    -(x2 + y2) * half + p.a / four() * (x2 * x2 / r + r * y2 * y2) + p.b * x2 * y2 * half
}

/// Analytic gradient of [`potential`].
pub fn potential_grad<T: Real>(s: &State2D<T>, p: &MapParams<T>) -> (T, T) {
    debug_assert_eq!(s.frame, Frame::Rescaled);
    let (x, y) = (s.x, s.y);
    let r = p.tau12();
    (
        -x + p.a / r * x * x * x + p.b * x * y * y,
        -y + p.a * r * y * y * y + p.b * y * x * x,
    )
}

/// Hessian `[[Uxx, Uxy], [Uxy, Uyy]]` of [`potential`].
pub fn potential_hessian<T: Real>(s: &State2D<T>, p: &MapParams<T>) -> [[T; 2]; 2] {
    let (x, y) = (s.x, s.y);
    let r = p.tau12();
    let three = lit::<T>(3.0);
    let uxx = -T::one() + three * p.a / r * x * x + p.b * y * y;
    let uyy = -T::one() + three * p.a * r * y * y + p.b * x * x;
    let uxy = two::<T>() * p.b * x * y;
    [[uxx, uxy], [uxy, uyy]]
}

/// One step of the rescaled (transformed) map with optional noise.
pub fn step_transformed<T: Real>(
    s: &State2D<T>,
    p: &MapParams<T>,
    noise: Option<(T, T)>,
) -> State2D<T> {
    debug_assert_eq!(s.frame, Frame::Rescaled);
    let (x, y) = (s.x, s.y);
    let (n1, n2) = noise.unwrap_or((T::zero(), T::zero()));
    State2D::rescaled(
        x - p.tau1 * (-x + p.a * (p.tau2 / p.tau1) * x * x * x + p.b * x * y * y) + n1,
        y - p.tau2 * (-y + p.a * (p.tau1 / p.tau2) * y * y * y + p.b * y * x * x) + n2,
    )
}

/// Jacobian of the noiseless transformed map, `I - diag(tau1, tau2) H`.
pub fn map_jacobian<T: Real>(s: &State2D<T>, p: &MapParams<T>) -> [[T; 2]; 2] {
    let h = potential_hessian(s, p);
    let one = T::one();
    [
        [one - p.tau1 * h[0][0], -p.tau1 * h[0][1]],
        [-p.tau2 * h[1][0], one - p.tau2 * h[1][1]],
    ]
}

/// Real eigenvalues (descending) and the eigenvector of the larger one.
///
/// The Jacobian is similar to a symmetric matrix, so the spectrum is real.
pub(crate) fn eigen2<T: Real>(m: &[[T; 2]; 2]) -> ([T; 2], [[T; 2]; 2]) {
    let half = lit::<T>(0.5);
    let mean = (m[0][0] + m[1][1]) * half;
    let diff = (m[0][0] - m[1][1]) * half;
    let disc = (diff * diff + m[0][1] * m[1][0]).max(T::zero()).sqrt();
    let l = [mean + disc, mean - disc];
    let vec_for = |lambda: T| {
        // (m - lambda I) v = 0; pick the better conditioned row.
        let (r0, r1) = ((m[0][0] - lambda, m[0][1]), (m[1][0], m[1][1] - lambda));
        let v = if r0.0.abs() + r0.1.abs() >= r1.0.abs() + r1.1.abs() {
            (-r0.1, r0.0)
        } else {
            (-r1.1, r1.0)
        };
        let n = v.0.hypot(v.1);
        if n > T::zero() {
            [v.0 / n, v.1 / n]
        } else if (m[0][0] - lambda).abs() <= (m[1][1] - lambda).abs() {
            [T::one(), T::zero()]
        } else {
            [T::zero(), T::one()]
        }
    };
    (l, [vec_for(l[0]), vec_for(l[1])])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CriticalKind {
    /// Both multipliers inside the unit circle.
    Stable,
    /// Exactly one multiplier outside the unit circle.
    Saddle,
    /// Both multipliers outside the unit circle (the origin).
    Unstable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint<T> {
    pub location: State2D<T>,
    pub kind: CriticalKind,
    /// Multipliers of the noiseless map Jacobian, descending.
    pub eigenvalues: [T; 2],
}

impl<T: Real> CriticalPoint<T> {
    pub fn classify(location: State2D<T>, p: &MapParams<T>) -> Self {
        let (eigenvalues, _) = eigen2(&map_jacobian(&location, p));
        let outside = eigenvalues.iter().filter(|l| l.abs() > T::one()).count();
        let kind = match outside {
            0 => CriticalKind::Stable,
            1 => CriticalKind::Saddle,
            _ => CriticalKind::Unstable,
        };
        Self {
            location,
            kind,
            eigenvalues,
        }
    }

    /// Unit eigenvector of the expanding multiplier.
    pub fn unstable_direction(&self, p: &MapParams<T>) -> (T, T) {
        let (_, v) = eigen2(&map_jacobian(&self.location, p));
        (v[0][0], v[0][1])
    }
}

/// Critical points of the noiseless map.
///
/// Order: origin, `(+x*, 0)`, `(-x*, 0)`, `(0, +y*)`, `(0, -y*)`, then the
/// four mixed points `(+,+)`, `(+,-)`, `(-,+)`, `(-,-)` when they exist.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPoints<T> {
    pub points: Vec<CriticalPoint<T>>,
    /// `false` when the mixed-point radicands are not positive.
    pub coexistence: bool,
}

impl<T: Real> FixedPoints<T> {
    pub fn origin(&self) -> &CriticalPoint<T> {
        &self.points[0]
    }

    /// Fixed point on the x axis; `positive` selects the sign of x.
    pub fn x_axis(&self, positive: bool) -> &CriticalPoint<T> {
        &self.points[if positive { 1 } else { 2 }]
    }

    pub fn y_axis(&self, positive: bool) -> &CriticalPoint<T> {
        &self.points[if positive { 3 } else { 4 }]
    }

    /// Mixed point with the given signs, if the regime has one.
    pub fn saddle(&self, x_positive: bool, y_positive: bool) -> Option<&CriticalPoint<T>> {
        let idx = match (x_positive, y_positive) {
            (true, true) => 5,
            (true, false) => 6,
            (false, true) => 7,
            (false, false) => 8,
        };
        self.points.get(idx)
    }

    pub fn stable(&self) -> impl Iterator<Item = &CriticalPoint<T>> {
        self.points
            .iter()
            .filter(|c| c.kind == CriticalKind::Stable)
    }
}

/// Residual of the noiseless map at `s`: `|step(s) - s|`.
pub fn step_residual<T: Real>(s: &State2D<T>, p: &MapParams<T>) -> T {
    step_transformed(s, p, None).distance(s)
}

/// Damped Newton iteration on `grad U = 0` starting from `guess`.
pub fn refine_critical_point<T: Real>(guess: State2D<T>, p: &MapParams<T>) -> State2D<T> {
    let mut z = guess;
    let norm = |g: (T, T)| g.0.hypot(g.1);
    let mut g = potential_grad(&z, p);
    for _ in 0..100 {
        let gn = norm(g);
        if gn <= T::epsilon() {
            break;
        }
        let h = potential_hessian(&z, p);
        let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
        if det.abs() <= T::epsilon() {
            break;
        }
        let dx = -(h[1][1] * g.0 - h[0][1] * g.1) / det;
        let dy = -(-h[1][0] * g.0 + h[0][0] * g.1) / det;
        let mut lambda = T::one();
        let mut accepted = false;
        for _ in 0..30 {
            let trial = State2D::rescaled(z.x + lambda * dx, z.y + lambda * dy);
            let tg = potential_grad(&trial, p);
            if norm(tg) < gn {
                z = trial;
                g = tg;
                accepted = true;
                break;
            }
            lambda = lambda * lit(0.5);
        }
        if !accepted {
            break;
        }
    }
    z
}

/// All critical points of the noiseless transformed map, refined and
/// classified by the Jacobian spectrum.
pub fn fixed_points<T: Real>(p: &MapParams<T>) -> FixedPoints<T> {
    let r = p.tau12();
    let (a, b) = (p.a, p.b);
    let x_star = (r / a).sqrt();
    let y_star = (T::one() / (a * r)).sqrt();
    let mut guesses = vec![
        State2D::rescaled(T::zero(), T::zero()),
        State2D::rescaled(x_star, T::zero()),
        State2D::rescaled(-x_star, T::zero()),
        State2D::rescaled(T::zero(), y_star),
        State2D::rescaled(T::zero(), -y_star),
    ];
    let det = a * a - b * b;
    let rx = a / det * (r - b / a);
    let ry = a / det * (T::one() / r - b / a);
    let mixed = det != T::zero() && rx > T::zero() && ry > T::zero();
    if mixed {
        let (sx, sy) = (rx.sqrt(), ry.sqrt());
        for (px, py) in [(sx, sy), (sx, -sy), (-sx, sy), (-sx, -sy)] {
            guesses.push(State2D::rescaled(px, py));
        }
    }
    let points = guesses
        .into_iter()
        .map(|g| CriticalPoint::classify(refine_critical_point(g, p), p))
        .collect::<Vec<_>>();
    let coexistence = mixed
        && points[5..].iter().all(|c| c.kind == CriticalKind::Saddle)
        && points[1].kind == CriticalKind::Stable
        && points[3].kind == CriticalKind::Stable;
    if !coexistence {
        log::debug!(
            "no coexistence regime at tau12 = {}, a = {}, b = {}",
            to_f64(r),
            to_f64(a),
            to_f64(b)
        );
    }
    FixedPoints {
        points,
        coexistence,
    }
}

/// Like [`fixed_points`] but fails outside the coexistence regime.
pub fn coexisting_fixed_points<T: Real>(p: &MapParams<T>) -> Result<FixedPoints<T>> {
    let fps = fixed_points(p);
    if fps.coexistence {
        Ok(fps)
    } else {
        Err(Error::NoCoexistence {
            tau12: to_f64(p.tau12()),
            a: to_f64(p.a),
            b: to_f64(p.b),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn sym() -> MapParams<f64> {
        MapParams::from_ratio(0.05, 1.0, 0.25, 0.5, 0.0).unwrap()
    }

    #[test]
    fn parameter_validation() {
        assert!(MapParams::new(0.05, 0.05, 0.0, 0.5, 0.0).is_err());
        assert!(MapParams::new(0.05, 0.05, 0.25, 1.0, 0.0).is_err());
        assert!(MapParams::new(0.0, 0.05, 0.25, 0.5, 0.0).is_err());
        assert!(MapParams::new(0.05, 0.05, 0.25, 0.5, -1e-3).is_err());
        // soft warning only
        assert!(MapParams::new(0.5, 0.5, 0.25, 0.5, 0.0).is_ok());
    }

    #[test]
    fn origin_is_fixed_under_raw_map() {
        let p = sym();
        let s = step_raw(&State2D::raw(0.0, 0.0), &p, None).unwrap();
        assert_eq!((s.x, s.y), (0.0, 0.0));
    }

    #[test]
    fn raw_axis_fixed_point() {
        let p: MapParams<f64> = MapParams::new(0.03, 0.04, 0.25, 0.5, 0.0).unwrap();
        let x_star = (p.tau1 / (p.a * (1.0 + p.tau1))).sqrt();
        let s = step_raw(&State2D::raw(x_star, 0.0), &p, None).unwrap();
        assert_relative_eq!(s.x, x_star, epsilon = 1e-15);
        assert_eq!(s.y, 0.0);
    }

    #[test]
    fn raw_step_rejects_rescaled_state() {
        let p = sym();
        let err = step_raw(&State2D::rescaled(0.1, 0.1), &p, None).unwrap_err();
        assert!(matches!(err, Error::FrameMismatch { .. }));
    }

    #[test]
    fn raw_map_converges_to_axis_fixed_point() {
        let p: MapParams<f64> = MapParams::new(0.02, 0.025, 0.2, 0.4, 0.0).unwrap();
        let x_fp = (p.tau1 / (p.a * (1.0 + p.tau1))).sqrt();
        let y_fp = (p.tau2 / (p.a * (1.0 + p.tau2))).sqrt();
        for &(x0, y0) in &[(0.05, 0.03), (0.01, 0.2), (-0.3, 0.25), (0.2, -0.21)] {
            let mut s = State2D::raw(x0, y0);
            for _ in 0..100_000 {
                s = step_raw(&s, &p, None).unwrap();
            }
            let on_x = (s.x.abs() - x_fp).abs() < 1e-9 && s.y.abs() < 1e-9;
            let on_y = (s.y.abs() - y_fp).abs() < 1e-9 && s.x.abs() < 1e-9;
            assert!(on_x || on_y, "({x0}, {y0}) ended at {s:?}");
        }
    }

    #[test]
    fn rescale_round_trip() {
        let p = MapParams::new(0.05, 0.04, 0.25, 0.5, 0.0).unwrap();
        let s = State2D::raw(0.3, -0.2);
        let back = unscale(&rescale(&s, &p).unwrap(), &p).unwrap();
        assert_relative_eq!(back.x, 0.3, epsilon = 1e-14);
        assert_relative_eq!(back.y, -0.2, epsilon = 1e-14);
        assert_eq!(rescale(&State2D::raw(0.0, 0.0), &p).unwrap().x, 0.0);
    }

    #[test]
    fn rescale_uniform_for_equal_rates() {
        let p = sym();
        let r = rescale(&State2D::raw(0.2, -0.1), &p).unwrap();
        let k = 1.0 / 0.05f64.sqrt();
        assert_relative_eq!(r.x, 0.2 * k, epsilon = 1e-14);
        assert_relative_eq!(r.y, -0.1 * k, epsilon = 1e-14);
    }

    #[test]
    fn rescale_rejects_zero_rate() {
        let mut p = sym();
        p.tau1 = 0.0;
        assert!(rescale(&State2D::raw(0.1, 0.1), &p).is_err());
    }

    #[test]
    fn potential_reference_values() {
        let p = sym();
        assert_eq!(potential(&State2D::rescaled(0.0, 0.0), &p), 0.0);
        assert_relative_eq!(
            potential(&State2D::rescaled(2.0, 0.0), &p),
            -1.0,
            epsilon = 1e-14
        );
        let s = (4.0f64 / 3.0).sqrt();
        assert_relative_eq!(
            potential(&State2D::rescaled(s, s), &p),
            -2.0 / 3.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn gradient_reference_value() {
        let p = sym();
        let g = potential_grad(&State2D::rescaled(1.0, 1.0), &p);
        assert_relative_eq!(g.0, -0.25, epsilon = 1e-15);
        assert_relative_eq!(g.1, -0.25, epsilon = 1e-15);
        assert_eq!(potential_grad(&State2D::rescaled(0.0, 0.0), &p), (0.0, 0.0));
    }

    #[test]
    fn fixed_points_symmetric_case() {
        let p = sym();
        let fps = fixed_points(&p);
        assert!(fps.coexistence);
        assert_eq!(fps.points.len(), 9);
        assert_eq!(fps.origin().kind, CriticalKind::Unstable);
        let fp = fps.x_axis(true);
        assert_relative_eq!(fp.location.x, 2.0, epsilon = 1e-12);
        assert_eq!(fp.kind, CriticalKind::Stable);
        assert_relative_eq!(fps.y_axis(false).location.y, -2.0, epsilon = 1e-12);
        let sp = fps.saddle(true, true).unwrap();
        let s = (4.0f64 / 3.0).sqrt();
        assert_relative_eq!(sp.location.x, s, epsilon = 1e-12);
        assert_relative_eq!(sp.location.y, s, epsilon = 1e-12);
        assert_eq!(sp.kind, CriticalKind::Saddle);
        for c in &fps.points {
            assert!(step_residual(&c.location, &p) <= 1e-10);
            let g = potential_grad(&c.location, &p);
            assert!(g.0.hypot(g.1) <= 1e-10);
        }
    }

    #[test]
    fn refinement_converges_from_perturbed_guess() {
        let p = MapParams::from_ratio(0.05, 1.1, 0.25, 0.5, 0.0).unwrap();
        let exact = fixed_points(&p).saddle(true, true).unwrap().location;
        let z = refine_critical_point(State2D::rescaled(exact.x + 0.05, exact.y - 0.04), &p);
        assert!(z.distance(&exact) < 1e-12);
    }

    #[test]
    fn x_axis_fixed_point_loses_stability_below_window() {
        // y multiplier at the x-axis point: 1 + tau2 (1 - (b/a) tau12)
        let p = MapParams::from_ratio(0.05, 0.4, 0.25, 0.5, 0.0).unwrap();
        let fps = fixed_points(&p);
        assert!(!fps.coexistence);
        assert_eq!(fps.points.len(), 5);
        let fp = fps.x_axis(true);
        assert_ne!(fp.kind, CriticalKind::Stable);
        let expected = 1.0 + p.tau2 * (1.0 - (p.b / p.a) * p.tau12());
        assert_relative_eq!(fp.eigenvalues[0], expected, epsilon = 1e-14);
        assert!(coexisting_fixed_points(&p).is_err());
    }

    #[test]
    fn coexistence_window_boundary_scan() {
        let (a, b) = (0.25, 0.5);
        for i in 0..=60 {
            let r = 0.3 + 0.03 * i as f64;
            if ((r - a / b).abs() < 1e-9) || ((r - b / a).abs() < 1e-9) {
                continue;
            }
            let p = MapParams::from_ratio(0.05, r, a, b, 0.0).unwrap();
            let inside = a / b < r && r < b / a;
            assert_eq!(fixed_points(&p).coexistence, inside, "tau12 = {r}");
            assert_eq!(p.in_coexistence_window(), inside);
        }
    }

    #[test]
    fn classification_matches_spectrum() {
        let p: MapParams<f64> = MapParams::from_ratio(0.05, 0.9, 0.25, 0.5, 0.0).unwrap();
        for c in fixed_points(&p).points {
            let n = c.eigenvalues.iter().filter(|l| l.abs() > 1.0).count();
            match c.kind {
                CriticalKind::Stable => assert_eq!(n, 0),
                CriticalKind::Saddle => assert_eq!(n, 1),
                CriticalKind::Unstable => assert_eq!(n, 2),
            }
        }
    }

    #[test]
    fn works_in_single_precision() {
        let p = MapParams::<f32>::from_ratio(0.05, 1.0, 0.25, 0.5, 0.0).unwrap();
        let fps = fixed_points(&p);
        assert!(fps.coexistence);
        assert!((fps.x_axis(true).location.x - 2.0).abs() < 1e-5);
    }

    #[test]
    fn noiseless_interior_start_converges_to_stable_axis_point() {
        let p = MapParams::from_ratio(0.05, 1.1, 0.25, 0.5, 0.0).unwrap();
        let fps = fixed_points(&p);
        for &(x0, y0) in &[(0.3, 0.1), (-0.5, 1.7), (1.9, -0.2), (-0.7, -0.71)] {
            let mut s = State2D::rescaled(x0, y0);
            for _ in 0..20_000 {
                s = step_transformed(&s, &p, None);
            }
            assert!(
                fps.stable().any(|c| c.location.distance(&s) < 1e-8),
                "({x0}, {y0}) -> {s:?}"
            );
        }
    }

    proptest! {
        #[test]
        fn exchange_symmetry(x in -3.0f64..3.0, y in -3.0f64..3.0, t1 in 0.01f64..0.1, t2 in 0.01f64..0.1) {
            let p = MapParams::new(t1, t2, 0.25, 0.5, 0.0).unwrap();
            let q = MapParams::new(t2, t1, 0.25, 0.5, 0.0).unwrap();
            let u = potential(&State2D::rescaled(x, y), &p);
            let v = potential(&State2D::rescaled(y, x), &q);
            prop_assert!((u - v).abs() <= 1e-12 * (1.0 + u.abs()));
        }

        #[test]
        fn gradient_matches_central_differences(x in -3.0f64..3.0, y in -3.0f64..3.0, r in 0.8f64..1.2) {
            let p = MapParams::from_ratio(0.05, r, 0.25, 0.5, 0.0).unwrap();
            let h = 1e-5;
            let u = |dx: f64, dy: f64| potential(&State2D::rescaled(x + dx, y + dy), &p);
            let fd = ((u(h, 0.0) - u(-h, 0.0)) / (2.0 * h), (u(0.0, h) - u(0.0, -h)) / (2.0 * h));
            let g = potential_grad(&State2D::rescaled(x, y), &p);
            let scale = g.0.hypot(g.1).max(1e-3);
            prop_assert!((g.0 - fd.0).hypot(g.1 - fd.1) / scale <= 1e-6);
        }

        #[test]
        fn transformed_step_is_gradient_flow(x in -3.0f64..3.0, y in -3.0f64..3.0, r in 0.5f64..2.0) {
            let p = MapParams::from_ratio(0.05, r, 0.25, 0.5, 0.0).unwrap();
            let s = State2D::rescaled(x, y);
            let g = potential_grad(&s, &p);
            let t = step_transformed(&s, &p, None);
            prop_assert!((t.x - (x - p.tau1 * g.0)).abs() <= 1e-14 * (1.0 + x.abs()) * 8.0);
            prop_assert!((t.y - (y - p.tau2 * g.1)).abs() <= 1e-14 * (1.0 + y.abs()) * 8.0);
        }
    }
}
