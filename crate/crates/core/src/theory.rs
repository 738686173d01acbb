//! Closed-form weak-noise theory: critical-point potentials, the invariant
//! density `Q(s) ~ exp(-2 tau U(s) / epsilon)`, the escape-time law
//! `T = (C / tau) exp(2 tau dU / epsilon)` and a residual check of the
//! potential equation satisfied by `Phi = 2 tau U`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dynamics::MapParams;
use crate::error::{Error, Result};
use crate::path::ReducedSystem;
use crate::scalar::{four, lit, to_f64, two, Field, Real};

/// Potentials at the saddle and at the two axis fixed points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPotentials<T> {
    pub u_sp: T,
    /// Fixed point on the x axis (start of every escape experiment).
    pub u_fp_x: T,
    pub u_fp_y: T,
}

impl<T: Field> CriticalPotentials<T> {
    /// `U(SP) - U(FP_x)`.
    pub fn barrier(&self) -> T {
        self.u_sp - self.u_fp_x
    }

    /// Coefficient of `tau / epsilon` in `ln T`: twice the barrier.
    pub fn slope(&self) -> T {
        two::<T>() * self.barrier()
    }
}

/// Exact in any field, so rational parameters give rational potentials.
pub fn critical_potentials<T: Field>(p: &MapParams<T>) -> Result<CriticalPotentials<T>> {
    let (a, b) = (p.a, p.b);
    if a == b {
        return Err(Error::DegenerateCoupling);
    }
    if !p.in_coexistence_window() {
        return Err(Error::InvalidParameter {
            name: "tau12",
            reason: format!(
                "{:?} is outside the coexistence window for a = {a:?}, b = {b:?}",
                p.tau12()
            ),
        });
    }
    let r = p.tau12();
    let four = four::<T>();
    Ok(CriticalPotentials {
        u_sp: T::zero() - (a * r * r + a - two::<T>() * b * r) / (four * r * (a * a - b * b)),
        u_fp_x: T::zero() - r / (four * a),
        u_fp_y: T::zero() - T::one() / (four * a * r),
    })
}

/// `C = pi sqrt(2 / U''(FP))`, the ratio of the steepest-descent
/// denominator to the numerator with `G(tau) = sqrt(tau / 2 pi)`.
pub fn prefactor<T: Real>(curvature_fp: T) -> Result<T> {
    if curvature_fp <= T::zero() {
        return Err(Error::NotAMinimum(to_f64(curvature_fp)));
    }
    Ok(T::PI() * (lit::<T>(2.0) / curvature_fp).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryPrediction<T> {
    pub u_sp: T,
    pub u_fp: T,
    pub delta_u: T,
    pub slope: T,
    pub prefactor: T,
}

impl<T: Real> TheoryPrediction<T> {
    pub fn new(p: &MapParams<T>, sys: &ReducedSystem<T>) -> Result<Self> {
        let cp = critical_potentials(p)?;
        Ok(Self {
            u_sp: cp.u_sp,
            u_fp: cp.u_fp_x,
            delta_u: cp.barrier(),
            slope: cp.slope(),
            prefactor: prefactor(sys.curvature_fp())?,
        })
    }

    /// `ln T = ln C - ln tau + (2 tau / epsilon) dU`.
    pub fn ln_t(&self, tau: T, epsilon: T) -> T {
        self.prefactor.ln() - tau.ln() + self.slope * tau / epsilon
    }
}

/// Predicted escape time and its logarithm.
pub fn predicted_mfpt<T: Real>(
    p: &MapParams<T>,
    sys: &ReducedSystem<T>,
    epsilon: T,
) -> Result<(T, T)> {
    let pred = TheoryPrediction::new(p, sys)?;
    let ln_t = pred.ln_t(sys.tau, epsilon);
    Ok((ln_t.exp(), ln_t))
}

/// Writes one CSV row `tau12,a,b,tau,epsilon,delta_u,slope,prefactor,ln_T_pred`.
pub fn write_prediction_csv<T: Real, W: Write>(
    rows: &[(MapParams<T>, TheoryPrediction<T>)],
    mut w: W,
) -> std::io::Result<()> {
    writeln!(w, "tau12,a,b,tau,epsilon,delta_u,slope,prefactor,ln_T_pred")?;
    for (p, t) in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            p.tau12(),
            p.a,
            p.b,
            p.tau2,
            p.epsilon,
            t.delta_u,
            t.slope,
            t.prefactor,
            t.ln_t(p.tau2, p.epsilon)
        )?;
    }
    Ok(())
}

/// Normalized `N exp(-2 tau U(s) / epsilon)` on `[-s_sp, s_sp]`.
#[derive(Debug, Clone)]
pub struct WkbDensity<'a, T> {
    sys: &'a ReducedSystem<T>,
    exponent_scale: T,
    u_ref: T,
    norm: T,
}

/// Composite Simpson on `[lo, hi]` with `panels` (even) intervals.
fn simpson<T: Real>(f: impl Fn(T) -> T, lo: T, hi: T, panels: usize) -> T {
    let panels = panels + panels % 2;
    let h = (hi - lo) / T::from_usize(panels).expect("panels");
    let mut acc = f(lo) + f(hi);
    for k in 1..panels {
        let w: T = if k % 2 == 1 { lit(4.0) } else { lit(2.0) };
        acc = acc + w * f(lo + h * T::from_usize(k).expect("index"));
    }
    acc * h / lit(3.0)
}

impl<'a, T: Real> WkbDensity<'a, T> {
    pub fn new(sys: &'a ReducedSystem<T>, epsilon: T) -> Self {
        let exponent_scale = lit::<T>(2.0) * sys.tau / epsilon;
        let u_ref = sys.u_of_s[0];
        let mut me = Self {
            sys,
            exponent_scale,
            u_ref,
            norm: T::one(),
        };
        let panels = 4 * sys.u_of_s.len();
        let z = simpson(|s| me.unnormalized(s), -sys.s_sp, sys.s_sp, panels);
        me.norm = T::one() / z;
        me
    }

    fn unnormalized(&self, s: T) -> T {
        (-(self.exponent_scale) * (self.sys.potential_at(s) - self.u_ref)).exp()
    }

    pub fn value(&self, s: T) -> T {
        self.norm * self.unnormalized(s)
    }

    /// Mean density over `[lo, hi]`.
    pub fn bin_average(&self, lo: T, hi: T) -> T {
        simpson(|s| self.value(s), lo, hi, 64) / (hi - lo)
    }

    pub fn integral(&self, panels: usize) -> T {
        simpson(|s| self.value(s), -self.sys.s_sp, self.sys.s_sp, panels)
    }
}

/// `Q(s)` at a single point.
pub fn wkb_density<T: Real>(s: T, sys: &ReducedSystem<T>, epsilon: T) -> T {
    WkbDensity::new(sys, epsilon).value(s)
}

/// Residual of the potential equation
/// `Phi(z) - Phi(g + z - tau U'(z)) + g^2 / 2`, `g = Phi'(z) / (1 - tau U''(z))`,
/// with `Phi = 2 tau U`, at every grid node. Points mapped past the saddle
/// use the quadratic continuation.
pub fn wkb_residual_profile<T: Real>(sys: &ReducedSystem<T>, tau: T) -> Vec<(T, T)> {
    let two_tau = tau + tau;
    let half = lit::<T>(0.5);
    let mut out = Vec::with_capacity(2 * sys.u_of_s.len());
    for (i, &s) in sys.path.arclength.iter().enumerate() {
        let (u, du, d2u) = (sys.u_of_s[i], sys.du_of_s[i], sys.d2u_of_s[i]);
        let g = two_tau * du / (T::one() - tau * d2u);
        let w = g + s - tau * du;
        let r = two_tau * u - two_tau * sys.potential_at(w) + half * g * g;
        out.push((s, r));
        if i > 0 {
            // odd derivative, even potential
            let wm = -g - s + tau * du;
            let rm = two_tau * u - two_tau * sys.potential_at(wm) + half * g * g;
            out.push((-s, rm));
        }
    }
    out
}

/// Sup-norm of [`wkb_residual_profile`].
pub fn wkb_residual<T: Real>(sys: &ReducedSystem<T>, tau: T) -> T {
    wkb_residual_profile(sys, tau)
        .into_iter()
        .fold(T::zero(), |m, (_, r)| m.max(r.abs()))
}
