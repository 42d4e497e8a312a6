//! Green's-function bound envelopes and the interval coefficients built on them.
//!
//! All estimators bound integrals of the form `∫_{I_j} π(s) ∂ₜᵖG(T−s) ds` by
//! `e^{−γ(T−t_j)}` times a coefficient that depends only on the interval
//! `I_j = (t_{j−1}, t_j)`, the horizon `T` and the constants of
//! [`GreenFunctionBounds`]. This module evaluates those coefficients.

use crate::error::{Error, Result};
use crate::quadrature;

/// Ratio `τ/(T−t_j)` below which `μ_{k,j}` is summed from its alternating series.
pub const SERIES_SWITCH: f64 = 0.5;

const SERIES_TOL: f64 = 1e-15;
const COEFF_QUAD_TOL: f64 = 1e-12;

/// Constants of the `L₁` bounds `‖∂ₜᵖG(t)‖ ≤ (κ_p/tᵖ + κ_p′)e^{−γt}`, `p = 0, 1, 2`.
///
/// `κ₀′` is identically zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenFunctionBounds {
    pub kappa0: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub kappa1p: f64,
    pub kappa2p: f64,
    pub gamma: f64,
}

impl GreenFunctionBounds {
    pub fn new(
        kappa0: f64,
        kappa1: f64,
        kappa2: f64,
        kappa1p: f64,
        kappa2p: f64,
        gamma: f64,
    ) -> Result<Self> {
        let bounds = Self {
            kappa0,
            kappa1,
            kappa2,
            kappa1p,
            kappa2p,
            gamma,
        };
        bounds.validate()?;
        Ok(bounds)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.kappa0,
            self.kappa1,
            self.kappa2,
            self.kappa1p,
            self.kappa2p,
            self.gamma,
        ];
        if all.iter().all(|v| v.is_finite() && *v >= 0.0) {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "Green's-function constants must be finite and non-negative: {all:?}"
            )))
        }
    }

    /// Multiplies every κ (but not γ) by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            kappa0: self.kappa0 * factor,
            kappa1: self.kappa1 * factor,
            kappa2: self.kappa2 * factor,
            kappa1p: self.kappa1p * factor,
            kappa2p: self.kappa2p * factor,
            gamma: self.gamma,
        }
    }

    /// Exponential weight `e^{−γ(T−t)}` applied to the contribution of an
    /// interval ending at `t`.
    pub fn weight(&self, t: f64, horizon: f64) -> f64 {
        (-self.gamma * (horizon - t)).exp()
    }
}

/// Envelope `φ_p(t) = (κ_p/tᵖ + κ_p′)e^{−γt}`.
pub fn phi(bounds: &GreenFunctionBounds, p: u32, t: f64) -> Result<f64> {
    let decay = (-bounds.gamma * t).exp();
    match p {
        0 if t >= 0.0 => Ok(bounds.kappa0 * decay),
        1 | 2 if t > 0.0 => {
            let (k, kp) = if p == 1 {
                (bounds.kappa1, bounds.kappa1p)
            } else {
                (bounds.kappa2, bounds.kappa2p)
            };
            Ok((k / t.powi(p as i32) + kp) * decay)
        }
        0..=2 => Err(Error::Domain(format!("phi_{p} evaluated at t = {t}"))),
        _ => Err(Error::Domain(format!("no envelope for p = {p}"))),
    }
}

/// A time interval `(t_lo, t_hi)` inside `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub t_lo: f64,
    pub t_hi: f64,
    pub horizon: f64,
}

impl Interval {
    pub fn new(t_lo: f64, t_hi: f64, horizon: f64) -> Result<Self> {
        if !(0.0 <= t_lo && t_lo < t_hi && t_hi <= horizon) || !horizon.is_finite() {
            return Err(Error::Domain(format!(
                "invalid interval ({t_lo}, {t_hi}) for horizon {horizon}"
            )));
        }
        Ok(Self {
            t_lo,
            t_hi,
            horizon,
        })
    }

    pub fn tau(&self) -> f64 {
        self.t_hi - self.t_lo
    }

    /// Distance `T − t_hi` from the right end to the horizon.
    pub fn gap(&self) -> f64 {
        self.horizon - self.t_hi
    }

    pub fn touches_horizon(&self) -> bool {
        self.gap() <= 0.0
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.t_lo + self.t_hi)
    }

    fn require_gap(&self, what: &str) -> Result<f64> {
        let gap = self.gap();
        if gap > 0.0 {
            Ok(gap)
        } else {
            Err(Error::Domain(format!(
                "{what} is infinite on an interval ending at the horizon"
            )))
        }
    }
}

/// `θ_j = κ₁ ln(1 + τ/(T−t_j)) + κ₁′τ`, the bound for `∫ φ₁(T−s) ds`.
pub fn theta(bounds: &GreenFunctionBounds, iv: &Interval) -> Result<f64> {
    let tau = iv.tau();
    let log_part = if bounds.kappa1 == 0.0 {
        0.0
    } else {
        let gap = iv.require_gap("theta")?;
        bounds.kappa1 * (tau / gap).ln_1p()
    };
    Ok(log_part + bounds.kappa1p * tau)
}

/// `ρ_j = κ₁[τ − (T−t_j) ln(1 + τ/(T−t_j))] + κ₁′τ²/2`, the bound for
/// `∫ (t_j − s)φ₁(T−s) ds`. On the final interval the limit `κ₁τ + κ₁′τ²/2`
/// is returned.
pub fn rho(bounds: &GreenFunctionBounds, iv: &Interval) -> Result<f64> {
    let tau = iv.tau();
    let gap = iv.gap();
    let bracket = if gap <= 0.0 {
        tau
    } else {
        let r = tau / gap;
        if r <= SERIES_SWITCH {
            // τ − d·ln(1+r) = τ Σ_{ℓ≥1} (−1)^{ℓ+1} r^ℓ/(ℓ+1)
            tau * alternating_series(r, |l| 1.0 / (l + 1.0))
        } else {
            tau - gap * r.ln_1p()
        }
    };
    Ok(bounds.kappa1 * bracket + bounds.kappa1p * tau * tau / 2.0)
}

/// `Σ_{ℓ≥1} (−1)^{ℓ+1} c(ℓ) rˡ`, truncated once a term drops below
/// `SERIES_TOL` relative to the partial sum. Needs `0 ≤ r < 1`.
fn alternating_series(r: f64, coeff: impl Fn(f64) -> f64) -> f64 {
    let mut sum = 0.0;
    let mut power = 1.0;
    let mut sign = 1.0;
    for l in 1..10_000 {
        power *= r;
        let term = sign * coeff(l as f64) * power;
        sum += term;
        if term.abs() < SERIES_TOL * sum.abs() {
            break;
        }
        sign = -sign;
    }
    sum
}

/// `μ_{k,j}` by the closed-form recursion in `k`.
pub fn mu_recursive(k: u32, iv: &Interval) -> Result<f64> {
    let gap = iv.require_gap("mu")?;
    let tau = iv.tau();
    let mut mu = -tau + (iv.horizon - iv.t_lo) * (tau / gap).ln_1p();
    for i in 1..=k {
        let i = f64::from(i);
        mu = tau.powi(i as i32 + 1) / (i * (i + 1.0)) - gap * mu;
    }
    Ok(mu)
}

/// `μ_{k,j}` by its alternating series in `τ/(T−t_j)`; requires that ratio to be below one.
pub fn mu_series(k: u32, iv: &Interval) -> Result<f64> {
    let gap = iv.require_gap("mu")?;
    let tau = iv.tau();
    let r = tau / gap;
    if r >= 1.0 {
        return Err(Error::Domain(format!(
            "mu series diverges for tau/(T - t_j) = {r}"
        )));
    }
    let k = f64::from(k);
    let sum = alternating_series(r, |l| 1.0 / ((l + k) * (l + k + 1.0)));
    Ok(tau.powi(k as i32 + 1) * sum)
}

/// `μ_{k,j} = ∫_{I_j} (t_j−s)ᵏ(s−t_{j−1})/(T−s) ds`.
///
/// Uses the series when `τ/(T−t_j) ≤ SERIES_SWITCH`, where the recursion
/// would subtract nearly equal quantities.
pub fn mu(k: u32, iv: &Interval) -> Result<f64> {
    let gap = iv.require_gap("mu")?;
    if iv.tau() / gap <= SERIES_SWITCH {
        mu_series(k, iv)
    } else {
        mu_recursive(k, iv)
    }
}

/// `Φ_{k,j} = κ₁μ_{k,j} + κ₁′τ^{k+2}/((k+1)(k+2))`.
pub fn phi_cap(bounds: &GreenFunctionBounds, k: u32, iv: &Interval) -> Result<f64> {
    let tau = iv.tau();
    let kf = f64::from(k);
    let poly = bounds.kappa1p * tau.powi(k as i32 + 2) / ((kf + 1.0) * (kf + 2.0));
    if bounds.kappa1 == 0.0 {
        return Ok(poly);
    }
    Ok(bounds.kappa1 * mu(k, iv)? + poly)
}

/// `Φ*_{k,j} = κ₀ ∫_{I_j} |d/ds[(t_j−s)ᵏ(s−t_{j−1})]| ds` for `k ≤ 2`.
pub fn phi_star(bounds: &GreenFunctionBounds, k: u32, iv: &Interval) -> Result<f64> {
    let tau = iv.tau();
    let total_variation = match k {
        0 => tau,
        1 => tau * tau / 2.0,
        2 => 8.0 * tau.powi(3) / 27.0,
        _ => return Err(Error::Unsupported(format!("Phi* for k = {k}"))),
    };
    Ok(bounds.kappa0 * total_variation)
}

/// `Ψ_{k,j} = min{Φ_{k,j}, Φ*_{k,j}}`.
///
/// On the final interval `Φ_{k,M}` is unbounded for `κ₁ > 0`, so `Φ*` is returned.
pub fn psi_cap(bounds: &GreenFunctionBounds, k: u32, iv: &Interval) -> Result<f64> {
    let star = phi_star(bounds, k, iv)?;
    if iv.touches_horizon() && bounds.kappa1 > 0.0 {
        return Ok(star);
    }
    Ok(phi_cap(bounds, k, iv)?.min(star))
}

/// `μ*_j = ∫_{I_j} ω(s)/(T−s)² ds` with `ω(s) = (t_j−s)(s−t_{j−1})/2`.
pub fn mu_star(iv: &Interval) -> Result<f64> {
    iv.require_gap("mu*")?;
    let (lo, hi, horizon) = (iv.t_lo, iv.t_hi, iv.horizon);
    Ok(quadrature::integrate_rel(
        |s| (hi - s) * (s - lo) / (2.0 * (horizon - s).powi(2)),
        lo,
        hi,
        COEFF_QUAD_TOL,
    ))
}

/// `π(s) = (t_j−s)(t_{j−1/2}−s)(t_{j−1}−s)/6`.
pub fn cubic_pi(iv: &Interval, s: f64) -> f64 {
    (iv.t_hi - s) * (iv.midpoint() - s) * (iv.t_lo - s) / 6.0
}

/// `σ*_j = ∫_{I_j} |π(s)|/(T−s)² ds`, integrated separately on the two halves
/// where `π` keeps its sign.
pub fn sigma_star(iv: &Interval) -> Result<f64> {
    iv.require_gap("sigma*")?;
    let integrand = |s: f64| cubic_pi(iv, s).abs() / (iv.horizon - s).powi(2);
    let mid = iv.midpoint();
    Ok(quadrature::integrate_rel(integrand, iv.t_lo, mid, COEFF_QUAD_TOL)
        + quadrature::integrate_rel(integrand, mid, iv.t_hi, COEFF_QUAD_TOL))
}
