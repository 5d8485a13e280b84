//! Certified positive roots of the characteristic polynomials
//!
//! ```text
//! three colours: P(z) = a z^(b+1) - z^b + (1 + a) z - 2a
//! two colours:   P(z) = a z^(b+1) - z^b + z - a
//! ```
//!
//! Both have `P(0) < 0`, `P(z) -> +inf`, and a single inflection point at
//! `z* = (b - 1) / (a (b + 1))` when `b > 1` (concave before, convex after).
//! So `P'` has at most two zeros `c1 < z* < c2`, and each of `(0, c1)`,
//! `(c1, c2)`, `(c2, inf)` holds at most one root. Brackets are placed on
//! those intervals and refined by bisection; a root sitting on a critical
//! point is reported once with multiplicity two.

use serde::{Deserialize, Serialize};

use crate::error::{Result, UrnError};

/// Width, relative to `max(1, |z|)`, at which bisection stops.
pub const BISECTION_TOL: f64 = 1e-12;

/// Residual bound for a certified root (relative to the term magnitude).
pub const ROOT_RESIDUAL_TOL: f64 = 1e-10;

/// `|P|` at a critical point below which the critical point is a double root.
pub const DOUBLE_ROOT_TOL: f64 = 1e-9;

const MAX_BISECTIONS: usize = 400;
const MAX_DOUBLINGS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    ThreeTypeSymmetric,
    TwoTypeSymmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolyParams {
    pub a: f64,
    pub beta: f64,
    pub variant: Variant,
}

/// A certified positive root.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Root {
    pub value: f64,
    pub multiplicity: u8,
    pub residual: f64,
}

impl PolyParams {
    pub fn new(a: f64, beta: f64, variant: Variant) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) || !(beta > 0.0 && beta.is_finite()) {
            return Err(UrnError::InvalidArgument(format!(
                "need a > 0 and beta > 0, got a = {a}, beta = {beta}"
            )));
        }
        Ok(Self { a, beta, variant })
    }

    pub fn three_type(a: f64, beta: f64) -> Result<Self> {
        Self::new(a, beta, Variant::ThreeTypeSymmetric)
    }

    pub fn two_type(a: f64, beta: f64) -> Result<Self> {
        Self::new(a, beta, Variant::TwoTypeSymmetric)
    }

    /// Linear coefficient and (negated) constant term.
    fn tail(&self) -> (f64, f64) {
        match self.variant {
            Variant::ThreeTypeSymmetric => (1.0 + self.a, 2.0 * self.a),
            Variant::TwoTypeSymmetric => (1.0, self.a),
        }
    }

    /// `(P(z), P'(z))`.
    pub fn eval(&self, z: f64) -> (f64, f64) {
        let (lin, konst) = self.tail();
        let (a, b) = (self.a, self.beta);
        let zb = z.powf(b);
        let zb1 = if z == 0.0 && b < 1.0 {
            f64::INFINITY
        } else {
            z.powf(b - 1.0)
        };
        // Factored so that an overflowing power keeps its sign.
        let value = zb * (a * z - 1.0) + lin * z - konst;
        let deriv = zb1 * (a * (b + 1.0) * z - b) + lin;
        (value, deriv)
    }

    pub fn value(&self, z: f64) -> f64 {
        self.eval(z).0
    }

    pub fn derivative(&self, z: f64) -> f64 {
        self.eval(z).1
    }

    /// Sum of the absolute values of the terms of `P(z)`.
    fn magnitude(&self, z: f64) -> f64 {
        let (lin, konst) = self.tail();
        let zb = z.powf(self.beta);
        self.a * zb * z + zb + lin * z + konst
    }

    /// Residual normalised so that large roots are judged relative to the
    /// size of the terms that cancel.
    pub fn scaled_residual(&self, z: f64) -> f64 {
        self.value(z).abs() / self.magnitude(z).max(1.0)
    }

    /// Inflection point `(b - 1) / (a (b + 1))`, present for `b > 1`.
    pub fn inflection(&self) -> Option<f64> {
        (self.beta > 1.0).then(|| (self.beta - 1.0) / (self.a * (self.beta + 1.0)))
    }
}

/// `P(z)` and `P'(z)` for the three-colour polynomial.
pub fn poly_eval(params: &PolyParams, z: f64) -> (f64, f64) {
    params.eval(z)
}

/// Bisection on a sign change of `f` over `[lo, hi]`.
pub(crate) fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> Result<f64> {
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(UrnError::RootCertification(format!(
            "no sign change on [{lo}, {hi}]"
        )));
    }
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= BISECTION_TOL * mid.abs().max(1.0) || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Err(UrnError::RootCertification(format!(
        "bisection did not converge on [{lo}, {hi}]"
    )))
}

/// Smallest `hi >= start` (by doubling) with `f(hi) > 0`.
fn grow_until_positive<F: Fn(f64) -> f64>(f: F, start: f64) -> Result<f64> {
    let mut hi = start.max(1.0);
    for _ in 0..MAX_DOUBLINGS {
        if f(hi) > 0.0 {
            return Ok(hi);
        }
        hi *= 2.0;
        if !hi.is_finite() {
            break;
        }
    }
    Err(UrnError::RootCertification(
        "bracket refinement exhausted while searching for an upper bound".into(),
    ))
}

/// All positive roots in increasing order, each certified by a sign change
/// (or a vanishing derivative for double roots) and a small residual.
pub fn find_positive_roots(params: &PolyParams) -> Result<Vec<Root>> {
    let p = |z: f64| params.value(z);
    let dp = |z: f64| params.derivative(z);
    let mut found: Vec<(f64, u8)> = Vec::with_capacity(3);

    match params.inflection() {
        None => {
            // Convex on (0, inf) with P(0) < 0: exactly one crossing.
            let hi = grow_until_positive(p, 2.0)?;
            found.push((bisect(p, 0.0, hi)?, 1));
        }
        Some(z_star) => {
            let slope_min = dp(z_star);
            if slope_min > 0.0 {
                let hi = grow_until_positive(p, 2.0 * z_star)?;
                found.push((bisect(p, 0.0, hi)?, 1));
            } else {
                // P' > 0 near 0 and at infinity, <= 0 at z*.
                let c1 = if slope_min == 0.0 { z_star } else { bisect(dp, 0.0, z_star)? };
                let c2 = if slope_min == 0.0 {
                    z_star
                } else {
                    let hi = grow_until_positive(dp, 2.0 * z_star)?;
                    bisect(dp, z_star, hi)?
                };
                let (p1, p2) = (p(c1), p(c2));
                let tol1 = DOUBLE_ROOT_TOL * params.magnitude(c1).max(1.0);
                let tol2 = DOUBLE_ROOT_TOL * params.magnitude(c2).max(1.0);
                if p1.abs() <= tol1 && p2.abs() <= tol2 {
                    return Err(UrnError::RootCertification(format!(
                        "both critical points {c1} and {c2} are roots"
                    )));
                }
                if p1.abs() <= tol1 {
                    found.push((c1, 2));
                } else if p1 > 0.0 {
                    found.push((bisect(p, 0.0, c1)?, 1));
                }
                if p2.abs() <= tol2 {
                    if p1 > 0.0 {
                        found.push((c2, 2));
                    }
                } else if p2 < 0.0 {
                    if p1 > tol1 {
                        found.push((bisect(p, c1, c2)?, 1));
                    }
                    let hi = grow_until_positive(p, 2.0 * c2)?;
                    found.push((bisect(p, c2, hi)?, 1));
                }
                if found.is_empty() {
                    return Err(UrnError::RootCertification(format!(
                        "no bracket found (P(c1) = {p1:e}, P(c2) = {p2:e})"
                    )));
                }
            }
        }
    }

    let mut roots = Vec::with_capacity(found.len());
    for (mut z, multiplicity) in found {
        // z = 1 is always an exact root.
        if (z - 1.0).abs() < 1e-9 {
            z = 1.0;
        }
        let residual = params.value(z).abs();
        let tol = if multiplicity > 1 { DOUBLE_ROOT_TOL } else { ROOT_RESIDUAL_TOL };
        if params.scaled_residual(z) > tol {
            return Err(UrnError::RootCertification(format!(
                "root {z} has residual {residual:e}"
            )));
        }
        roots.push(Root {
            value: z,
            multiplicity,
            residual,
        });
    }
    roots.sort_by(|x, y| x.value.total_cmp(&y.value));
    roots.dedup_by(|later, earlier| {
        let same = later.value == earlier.value;
        if same {
            earlier.multiplicity = earlier.multiplicity.saturating_add(later.multiplicity);
        }
        same
    });
    let total: u8 = roots.iter().map(|r| r.multiplicity).sum();
    if total != 1 && total != 3 {
        return Err(UrnError::RootCertification(format!(
            "found {total} roots counting multiplicity; expected 1 or 3"
        )));
    }
    Ok(roots)
}
