//! The mean-field drift `F(x) = u(x) / sum(u(x)) - x`, its Jacobian in the
//! reduced chart, and the Lyapunov function of the equal-interaction family.
//!
//! The proportions process moves by `gamma_n (F(x) + noise)` with
//! `gamma_n = 1 / (n0 + n + 1)`, so zeros of `F` are the candidate limits and
//! the linearisation of `F` decides which of them attract.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Result, UrnError};
use crate::model::ModelSpec;
use crate::simplex::{ReducedCoordinates, SimplexPoint};
use crate::urn::probabilities_into;

/// Default central-difference step.
pub const DEFAULT_FD_STEP: f64 = 1e-6;

/// Anything that assigns a drift to points of (a neighbourhood of) the
/// simplex. Implementations must accept points slightly off the simplex so
/// that finite differences in the chart are well defined.
pub trait VectorField {
    fn dim(&self) -> usize;
    fn eval(&self, x: &[f64], out: &mut [f64]);
}

impl VectorField for ModelSpec {
    fn dim(&self) -> usize {
        self.d()
    }

    fn eval(&self, x: &[f64], out: &mut [f64]) {
        if probabilities_into(self, x, out).is_err() {
            out.iter_mut().for_each(|v| *v = f64::NAN);
            return;
        }
        out.iter_mut().zip(x).for_each(|(o, xi)| *o -= xi);
    }
}

/// Closed-form drift of the equal-interaction model.
#[derive(Debug, Clone, Copy)]
pub struct SymmetricField {
    pub d: usize,
    pub a: f64,
    pub beta: f64,
}

impl VectorField for SymmetricField {
    fn dim(&self) -> usize {
        self.d
    }

    fn eval(&self, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&f_symmetric(self.a, self.beta, x));
    }
}

/// Closed-form drift of the three-colour cyclic model.
#[derive(Debug, Clone, Copy)]
pub struct CyclicField {
    pub a: f64,
    pub beta: f64,
}

impl VectorField for CyclicField {
    fn dim(&self) -> usize {
        3
    }

    fn eval(&self, x: &[f64], out: &mut [f64]) {
        let x: [f64; 3] = x.try_into().expect("cyclic field is three-dimensional");
        out.copy_from_slice(&f_cyclic(self.a, self.beta, x));
    }
}

/// The drift together with the reduced Jacobian when it was requested.
#[derive(Debug, Clone, Serialize)]
pub struct FlowEvaluation {
    pub point: SimplexPoint,
    pub drift: Vec<f64>,
    pub jacobian: Option<[[f64; 2]; 2]>,
    /// Set when a boundary point was evaluated with `beta < 1`, where the
    /// value is the continuous extension of the interior drift.
    pub boundary_limit: bool,
}

fn check_domain(model: &ModelSpec, x: &SimplexPoint) -> Result<()> {
    if x.dim() != model.d() {
        return Err(UrnError::InvalidArgument(format!(
            "point has {} coordinates but the model has {} colours",
            x.dim(),
            model.d()
        )));
    }
    Ok(())
}

/// Drift of the general model. Boundary points are rejected when
/// `beta < 1`; see [`evaluate`] for the flagged boundary extension.
pub fn drift(model: &ModelSpec, x: &SimplexPoint) -> Result<Vec<f64>> {
    check_domain(model, x)?;
    if model.beta() < 1.0 && !x.is_interior() {
        return Err(UrnError::NotInterior(x.coords().to_vec()));
    }
    let mut out = vec![0.0; model.d()];
    probabilities_into(model, x.coords(), &mut out)?;
    out.iter_mut().zip(x.coords()).for_each(|(o, xi)| *o -= xi);
    Ok(out)
}

/// Drift with an optional reduced Jacobian (three colours only).
pub fn evaluate(model: &ModelSpec, x: &SimplexPoint, with_jacobian: bool) -> Result<FlowEvaluation> {
    check_domain(model, x)?;
    let boundary_limit = model.beta() < 1.0 && !x.is_interior();
    let mut out = vec![0.0; model.d()];
    probabilities_into(model, x.coords(), &mut out)?;
    out.iter_mut().zip(x.coords()).for_each(|(o, xi)| *o -= xi);
    let jacobian = if with_jacobian {
        Some(jacobian_reduced(model, x, DEFAULT_FD_STEP)?)
    } else {
        None
    };
    Ok(FlowEvaluation {
        point: x.clone(),
        drift: out,
        jacobian,
        boundary_limit,
    })
}

/// `F_i = (x_i^b + a sum_{j != i} x_j^b) / ((1 + (d-1) a) sum_j x_j^b) - x_i`.
pub fn f_symmetric(a: f64, beta: f64, x: &[f64]) -> Vec<f64> {
    let d = x.len() as f64;
    let powered: Vec<f64> = x.iter().map(|v| v.powf(beta)).collect();
    let s: f64 = powered.iter().sum();
    let denom = (1.0 + (d - 1.0) * a) * s;
    powered
        .iter()
        .zip(x)
        .map(|(p, xi)| (p + a * (s - p)) / denom - xi)
        .collect()
}

/// `F_i = (x_i^b + a x_{i+1}^b) / ((1 + a) sum_j x_j^b) - x_i`, indices mod 3.
pub fn f_cyclic(a: f64, beta: f64, x: [f64; 3]) -> [f64; 3] {
    let p = x.map(|v| v.powf(beta));
    let denom = (1.0 + a) * (p[0] + p[1] + p[2]);
    std::array::from_fn(|i| (p[i] + a * p[(i + 1) % 3]) / denom - x[i])
}

/// Central-difference Jacobian of `(x1, x2) -> (F1, F2)` with
/// `x3 = 1 - x1 - x2`.
pub fn jacobian_reduced<F: VectorField + ?Sized>(
    field: &F,
    x: &SimplexPoint,
    h: f64,
) -> Result<[[f64; 2]; 2]> {
    if !(1e-7..=1e-4).contains(&h) {
        return Err(UrnError::InvalidArgument(format!(
            "finite-difference step {h} outside [1e-7, 1e-4]"
        )));
    }
    jacobian_reduced_unchecked(field, x, h)
}

/// As [`jacobian_reduced`] without the bounds on `h`; used by refinement
/// close to the boundary.
pub(crate) fn jacobian_reduced_unchecked<F: VectorField + ?Sized>(
    field: &F,
    x: &SimplexPoint,
    h: f64,
) -> Result<[[f64; 2]; 2]> {
    if field.dim() != 3 || x.dim() != 3 {
        return Err(UrnError::InvalidArgument(
            "reduced Jacobian needs three colours".into(),
        ));
    }
    if x.coords().iter().any(|c| *c <= h) {
        return Err(UrnError::ChartViolation {
            point: x.coords().to_vec(),
            step: h,
        });
    }
    let q = ReducedCoordinates::chart(x)?;
    let mut jac = [[0.0; 2]; 2];
    let mut plus = [0.0; 3];
    let mut minus = [0.0; 3];
    for j in 0..2 {
        let mut qp = q;
        let mut qm = q;
        qp[j] += h;
        qm[j] -= h;
        field.eval(&ReducedCoordinates::unchart_raw(qp), &mut plus);
        field.eval(&ReducedCoordinates::unchart_raw(qm), &mut minus);
        for i in 0..2 {
            jac[i][j] = (plus[i] - minus[i]) / (2.0 * h);
        }
    }
    Ok(jac)
}

/// Closed-form reduced Jacobian of the unit cyclic model at the centre.
pub fn cyclic_center_jacobian(beta: f64) -> [[f64; 2]; 2] {
    [[beta / 2.0 - 1.0, beta / 2.0], [-beta / 2.0, -1.0]]
}

/// Eigenvalues of a real 2x2 matrix by the quadratic formula, larger real
/// part (then positive imaginary part) first.
pub fn eigenvalues_2x2(m: [[f64; 2]; 2]) -> [Complex64; 2] {
    let half_trace = 0.5 * (m[0][0] + m[1][1]);
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = half_trace * half_trace - det;
    if disc >= 0.0 {
        let root = disc.sqrt();
        [
            Complex64::new(half_trace + root, 0.0),
            Complex64::new(half_trace - root, 0.0),
        ]
    } else {
        let root = (-disc).sqrt();
        [
            Complex64::new(half_trace, root),
            Complex64::new(half_trace, -root),
        ]
    }
}

/// `L(x) = -sum x_i + c [a sum log x_i - ((a - 1) / beta) log sum x_i^beta]`
/// with `c = 1 / ((d - 1) a + 1)`. Nondecreasing along the equal-interaction
/// flow, with `x_i dL/dx_i = F_i`.
pub fn lyapunov(a: f64, beta: f64, x: &SimplexPoint) -> Result<f64> {
    if !x.is_interior() {
        return Err(UrnError::NotInterior(x.coords().to_vec()));
    }
    Ok(lyapunov_raw(a, beta, x.coords()))
}

/// `L` on the open positive orthant, without validation.
pub fn lyapunov_raw(a: f64, beta: f64, x: &[f64]) -> f64 {
    let d = x.len() as f64;
    let c = 1.0 / ((d - 1.0) * a + 1.0);
    let sum: f64 = x.iter().sum();
    let log_sum: f64 = x.iter().map(|v| v.ln()).sum();
    let power_sum: f64 = x.iter().map(|v| v.powf(beta)).sum();
    -sum + c * (a * log_sum - (a - 1.0) / beta * power_sum.ln())
}

/// Central-difference gradient of [`lyapunov_raw`] in ambient coordinates.
pub fn lyapunov_gradient_fd(a: f64, beta: f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + h;
            let up = lyapunov_raw(a, beta, &probe);
            probe[i] = x[i] - h;
            let down = lyapunov_raw(a, beta, &probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{PolyParams, Variant};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn pt(v: &[f64]) -> SimplexPoint {
        SimplexPoint::normalized(v).unwrap()
    }

    fn max_abs(v: &[f64]) -> f64 {
        v.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    fn random_interior(rng: &mut impl Rng, d: usize, floor: f64) -> SimplexPoint {
        let raw: Vec<f64> = (0..d).map(|_| floor + rng.random::<f64>()).collect();
        pt(&raw)
    }

    #[test]
    fn center_is_fixed() {
        for &(a, beta) in &[(0.2, 2.0), (0.5, 0.7), (3.0, 9.0)] {
            let m = ModelSpec::symmetric(3, a, beta).unwrap();
            assert!(max_abs(&drift(&m, &SimplexPoint::center(3)).unwrap()) < 1e-15);
            let m = ModelSpec::cyclic(a, beta).unwrap();
            assert!(max_abs(&drift(&m, &SimplexPoint::center(3)).unwrap()) < 1e-15);
        }
        assert!(max_abs(&f_cyclic(0.5, 2.0, [1.0 / 3.0; 3])) < 1e-15);
    }

    #[test]
    fn published_stationary_points() {
        let m = ModelSpec::symmetric(3, 0.2, 2.0).unwrap();
        let f = drift(&m, &pt(&[0.1847, 0.1847, 0.6306])).unwrap();
        assert!(max_abs(&f) < 5e-4, "{f:?}");
        let f = f_symmetric(0.26, 2.0, &[0.2792, 0.2792, 0.4416]);
        assert!(max_abs(&f) < 5e-4, "{f:?}");
    }

    #[test]
    fn closed_forms_match_general_drift() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let x = random_interior(&mut rng, 3, 0.0);
            for &(a, beta) in &[(1.0, 6.0), (0.3, 2.0), (2.5, 0.6)] {
                let c = ModelSpec::cyclic(a, beta).unwrap();
                let fc = f_cyclic(a, beta, x.coords().try_into().unwrap());
                let fg = drift(&c, &x).unwrap();
                assert!(fc.iter().zip(&fg).all(|(p, q)| (p - q).abs() < 1e-14));

                let s = ModelSpec::symmetric(3, a, beta).unwrap();
                let fs = f_symmetric(a, beta, x.coords());
                let fg = drift(&s, &x).unwrap();
                assert!(fs.iter().zip(&fg).all(|(p, q)| (p - q).abs() < 1e-14));
            }
        }
    }

    #[test]
    fn fractional_beta_boundary() {
        let m = ModelSpec::symmetric(3, 0.5, 0.5).unwrap();
        let edge = SimplexPoint::new(vec![0.5, 0.5, 0.0]).unwrap();
        assert!(matches!(drift(&m, &edge), Err(UrnError::NotInterior(_))));
        let ev = evaluate(&m, &edge, false).unwrap();
        assert!(ev.boundary_limit);
        assert!(ev.drift[2] > 0.0, "drift must push inward");

        let m = ModelSpec::symmetric(3, 0.5, 2.0).unwrap();
        assert!(drift(&m, &edge).is_ok());
        assert!(!evaluate(&m, &edge, false).unwrap().boundary_limit);
    }

    #[test]
    fn unit_cyclic_center_jacobian() {
        for beta in [2.0, 4.0, 6.0] {
            let m = ModelSpec::cyclic(1.0, beta).unwrap();
            let j = jacobian_reduced(&m, &SimplexPoint::center(3), DEFAULT_FD_STEP).unwrap();
            let closed = cyclic_center_jacobian(beta);
            for i in 0..2 {
                for k in 0..2 {
                    assert!((j[i][k] - closed[i][k]).abs() < 1e-4);
                }
            }
        }
        let ev = eigenvalues_2x2(cyclic_center_jacobian(4.0));
        assert!(ev[0].re.abs() < 1e-15);
        assert!((ev[0].im - 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn quarter_interaction_center_is_neutral() {
        let m = ModelSpec::symmetric(3, 0.25, 2.0).unwrap();
        let j = jacobian_reduced(&m, &SimplexPoint::center(3), DEFAULT_FD_STEP).unwrap();
        for e in eigenvalues_2x2(j) {
            assert!(e.re.abs() < 1e-6, "{e}");
        }
    }

    #[test]
    fn polya_field_vanishes() {
        // F = 0 identically for A = I, beta = 1.
        let m = ModelSpec::identity(3, 1.0).unwrap();
        let j = jacobian_reduced(&m, &SimplexPoint::center(3), DEFAULT_FD_STEP).unwrap();
        assert!(j.iter().flatten().all(|v| v.abs() < 1e-9));
        for e in eigenvalues_2x2(j) {
            assert!(e.norm() < 1e-9);
        }
    }

    #[test]
    fn jacobian_rejects_bad_steps() {
        let m = ModelSpec::cyclic(1.0, 3.0).unwrap();
        let c = SimplexPoint::center(3);
        assert!(jacobian_reduced(&m, &c, 1e-3).is_err());
        assert!(jacobian_reduced(&m, &c, 1e-9).is_err());
        let near = pt(&[1e-5, 0.5, 0.5]);
        assert!(matches!(
            jacobian_reduced(&m, &near, 1e-4),
            Err(UrnError::ChartViolation { .. })
        ));
    }

    #[test]
    fn eigenvalue_examples() {
        // lambda^2 + 3 = 0
        let ev = eigenvalues_2x2([[1.0, 2.0], [-2.0, -1.0]]);
        assert!(ev[0].re.abs() < 1e-15 && (ev[0].im - 3f64.sqrt()).abs() < 1e-15);
        assert!((ev[1].im + 3f64.sqrt()).abs() < 1e-15);

        let ev = eigenvalues_2x2(cyclic_center_jacobian(6.0));
        assert!((ev[0].re - 0.5).abs() < 1e-14);
        assert!((ev[0].im - 3.0 * 3f64.sqrt() / 2.0).abs() < 1e-14);

        let ev = eigenvalues_2x2([[1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(ev, [Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)]);
    }

    #[test]
    fn lyapunov_gradient_vanishes_at_center() {
        let c = SimplexPoint::center(3);
        for &(a, beta) in &[(0.2, 2.0), (0.5, 0.5), (2.0, 5.0)] {
            let g = lyapunov_gradient_fd(a, beta, c.coords(), 1e-6);
            // dL/dx_i = F_i / x_i = 0 at a stationary point.
            assert!(max_abs(&g) < 1e-8, "{g:?}");
        }
    }

    #[test]
    fn stable_asymmetric_point_beats_center() {
        let l_asym = lyapunov(0.2, 2.0, &pt(&[0.1847, 0.1847, 0.6306])).unwrap();
        let l_center = lyapunov(0.2, 2.0, &SimplexPoint::center(3)).unwrap();
        assert!(l_asym > l_center);
        assert!(lyapunov(0.2, 2.0, &SimplexPoint::new(vec![0.5, 0.5, 0.0]).unwrap()).is_err());
    }

    #[test]
    fn lyapunov_identity_random_points() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for &a in &[0.2, 0.5, 2.0] {
            for &beta in &[0.5, 2.0, 5.0] {
                for _ in 0..100 {
                    let x = random_interior(&mut rng, 3, 0.05);
                    let g = lyapunov_gradient_fd(a, beta, x.coords(), 1e-6);
                    let f = f_symmetric(a, beta, x.coords());
                    for i in 0..3 {
                        assert!((x[i] * g[i] - f[i]).abs() < 1e-8);
                    }
                }
            }
        }
    }

    #[test]
    fn lyapunov_increases_along_euler_flow() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for start in 0..50 {
            let a = [0.1, 0.2, 0.26, 0.5, 0.9][start % 5];
            let beta = [1.5, 2.0, 3.0, 5.0][start % 4];
            let mut x = random_interior(&mut rng, 3, 0.02).into_coords();
            let mut prev = lyapunov_raw(a, beta, &x);
            for _ in 0..3000 {
                let f = f_symmetric(a, beta, &x);
                x.iter_mut().zip(&f).for_each(|(xi, fi)| *xi += 1e-3 * fi);
                let next = lyapunov_raw(a, beta, &x);
                assert!(next >= prev - 1e-12, "a={a} beta={beta}: {prev} -> {next}");
                prev = next;
            }
        }
    }

    proptest! {
        #[test]
        fn drift_sums_to_zero(
            a in 0.01f64..4.0, beta in 0.2f64..8.0,
            raw in proptest::collection::vec(0.001f64..1.0, 3),
            cyclic in any::<bool>(),
        ) {
            let m = if cyclic { ModelSpec::cyclic(a, beta) } else { ModelSpec::symmetric(3, a, beta) }.unwrap();
            let f = drift(&m, &pt(&raw)).unwrap();
            prop_assert!(f.iter().sum::<f64>().abs() < 1e-12);
        }

        #[test]
        fn diagonal_lines_are_invariant(a in 0.01f64..4.0, beta in 0.2f64..8.0, x in 0.01f64..0.49) {
            let f = f_symmetric(a, beta, &[x, x, 1.0 - 2.0 * x]);
            prop_assert_eq!(f[0], f[1]);
        }

        #[test]
        fn restriction_to_diagonal(a in 0.02f64..3.0, beta in 0.3f64..6.0, x3 in 0.02f64..0.98) {
            let half = (1.0 - x3) / 2.0;
            let f3 = f_symmetric(a, beta, &[half, half, x3])[2];
            let z = 2.0 * x3 / (1.0 - x3);
            let (p, _) = PolyParams::new(a, beta, Variant::ThreeTypeSymmetric).unwrap().eval(z);
            let expected = -2.0 * p / ((1.0 + 2.0 * a) * (2.0 + z.powf(beta)) * (2.0 + z));
            prop_assert!((f3 - expected).abs() < 1e-10, "{} vs {}", f3, expected);
        }

        #[test]
        fn transverse_perturbation_coefficient(a in 0.05f64..3.0, beta in 0.5f64..5.0, r in 0.2f64..5.0) {
            let x = 1.0 / (r + 2.0);
            let eps = 1e-6;
            let base = f_symmetric(a, beta, &[x, x, r * x])[0];
            let moved = f_symmetric(a, beta, &[x + eps, x - eps, r * x])[0];
            let expected = -1.0 + beta * (1.0 - a) * (r + 2.0) / ((2.0 * a + 1.0) * (2.0 + r.powf(beta)));
            prop_assert!(((moved - base) / eps - expected).abs() < 1e-5);
        }
    }
}
