use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::model::{check_stability, LangevinSystem, Operator, Populations};

/// Largest accepted `‖A M + M Aᵀ + D‖_F / ‖D‖_F` (in scaled units).
pub const STEADY_RESIDUAL_TOL: f64 = 1e-10;

/// Operator-ordered second moments `M_αβ = <δα δβ>`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentMatrix {
    pub basis: Vec<Operator>,
    pub moments: CMatrix,
    pub populations: Populations,
}

impl MomentMatrix {
    pub fn index_of(&self, op: Operator) -> Option<usize> {
        self.basis.iter().position(|&b| b == op)
    }

    /// `<δα δβ>`; panics if either operator is outside the basis.
    pub fn get(&self, alpha: Operator, beta: Operator) -> Complex64 {
        let i = self.index_of(alpha).expect("operator not in basis");
        let j = self.index_of(beta).expect("operator not in basis");
        self.moments[(i, j)]
    }

    /// Largest deviation of `M - Mᵀ` from the polarized-state commutators,
    /// relative to `max(n, N, 1)`.
    pub fn commutator_deviation(&self) -> f64 {
        let n = self.basis.len();
        let scale = self.populations.n_meta.max(self.populations.n_ground).max(1.0);
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let expected = self.populations.commutator(self.basis[i], self.basis[j]);
                let got = self.moments[(i, j)] - self.moments[(j, i)];
                worst = worst.max((got - Complex64::new(expected, 0.0)).norm() / scale);
            }
        }
        worst
    }

    /// Per-species relative commutator errors for (metastable, ground,
    /// field), each normalized by its own population.
    pub fn commutator_errors(&self) -> [f64; 3] {
        let rel = |a: Operator, b: Operator, pop: f64| -> f64 {
            match (self.index_of(a), self.index_of(b)) {
                (Some(_), Some(_)) => {
                    let k = self.get(a, b) - self.get(b, a);
                    (k - Complex64::new(pop, 0.0)).norm() / pop
                }
                _ => 0.0,
            }
        };
        [
            rel(Operator::S21, Operator::S12, self.populations.n_meta),
            rel(Operator::I09, Operator::I90, self.populations.n_ground),
            rel(Operator::A, Operator::ADag, 1.0),
        ]
    }

    /// Largest violation of `M_αβ = conj(M_{β̄ ᾱ})`, relative to `‖M‖_max`.
    pub fn conjugation_deviation(&self) -> f64 {
        let n = self.basis.len();
        let scale = self.moments.iter().map(|z| z.norm()).fold(f64::MIN_POSITIVE, f64::max);
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let bi = self.index_of(self.basis[j].partner()).unwrap();
                let bj = self.index_of(self.basis[i].partner()).unwrap();
                worst = worst.max((self.moments[(i, j)] - self.moments[(bi, bj)].conj()).norm() / scale);
            }
        }
        worst
    }

    /// Relative Frobenius distance `‖self − other‖ / ‖other‖`, computed in
    /// population-scaled units so that every species weighs the same.
    pub fn relative_distance(&self, other: &MomentMatrix) -> f64 {
        let scales: Vec<f64> = self.basis.iter().map(|&op| self.populations.scale(op)).collect();
        let a = linalg::scale_noise(&self.moments, &scales);
        let b = linalg::scale_noise(&other.moments, &scales);
        (a - &b).norm() / b.norm()
    }

    /// Row-major CSV, one row per operator, each complex entry as a
    /// `re,im` column pair.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("op");
        for op in &self.basis {
            let _ = write!(out, ",{op}.re,{op}.im");
        }
        out.push('\n');
        for (i, op) in self.basis.iter().enumerate() {
            out.push_str(op.label());
            for j in 0..self.basis.len() {
                let z = self.moments[(i, j)];
                let _ = write!(out, ",{:.8e},{:.8e}", z.re, z.im);
            }
            out.push('\n');
        }
        out
    }
}

/// Steady second moments from `A M + M Aᵀ + D = 0`.
pub fn solve_steady_moments(system: &LangevinSystem) -> Result<MomentMatrix> {
    check_stability(system)?.require_stable()?;
    let scales = system.scales();
    let a = system.scaled_drift();
    let d = system.scaled_diffusion();
    let sol = linalg::solve_lyapunov(&a, &d).ok_or(Error::SingularSolve {
        condition: f64::INFINITY,
        residual: f64::NAN,
    })?;
    if !(sol.relative_residual <= STEADY_RESIDUAL_TOL) {
        return Err(Error::SingularSolve {
            condition: sol.condition_estimate,
            residual: sol.relative_residual,
        });
    }
    Ok(MomentMatrix {
        basis: system.basis.clone(),
        moments: linalg::unscale_moments(&sol.x, &scales),
        populations: system.populations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::InputFieldStats;

    #[test]
    fn vacuum_cavity() {
        let sys = LangevinSystem::field_only(2.0, 0.3, InputFieldStats::vacuum()).unwrap();
        let m = solve_steady_moments(&sys).unwrap();
        assert!((m.get(Operator::A, Operator::ADag) - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        assert!(m.get(Operator::ADag, Operator::A).norm() < 1e-14);
        assert!(m.get(Operator::A, Operator::A).norm() < 1e-14);
    }

    #[test]
    fn squeezed_cavity_reproduces_input() {
        // A single resonant lossy mode stores exactly the input moments.
        let input = InputFieldStats::from_squeezing(InputFieldStats::r_for_x_variance(0.5));
        let sys = LangevinSystem::field_only(5.0, 0.0, input).unwrap();
        let m = solve_steady_moments(&sys).unwrap();
        let n = m.get(Operator::ADag, Operator::A).re;
        let a2 = m.get(Operator::A, Operator::A).re;
        assert!((n - 0.125).abs() < 1e-14);
        assert!((a2 + 0.375).abs() < 1e-14);
        assert!((1.0 + 2.0 * n + 2.0 * a2 - 0.5).abs() < 1e-14);
    }

    #[test]
    fn refuses_unstable() {
        let mut sys = LangevinSystem::field_only(1.0, 0.0, InputFieldStats::vacuum()).unwrap();
        sys.drift[(0, 0)] = Complex64::new(0.5, 0.0);
        assert!(matches!(solve_steady_moments(&sys), Err(Error::UnstableSystem { .. })));
    }

    #[test]
    fn csv_shape() {
        let sys = LangevinSystem::field_only(1.0, 0.0, InputFieldStats::vacuum()).unwrap();
        let csv = solve_steady_moments(&sys).unwrap().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "op,A.re,A.im,A+.re,A+.im");
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[1].split(',').count(), 5);
        assert!(lines[1].starts_with("A,"), "{}", lines[1]);
        let fields: Vec<f64> = lines[1].split(',').skip(1).map(|v| v.parse().unwrap()).collect();
        assert!(fields[0].abs() < 1e-14 && fields[1].abs() < 1e-14);
        assert!((fields[2] - 1.0).abs() < 1e-12);
    }
}
