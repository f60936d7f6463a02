//! Transverse-spin and field quadratures.
//!
//! For a mode with lowering operator `b` the rotated quadrature is
//! `Q_θ = b e^{-iθ} + b† e^{iθ}`, so `θ = 0` is X and `θ = π/2` is Y. Spin
//! components are half of these (`S_x = (S21 + S12)/2`), and normalizing spin
//! variances by `n/4` is the same as normalizing `<Q_θ²>` by `n`.

use std::f64::consts::PI;

use crate::linalg::CMatrix;
use crate::model::{Operator, Populations};

use super::MomentMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Species {
    /// Ground-state nuclear spin, `I09`.
    Ground,
    /// Metastable spin, `S21`.
    Meta,
    /// Cavity field, `A`.
    Field,
}

impl Species {
    pub fn lowering(self) -> Operator {
        match self {
            Species::Ground => Operator::I09,
            Species::Meta => Operator::S21,
            Species::Field => Operator::A,
        }
    }

    /// Coherent-state reference for normalization.
    pub fn population(self, pops: &Populations) -> f64 {
        match self {
            Species::Ground => pops.n_ground,
            Species::Meta => pops.n_meta,
            Species::Field => 1.0,
        }
    }
}

/// Symmetrized (X, Y) covariance, normalized to the coherent state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureCov {
    pub xx: f64,
    pub yy: f64,
    pub xy: f64,
}

impl QuadratureCov {
    /// Extracts the covariance of `species` from any operator-ordered matrix
    /// over `basis` (moments or spectral densities). `None` if the species is
    /// not represented.
    pub fn from_matrix(mat: &CMatrix, basis: &[Operator], pops: &Populations, species: Species) -> Option<Self> {
        let b = basis.iter().position(|&o| o == species.lowering())?;
        let bd = basis.iter().position(|&o| o == species.lowering().partner())?;
        let bb = mat[(b, b)];
        let dd = mat[(bd, bd)];
        let sym = mat[(b, bd)] + mat[(bd, b)];
        let norm = species.population(pops);
        Some(Self {
            xx: (sym + bb + dd).re / norm,
            yy: (sym - bb - dd).re / norm,
            // (XY + YX)/2 = i(b†b† − bb)
            xy: ((dd - bb) * num_complex::Complex64::i()).re / norm,
        })
    }

    pub fn at_angle(&self, theta: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        c * c * self.xx + s * s * self.yy + 2.0 * s * c * self.xy
    }

    pub fn best(&self) -> BestQuadrature {
        let mean = 0.5 * (self.xx + self.yy);
        let half = (0.25 * (self.xx - self.yy).powi(2) + self.xy * self.xy).sqrt();
        if half <= 1e-12 * mean.abs() {
            return BestQuadrature { angle: 0.0, variance: mean, degenerate: true };
        }
        // Major axis at 0.5·atan2(2xy, xx − yy); the minimum is orthogonal.
        let mut angle = 0.5 * (2.0 * self.xy).atan2(self.xx - self.yy) + 0.5 * PI;
        angle = angle.rem_euclid(PI);
        BestQuadrature { angle, variance: mean - half, degenerate: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BestQuadrature {
    /// Minimizing `θ ∈ [0, π)`.
    pub angle: f64,
    pub variance: f64,
    /// Isotropic covariance: every angle is optimal and `angle` is 0.
    pub degenerate: bool,
}

/// Normalized quadrature variances of the three species.
///
/// Spin variances are normalized to `N/4` and `n/4`, field variances to 1.
/// Field entries are NaN when the basis carries no cavity mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceReport {
    pub var_i_x: f64,
    pub var_i_y: f64,
    pub var_s_x: f64,
    pub var_s_y: f64,
    pub var_x: f64,
    pub var_y: f64,
    pub best_angle_i: f64,
    pub best_var_i: f64,
}

impl VarianceReport {
    /// `(var_x · var_y)` for ground, metastable and field.
    pub fn heisenberg_products(&self) -> [f64; 3] {
        [self.var_i_x * self.var_i_y, self.var_s_x * self.var_s_y, self.var_x * self.var_y]
    }
}

pub fn quadrature_variances(m: &MomentMatrix) -> VarianceReport {
    let cov = |s| QuadratureCov::from_matrix(&m.moments, &m.basis, &m.populations, s);
    let ground = cov(Species::Ground).expect("moment matrix has no ground-state spin");
    let meta = cov(Species::Meta).expect("moment matrix has no metastable spin");
    let field = cov(Species::Field);
    let best = ground.best();
    VarianceReport {
        var_i_x: ground.xx,
        var_i_y: ground.yy,
        var_s_x: meta.xx,
        var_s_y: meta.yy,
        var_x: field.map_or(f64::NAN, |f| f.xx),
        var_y: field.map_or(f64::NAN, |f| f.yy),
        best_angle_i: best.angle,
        best_var_i: best.variance,
    }
}

/// Minimum normalized variance over quadrature angles.
pub fn best_quadrature(m: &MomentMatrix, species: Species) -> Option<BestQuadrature> {
    QuadratureCov::from_matrix(&m.moments, &m.basis, &m.populations, species).map(|c| c.best())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn meta_only(entries: &[(Operator, Operator, Complex64)], n: f64) -> MomentMatrix {
        let basis = vec![Operator::S21, Operator::S12, Operator::I09, Operator::I90];
        let mut moments = CMatrix::zeros(4, 4);
        for &(a, b, v) in entries {
            let i = basis.iter().position(|&o| o == a).unwrap();
            let j = basis.iter().position(|&o| o == b).unwrap();
            moments[(i, j)] = v;
        }
        moments[(2, 3)] = Complex64::new(1.0, 0.0);
        MomentMatrix { basis, moments, populations: Populations { n_meta: n, n_ground: 1.0 } }
    }

    #[test]
    fn normal_part_only() {
        let (a, b, n) = (3.0, 1.0, 8.0);
        let m = meta_only(
            &[(Operator::S21, Operator::S12, Complex64::new(a, 0.0)), (Operator::S12, Operator::S21, Complex64::new(b, 0.0))],
            n,
        );
        let r = quadrature_variances(&m);
        assert!((r.var_s_y * n / 4.0 - (a + b) / 4.0).abs() < 1e-15);
        assert!((r.var_s_x - r.var_s_y).abs() < 1e-15);
    }

    #[test]
    fn coherent_state_is_isotropic() {
        let m = meta_only(&[(Operator::S21, Operator::S12, Complex64::new(4.0, 0.0))], 4.0);
        let r = quadrature_variances(&m);
        assert_eq!((r.var_i_x, r.var_i_y, r.var_s_x, r.var_s_y), (1.0, 1.0, 1.0, 1.0));
        assert!(r.var_x.is_nan());
        let best = best_quadrature(&m, Species::Ground).unwrap();
        assert!(best.degenerate);
        assert_eq!(best.angle, 0.0);
        assert_eq!(best.variance, 1.0);
    }

    #[test]
    fn y_squeezing_has_angle_half_pi() {
        // Squeezed vacuum in X has <bb> < 0; put the squeezing in Y with <bb> > 0.
        let cov = QuadratureCov { xx: 2.0, yy: 0.5, xy: 0.0 };
        let best = cov.best();
        assert!((best.angle - PI / 2.0).abs() < 1e-15);
        assert_eq!(best.variance, 0.5);
    }

    proptest! {
        #[test]
        fn best_is_global_minimum(xx in 0.1f64..5.0, yy in 0.1f64..5.0, xy in -1.0f64..1.0) {
            let cov = QuadratureCov { xx, yy, xy };
            let best = cov.best();
            prop_assert!((cov.at_angle(best.angle) - best.variance).abs() < 1e-12);
            for k in 0..360 {
                let theta = k as f64 * PI / 360.0;
                prop_assert!(cov.at_angle(theta) >= best.variance - 1e-12);
            }
            prop_assert!((0.0..PI).contains(&best.angle));
        }
    }
}
