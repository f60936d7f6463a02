//! Noise spectra `S(ω) = (A + iω)⁻¹ D (Aᵀ − iω)⁻¹` and derived quantities.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::model::{check_stability, LangevinSystem};

use super::quadrature::{QuadratureCov, Species};

/// Relative bracket width at which the half-width bisection stops.
pub const HALFWIDTH_REL_TOL: f64 = 1e-4;

/// A quadrature of one species at a fixed angle (`0` = X, `π/2` = Y).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub species: Species,
    pub angle: f64,
}

impl Quadrature {
    pub fn x(species: Species) -> Self {
        Self { species, angle: 0.0 }
    }

    pub fn y(species: Species) -> Self {
        Self { species, angle: FRAC_PI_2 }
    }
}

fn scaled_spectrum(a: &CMatrix, d: &CMatrix, omega: f64) -> Result<CMatrix> {
    let n = a.nrows();
    let shift = CMatrix::identity(n, n) * Complex64::new(0.0, omega);
    let singular = || Error::SingularSolve { condition: f64::INFINITY, residual: f64::NAN };
    // X = (A + iω)⁻¹ D, then S = X (Aᵀ − iω)⁻¹ = ((A − iω)⁻¹ Xᵀ)ᵀ.
    let x = linalg::solve(&(a + &shift), d).ok_or_else(singular)?;
    let s_t = linalg::solve(&(a - &shift), &x.transpose()).ok_or_else(singular)?;
    Ok(s_t.transpose())
}

/// Spectral matrix at angular frequency `omega`, in raw operator units.
pub fn noise_spectrum(system: &LangevinSystem, omega: f64) -> Result<CMatrix> {
    check_stability(system)?.require_stable()?;
    let scales = system.scales();
    let s = scaled_spectrum(&system.scaled_drift(), &system.scaled_diffusion(), omega)?;
    Ok(linalg::unscale_moments(&s, &scales))
}

struct SpectralQuadrature<'a> {
    system: &'a LangevinSystem,
    quad: Quadrature,
    a: CMatrix,
    d: CMatrix,
    d_vac: CMatrix,
    scales: Vec<f64>,
}

impl<'a> SpectralQuadrature<'a> {
    fn new(system: &'a LangevinSystem, quad: Quadrature) -> Result<Self> {
        check_stability(system)?.require_stable()?;
        let scales = system.scales();
        if system.index_of(quad.species.lowering()).is_none() {
            return Err(Error::InvalidParameter {
                name: "selector",
                reason: format!("{:?} is not part of the system basis", quad.species),
            });
        }
        Ok(Self {
            system,
            quad,
            a: system.scaled_drift(),
            d: system.scaled_diffusion(),
            d_vac: linalg::scale_noise(&system.vacuum_diffusion, &scales),
            scales,
        })
    }

    fn value(&self, d: &CMatrix, omega: f64) -> Result<f64> {
        let s = linalg::unscale_moments(&scaled_spectrum(&self.a, d, omega)?, &self.scales);
        let cov = QuadratureCov::from_matrix(&s, &self.system.basis, &self.system.populations, self.quad.species)
            .expect("species checked in constructor");
        Ok(cov.at_angle(self.quad.angle))
    }

    /// `(P_vac(ω) − P(ω)) / P_vac(0)`.
    fn dip(&self, omega: f64, vac_zero: f64) -> Result<f64> {
        Ok((self.value(&self.d_vac, omega)? - self.value(&self.d, omega)?) / vac_zero)
    }
}

/// Normalized spectral variance `1 − (P_vac(ω) − P(ω)) / P_vac(0)`, where
/// `P` is the quadrature spectral density and `P_vac` the same quantity for a
/// vacuum input. Equals `P(0)/P_vac(0)` at zero frequency and tends to 1 far
/// outside the squeezing band.
pub fn normalized_spectral_variance(system: &LangevinSystem, quad: Quadrature, omega: f64) -> Result<f64> {
    let sq = SpectralQuadrature::new(system, quad)?;
    let vac_zero = sq.value(&sq.d_vac, 0.0)?;
    Ok(1.0 - sq.dip(omega, vac_zero)?)
}

/// Half width at half depth of the squeezing dip of `quad`, by bisection.
pub fn spectrum_halfwidth(system: &LangevinSystem, quad: Quadrature) -> Result<f64> {
    let sq = SpectralQuadrature::new(system, quad)?;
    let vac_zero = sq.value(&sq.d_vac, 0.0)?;
    let depth = sq.dip(0.0, vac_zero)?;
    if !(depth > 0.0) {
        return Err(Error::NoSqueezing { value: 1.0 - depth });
    }
    let half = 0.5 * depth;

    let stability = check_stability(system)?;
    let mut lo = 0.0;
    let mut hi = stability.min_decay;
    let mut expansions = 0;
    while sq.dip(hi, vac_zero)? > half {
        lo = hi;
        hi *= 2.0;
        expansions += 1;
        if expansions > 200 {
            return Err(Error::NoSqueezing { value: 1.0 - depth });
        }
    }
    while hi - lo > HALFWIDTH_REL_TOL * hi {
        let mid = 0.5 * (lo + hi);
        if sq.dip(mid, vac_zero)? > half {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

// Gauss–Kronrod 7/15 nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Segment {
    lo: f64,
    hi: f64,
    value: CMatrix,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F>(f: &F, lo: f64, hi: f64) -> Result<Segment>
where
    F: Fn(f64) -> Result<CMatrix>,
{
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center)?;
    let mut kronrod = &fc * Complex64::new(WGK[7], 0.0);
    let mut gauss = &fc * Complex64::new(WG[3], 0.0);
    for (k, (&x, &wk)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let f1 = f(center - half * x)?;
        let f2 = f(center + half * x)?;
        let sum = f1 + f2;
        kronrod += &sum * Complex64::new(wk, 0.0);
        if k % 2 == 1 {
            gauss += &sum * Complex64::new(WG[k / 2], 0.0);
        }
    }
    kronrod *= Complex64::new(half, 0.0);
    gauss *= Complex64::new(half, 0.0);
    let error = (&kronrod - &gauss).norm();
    Ok(Segment { lo, hi, value: kronrod, error })
}

/// `(1/2π) ∫ S(ω) dω` over the whole real line, by adaptive Gauss–Kronrod
/// quadrature after the substitution `ω = s·tan θ`. By Parseval's theorem
/// this equals the steady-state moment matrix.
pub fn integrate_spectrum(system: &LangevinSystem, rel_tol: f64) -> Result<CMatrix> {
    let stability = check_stability(system)?;
    stability.require_stable()?;
    let scales = system.scales();
    let a = system.scaled_drift();
    let d = system.scaled_diffusion();
    let s = (stability.min_decay * stability.max_modulus).sqrt();

    let integrand = |theta: f64| -> Result<CMatrix> {
        let (sin, cos) = theta.sin_cos();
        let omega = s * sin / cos;
        let jac = s / (cos * cos);
        Ok(scaled_spectrum(&a, &d, omega)? * Complex64::new(jac, 0.0))
    };

    // Seed with breakpoints at every spectral feature so narrow resonances
    // are not skipped by the first coarse pass.
    let ev = linalg::eigenvalues(&a).ok_or(Error::EigenSolver)?;
    let mut points: Vec<f64> = vec![-FRAC_PI_2, 0.0, FRAC_PI_2];
    for z in &ev {
        for w in [z.im - z.re.abs(), z.im, z.im + z.re.abs()] {
            for sign in [-1.0, 1.0] {
                points.push((sign * w / s).atan());
            }
        }
    }
    points.sort_by(f64::total_cmp);
    points.dedup_by(|x, y| (*x - *y).abs() < 1e-14);

    let mut heap = BinaryHeap::new();
    for w in points.windows(2) {
        heap.push(gk15(&integrand, w[0], w[1])?);
    }

    const MAX_SEGMENTS: usize = 50_000;
    const RESUM_EVERY: usize = 256;
    let resum = |heap: &BinaryHeap<Segment>| -> (CMatrix, f64) {
        let total = heap.iter().fold(CMatrix::zeros(a.nrows(), a.nrows()), |acc, seg| acc + &seg.value);
        (total, heap.iter().map(|seg| seg.error).sum())
    };
    // Running sums, refreshed periodically so rounding does not accumulate.
    let (mut total, mut err) = resum(&heap);
    let mut splits = 0usize;
    loop {
        if err <= rel_tol * total.norm() || heap.len() >= MAX_SEGMENTS {
            if heap.len() >= MAX_SEGMENTS {
                log::warn!("spectrum integral stopped at {MAX_SEGMENTS} segments, error estimate {err:.3e}");
            }
            let (total, _) = resum(&heap);
            let moments = total * Complex64::new(1.0 / (2.0 * PI), 0.0);
            return Ok(linalg::unscale_moments(&moments, &scales));
        }
        let worst = heap.pop().expect("non-empty");
        let mid = 0.5 * (worst.lo + worst.hi);
        let left = gk15(&integrand, worst.lo, mid)?;
        let right = gk15(&integrand, mid, worst.hi)?;
        total += &left.value + &right.value - &worst.value;
        err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        splits += 1;
        if splits.is_multiple_of(RESUM_EVERY) {
            (total, err) = resum(&heap);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::solve_steady_moments;
    use crate::params::InputFieldStats;

    #[test]
    fn vacuum_cavity_lorentzian() {
        let kappa = 2.5;
        let sys = LangevinSystem::field_only(kappa, 0.0, InputFieldStats::vacuum()).unwrap();
        for omega in [0.0, 1.0, 7.0] {
            let s = noise_spectrum(&sys, omega).unwrap();
            let expected = 2.0 * kappa / (kappa * kappa + omega * omega);
            assert!((s[(0, 1)].re - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn high_frequency_decay() {
        let sys = LangevinSystem::field_only(1.0, 0.3, InputFieldStats::from_squeezing(0.4)).unwrap();
        let s1 = noise_spectrum(&sys, 1e4).unwrap();
        let s2 = noise_spectrum(&sys, 1e5).unwrap();
        // ~1/ω²: a decade in ω is two decades in S, up to O(Δc/ω).
        let ratio = s1.norm() / s2.norm();
        assert!((ratio / 100.0 - 1.0).abs() < 1e-4, "{ratio}");
    }

    #[test]
    fn single_mode_halfwidth_is_kappa() {
        let kappa = 3.0;
        let sys = LangevinSystem::field_only(kappa, 0.0, InputFieldStats::from_squeezing(0.5)).unwrap();
        let hw = spectrum_halfwidth(&sys, Quadrature::x(Species::Field)).unwrap();
        assert!((hw - kappa).abs() < 1e-3 * kappa, "{hw}");
        let v0 = normalized_spectral_variance(&sys, Quadrature::x(Species::Field), 0.0).unwrap();
        assert!((v0 - (-1.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn vacuum_has_no_squeezing() {
        let sys = LangevinSystem::field_only(3.0, 0.0, InputFieldStats::vacuum()).unwrap();
        assert!(matches!(spectrum_halfwidth(&sys, Quadrature::x(Species::Field)), Err(Error::NoSqueezing { .. })));
    }

    #[test]
    fn parseval_single_mode() {
        let sys = LangevinSystem::field_only(1.3, 0.8, InputFieldStats::from_squeezing(0.6)).unwrap();
        let integral = integrate_spectrum(&sys, 1e-9).unwrap();
        let m = solve_steady_moments(&sys).unwrap();
        assert!((&integral - &m.moments).norm() < 1e-7 * m.moments.norm());
    }
}
