//! Gaussian-channel exponents: single-user random-coding and expurgated
//! exponents under a power constraint, the Poltyrev exponent, the
//! spherical-shell upper bound for the two-user MAC and the exponent of the
//! distributed nested-lattice construction.
//!
//! SNRs are linear (`A = P/N`); rates and exponents are in nats.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimize::golden_max;
use crate::scalar::Real;

/// Grid size over `rho` for the spherical-shell bound.
pub const UB_RHO_GRID: usize = 65;
/// Lower clip of `theta_i`, keeping `ln theta` finite.
pub const THETA_MIN: f64 = 1e-9;

pub fn db_to_linear<T: Real>(db: T) -> T {
    T::lit(10.0).powf(db / T::lit(10.0))
}

pub fn linear_to_db<T: Real>(a: T) -> T {
    T::lit(10.0) * a.log10()
}

fn check_snr<T: Real>(a: T) -> Result<()> {
    if a.is_finite() && a > T::zero() {
        Ok(())
    } else {
        Err(Error::Domain(format!("SNR {a} must be positive")))
    }
}

fn check_rate<T: Real>(r: T) -> Result<()> {
    if r.is_nan() || r < T::zero() {
        Err(Error::Domain(format!("rate {r} is negative")))
    } else {
        Ok(())
    }
}

/// `C(A) = ½ ln(1 + A)`.
pub fn gaussian_capacity<T: Real>(a: T) -> T {
    T::lit(0.5) * a.ln_1p()
}

/// `γ = ½ (1 + A/2 + √(1 + A²/4))`.
pub fn gaussian_gamma<T: Real>(a: T) -> T {
    let half = T::lit(0.5);
    half * (T::one() + a * half + (T::one() + a * a / T::lit(4.0)).sqrt())
}

/// `R_cr(A) = ½ ln γ`.
pub fn gaussian_critical_rate<T: Real>(a: T) -> Result<T> {
    check_snr(a)?;
    Ok(T::lit(0.5) * gaussian_gamma(a).ln())
}

/// `R_ex(A) = ½ ln(γ − A/4)`.
pub fn gaussian_expurgation_rate<T: Real>(a: T) -> Result<T> {
    check_snr(a)?;
    Ok(T::lit(0.5) * (gaussian_gamma(a) - a / T::lit(4.0)).ln())
}

/// Random-coding exponent above the critical rate, with `β = exp(2R)`.
/// Singular at `R = 0`.
pub fn random_coding_high_rate_branch<T: Real>(rate: T, a: T) -> T {
    let (one, two, four) = (T::one(), T::lit(2.0), T::lit(4.0));
    let beta = (two * rate).exp();
    let root = (one + four * beta / (a * (beta - one))).sqrt();
    a / (four * beta) * ((beta + one) - (beta - one) * root)
        + T::lit(0.5) * (beta - a * (beta - one) / two * (root - one)).ln()
}

/// Random-coding exponent below the critical rate (straight line of slope −1).
pub fn random_coding_low_rate_branch<T: Real>(rate: T, a: T) -> T {
    let half = T::lit(0.5);
    let g = gaussian_gamma(a);
    T::one() - g + a * half + half * (g - a * half).ln() + half * g.ln() - rate
}

/// Random-coding exponent of the power-constrained AWGN channel.
pub fn su_gaussian_random_coding<T: Real>(rate: T, a: T) -> Result<T> {
    check_rate(rate)?;
    check_snr(a)?;
    if rate >= gaussian_capacity(a) {
        return Ok(T::zero());
    }
    let value = if rate >= gaussian_critical_rate(a)? {
        random_coding_high_rate_branch(rate, a)
    } else {
        random_coding_low_rate_branch(rate, a)
    };
    Ok(value.max(T::zero()))
}

/// `E_ex(R, A) = (A/4)(1 − √(1 − exp(−2R)))`.
pub fn su_gaussian_expurgated<T: Real>(rate: T, a: T) -> Result<T> {
    check_rate(rate)?;
    check_snr(a)?;
    Ok(a / T::lit(4.0) * (T::one() - (-(-T::lit(2.0) * rate).exp_m1()).sqrt()))
}

/// Best known single-user exponent: the larger of the two bounds.
pub fn su_gaussian_best<T: Real>(rate: T, a: T) -> Result<T> {
    Ok(su_gaussian_random_coding(rate, a)?.max(su_gaussian_expurgated(rate, a)?))
}

/// One branch (1..=4) of the Poltyrev exponent, evaluated without range checks.
pub fn poltyrev_branch<T: Real>(branch: usize, mu: T) -> T {
    let half = T::lit(0.5);
    match branch {
        1 => T::zero(),
        2 => half * ((mu - T::one()) - mu.ln()),
        3 => half * (T::E() * mu / T::lit(4.0)).ln(),
        4 => mu / T::lit(8.0),
        _ => panic!("the Poltyrev exponent has four branches"),
    }
}

/// Poltyrev exponent of the unconstrained AWGN channel as a function of the
/// squared volume-to-noise ratio `mu`.
pub fn poltyrev_exponent<T: Real>(mu: T) -> Result<T> {
    if mu.is_nan() || mu < T::zero() {
        return Err(Error::Domain(format!("mu = {mu} is negative")));
    }
    let branch = if mu <= T::one() {
        1
    } else if mu <= T::lit(2.0) {
        2
    } else if mu < T::lit(4.0) {
        3
    } else {
        4
    };
    Ok(poltyrev_branch(branch, mu))
}

/// SNRs and rates of a two-user Gaussian MAC, user 1 the stronger.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct GaussianMacParams<T> {
    pub a1: T,
    pub a2: T,
    pub r1: T,
    pub r2: T,
}

impl<T: Real> GaussianMacParams<T> {
    pub fn new(a1: T, a2: T, r1: T, r2: T) -> Result<Self> {
        check_snr(a2)?;
        check_snr(a1)?;
        if a1 < a2 {
            return Err(Error::Domain(format!("expected a1 >= a2, got {a1} < {a2}")));
        }
        check_rate(r1)?;
        check_rate(r2)?;
        Ok(Self { a1, a2, r1, r2 })
    }
}

/// Maximizer of the spherical-shell bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct GallagerUbState<T> {
    pub rho: T,
    pub theta1: T,
    pub theta2: T,
    pub value: T,
}

impl<T: Real> GallagerUbState<T> {
    /// Shell parameter `r_i = (1 − θ_i/(1+ρ)) / (2 P_i)` for power `p_i`.
    pub fn shell_parameter(&self, user: usize, power: T) -> T {
        let theta = if user == 1 { self.theta1 } else { self.theta2 };
        (T::one() - theta / (T::one() + self.rho)) / (T::lit(2.0) * power)
    }
}

/// The spherical-shell objective at `(rho, θ1, θ2)`.
pub fn gallager_ub_objective<T: Real>(rho: T, theta1: T, theta2: T, rate_sum: T, a1: T, a2: T) -> T {
    let half = T::lit(0.5);
    let one_rho = T::one() + rho;
    one_rho * (T::one() + half * (theta1 * theta2).ln() - one_rho.ln()) - half * (theta1 + theta2)
        + half * rho * (T::one() + a1 / theta1 + a2 / theta2).ln()
        - rho * rate_sum
}

/// Exact maximizer over `θ` of the objective for fixed `rho`, with the other
/// pair folded into `c = 1 + A_other/θ_other`: the positive root of
/// `cθ² − ((1+ρ)c − A)θ − A = 0`, clipped to the admissible interval.
fn best_theta<T: Real>(rho: T, a: T, c: T) -> T {
    let one_rho = T::one() + rho;
    let b = one_rho * c - a;
    let theta = (b + (b * b + T::lit(4.0) * c * a).sqrt()) / (T::lit(2.0) * c);
    theta.max(T::lit(THETA_MIN)).min(one_rho)
}

fn ub_at_rho<T: Real>(rho: T, rate_sum: T, a1: T, a2: T) -> (T, T, T) {
    let one_rho = T::one() + rho;
    let (mut t1, mut t2) = (T::one().min(one_rho), T::one().min(one_rho));
    let mut value = gallager_ub_objective(rho, t1, t2, rate_sum, a1, a2);
    for _ in 0..10_000 {
        t1 = best_theta(rho, a1, T::one() + a2 / t2);
        t2 = best_theta(rho, a2, T::one() + a1 / t1);
        let v = gallager_ub_objective(rho, t1, t2, rate_sum, a1, a2);
        let gain = v - value;
        value = v;
        if gain <= T::lit(1e-15) * value.abs().max(T::one()) {
            break;
        }
    }
    (value, t1, t2)
}

/// Gallager's spherical-shell upper bound `E_r^UG(R, A1, A2)` at sum rate
/// `rate_sum`, maximized over `rho ∈ [0, 1]` and `θ_i ∈ (0, 1+ρ]`.
///
/// For each `rho` on a grid the two `θ`s are updated alternately with their
/// exact coordinate maximizers; the best grid `rho` is refined by
/// golden-section search.
pub fn gallager_spherical_ub<T: Real>(rate_sum: T, a1: T, a2: T) -> Result<(T, GallagerUbState<T>)> {
    check_rate(rate_sum)?;
    check_snr(a1)?;
    check_snr(a2)?;
    let f = |rho: T| ub_at_rho(rho, rate_sum, a1, a2).0;
    let n = UB_RHO_GRID;
    let step = T::one() / T::from_usize_lossy(n - 1);
    let (mut best_i, mut best_v) = (0, T::neg_infinity());
    for i in 0..n {
        let v = f(step * T::from_usize_lossy(i));
        if v > best_v {
            best_i = i;
            best_v = v;
        }
    }
    let lo = step * T::from_usize_lossy(best_i.saturating_sub(1));
    let hi = (step * T::from_usize_lossy(best_i + 1)).min(T::one());
    let (mut rho, v) = golden_max(f, lo, hi, T::lit(1e-10));
    if v < best_v {
        rho = step * T::from_usize_lossy(best_i);
    }
    let (value, theta1, theta2) = ub_at_rho(rho, rate_sum, a1, a2);
    let value = value.max(T::zero());
    Ok((
        value,
        GallagerUbState {
            rho,
            theta1,
            theta2,
            value,
        },
    ))
}

/// Exponent of the distributed nested-lattice code with the two
/// volume-to-noise ratios `mu1 = A1 e^{−2(R1+R2)}` and `mu2 = A2 e^{−2R2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct DistributedNesting<T> {
    pub exponent: T,
    pub mu1: T,
    pub mu2: T,
}

/// `E_P(min(mu1, mu2))`.
pub fn distributed_nesting_exponent<T: Real>(p: &GaussianMacParams<T>) -> DistributedNesting<T> {
    let two = T::lit(2.0);
    let mu1 = p.a1 * (-two * (p.r1 + p.r2)).exp();
    let mu2 = p.a2 * (-two * p.r2).exp();
    let exponent = poltyrev_exponent(mu1.min(mu2)).expect("mu is positive");
    DistributedNesting { exponent, mu1, mu2 }
}

/// Membership in `{R1 + R2 <= ½ ln A1, R2 <= ½ ln A2}`.
pub fn r_struct_contains<T: Real>(p: &GaussianMacParams<T>) -> bool {
    let half = T::lit(0.5);
    p.r1 + p.r2 <= half * p.a1.ln() && p.r2 <= half * p.a2.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_coding_vanishes_at_capacity() {
        for a in [0.5f64, 1.0, 10.0, 1e3] {
            let c = gaussian_capacity(a);
            assert_eq!(su_gaussian_random_coding(c, a).unwrap(), 0.0);
            assert!(random_coding_high_rate_branch(c, a).abs() < 1e-12);
        }
    }

    #[test]
    fn critical_rate_tends_to_zero_at_low_snr() {
        assert_eq!(gaussian_gamma(0.0f64), 1.0);
        assert!(gaussian_critical_rate(1e-9f64).unwrap() < 1e-9);
    }

    #[test]
    fn high_snr_zero_rate_value() {
        let a = 1e3f64;
        let g = 0.5 * (1.0 + 500.0 + (1.0f64 + 250_000.0).sqrt());
        let expect = 1.0 - g + a / 2.0 + 0.5 * (g - a / 2.0).ln() + 0.5 * g.ln();
        assert!((su_gaussian_random_coding(0.0, a).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn expurgated_limits() {
        for a in [1.0f64, 10.0, 1e3] {
            assert_eq!(su_gaussian_expurgated(0.0, a).unwrap(), a / 4.0);
            assert!(su_gaussian_expurgated(40.0, a).unwrap() < 1e-12);
        }
    }

    #[test]
    fn unit_snr_rates() {
        let g = 0.5 * (1.5 + 1.25f64.sqrt());
        let rcr = gaussian_critical_rate(1.0f64).unwrap();
        let rex = gaussian_expurgation_rate(1.0f64).unwrap();
        assert!((rcr - 0.5 * g.ln()).abs() < 1e-15);
        assert!((rex - 0.5 * (g - 0.25).ln()).abs() < 1e-15);
        assert!(rex < rcr);
    }

    #[test]
    fn poltyrev_branch_values() {
        assert_eq!(poltyrev_exponent(1.0f64).unwrap(), 0.0);
        assert_eq!(poltyrev_exponent(4.0f64).unwrap(), 0.5);
        assert_eq!(poltyrev_exponent(8.0f64).unwrap(), 1.0);
        assert!((poltyrev_branch(3, 4.0f64) - 0.5).abs() < 1e-15);
        let at2 = 0.5 * (1.0 - 2f64.ln());
        assert!((poltyrev_branch(2, 2.0f64) - at2).abs() < 1e-15);
        assert!((poltyrev_branch(3, 2.0f64) - at2).abs() < 1e-15);
        assert!((at2 - 0.15343).abs() < 1e-5);
        assert!(poltyrev_exponent(-1.0f64).is_err());
        assert_eq!(poltyrev_exponent(0.3f64).unwrap(), 0.0);
    }

    #[test]
    fn ub_zero_rho_slice_and_large_rate() {
        assert!(gallager_ub_objective(0.0f64, 1.0, 1.0, 0.3, 10.0, 5.0).abs() < 1e-15);
        let (v, st) = gallager_spherical_ub(50.0f64, 10.0, 5.0).unwrap();
        assert_eq!(v, 0.0);
        assert!(st.rho < 1e-6);
    }

    #[test]
    fn ub_against_brute_force_grid() {
        // independent oracle: dense grid over (rho, θ1, θ2)
        let (r, a1, a2) = (0.8f64, 10.0, 4.0);
        let mut oracle = f64::NEG_INFINITY;
        for i in 0..=40 {
            let rho = i as f64 / 40.0;
            for j in 1..=200 {
                for k in 1..=200 {
                    let t1 = (1.0 + rho) * j as f64 / 200.0;
                    let t2 = (1.0 + rho) * k as f64 / 200.0;
                    oracle = oracle.max(gallager_ub_objective(rho, t1, t2, r, a1, a2));
                }
            }
        }
        let (v, st) = gallager_spherical_ub(r, a1, a2).unwrap();
        assert!(v >= oracle - 1e-12, "{v} < {oracle}");
        assert!(v - oracle < 1e-3, "{v} vs {oracle}");
        assert!((gallager_ub_objective(st.rho, st.theta1, st.theta2, r, a1, a2) - v).abs() < 1e-12);
        assert!(st.theta1 <= 1.0 + st.rho && st.theta2 <= 1.0 + st.rho);
    }

    #[test]
    fn ub_pair_swap_symmetry() {
        let (v1, _) = gallager_spherical_ub(1.2f64, 30.0, 7.0).unwrap();
        let (v2, _) = gallager_spherical_ub(1.2f64, 7.0, 30.0).unwrap();
        assert!((v1 - v2).abs() < 1e-10);
    }

    #[test]
    fn distributed_nesting_examples() {
        let a = 50.0f64;
        let d = distributed_nesting_exponent(&GaussianMacParams::new(a, a, 0.0, 0.0).unwrap());
        assert_eq!(d.exponent, poltyrev_exponent(a).unwrap());

        let (a1, a2) = (1000.0f64, 501.0);
        let r1 = 0.5 * (a1 / a2).ln();
        let d = distributed_nesting_exponent(&GaussianMacParams::new(a1, a2, r1, 0.7).unwrap());
        assert!((d.mu1 - d.mu2).abs() <= 1e-12 * d.mu1);

        // sum rate on the boundary with mu1 <= mu2
        let d = distributed_nesting_exponent(&GaussianMacParams::new(a1, a2, 0.5 * a1.ln() - 0.2, 0.2).unwrap());
        assert!(d.mu1 <= d.mu2);
        assert!(d.exponent.abs() < 1e-12);
    }

    #[test]
    fn r_struct_membership() {
        let p = |a1, a2, r1, r2| GaussianMacParams::new(a1, a2, r1, r2).unwrap();
        assert!(r_struct_contains(&p(10.0f64, 5.0, 0.0, 0.0)));
        assert!(!r_struct_contains(&p(10.0f64, 5.0, 0.0, 0.5 * 5f64.ln() + 1e-9)));
        // A2 < 1 empties the region
        assert!(!r_struct_contains(&p(10.0f64, 0.5, 0.0, 0.0)));
        assert!(!r_struct_contains(&p(10.0f64, 0.5, 0.3, 0.1)));
        assert!(GaussianMacParams::new(1.0f64, 2.0, 0.0, 0.0).is_err());
        assert!(GaussianMacParams::new(2.0f64, 1.0, -0.1, 0.0).is_err());
    }

    #[test]
    fn db_conversion() {
        assert!((db_to_linear(30.0f64) - 1000.0).abs() < 1e-9);
        assert!((linear_to_db(100.0f64) - 20.0).abs() < 1e-12);
    }
}
