//! Dithered modulo transformation of a discrete MAC into a virtual additive
//! MAC `Y' = k1 V1 ⊕ k2 V2 ⊕ N` over a prime modulus, plus a search over the
//! transformation parameters.
//!
//! Each encoder sends `X_i = f_i(V_i ⊕ U_i)` with a dither `U_i` uniform on
//! `Z_m` shared with the decoder; the decoder forms `g(Y) ⊖ (k1 U1 ⊕ k2 U2)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{AdditiveNoiseChannel, Mac2, Pmf};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::su_exponents::best_known_exponent;

/// Largest modulus accepted by [`search_transform`].
pub const SEARCH_MAX_MODULUS: usize = 97;

/// Exponent gap below which two candidate specs count as tied.
const TIE_SLACK: f64 = 1e-12;

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Parameters `(m, f1, f2, k1, k2, g)`; maps are arrays indexed by their
/// domain element. Ordering is lexicographic in field order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TransformSpec {
    pub m: usize,
    pub f1: Vec<usize>,
    pub f2: Vec<usize>,
    pub k1: usize,
    pub k2: usize,
    pub g: Vec<usize>,
}

impl TransformSpec {
    /// `m = 2`, identity precoders and estimator, unit coefficients.
    pub fn binary_identity() -> Self {
        Self {
            m: 2,
            f1: vec![0, 1],
            f2: vec![0, 1],
            k1: 1,
            k2: 1,
            g: vec![0, 1],
        }
    }

    pub fn validate<T: Real>(&self, mac: &Mac2<T>) -> Result<()> {
        if !is_prime(self.m as u64) {
            return Err(Error::NonPrime(self.m as u64));
        }
        let m = self.m;
        if self.k1 % m == 0 || self.k2 % m == 0 || self.k1 >= m || self.k2 >= m {
            return Err(Error::InvalidSpec(format!("coefficients ({}, {}) must lie in 1..{m}", self.k1, self.k2)));
        }
        let check_map = |name: &str, map: &[usize], len: usize, range: usize| -> Result<()> {
            if map.len() != len {
                return Err(Error::InvalidSpec(format!("{name} has {} entries, expected {len}", map.len())));
            }
            if let Some(v) = map.iter().find(|&&v| v >= range) {
                return Err(Error::InvalidSpec(format!("{name} maps to {v}, outside 0..{range}")));
            }
            Ok(())
        };
        check_map("f1", &self.f1, m, mac.input1_size())?;
        check_map("f2", &self.f2, m, mac.input2_size())?;
        check_map("g", &self.g, mac.output_size(), m)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("spec serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// The additive channel produced by a transformation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct VirtualChannel<T> {
    pub m: usize,
    pub noise: Pmf<T>,
    pub coefficients: (usize, usize),
}

impl<T: Real> VirtualChannel<T> {
    /// The associated single-user channel `Y = X ⊕ N`.
    pub fn single_user(&self) -> AdditiveNoiseChannel<T> {
        AdditiveNoiseChannel::new(self.noise.clone())
    }
}

/// Law of `N = g(Y) ⊖ (k1 X'1 ⊕ k2 X'2)` with `X'_i` uniform and independent.
fn noise_law<T: Real>(mac: &Mac2<T>, spec: &TransformSpec) -> Vec<T> {
    let m = spec.m;
    let w = T::one() / T::from_usize_lossy(m * m);
    let mut noise = vec![T::zero(); m];
    for a1 in 0..m {
        for a2 in 0..m {
            let s = (spec.k1 * a1 + spec.k2 * a2) % m;
            let slice = mac.slice(spec.f1[a1], spec.f2[a2]);
            for (y, &gy) in spec.g.iter().enumerate() {
                let n = (gy + m - s) % m;
                noise[n] = noise[n] + w * slice.get(y);
            }
        }
    }
    noise
}

/// Largest `|Pr(N = n | V1 = v1, V2 = v2) − Pr(N = n)|`, computed by explicit
/// enumeration of the dither pair.
pub fn independence_deviation<T: Real>(mac: &Mac2<T>, spec: &TransformSpec) -> Result<T> {
    spec.validate(mac)?;
    let m = spec.m;
    let marginal = noise_law(mac, spec);
    let w = T::one() / T::from_usize_lossy(m * m);
    let mut dev = T::zero();
    for v1 in 0..m {
        for v2 in 0..m {
            let mut cond = vec![T::zero(); m];
            for u1 in 0..m {
                for u2 in 0..m {
                    let (x1, x2) = ((v1 + u1) % m, (v2 + u2) % m);
                    let slice = mac.slice(spec.f1[x1], spec.f2[x2]);
                    let dither = (spec.k1 * u1 + spec.k2 * u2) % m;
                    let clean = (spec.k1 * v1 + spec.k2 * v2) % m;
                    for (y, &gy) in spec.g.iter().enumerate() {
                        let y_virtual = (gy + m - dither) % m;
                        let n = (y_virtual + m - clean) % m;
                        cond[n] = cond[n] + w * slice.get(y);
                    }
                }
            }
            for n in 0..m {
                dev = dev.max((cond[n] - marginal[n]).abs());
            }
        }
    }
    Ok(dev)
}

/// Apply the transformation; also certifies that the virtual noise is
/// independent of `(V1, V2)`.
pub fn apply_transform<T: Real>(mac: &Mac2<T>, spec: &TransformSpec) -> Result<VirtualChannel<T>> {
    spec.validate(mac)?;
    let dev = independence_deviation(mac, spec)?;
    if dev > T::tolerance() {
        return Err(Error::IndependenceViolation { deviation: dev.as_f64() });
    }
    let noise = noise_law(mac, spec);
    let total = noise.iter().fold(T::zero(), |a, &b| a + b);
    Ok(VirtualChannel {
        m: spec.m,
        noise: Pmf::new(noise.into_iter().map(|p| p / total).collect())?,
        coefficients: (spec.k1, spec.k2),
    })
}

/// `γ = ¼ Σ_{x1,x2} Pr(Y ≠ x1 ⊕ x2 | x1, x2)` for a binary MAC.
pub fn binary_gamma<T: Real>(mac: &Mac2<T>) -> Result<T> {
    if mac.input1_size() != 2 || mac.input2_size() != 2 || mac.output_size() != 2 {
        return Err(Error::DimensionMismatch("binary_gamma needs a 2x2x2 MAC".into()));
    }
    let mut sum = T::zero();
    for x1 in 0..2 {
        for x2 in 0..2 {
            sum = sum + mac.prob(1 - (x1 ^ x2), x1, x2);
        }
    }
    Ok(sum / T::lit(4.0))
}

/// Best known single-user exponent of the virtual channel at `rate_sum`.
pub fn virtual_exponent<T: Real>(mac: &Mac2<T>, spec: &TransformSpec, rate_sum: T) -> Result<T> {
    let vc = apply_transform(mac, spec)?;
    Ok(best_known_exponent(&vc.single_user().to_dmc(), rate_sum)?.e_best)
}

/// Outcome of [`search_transform`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct SearchResult<T> {
    pub spec: TransformSpec,
    pub channel: VirtualChannel<T>,
    pub exponent: T,
    pub exhaustive: bool,
    pub evaluated: usize,
}

struct SpecSpace {
    m: usize,
    x1: usize,
    x2: usize,
    y: usize,
}

impl SpecSpace {
    /// Number of specs, `None` on overflow.
    fn size(&self) -> Option<u128> {
        let pow = |b: usize, e: usize| (b as u128).checked_pow(e as u32);
        pow(self.x1, self.m)?
            .checked_mul(pow(self.x2, self.m)?)?
            .checked_mul(((self.m - 1) * (self.m - 1)) as u128)?
            .checked_mul(pow(self.m, self.y)?)
    }

    /// Mixed-radix decoding; the last digit of `g` varies fastest.
    fn decode(&self, mut idx: u128) -> TransformSpec {
        let mut take = |radix: usize| {
            let d = (idx % radix as u128) as usize;
            idx /= radix as u128;
            d
        };
        let mut g: Vec<usize> = (0..self.y).map(|_| take(self.m)).collect();
        g.reverse();
        let k2 = take(self.m - 1) + 1;
        let k1 = take(self.m - 1) + 1;
        let mut f2: Vec<usize> = (0..self.m).map(|_| take(self.x2)).collect();
        f2.reverse();
        let mut f1: Vec<usize> = (0..self.m).map(|_| take(self.x1)).collect();
        f1.reverse();
        TransformSpec { m: self.m, f1, f2, k1, k2, g }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> TransformSpec {
        TransformSpec {
            m: self.m,
            f1: (0..self.m).map(|_| rng.gen_range(0..self.x1)).collect(),
            f2: (0..self.m).map(|_| rng.gen_range(0..self.x2)).collect(),
            k1: rng.gen_range(1..self.m),
            k2: rng.gen_range(1..self.m),
            g: (0..self.y).map(|_| rng.gen_range(0..self.m)).collect(),
        }
    }
}

/// Find the transformation maximizing the virtual exponent at `rate`.
///
/// The whole spec space is enumerated when it has at most `budget` members;
/// otherwise `budget` specs are drawn uniformly with a generator seeded by
/// `seed`. Ties (within `1e-12`) go to the lexicographically smallest spec.
pub fn search_transform<T: Real>(mac: &Mac2<T>, m: usize, budget: usize, seed: u64, rate: T) -> Result<SearchResult<T>> {
    if !is_prime(m as u64) || m > SEARCH_MAX_MODULUS {
        return Err(Error::NonPrime(m as u64));
    }
    if budget == 0 {
        return Err(Error::Domain("search budget must be at least 1".into()));
    }
    let space = SpecSpace {
        m,
        x1: mac.input1_size(),
        x2: mac.input2_size(),
        y: mac.output_size(),
    };
    let exhaustive = space.size().is_some_and(|s| s <= budget as u128);
    let specs: Vec<TransformSpec> = if exhaustive {
        let n = space.size().expect("checked above");
        (0..n).map(|i| space.decode(i)).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..budget).map(|_| space.sample(&mut rng)).collect()
    };
    let scored = specs
        .into_par_iter()
        .map(|spec| virtual_exponent(mac, &spec, rate).map(|e| (e, spec)))
        .collect::<Result<Vec<_>>>()?;
    let evaluated = scored.len();
    let top = scored.iter().fold(T::neg_infinity(), |a, (e, _)| a.max(*e));
    let (exponent, spec) = scored
        .into_iter()
        .filter(|(e, _)| *e >= top - T::lit(TIE_SLACK))
        .min_by(|a, b| a.1.cmp(&b.1))
        .expect("at least one candidate");
    let channel = apply_transform(mac, &spec)?;
    Ok(SearchResult {
        spec,
        channel,
        exponent,
        exhaustive,
        evaluated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{binary_example_channel, mac_from_additive_noise};
    use crate::su_exponents::best_known_exponent;

    #[test]
    fn primes() {
        let ps: Vec<u64> = (0..30).filter(|&n| is_prime(n)).collect();
        assert_eq!(ps, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
    }

    #[test]
    fn identity_on_additive_mac_returns_noise() {
        let noise = Pmf::bernoulli(0.07f64).unwrap();
        let vc = apply_transform(&mac_from_additive_noise(&noise), &TransformSpec::binary_identity()).unwrap();
        assert!(vc.noise.max_abs_diff(&noise) < 1e-15);
    }

    #[test]
    fn example_channel_noise_parameter() {
        let (q, p) = (0.1f64, 0.3f64);
        let mac = binary_example_channel(q, p).unwrap();
        let vc = apply_transform(&mac, &TransformSpec::binary_identity()).unwrap();
        let closed = q + p / 2.0 - p * q;
        assert!((vc.noise.get(1) - closed).abs() < 1e-15);
        assert!((binary_gamma(&mac).unwrap() - 0.22).abs() < 1e-15);
    }

    #[test]
    fn nonadditive_published_example_gamma() {
        // Pr(Z=1|1,1) = 1/2, all other flips 0.01
        let flip = |x1: usize, x2: usize| if x1 == 1 && x2 == 1 { 0.5 } else { 0.01 };
        let slices = (0..2)
            .map(|x1| {
                (0..2)
                    .map(|x2| {
                        let mut v = vec![0.0f64; 2];
                        v[x1 ^ x2] = 1.0 - flip(x1, x2);
                        v[1 - (x1 ^ x2)] = flip(x1, x2);
                        v
                    })
                    .collect()
            })
            .collect();
        let mac = Mac2::from_nested(slices).unwrap();
        assert!((binary_gamma(&mac).unwrap() - 0.1325).abs() < 1e-15);
    }

    #[test]
    fn constant_estimator_gives_uniform_noise() {
        let mac = binary_example_channel(0.1f64, 0.3).unwrap();
        let mut spec = TransformSpec::binary_identity();
        spec.g = vec![1, 1];
        let vc = apply_transform(&mac, &spec).unwrap();
        assert!(vc.noise.is_uniform());
        assert!(virtual_exponent(&mac, &spec, 0.1).unwrap() < 1e-12);
    }

    #[test]
    fn spec_validation() {
        let mac = binary_example_channel(0.1f64, 0.3).unwrap();
        let mut s = TransformSpec::binary_identity();
        s.m = 4;
        assert_eq!(apply_transform(&mac, &s), Err(Error::NonPrime(4)));
        let mut s = TransformSpec::binary_identity();
        s.k1 = 0;
        assert!(matches!(apply_transform(&mac, &s), Err(Error::InvalidSpec(_))));
        let mut s = TransformSpec::binary_identity();
        s.g = vec![0, 2];
        assert!(matches!(apply_transform(&mac, &s), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn spec_json_shape() {
        let s = TransformSpec::binary_identity();
        assert_eq!(s.to_json(), r#"{"m":2,"f1":[0,1],"f2":[0,1],"k1":1,"k2":1,"g":[0,1]}"#);
        assert_eq!(TransformSpec::from_json(&s.to_json()).unwrap(), s);
    }

    #[test]
    fn lossless_at_p_zero() {
        let mac = binary_example_channel(0.1f64, 0.0).unwrap();
        let v = virtual_exponent(&mac, &TransformSpec::binary_identity(), 0.0).unwrap();
        let bsc = best_known_exponent(&crate::channels::Dmc::bsc(0.1).unwrap(), 0.0).unwrap().e_best;
        assert!((v - bsc).abs() < 1e-12);
    }

    #[test]
    fn exhaustive_search_on_additive_mac_finds_identity() {
        let mac = mac_from_additive_noise(&Pmf::bernoulli(0.1f64).unwrap());
        let res = search_transform(&mac, 2, 1000, 7, 0.0).unwrap();
        assert!(res.exhaustive);
        assert_eq!(res.evaluated, 64);
        assert_eq!(res.spec, TransformSpec::binary_identity());
    }

    #[test]
    fn sampled_search_is_reproducible() {
        let mac = binary_example_channel(0.1f64, 0.3).unwrap();
        let a = search_transform(&mac, 3, 1, 42, 0.0).unwrap();
        let b = search_transform(&mac, 3, 1, 42, 0.0).unwrap();
        assert!(!a.exhaustive);
        assert_eq!(a, b);
        assert!(search_transform(&mac, 4, 10, 0, 0.0).is_err());
        assert!(search_transform(&mac, 2, 0, 0, 0.0).is_err());
    }
}
