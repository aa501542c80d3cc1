//! Monte Carlo harnesses: split linear codes over additive MACs and the
//! one-dimensional nested PAM construction over the Gaussian MAC.
//!
//! Every trial draws from its own ChaCha8 stream `(seed, trial)`, so results
//! do not depend on scheduling and are bit-reproducible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::Pmf;
use crate::error::{Error, Result};
use crate::linear_codes::{SplitCode, TieRule, VectorLaw};

/// Largest `log2(p^k)` accepted by the exhaustive ML decoder.
pub const DECODER_LOG2_LIMIT: f64 = 16.0;

/// Normal quantile for a two-sided 95% interval.
const Z95: f64 = 1.959_963_984_540_054;

/// Below this many errors the Wilson interval is reported.
const WILSON_BELOW: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub trials: usize,
    pub seed: u64,
    #[serde(default)]
    pub tie_rule: TieRule,
}

impl SimConfig {
    pub fn new(trials: usize, seed: u64) -> Result<Self> {
        let cfg = Self {
            trials,
            seed,
            tie_rule: TieRule::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_tie_rule(mut self, tie_rule: TieRule) -> Self {
        self.tie_rule = tie_rule;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Domain("trials must be at least 1".into()));
        }
        Ok(())
    }

    fn stream(&self, trial: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(trial as u64);
        rng
    }

    /// Run `f` on every trial in parallel; returns the per-trial outcomes in
    /// trial order.
    fn run<R: Send>(&self, f: impl Fn(&mut ChaCha8Rng) -> R + Sync) -> Vec<R> {
        (0..self.trials)
            .into_par_iter()
            .map(|t| f(&mut self.stream(t)))
            .collect()
    }
}

/// Empirical error rate with a 95% confidence half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub errors: usize,
    pub trials: usize,
    pub estimate: f64,
    pub ci_halfwidth: f64,
}

impl Estimate {
    pub fn from_counts(errors: usize, trials: usize) -> Self {
        let n = trials as f64;
        let phat = errors as f64 / n;
        let ci_halfwidth = if errors == 0 || errors == trials {
            0.0
        } else if errors < WILSON_BELOW {
            wilson_halfwidth(phat, n)
        } else {
            Z95 * (phat * (1.0 - phat) / n).sqrt()
        };
        Self {
            errors,
            trials,
            estimate: phat,
            ci_halfwidth,
        }
    }

    /// Binomial standard deviation of the estimator if the true rate is `p`.
    pub fn sigma_at(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }
}

fn wilson_halfwidth(phat: f64, n: f64) -> f64 {
    let z2 = Z95 * Z95;
    Z95 / (1.0 + z2 / n) * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt()
}

/// Draw from `cdf` (cumulative, last entry 1) by inversion.
fn draw(cdf: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let u: f64 = rng.gen();
    cdf.iter().position(|&c| u < c).unwrap_or(cdf.len() - 1)
}

fn cumulative(noise: &Pmf<f64>) -> Vec<f64> {
    noise
        .probs()
        .iter()
        .scan(0.0, |acc, &q| {
            *acc += q;
            Some(*acc)
        })
        .collect()
}

/// Standard normal draw by the Box–Muller cosine branch.
pub fn box_muller(rng: &mut ChaCha8Rng) -> f64 {
    let u1 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

struct ExhaustiveDecoder<'a> {
    p: usize,
    law: &'a VectorLaw<f64>,
    tie_rule: TieRule,
}

impl ExhaustiveDecoder<'_> {
    /// Index of the decoded candidate, or `None` for a tie counted as error.
    fn decode(&self, y: &[usize], candidates: impl Iterator<Item = Vec<usize>>) -> Option<usize> {
        let p = self.p;
        let mut best = f64::NEG_INFINITY;
        let mut winner = None;
        let mut tied = false;
        let mut resid = vec![0; y.len()];
        for (i, c) in candidates.enumerate() {
            for ((r, a), b) in resid.iter_mut().zip(y).zip(&c) {
                *r = (a + p - b) % p;
            }
            let l = self.law.log_likelihood(&resid);
            if l > best || winner.is_none() {
                best = l;
                winner = Some(i);
                tied = false;
            } else if l == best {
                tied = true;
            }
        }
        match self.tie_rule {
            TieRule::CountAsError if tied => None,
            _ => winner,
        }
    }
}

fn check_decoder(sc: &SplitCode, noise: &Pmf<f64>) -> Result<()> {
    let p = sc.parent.p();
    if noise.alphabet_size() != p {
        return Err(Error::DimensionMismatch("noise alphabet differs from field size".into()));
    }
    if sc.parent.k() as f64 * (p as f64).log2() > DECODER_LOG2_LIMIT + 1e-9 {
        return Err(Error::TooLarge(format!("decoder would score {p}^{} candidates", sc.parent.k())));
    }
    Ok(())
}

struct SplitTrial {
    split_wrong: bool,
    parent_wrong: bool,
    split_decision: Option<usize>,
    parent_decision: Option<usize>,
}

fn split_trials(sc: &SplitCode, noise: &Pmf<f64>, cfg: &SimConfig, with_parent: bool) -> Result<Vec<SplitTrial>> {
    cfg.validate()?;
    check_decoder(sc, noise)?;
    let p = sc.parent.p();
    let law = VectorLaw::new(noise);
    let cdf = cumulative(noise);
    let book1 = sc.user_codebook(1);
    let book2 = sc.user_codebook(2);
    let parent_book = sc.parent.codebook();
    let dec = ExhaustiveDecoder {
        p,
        law: &law,
        tie_rule: cfg.tie_rule,
    };
    let add = |a: &[usize], b: &[usize]| -> Vec<usize> { a.iter().zip(b).map(|(x, y)| (x + y) % p).collect() };
    Ok(cfg.run(|rng| {
        let i1 = rng.gen_range(0..book1.len());
        let i2 = rng.gen_range(0..book2.len());
        let sent = i1 * book2.len() + i2;
        let x = add(&book1[i1], &book2[i2]);
        let z: Vec<usize> = (0..x.len()).map(|_| draw(&cdf, rng)).collect();
        let y = add(&x, &z);
        let pairs = book1.iter().flat_map(|c1| book2.iter().map(|c2| add(c1, c2)));
        let split_decision = dec.decode(&y, pairs);
        let parent_decision = if with_parent {
            dec.decode(&y, parent_book.iter().cloned())
        } else {
            None
        };
        SplitTrial {
            split_wrong: split_decision != Some(sent),
            parent_wrong: parent_decision != Some(sent),
            split_decision,
            parent_decision,
        }
    }))
}

/// Joint ML decoding of a split code with uniform messages; estimates the
/// probability that at least one message is wrong.
pub fn simulate_split_mac(sc: &SplitCode, noise: &Pmf<f64>, cfg: &SimConfig) -> Result<Estimate> {
    let trials = split_trials(sc, noise, cfg, false)?;
    let errors = trials.iter().filter(|t| t.split_wrong).count();
    Ok(Estimate::from_counts(errors, cfg.trials))
}

/// Split decoder and parent single-user decoder on identical noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairedRun {
    pub split: Estimate,
    pub parent: Estimate,
    /// Trials where the two decoders decided differently.
    pub mismatches: usize,
}

pub fn simulate_split_vs_parent(sc: &SplitCode, noise: &Pmf<f64>, cfg: &SimConfig) -> Result<PairedRun> {
    let trials = split_trials(sc, noise, cfg, true)?;
    Ok(PairedRun {
        split: Estimate::from_counts(trials.iter().filter(|t| t.split_wrong).count(), cfg.trials),
        parent: Estimate::from_counts(trials.iter().filter(|t| t.parent_wrong).count(), cfg.trials),
        mismatches: trials.iter().filter(|t| t.split_decision != t.parent_decision).count(),
    })
}

/// Nested scalar lattices `l0 Z ⊆ l1 Z ⊆ Z` scaled by `step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPam")]
pub struct PamTriplet {
    l0: u64,
    l1: u64,
    step: f64,
}

#[derive(Deserialize)]
struct RawPam {
    l0: u64,
    l1: u64,
    step: f64,
}

impl TryFrom<RawPam> for PamTriplet {
    type Error = Error;
    fn try_from(r: RawPam) -> Result<Self> {
        Self::new(r.l0, r.l1, r.step)
    }
}

impl PamTriplet {
    pub fn new(l0: u64, l1: u64, step: f64) -> Result<Self> {
        if l1 == 0 || l1 % 2 == 0 {
            return Err(Error::Domain(format!("l1 = {l1} must be odd and positive")));
        }
        if l0 == 0 || l0 % l1 != 0 || (l0 / l1) % 2 == 0 {
            return Err(Error::Domain(format!("l0 = {l0} must be an odd multiple of l1 = {l1}")));
        }
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::Domain(format!("step = {step} must be positive")));
        }
        Ok(Self { l0, l1, step })
    }

    #[inline]
    pub fn l0(&self) -> u64 {
        self.l0
    }

    #[inline]
    pub fn l1(&self) -> u64 {
        self.l1
    }

    #[inline]
    pub fn step(&self) -> f64 {
        self.step
    }

    /// User 1 constellation size `l0 / l1`.
    pub fn size1(&self) -> u64 {
        self.l0 / self.l1
    }
}

/// Unscaled integer constellations `(C1, C2, C1 + C2)`; the sum is listed
/// in the order `i1 * l1 + i2`.
pub fn pam_integer_codebooks(t: &PamTriplet) -> (Vec<i64>, Vec<i64>, Vec<i64>) {
    let (l0, l1) = (t.l0 as i64, t.l1 as i64);
    let c1: Vec<i64> = (0..l0 / l1).map(|j| j * l1 - (l0 - l1) / 2).collect();
    let c2: Vec<i64> = (0..l1).map(|i| i - (l1 - 1) / 2).collect();
    let sum = c1.iter().flat_map(|a| c2.iter().map(move |b| a + b)).collect();
    (c1, c2, sum)
}

/// Scaled constellations `(C1, C2, C1 + C2)`.
pub fn pam_codebooks(t: &PamTriplet) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let (c1, c2, s) = pam_integer_codebooks(t);
    let scale = |v: Vec<i64>| v.into_iter().map(|a| a as f64 * t.step).collect();
    (scale(c1), scale(c2), scale(s))
}

/// Whether the sum constellation is exactly the centered `l0`-point PAM
/// with every point hit once.
pub fn pam_sum_is_centered_pam(t: &PamTriplet) -> bool {
    let (_, _, mut sum) = pam_integer_codebooks(t);
    let half = (t.l0 as i64 - 1) / 2;
    let n = sum.len();
    sum.sort_unstable();
    sum.dedup();
    n == sum.len() && sum.iter().copied().eq(-half..=half)
}

pub fn mean_square(points: &[f64]) -> f64 {
    points.iter().map(|x| x * x).sum::<f64>() / points.len() as f64
}

/// `Q(x) = P(Z > x)` for a standard normal `Z`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// ML symbol error probability of an equidistant `l0`-point PAM.
pub fn pam_error_probability(l0: u64, step: f64, noise_std: f64) -> f64 {
    let l = l0 as f64;
    2.0 * (l - 1.0) / l * q_function(step / (2.0 * noise_std))
}

/// Nearest integer in `[-half, half]`, ties toward the smaller magnitude.
fn quantize(v: f64, half: i64) -> i64 {
    let f = v.floor();
    let frac = v - f;
    let q = if frac > 0.5 {
        f + 1.0
    } else if frac < 0.5 {
        f
    } else if (f + 1.0).abs() < f.abs() {
        f + 1.0
    } else {
        f
    };
    (q.clamp(-(half as f64), half as f64)) as i64
}

/// Nearest point by scanning the whole constellation.
fn nearest_by_scan(v: f64, points: &[i64]) -> usize {
    let mut best = 0;
    for (i, &a) in points.iter().enumerate().skip(1) {
        let (d, db) = ((v - a as f64).abs(), (v - points[best] as f64).abs());
        if d < db || (d == db && a.abs() < points[best].abs()) {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PamRun {
    /// Either user's message wrong after lattice decoding and unmixing.
    pub joint: Estimate,
    /// Single-user `l0`-PAM with the same points and noise.
    pub single_user: Estimate,
    pub mismatches: usize,
}

/// Both users send uniformly chosen points; the receiver quantizes to the
/// sum constellation and unmixes `s -> (s / l1, s % l1)`.
pub fn simulate_pam_mac(t: &PamTriplet, noise_std: f64, cfg: &SimConfig) -> Result<PamRun> {
    cfg.validate()?;
    if !(noise_std.is_finite() && noise_std > 0.0) {
        return Err(Error::Domain(format!("noise_std = {noise_std} must be positive")));
    }
    let (c1, c2, _) = pam_integer_codebooks(t);
    let half = (t.l0 as i64 - 1) / 2;
    let pam: Vec<i64> = (-half..=half).collect();
    let l1 = t.l1 as usize;
    let outcomes = cfg.run(|rng| {
        let i1 = rng.gen_range(0..c1.len());
        let i2 = rng.gen_range(0..c2.len());
        let z = noise_std * box_muller(rng);
        let y = (c1[i1] + c2[i2]) as f64 * t.step + z;
        let v = y / t.step;
        let s = (quantize(v, half) + half) as usize;
        let joint_wrong = (s / l1, s % l1) != (i1, i2);
        let sent = i1 * l1 + i2;
        let su_wrong = nearest_by_scan(v, &pam) != sent;
        (joint_wrong, su_wrong)
    });
    let joint = outcomes.iter().filter(|o| o.0).count();
    let su = outcomes.iter().filter(|o| o.1).count();
    Ok(PamRun {
        joint: Estimate::from_counts(joint, cfg.trials),
        single_user: Estimate::from_counts(su, cfg.trials),
        mismatches: outcomes.iter().filter(|o| o.0 != o.1).count(),
    })
}
