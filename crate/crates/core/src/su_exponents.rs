//! Discrete single-user exponents (Gallager `E_0` / `E_x`, random-coding and
//! expurgated bounds), the Rényi-entropy form for additive noise, and the
//! three-event Slepian–Wolf bound for two-user MACs.
//!
//! Rates and exponents are in nats per channel use.

use serde::{Deserialize, Serialize};

use crate::channels::{AdditiveNoiseChannel, Dmc, Mac2, Pmf};
use crate::error::{Error, Result};
use crate::optimize::{golden_max, grid_then_golden, maximize_on_simplex, COARSE_GRID};
use crate::scalar::Real;

/// Upper end of the `rho >= 1` search in the expurgated exponent.
pub const RHO_MAX: f64 = 64.0;

const RHO_TOL: f64 = 1e-10;
const SIMPLEX_TOL: f64 = 1e-13;

fn check_input<T: Real>(channel: &Dmc<T>, input: &Pmf<T>) -> Result<()> {
    if input.alphabet_size() != channel.input_size() {
        return Err(Error::DimensionMismatch(format!(
            "input law has {} symbols, channel has {} inputs",
            input.alphabet_size(),
            channel.input_size()
        )));
    }
    Ok(())
}

fn check_rate<T: Real>(rate: T) -> Result<()> {
    if rate.is_nan() || rate < T::zero() {
        return Err(Error::Domain(format!("rate {rate} is negative")));
    }
    Ok(())
}

fn e0_raw<T: Real>(channel: &Dmc<T>, p: &[T], rho: T) -> T {
    let s = T::one() / (T::one() + rho);
    let mut total = T::zero();
    for y in 0..channel.output_size() {
        let mut inner = T::zero();
        for (x, &px) in p.iter().enumerate() {
            let w = channel.prob(y, x);
            if px > T::zero() && w > T::zero() {
                inner = inner + px * w.powf(s);
            }
        }
        if inner > T::zero() {
            total = total + inner.powf(T::one() + rho);
        }
    }
    -total.ln()
}

/// Gallager's function `E_0(rho, P) = -ln Σ_y (Σ_x P(x) W(y|x)^{1/(1+rho)})^{1+rho}`.
pub fn gallager_e0<T: Real>(channel: &Dmc<T>, input: &Pmf<T>, rho: T) -> Result<T> {
    check_input(channel, input)?;
    if rho.is_nan() || rho < T::zero() {
        return Err(Error::Domain(format!("rho = {rho} < 0")));
    }
    Ok(e0_raw(channel, input.probs(), rho))
}

/// Analytic `∂E_0/∂rho`.
pub fn gallager_e0_derivative<T: Real>(channel: &Dmc<T>, input: &Pmf<T>, rho: T) -> Result<T> {
    check_input(channel, input)?;
    let s = T::one() / (T::one() + rho);
    let ds = -s * s;
    let (mut f, mut df) = (T::zero(), T::zero());
    for y in 0..channel.output_size() {
        let (mut a, mut da) = (T::zero(), T::zero());
        for x in 0..channel.input_size() {
            let (px, w) = (input.get(x), channel.prob(y, x));
            if px > T::zero() && w > T::zero() {
                let ws = w.powf(s);
                a = a + px * ws;
                da = da + px * ws * w.ln() * ds;
            }
        }
        if a > T::zero() {
            let term = a.powf(T::one() + rho);
            f = f + term;
            df = df + term * (a.ln() + (T::one() + rho) * da / a);
        }
    }
    Ok(-df / f)
}

fn bhattacharyya<T: Real>(channel: &Dmc<T>) -> Vec<T> {
    let n = channel.input_size();
    let mut b = vec![T::zero(); n * n];
    for x1 in 0..n {
        for x2 in 0..n {
            b[x1 * n + x2] = (0..channel.output_size())
                .fold(T::zero(), |acc, y| acc + (channel.prob(y, x1) * channel.prob(y, x2)).sqrt());
        }
    }
    b
}

fn ex_raw<T: Real>(bhat: &[T], p: &[T], rho: T) -> T {
    let n = p.len();
    let inv = T::one() / rho;
    let mut g = T::zero();
    for x1 in 0..n {
        for x2 in 0..n {
            let b = bhat[x1 * n + x2];
            if b > T::zero() {
                g = g + p[x1] * p[x2] * b.powf(inv);
            }
        }
    }
    -rho * g.ln()
}

/// Gallager's expurgation function
/// `E_x(rho, P) = -rho ln Σ_{x1,x2} P(x1)P(x2) (Σ_y √(W(y|x1)W(y|x2)))^{1/rho}`.
pub fn gallager_ex<T: Real>(channel: &Dmc<T>, input: &Pmf<T>, rho: T) -> Result<T> {
    check_input(channel, input)?;
    if rho.is_nan() || rho < T::one() {
        return Err(Error::Domain(format!("rho = {rho} < 1")));
    }
    Ok(ex_raw(&bhattacharyya(channel), input.probs(), rho))
}

/// Analytic `∂E_x/∂rho`.
pub fn gallager_ex_derivative<T: Real>(channel: &Dmc<T>, input: &Pmf<T>, rho: T) -> Result<T> {
    check_input(channel, input)?;
    let bhat = bhattacharyya(channel);
    let n = channel.input_size();
    let inv = T::one() / rho;
    let (mut g, mut dg) = (T::zero(), T::zero());
    for x1 in 0..n {
        for x2 in 0..n {
            let b = bhat[x1 * n + x2];
            if b > T::zero() {
                let w = input.get(x1) * input.get(x2) * b.powf(inv);
                g = g + w;
                dg = dg - w * b.ln() * inv * inv;
            }
        }
    }
    Ok(-g.ln() - rho * dg / g)
}

/// Optimizer output of one exponent evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct ExponentPoint<T> {
    pub value: T,
    pub rho: T,
    pub input: Pmf<T>,
    /// Set when the maximizing `rho` sits at [`RHO_MAX`].
    pub truncated: bool,
}

/// Result of a single-user exponent evaluation at one rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct SuExponentReport<T> {
    pub rate: T,
    pub e_r: T,
    pub e_ex: Option<T>,
    pub e_best: T,
    pub rho: T,
    pub input: Pmf<T>,
    pub ex_truncated: bool,
}

fn best_input_for<T: Real, F: Fn(&[T]) -> T>(f: F, channel: &Dmc<T>, symmetric: bool) -> (Vec<T>, T) {
    let n = channel.input_size();
    if symmetric || n == 1 {
        let p = vec![T::one() / T::from_usize_lossy(n); n];
        let v = f(&p);
        (p, v)
    } else {
        maximize_on_simplex(f, n, T::lit(SIMPLEX_TOL))
    }
}

fn pmf_unchecked<T: Real>(p: Vec<T>) -> Pmf<T> {
    // renormalize away projection round-off
    let s = p.iter().fold(T::zero(), |a, &b| a + b);
    Pmf::new(p.into_iter().map(|x| x / s).collect()).expect("optimizer stays on the simplex")
}

/// `max_{0<=rho<=1} [E_0(rho, P) - rho R]` for a fixed input law.
pub fn random_coding_exponent_for_input<T: Real>(channel: &Dmc<T>, input: &Pmf<T>, rate: T) -> Result<(T, T)> {
    check_input(channel, input)?;
    check_rate(rate)?;
    let f = |rho: T| e0_raw(channel, input.probs(), rho) - rho * rate;
    let (rho, v) = grid_then_golden(f, T::zero(), T::one(), COARSE_GRID, T::lit(RHO_TOL));
    Ok((v.max(T::zero()), rho))
}

/// Random-coding exponent `E_r(R) = max_{rho in [0,1]} max_P [E_0(rho,P) - rho R]`.
///
/// The uniform input is used directly for symmetric channels (see
/// [`Dmc::is_symmetric`]); otherwise the input law is optimized on the
/// simplex for every trial `rho`.
pub fn random_coding_exponent<T: Real>(channel: &Dmc<T>, rate: T) -> Result<SuExponentReport<T>> {
    check_rate(rate)?;
    let symmetric = channel.is_symmetric();
    let inner = |rho: T| best_input_for(|p| e0_raw(channel, p, rho), channel, symmetric);
    let f = |rho: T| inner(rho).1 - rho * rate;
    let (rho, v) = grid_then_golden(f, T::zero(), T::one(), COARSE_GRID, T::lit(RHO_TOL));
    let input = pmf_unchecked(inner(rho).0);
    let e_r = v.max(T::zero());
    Ok(SuExponentReport {
        rate,
        e_r,
        e_ex: None,
        e_best: e_r,
        rho,
        input,
        ex_truncated: false,
    })
}

/// Expurgated exponent `sup_{rho >= 1} max_P [E_x(rho,P) - rho R]`, with the
/// supremum truncated at [`RHO_MAX`].
pub fn expurgated_exponent<T: Real>(channel: &Dmc<T>, rate: T) -> Result<ExponentPoint<T>> {
    check_rate(rate)?;
    let bhat = bhattacharyya(channel);
    // E_x is not guaranteed to prefer the uniform law even on symmetric
    // channels, so the input is always optimized.
    let inner = |rho: T| best_input_for(|p| ex_raw(&bhat, p, rho), channel, channel.input_size() == 1);
    let f = |rho: T| inner(rho).1 - rho * rate;
    let rho_max = T::lit(RHO_MAX);
    let (rho, v) = grid_then_golden(f, T::one(), rho_max, COARSE_GRID, T::lit(RHO_TOL));
    let input = pmf_unchecked(inner(rho).0);
    Ok(ExponentPoint {
        value: v.max(T::zero()),
        rho,
        input,
        truncated: rho_max - rho < T::lit(1e-6),
    })
}

/// Random-coding and expurgated exponents together with their maximum.
pub fn best_known_exponent<T: Real>(channel: &Dmc<T>, rate: T) -> Result<SuExponentReport<T>> {
    let mut report = random_coding_exponent(channel, rate)?;
    let ex = expurgated_exponent(channel, rate)?;
    report.e_best = report.e_r.max(ex.value);
    report.e_ex = Some(ex.value);
    report.ex_truncated = ex.truncated;
    Ok(report)
}

/// Shannon entropy in nats.
pub fn shannon_entropy<T: Real>(p: &Pmf<T>) -> T {
    p.probs()
        .iter()
        .filter(|&&x| x > T::zero())
        .fold(T::zero(), |acc, &x| acc - x * x.ln())
}

/// Rényi entropy `h_beta = (beta/(1-beta)) ln (Σ p^beta)^{1/beta}`; Shannon at `beta = 1`.
pub fn renyi_entropy<T: Real>(p: &Pmf<T>, beta: T) -> Result<T> {
    if beta.is_nan() || beta <= T::zero() {
        return Err(Error::Domain(format!("Renyi order {beta} must be positive")));
    }
    if beta == T::one() {
        return Ok(shannon_entropy(p));
    }
    let s = p
        .probs()
        .iter()
        .filter(|&&x| x > T::zero())
        .fold(T::zero(), |acc, &x| acc + x.powf(beta));
    Ok(s.ln() / (T::one() - beta))
}

/// Random-coding exponent of `Y = X ⊕ N` in the Rényi form
/// `max_{rho in [0,1]} rho [ln m - h_{1/(1+rho)}(N) - R]`.
pub fn additive_random_coding_exponent<T: Real>(ch: &AdditiveNoiseChannel<T>, rate: T) -> Result<T> {
    check_rate(rate)?;
    let log_m = T::from_usize_lossy(ch.modulus()).ln();
    let noise = ch.noise();
    let f = |rho: T| {
        if rho == T::zero() {
            return T::zero();
        }
        let h = renyi_entropy(noise, T::one() / (T::one() + rho)).expect("order in (0, 1]");
        rho * (log_m - h - rate)
    };
    let (_, v) = grid_then_golden(f, T::zero(), T::one(), COARSE_GRID, T::lit(RHO_TOL));
    Ok(v.max(T::zero()))
}

/// Channel capacity in nats by Blahut–Arimoto, stopped when the upper and
/// lower capacity bounds agree to `1e-12`.
pub fn capacity<T: Real>(channel: &Dmc<T>) -> (T, Pmf<T>) {
    let (nx, ny) = (channel.input_size(), channel.output_size());
    let mut p = vec![T::one() / T::from_usize_lossy(nx); nx];
    let mut lower = T::zero();
    for _ in 0..200_000 {
        let q: Vec<T> = (0..ny)
            .map(|y| (0..nx).fold(T::zero(), |a, x| a + p[x] * channel.prob(y, x)))
            .collect();
        // D(W(.|x) || q) per input
        let d: Vec<T> = (0..nx)
            .map(|x| {
                (0..ny).fold(T::zero(), |a, y| {
                    let w = channel.prob(y, x);
                    if w > T::zero() {
                        a + w * (w / q[y]).ln()
                    } else {
                        a
                    }
                })
            })
            .collect();
        lower = (0..nx).fold(T::zero(), |a, x| a + p[x] * d[x]);
        let upper = d.iter().fold(T::neg_infinity(), |a, &b| a.max(b));
        if upper - lower < T::lit(1e-12) {
            break;
        }
        let w: Vec<T> = (0..nx).map(|x| p[x] * d[x].exp()).collect();
        let s = w.iter().fold(T::zero(), |a, &b| a + b);
        p = w.into_iter().map(|x| x / s).collect();
    }
    (lower.max(T::zero()), pmf_unchecked(p))
}

fn positive_capacity<T: Real>(channel: &Dmc<T>) -> Result<()> {
    if capacity(channel).0 <= T::lit(1e-12) {
        Err(Error::ZeroCapacity)
    } else {
        Ok(())
    }
}

fn best_rho_one_input<T: Real>(channel: &Dmc<T>) -> Pmf<T> {
    pmf_unchecked(best_input_for(|p| e0_raw(channel, p, T::one()), channel, channel.is_symmetric()).0)
}

/// Rate at which the maximizing `rho` of `E_r` leaves `rho = 1`, i.e.
/// `∂E_0/∂rho` at `rho = 1` for the input maximizing `E_0(1, .)`.
///
/// A channel whose `E_0` is linear in `rho` (noiseless-like) has a straight
/// random-coding exponent; its critical rate is reported as 0.
pub fn critical_rate<T: Real>(channel: &Dmc<T>) -> Result<T> {
    positive_capacity(channel)?;
    let input = best_rho_one_input(channel);
    let e1 = e0_raw(channel, input.probs(), T::one());
    let e_half = e0_raw(channel, input.probs(), T::lit(0.5));
    if (e1 - T::lit(2.0) * e_half).abs() <= T::tolerance() * e1.abs().max(T::one()) {
        return Ok(T::zero());
    }
    gallager_e0_derivative(channel, &input, T::one())
}

/// Rate below which the expurgated exponent exceeds the random-coding one:
/// `∂E_x/∂rho` at `rho = 1`, where the expurgated maximizer leaves `rho = 1`.
///
/// Since `E_x(1, P) = E_0(1, P)`, both bounds coincide on `[R_ex, R_cr]`.
pub fn expurgation_rate<T: Real>(channel: &Dmc<T>) -> Result<T> {
    positive_capacity(channel)?;
    let bhat = bhattacharyya(channel);
    let input = pmf_unchecked(best_input_for(|p| ex_raw(&bhat, p, T::one()), channel, channel.is_symmetric()).0);
    gallager_ex_derivative(channel, &input, T::one())
}

/// Three-event Slepian–Wolf exponent of a two-user MAC.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct SlepianWolfReport<T> {
    pub value: T,
    /// Genie-aided exponent of user 1 (user 2's message known).
    pub e1: T,
    /// Genie-aided exponent of user 2.
    pub e2: T,
    /// Joint-error exponent at the sum rate.
    pub e3: T,
    pub input1: Pmf<T>,
    pub input2: Pmf<T>,
}

fn sw_components<T: Real>(mac: &Mac2<T>, p1: &[T], p2: &[T], r1: T, r2: T) -> (T, T, T) {
    let p1 = pmf_unchecked(p1.to_vec());
    let p2 = pmf_unchecked(p2.to_vec());
    let ch1 = mac.side_information_dmc(1, &p2).expect("sizes match");
    let ch2 = mac.side_information_dmc(2, &p1).expect("sizes match");
    let prod = mac.product_input_dmc();
    let joint: Vec<T> = p1
        .probs()
        .iter()
        .flat_map(|&a| p2.probs().iter().map(move |&b| a * b))
        .collect();
    let joint = Pmf::new(joint).unwrap_or_else(|_| pmf_unchecked(vec![T::one(); prod.input_size()]));
    let e = |ch: &Dmc<T>, p: &Pmf<T>, r: T| random_coding_exponent_for_input(ch, p, r).expect("validated").0;
    (e(&ch1, &p1, r1), e(&ch2, &p2, r2), e(&prod, &joint, r1 + r2))
}

/// `max_{P1,P2} min(E1, E2, E3)` where `E3` is the random-coding exponent of
/// the pair-input channel at `r1 + r2` and `E1`, `E2` are the exponents of the
/// side-information channels `X_i -> (Y, X_j)`.
///
/// Symmetric pair-input channels (including every additive MAC) use uniform
/// inputs; otherwise the two input laws are optimized by alternating
/// maximization starting from uniform.
pub fn slepian_wolf_mac_exponent<T: Real>(mac: &Mac2<T>, r1: T, r2: T) -> Result<SlepianWolfReport<T>> {
    check_rate(r1)?;
    check_rate(r2)?;
    let (n1, n2) = (mac.input1_size(), mac.input2_size());
    let mut p1 = vec![T::one() / T::from_usize_lossy(n1); n1];
    let mut p2 = vec![T::one() / T::from_usize_lossy(n2); n2];
    let objective = |a: &[T], b: &[T]| {
        let (e1, e2, e3) = sw_components(mac, a, b, r1, r2);
        e1.min(e2).min(e3)
    };
    let mut best = objective(&p1, &p2);
    if !mac.product_input_dmc().is_symmetric() {
        for _ in 0..50 {
            let prev = best;
            if n1 > 1 {
                let (np1, v) = maximize_on_simplex(|a| objective(a, &p2), n1, T::lit(SIMPLEX_TOL));
                if v > best {
                    p1 = np1;
                    best = v;
                }
            }
            if n2 > 1 {
                let (np2, v) = maximize_on_simplex(|b| objective(&p1, b), n2, T::lit(SIMPLEX_TOL));
                if v > best {
                    p2 = np2;
                    best = v;
                }
            }
            if best - prev <= T::lit(1e-13) {
                break;
            }
        }
    }
    let (e1, e2, e3) = sw_components(mac, &p1, &p2, r1, r2);
    Ok(SlepianWolfReport {
        value: e1.min(e2).min(e3),
        e1,
        e2,
        e3,
        input1: pmf_unchecked(p1),
        input2: pmf_unchecked(p2),
    })
}

/// Single-user channel of user `user` while the other user holds `symbol`.
fn frozen_user_channel<T: Real>(mac: &Mac2<T>, user: usize, symbol: usize) -> Result<Dmc<T>> {
    let rows = if user == 1 {
        (0..mac.input1_size()).map(|x| mac.slice(x, symbol).clone()).collect()
    } else {
        (0..mac.input2_size()).map(|x| mac.slice(symbol, x).clone()).collect()
    };
    Dmc::new(rows)
}

/// Time sharing between single-user codebooks: user `i` transmits alone for a
/// fraction `λ_i` of the block (the other user parks on its best symbol) with
/// the best-known single-user exponent. Returns
/// `max_λ min(λ E_1(r1/λ), (1-λ) E_2(r2/(1-λ)))`.
pub fn time_sharing_expurgated<T: Real>(mac: &Mac2<T>, r1: T, r2: T) -> Result<T> {
    check_rate(r1)?;
    check_rate(r2)?;
    let user_exponent = |user: usize, rate: T| -> T {
        let others = if user == 1 { mac.input2_size() } else { mac.input1_size() };
        (0..others)
            .filter_map(|s| frozen_user_channel(mac, user, s).ok())
            .filter_map(|ch| best_known_exponent(&ch, rate).ok())
            .fold(T::zero(), |a, r| a.max(r.e_best))
    };
    let (e1_zero, e2_zero) = (r1 == T::zero(), r2 == T::zero());
    if e1_zero && e2_zero {
        let (a, b) = (user_exponent(1, T::zero()), user_exponent(2, T::zero()));
        return Ok(if a + b > T::zero() { a * b / (a + b) } else { T::zero() });
    }
    let f = |lam: T| {
        let lam = lam.max(T::lit(1e-9)).min(T::one() - T::lit(1e-9));
        let a = lam * user_exponent(1, r1 / lam);
        let b = (T::one() - lam) * user_exponent(2, r2 / (T::one() - lam));
        a.min(b)
    };
    let (_, v) = golden_max(f, T::zero(), T::one(), T::lit(1e-6));
    Ok(v.max(T::zero()))
}
