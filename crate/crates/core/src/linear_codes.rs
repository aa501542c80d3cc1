//! Linear codes over `GF(p)`: generation, the row-block split into per-user
//! sub-codes, exhaustive ML decoding on additive noise, Minkowski sums.
//!
//! Vectors over `Z_p^n` are indexed by their base-`p` value with the first
//! coordinate most significant, so index order is lexicographic order.

use std::collections::{BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channels::Pmf;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::transform::is_prime;

/// Largest `log2(p^n)` handled by exhaustive enumeration.
pub const ENUMERATION_LOG2_LIMIT: f64 = 22.0;

/// How ML ties are resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum TieRule {
    /// Decode the lexicographically smallest maximizing message.
    #[default]
    LexicographicMin,
    /// A tie between distinct messages is an error.
    CountAsError,
}

impl std::str::FromStr for TieRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lex" | "lexicographic-min" => Ok(Self::LexicographicMin),
            "error" | "count-as-error" => Ok(Self::CountAsError),
            other => Err(Error::Parse(format!("unknown tie rule '{other}'"))),
        }
    }
}

#[derive(Deserialize)]
struct RawGenerator {
    p: usize,
    rows: Vec<Vec<usize>>,
}

/// Full-rank `k x n` generator matrix over `Z_p`, `p` prime.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawGenerator")]
pub struct GeneratorMatrix {
    p: usize,
    rows: Vec<Vec<usize>>,
}

impl TryFrom<RawGenerator> for GeneratorMatrix {
    type Error = Error;
    fn try_from(raw: RawGenerator) -> Result<Self> {
        Self::new(raw.p, raw.rows)
    }
}

impl GeneratorMatrix {
    pub fn new(p: usize, rows: Vec<Vec<usize>>) -> Result<Self> {
        if !is_prime(p as u64) {
            return Err(Error::NonPrime(p as u64));
        }
        let k = rows.len();
        if k == 0 {
            return Err(Error::InvalidDims("generator needs at least one row".into()));
        }
        let n = rows[0].len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidDims("rows have different lengths".into()));
        }
        if k > n {
            return Err(Error::InvalidDims(format!("k = {k} exceeds n = {n}")));
        }
        if let Some(bad) = rows.iter().flatten().find(|&&a| a >= p) {
            return Err(Error::InvalidDims(format!("entry {bad} outside Z_{p}")));
        }
        let g = Self { p, rows };
        let rank = g.rank();
        if rank < k {
            return Err(Error::RankDeficient { rank, k });
        }
        Ok(g)
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.rows[0].len()
    }

    #[inline]
    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    /// Rate `(k/n) ln p` in nats.
    pub fn rate<T: Real>(&self) -> T {
        T::from_usize_lossy(self.k()) / T::from_usize_lossy(self.n()) * T::from_usize_lossy(self.p).ln()
    }

    pub fn rank(&self) -> usize {
        rref(self.p, self.rows.clone()).1.len()
    }

    /// `u G` over `Z_p`.
    pub fn encode(&self, u: &[usize]) -> Vec<usize> {
        encode_rows(self.p, self.n(), &self.rows, u)
    }

    /// All `p^k` codewords, in lexicographic order of the message.
    pub fn codebook(&self) -> Vec<Vec<usize>> {
        let k = self.k();
        (0..pow(self.p, k))
            .map(|i| self.encode(&digits(i, self.p, k)))
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("generator serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Codebook as text, one space-separated vector per line.
pub fn codebook_text<'a>(codewords: impl IntoIterator<Item = &'a Vec<usize>>) -> String {
    let mut out = String::new();
    for c in codewords {
        let line: Vec<String> = c.iter().map(|a| a.to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

fn pow(p: usize, e: usize) -> usize {
    p.pow(e as u32)
}

/// Base-`p` digits of `idx`, most significant first.
fn digits(mut idx: usize, p: usize, len: usize) -> Vec<usize> {
    let mut d = vec![0; len];
    for slot in d.iter_mut().rev() {
        *slot = idx % p;
        idx /= p;
    }
    d
}

fn index_of(v: &[usize], p: usize) -> usize {
    v.iter().fold(0, |acc, &a| acc * p + a)
}

fn encode_rows(p: usize, n: usize, rows: &[Vec<usize>], u: &[usize]) -> Vec<usize> {
    let mut c = vec![0; n];
    for (ui, row) in u.iter().zip(rows) {
        if *ui == 0 {
            continue;
        }
        for (cj, gj) in c.iter_mut().zip(row) {
            *cj = (*cj + ui * gj) % p;
        }
    }
    c
}

fn inv_mod(a: usize, p: usize) -> usize {
    // Fermat: a^(p-2) mod p.
    let mut result = 1;
    let mut base = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            result = result * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    result
}

/// Reduced row echelon form over `Z_p`; returns the nonzero rows and their
/// pivot columns.
fn rref(p: usize, mut m: Vec<Vec<usize>>) -> (Vec<Vec<usize>>, Vec<usize>) {
    let cols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == m.len() {
            break;
        }
        let Some(piv) = (r..m.len()).find(|&i| m[i][c] != 0) else {
            continue;
        };
        m.swap(r, piv);
        let inv = inv_mod(m[r][c], p);
        for a in m[r].iter_mut() {
            *a = *a * inv % p;
        }
        for i in 0..m.len() {
            if i != r && m[i][c] != 0 {
                let f = m[i][c];
                for j in 0..cols {
                    m[i][j] = (m[i][j] + (p - f) * m[r][j]) % p;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    m.truncate(r);
    (m, pivots)
}

/// Uniform random full-rank generator by rejection; also returns the number
/// of draws used.
pub fn sample_full_rank_generator(p: usize, k: usize, n: usize, seed: u64) -> Result<(GeneratorMatrix, usize)> {
    if !is_prime(p as u64) {
        return Err(Error::NonPrime(p as u64));
    }
    if k == 0 || k > n {
        return Err(Error::InvalidDims(format!("need 1 <= k <= n, got k = {k}, n = {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut attempts = 0;
    loop {
        attempts += 1;
        let rows: Vec<Vec<usize>> = (0..k).map(|_| (0..n).map(|_| rng.gen_range(0..p)).collect()).collect();
        if rref(p, rows.clone()).1.len() == k {
            return Ok((GeneratorMatrix { p, rows }, attempts));
        }
    }
}

pub fn random_full_rank_generator(p: usize, k: usize, n: usize, seed: u64) -> Result<GeneratorMatrix> {
    sample_full_rank_generator(p, k, n, seed).map(|(g, _)| g)
}

/// A generator split row-wise between two users.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitCode {
    pub parent: GeneratorMatrix,
    pub k1: usize,
}

impl SplitCode {
    pub fn g1(&self) -> &[Vec<usize>] {
        &self.parent.rows[..self.k1]
    }

    pub fn g2(&self) -> &[Vec<usize>] {
        &self.parent.rows[self.k1..]
    }

    pub fn k2(&self) -> usize {
        self.parent.k() - self.k1
    }

    /// Per-user rates `(k_i/n) ln p`.
    pub fn rates<T: Real>(&self) -> (T, T) {
        let n = T::from_usize_lossy(self.parent.n());
        let lp = T::from_usize_lossy(self.parent.p).ln();
        (
            T::from_usize_lossy(self.k1) / n * lp,
            T::from_usize_lossy(self.k2()) / n * lp,
        )
    }

    /// Codebook `{u_i G_i}` of user `1` or `2`, in message order.
    pub fn user_codebook(&self, user: usize) -> Vec<Vec<usize>> {
        let (rows, k) = if user == 1 {
            (self.g1(), self.k1)
        } else {
            (self.g2(), self.k2())
        };
        let p = self.parent.p;
        let n = self.parent.n();
        if k == 0 {
            return vec![vec![0; n]];
        }
        (0..pow(p, k)).map(|i| encode_rows(p, n, rows, &digits(i, p, k))).collect()
    }
}

pub fn split(g: &GeneratorMatrix, k1: usize) -> Result<SplitCode> {
    if k1 > g.k() {
        return Err(Error::InvalidDims(format!("k1 = {k1} exceeds k = {}", g.k())));
    }
    Ok(SplitCode { parent: g.clone(), k1 })
}

/// `{a ⊕ b}` over `Z_p`.
pub fn minkowski_sum(c1: &BTreeSet<Vec<usize>>, c2: &BTreeSet<Vec<usize>>, p: usize) -> Result<BTreeSet<Vec<usize>>> {
    let n = c1.iter().chain(c2).map(|v| v.len()).next().unwrap_or(0);
    if c1.iter().chain(c2).any(|v| v.len() != n) {
        return Err(Error::DimensionMismatch("codewords have different lengths".into()));
    }
    if c1.iter().chain(c2).flatten().any(|&a| a >= p) {
        return Err(Error::Domain(format!("symbol outside Z_{p}")));
    }
    Ok(c1
        .iter()
        .flat_map(|a| c2.iter().map(move |b| a.iter().zip(b).map(|(x, y)| (x + y) % p).collect()))
        .collect())
}

fn check_enumerable(p: usize, n: usize) -> Result<()> {
    let bits = n as f64 * (p as f64).log2();
    if bits > ENUMERATION_LOG2_LIMIT + 1e-9 {
        return Err(Error::TooLarge(format!("p^n = {p}^{n} exceeds 2^{ENUMERATION_LOG2_LIMIT}")));
    }
    Ok(())
}

/// Noise law evaluated on whole vectors.
///
/// Log-likelihoods are computed from the histogram of probability classes
/// (symbols with bit-identical probability share a class), so two vectors
/// that are permutations of each other get bit-identical scores and genuine
/// ties are detected exactly.
pub(crate) struct VectorLaw<T> {
    probs: Vec<T>,
    class_of: Vec<usize>,
    class_log: Vec<T>,
}

impl<T: Real> VectorLaw<T> {
    pub(crate) fn new(noise: &Pmf<T>) -> Self {
        let probs = noise.probs().to_vec();
        let mut class_log: Vec<T> = Vec::new();
        let mut reps: Vec<T> = Vec::new();
        let class_of = probs
            .iter()
            .map(|&q| match reps.iter().position(|&r| r == q) {
                Some(c) => c,
                None => {
                    reps.push(q);
                    class_log.push(q.ln());
                    reps.len() - 1
                }
            })
            .collect();
        Self {
            probs,
            class_of,
            class_log,
        }
    }

    pub(crate) fn log_likelihood(&self, z: &[usize]) -> T {
        let mut hist = vec![0usize; self.class_log.len()];
        for &a in z {
            hist[self.class_of[a]] += 1;
        }
        hist.iter().zip(&self.class_log).fold(T::zero(), |acc, (&h, &l)| {
            if h == 0 {
                acc
            } else {
                acc + T::from_usize_lossy(h) * l
            }
        })
    }

    /// Product of per-symbol probabilities in coordinate order.
    pub(crate) fn probability(&self, z: &[usize]) -> T {
        z.iter().fold(T::one(), |acc, &a| acc * self.probs[a])
    }
}

/// Odometer over `Z_p^n` in lexicographic order.
fn for_each_vector(p: usize, n: usize, mut f: impl FnMut(usize, &[usize])) {
    let mut z = vec![0usize; n];
    for idx in 0..pow(p, n) {
        f(idx, &z);
        for j in (0..n).rev() {
            z[j] += 1;
            if z[j] < p {
                break;
            }
            z[j] = 0;
        }
    }
}

/// Coset labelling of `Z_p^n` by the row space of a matrix.
struct Cosets {
    p: usize,
    basis: Vec<Vec<usize>>,
    pivots: Vec<usize>,
    free: Vec<usize>,
}

impl Cosets {
    fn new(p: usize, rows: &[Vec<usize>]) -> Self {
        let n = rows[0].len();
        let (basis, pivots) = rref(p, rows.to_vec());
        let free = (0..n).filter(|c| !pivots.contains(c)).collect();
        Self { p, basis, pivots, free }
    }

    fn count(&self) -> usize {
        pow(self.p, self.free.len())
    }

    /// Free coordinates of the representative with zeros on the pivots.
    fn key(&self, z: &[usize]) -> usize {
        let p = self.p;
        let mut w = z.to_vec();
        for (row, &c) in self.basis.iter().zip(&self.pivots) {
            let f = w[c];
            if f != 0 {
                for (wj, rj) in w.iter_mut().zip(row) {
                    *wj = (*wj + (p - f) * rj) % p;
                }
            }
        }
        self.free.iter().fold(0, |acc, &c| acc * p + w[c])
    }
}

/// Exact ML error probability of the linear code on the additive channel
/// `Y = X ⊕ N`, noise i.i.d. per symbol, all-zero codeword transmitted.
pub fn exact_ml_error_probability<T: Real>(code: &GeneratorMatrix, noise: &Pmf<T>, tie_rule: TieRule) -> Result<T> {
    let (p, n) = (code.p, code.n());
    if noise.alphabet_size() != p {
        return Err(Error::DimensionMismatch(format!(
            "noise alphabet {} differs from field size {p}",
            noise.alphabet_size()
        )));
    }
    check_enumerable(p, n)?;
    let law = VectorLaw::new(noise);
    let cosets = Cosets::new(p, &code.rows);
    let mut best = vec![T::neg_infinity(); cosets.count()];
    let mut ties = vec![0usize; cosets.count()];
    for_each_vector(p, n, |_, z| {
        let l = law.log_likelihood(z);
        let key = cosets.key(z);
        if l > best[key] {
            best[key] = l;
            ties[key] = 1;
        } else if l == best[key] {
            ties[key] += 1;
        }
    });
    let mut err = T::zero();
    for_each_vector(p, n, |_, z| {
        let key = cosets.key(z);
        let l = law.log_likelihood(z);
        let wrong = match tie_rule {
            // The zero message is the smallest, so it wins every tie it is in.
            TieRule::LexicographicMin => l < best[key],
            TieRule::CountAsError => l < best[key] || ties[key] > 1,
        };
        if wrong {
            err = err + law.probability(z);
        }
    });
    Ok(err)
}

/// Error probabilities of joint ML decoding of a split code.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct SplitErrors<T> {
    /// At least one message decoded wrongly.
    pub joint: T,
    pub user1: T,
    pub user2: T,
}

/// Exact joint ML decoding of `(u1, u2) = (0, 0)` sent over
/// `Y = u1 G1 ⊕ u2 G2 ⊕ N`.
///
/// Candidates are message pairs ordered by the concatenated vector
/// `(u1, u2)`. Under [`TieRule::CountAsError`] a user is counted correct only
/// when every maximizing pair carries its zero message.
pub fn exact_split_mac_error_probability<T: Real>(sc: &SplitCode, noise: &Pmf<T>, tie_rule: TieRule) -> Result<SplitErrors<T>> {
    let g = &sc.parent;
    let (p, n, k1, k2) = (g.p, g.n(), sc.k1, sc.k2());
    if noise.alphabet_size() != p {
        return Err(Error::DimensionMismatch(format!(
            "noise alphabet {} differs from field size {p}",
            noise.alphabet_size()
        )));
    }
    check_enumerable(p, n)?;
    let law = VectorLaw::new(noise);

    // Sum map (u1, u2) -> u1 G1 ⊕ u2 G2, inverted.
    let size2 = pow(p, k2);
    let mut pair_of: HashMap<usize, usize> = HashMap::with_capacity(pow(p, g.k()));
    for i1 in 0..pow(p, k1) {
        let c1 = encode_rows(p, n, sc.g1(), &digits(i1, p, k1));
        for i2 in 0..size2 {
            let c2 = encode_rows(p, n, sc.g2(), &digits(i2, p, k2));
            let c: Vec<usize> = c1.iter().zip(&c2).map(|(a, b)| (a + b) % p).collect();
            if pair_of.insert(index_of(&c, p), i1 * size2 + i2).is_some() {
                return Err(Error::RankDeficient { rank: 0, k: g.k() });
            }
        }
    }

    let stacked: Vec<Vec<usize>> = sc.g1().iter().chain(sc.g2()).cloned().collect();
    let cosets = Cosets::new(p, &stacked);
    let mut best = vec![T::neg_infinity(); cosets.count()];
    let mut argmax: Vec<Vec<usize>> = vec![Vec::new(); cosets.count()];
    for_each_vector(p, n, |idx, z| {
        let l = law.log_likelihood(z);
        let key = cosets.key(z);
        if l > best[key] {
            best[key] = l;
            argmax[key].clear();
            argmax[key].push(idx);
        } else if l == best[key] {
            argmax[key].push(idx);
        }
    });

    let mut out = SplitErrors {
        joint: T::zero(),
        user1: T::zero(),
        user2: T::zero(),
    };
    for_each_vector(p, n, |_, y| {
        let key = cosets.key(y);
        // Pairs explaining y with a maximum-likelihood noise vector w.
        let pairs = argmax[key].iter().map(|&w| {
            let wd = digits(w, p, n);
            let c: Vec<usize> = y.iter().zip(&wd).map(|(a, b)| (a + p - b) % p).collect();
            pair_of[&index_of(&c, p)]
        });
        let (j, e1, e2) = match tie_rule {
            TieRule::LexicographicMin => {
                let pair = pairs.min().expect("coset has a maximizer");
                (pair != 0, pair / size2 != 0, pair % size2 != 0)
            }
            TieRule::CountAsError => pairs.fold((false, false, false), |(j, a, b), pair| {
                (j || pair != 0, a || pair / size2 != 0, b || pair % size2 != 0)
            }),
        };
        if j || e1 || e2 {
            let q = law.probability(y);
            if j {
                out.joint = out.joint + q;
            }
            if e1 {
                out.user1 = out.user1 + q;
            }
            if e2 {
                out.user2 = out.user2 + q;
            }
        }
    });
    Ok(out)
}

/// Brute-force ML error probability given message `u`: every candidate
/// message is scored for every noise vector.
pub fn conditional_ml_error_probability<T: Real>(code: &GeneratorMatrix, noise: &Pmf<T>, u: &[usize], tie_rule: TieRule) -> Result<T> {
    let (p, n, k) = (code.p, code.n(), code.k());
    if u.len() != k || u.iter().any(|&a| a >= p) {
        return Err(Error::InvalidDims(format!("message must be a vector in Z_{p}^{k}")));
    }
    if noise.alphabet_size() != p {
        return Err(Error::DimensionMismatch("noise alphabet differs from field size".into()));
    }
    check_enumerable(p, n)?;
    let law = VectorLaw::new(noise);
    let book = code.codebook();
    let sent = index_of(u, p);
    let x = code.encode(u);
    let mut err = T::zero();
    let mut resid = vec![0usize; n];
    for_each_vector(p, n, |_, z| {
        let y: Vec<usize> = x.iter().zip(z).map(|(a, b)| (a + b) % p).collect();
        let mut best = T::neg_infinity();
        let mut winner = usize::MAX;
        let mut tied = false;
        for (m, c) in book.iter().enumerate() {
            for ((r, a), b) in resid.iter_mut().zip(&y).zip(c) {
                *r = (a + p - b) % p;
            }
            let l = law.log_likelihood(&resid);
            if l > best {
                best = l;
                winner = m;
                tied = false;
            } else if l == best {
                tied = true;
            }
        }
        let wrong = winner != sent || (tied && tie_rule == TieRule::CountAsError);
        if wrong {
            err = err + law.probability(z);
        }
    });
    Ok(err)
}

/// Error probability averaged over uniformly chosen messages.
pub fn message_averaged_error_probability<T: Real>(code: &GeneratorMatrix, noise: &Pmf<T>, tie_rule: TieRule) -> Result<T> {
    let (p, k) = (code.p, code.k());
    let total = pow(p, k);
    let mut sum = T::zero();
    for i in 0..total {
        sum = sum + conditional_ml_error_probability(code, noise, &digits(i, p, k), tie_rule)?;
    }
    Ok(sum / T::from_usize_lossy(total))
}
