//! Finite-alphabet channel models over `{0, .., m-1}` and the constructions
//! relating an additive two-user MAC to its associated single-user channel.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Probability mass function over `{0, .., m-1}`, `m >= 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<T>", into = "Vec<T>")]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct Pmf<T> {
    probs: Vec<T>,
}

impl<T: Real> Pmf<T> {
    pub fn new(probs: Vec<T>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::InvalidPmf(format!("alphabet size {} < 2", probs.len())));
        }
        if let Some(bad) = probs.iter().find(|p| !(p.is_finite() && **p >= T::zero())) {
            return Err(Error::InvalidPmf(format!("entry {bad} is not a nonnegative number")));
        }
        let total = probs.iter().fold(T::zero(), |acc, &p| acc + p);
        if (total - T::one()).abs() > T::tolerance() {
            return Err(Error::InvalidPmf(format!("entries sum to {total}")));
        }
        Ok(Self { probs })
    }

    pub fn uniform(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidPmf(format!("alphabet size {m} < 2")));
        }
        Ok(Self {
            probs: vec![T::one() / T::from_usize_lossy(m); m],
        })
    }

    /// Point mass at `at`.
    pub fn degenerate(m: usize, at: usize) -> Result<Self> {
        if at >= m {
            return Err(Error::Domain(format!("symbol {at} outside alphabet of size {m}")));
        }
        let mut probs = vec![T::zero(); m];
        probs[at] = T::one();
        Self::new(probs)
    }

    /// Law of a `{0,1}` variable that equals 1 with probability `p`.
    pub fn bernoulli(p: T) -> Result<Self> {
        check_probability(p, "p")?;
        Self::new(vec![T::one() - p, p])
    }

    #[inline]
    pub fn alphabet_size(&self) -> usize {
        self.probs.len()
    }

    #[inline]
    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    #[inline]
    pub fn get(&self, i: usize) -> T {
        self.probs[i]
    }

    pub fn is_uniform(&self) -> bool {
        let u = T::one() / T::from_usize_lossy(self.probs.len());
        self.probs.iter().all(|&p| (p - u).abs() <= T::tolerance())
    }

    /// Largest absolute entrywise difference to `other`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.probs
            .iter()
            .zip(&other.probs)
            .fold(T::zero(), |acc, (&a, &b)| acc.max((a - b).abs()))
    }
}

impl<T: Real> TryFrom<Vec<T>> for Pmf<T> {
    type Error = Error;
    fn try_from(v: Vec<T>) -> Result<Self> {
        Self::new(v)
    }
}

impl<T> From<Pmf<T>> for Vec<T> {
    fn from(p: Pmf<T>) -> Self {
        p.probs
    }
}

pub(crate) fn check_probability<T: Real>(p: T, name: &str) -> Result<()> {
    if p.is_finite() && p >= T::zero() && p <= T::one() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} = {p} is not in [0, 1]")))
    }
}

/// Discrete memoryless channel `P(y|x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dmc<T> {
    input_size: usize,
    output_size: usize,
    rows: Vec<Pmf<T>>,
}

impl<T: Real> Dmc<T> {
    pub fn new(rows: Vec<Pmf<T>>) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(Error::DimensionMismatch("channel with no inputs".into()));
        };
        let output_size = first.alphabet_size();
        if rows.iter().any(|r| r.alphabet_size() != output_size) {
            return Err(Error::DimensionMismatch("rows have different output alphabets".into()));
        }
        Ok(Self {
            input_size: rows.len(),
            output_size,
            rows,
        })
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        Self::new(rows.into_iter().map(Pmf::new).collect::<Result<_>>()?)
    }

    /// Binary symmetric channel with crossover `delta`.
    pub fn bsc(delta: T) -> Result<Self> {
        check_probability(delta, "delta")?;
        Self::from_rows(vec![vec![T::one() - delta, delta], vec![delta, T::one() - delta]])
    }

    #[inline]
    pub fn input_size(&self) -> usize {
        self.input_size
    }

    #[inline]
    pub fn output_size(&self) -> usize {
        self.output_size
    }

    #[inline]
    pub fn rows(&self) -> &[Pmf<T>] {
        &self.rows
    }

    #[inline]
    pub fn prob(&self, y: usize, x: usize) -> T {
        self.rows[x].get(y)
    }

    /// True when all rows are permutations of one another and all columns are
    /// permutations of one another. The uniform input maximizes `E_0` for such
    /// channels.
    pub fn is_symmetric(&self) -> bool {
        let sorted = |mut v: Vec<T>| {
            v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
            v
        };
        let same = |a: &[T], b: &[T]| a.iter().zip(b).all(|(&x, &y)| (x - y).abs() <= T::tolerance());
        let row0 = sorted(self.rows[0].probs().to_vec());
        let rows_ok = self.rows.iter().all(|r| same(&row0, &sorted(r.probs().to_vec())));
        let column = |y: usize| sorted(self.rows.iter().map(|r| r.get(y)).collect());
        let col0 = column(0);
        rows_ok && (0..self.output_size).all(|y| same(&col0, &column(y)))
    }
}

/// Two-user discrete memoryless MAC `P(y|x1,x2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mac2<T> {
    input1_size: usize,
    input2_size: usize,
    output_size: usize,
    table: Vec<Pmf<T>>,
}

impl<T: Real> Mac2<T> {
    /// `slices[x1][x2]` is the output law for the input pair `(x1, x2)`.
    pub fn new(slices: Vec<Vec<Pmf<T>>>) -> Result<Self> {
        let input1_size = slices.len();
        let input2_size = slices.first().map_or(0, Vec::len);
        if input1_size == 0 || input2_size == 0 {
            return Err(Error::DimensionMismatch("MAC with an empty input alphabet".into()));
        }
        if slices.iter().any(|s| s.len() != input2_size) {
            return Err(Error::DimensionMismatch("ragged input-pair table".into()));
        }
        let output_size = slices[0][0].alphabet_size();
        let table: Vec<Pmf<T>> = slices.into_iter().flatten().collect();
        if table.iter().any(|p| p.alphabet_size() != output_size) {
            return Err(Error::DimensionMismatch("slices have different output alphabets".into()));
        }
        Ok(Self {
            input1_size,
            input2_size,
            output_size,
            table,
        })
    }

    pub fn from_nested(probs: Vec<Vec<Vec<T>>>) -> Result<Self> {
        let slices = probs
            .into_iter()
            .map(|row| row.into_iter().map(Pmf::new).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Self::new(slices)
    }

    #[inline]
    pub fn input1_size(&self) -> usize {
        self.input1_size
    }

    #[inline]
    pub fn input2_size(&self) -> usize {
        self.input2_size
    }

    #[inline]
    pub fn output_size(&self) -> usize {
        self.output_size
    }

    #[inline]
    pub fn slice(&self, x1: usize, x2: usize) -> &Pmf<T> {
        &self.table[x1 * self.input2_size + x2]
    }

    #[inline]
    pub fn prob(&self, y: usize, x1: usize, x2: usize) -> T {
        self.slice(x1, x2).get(y)
    }

    /// Single-user channel whose input is the pair `(x1, x2)`, flattened as
    /// `x1 * |X2| + x2`.
    pub fn product_input_dmc(&self) -> Dmc<T> {
        Dmc {
            input_size: self.input1_size * self.input2_size,
            output_size: self.output_size,
            rows: self.table.clone(),
        }
    }

    /// Channel seen by user `user` (1 or 2) when the decoder knows the other
    /// user's symbol, drawn from `other_input`. Output `(y, x_other)` is
    /// flattened as `x_other * |Y| + y`.
    pub fn side_information_dmc(&self, user: usize, other_input: &Pmf<T>) -> Result<Dmc<T>> {
        let (own, other) = match user {
            1 => (self.input1_size, self.input2_size),
            2 => (self.input2_size, self.input1_size),
            _ => return Err(Error::Domain(format!("user index {user} is not 1 or 2"))),
        };
        if other_input.alphabet_size() != other {
            return Err(Error::DimensionMismatch(format!(
                "other user's input law has {} symbols, expected {other}",
                other_input.alphabet_size()
            )));
        }
        let ny = self.output_size;
        let rows = (0..own)
            .map(|x| {
                let mut row = vec![T::zero(); other * ny];
                for xo in 0..other {
                    let slice = if user == 1 { self.slice(x, xo) } else { self.slice(xo, x) };
                    for y in 0..ny {
                        row[xo * ny + y] = other_input.get(xo) * slice.get(y);
                    }
                }
                Pmf { probs: row }
            })
            .collect();
        Ok(Dmc {
            input_size: own,
            output_size: other * ny,
            rows,
        })
    }
}

/// `Y = X ⊕ N` over `Z_m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct AdditiveNoiseChannel<T> {
    noise: Pmf<T>,
}

impl<T: Real> AdditiveNoiseChannel<T> {
    pub fn new(noise: Pmf<T>) -> Self {
        Self { noise }
    }

    #[inline]
    pub fn modulus(&self) -> usize {
        self.noise.alphabet_size()
    }

    #[inline]
    pub fn noise(&self) -> &Pmf<T> {
        &self.noise
    }

    /// Transition matrix `P(y|x) = noise[y ⊖ x]`.
    pub fn to_dmc(&self) -> Dmc<T> {
        let m = self.modulus();
        let rows = (0..m)
            .map(|x| Pmf {
                probs: (0..m).map(|y| self.noise.get((y + m - x) % m)).collect(),
            })
            .collect();
        Dmc {
            input_size: m,
            output_size: m,
            rows,
        }
    }
}

/// The additive MAC `Y = X1 ⊕ X2 ⊕ N` over `Z_m`.
pub fn mac_from_additive_noise<T: Real>(noise: &Pmf<T>) -> Mac2<T> {
    let m = noise.alphabet_size();
    let mut table = Vec::with_capacity(m * m);
    for x1 in 0..m {
        for x2 in 0..m {
            let shift = (x1 + x2) % m;
            table.push(Pmf {
                probs: (0..m).map(|y| noise.get((y + 2 * m - shift) % m)).collect(),
            });
        }
    }
    Mac2 {
        input1_size: m,
        input2_size: m,
        output_size: m,
        table,
    }
}

/// Largest deviation of any `(x1, x2)` slice from the `(0, 0)` slice shifted by
/// `x1 ⊕ x2`. `None` when the alphabets are not all equal.
pub fn additivity_deviation<T: Real>(mac: &Mac2<T>) -> Option<T> {
    let m = mac.output_size;
    if mac.input1_size != m || mac.input2_size != m {
        return None;
    }
    let base = mac.slice(0, 0);
    let mut dev = T::zero();
    for x1 in 0..m {
        for x2 in 0..m {
            let s = mac.slice(x1, x2);
            let shift = (x1 + x2) % m;
            for y in 0..m {
                dev = dev.max((s.get(y) - base.get((y + m - shift) % m)).abs());
            }
        }
    }
    Some(dev)
}

/// Recover the noise law of an additive MAC.
pub fn associated_single_user<T: Real>(mac: &Mac2<T>) -> Result<AdditiveNoiseChannel<T>> {
    let dev = additivity_deviation(mac).ok_or_else(|| {
        Error::DimensionMismatch("additive MAC needs equal input and output alphabets".into())
    })?;
    if dev > T::tolerance() {
        return Err(Error::NotAdditive { deviation: dev.as_f64() });
    }
    Ok(AdditiveNoiseChannel::new(mac.slice(0, 0).clone()))
}

/// Binary MAC `Y = X1 ⊕ X2 ⊕ Z` with `Z = Z1 ⊕ 1{X1 ≠ X2}·Z2`,
/// `Z1 ~ Bernoulli(q)`, `Z2 ~ Bernoulli(p)`.
pub fn binary_example_channel<T: Real>(q: T, p: T) -> Result<Mac2<T>> {
    check_probability(q, "q")?;
    check_probability(p, "p")?;
    let flip_equal = q;
    let flip_differ = q * (T::one() - p) + p * (T::one() - q);
    let mut table = Vec::with_capacity(4);
    for x1 in 0..2usize {
        for x2 in 0..2usize {
            let z1 = if x1 == x2 { flip_equal } else { flip_differ };
            let clean = x1 ^ x2;
            let mut probs = vec![T::zero(); 2];
            probs[clean] = T::one() - z1;
            probs[1 - clean] = z1;
            table.push(Pmf { probs });
        }
    }
    Ok(Mac2 {
        input1_size: 2,
        input2_size: 2,
        output_size: 2,
        table,
    })
}

/// Any of the channel kinds accepted on the JSON boundary.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelModel<T> {
    Additive(AdditiveNoiseChannel<T>),
    Dmc(Dmc<T>),
    Mac2(Mac2<T>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    Additive,
    Mac2,
    Dmc,
}

/// JSON document: `{"m": .., "kind": .., "probs": ..}`.
///
/// `m` is the output alphabet size. `probs` is the noise vector for
/// `additive`, `probs[x][y]` for `dmc` and `probs[x1][x2][y]` for `mac2`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelDocument {
    pub m: usize,
    pub kind: ChannelKind,
    pub probs: Value,
}

impl<T: Real> ChannelModel<T> {
    pub fn kind(&self) -> ChannelKind {
        match self {
            ChannelModel::Additive(_) => ChannelKind::Additive,
            ChannelModel::Dmc(_) => ChannelKind::Dmc,
            ChannelModel::Mac2(_) => ChannelKind::Mac2,
        }
    }

    pub fn to_document(&self) -> ChannelDocument {
        let f = |x: T| x.as_f64();
        let (m, probs) = match self {
            ChannelModel::Additive(a) => (a.modulus(), serde_json::json!(a.noise().probs().iter().map(|&x| f(x)).collect::<Vec<_>>())),
            ChannelModel::Dmc(d) => (
                d.output_size(),
                serde_json::json!(d.rows().iter().map(|r| r.probs().iter().map(|&x| f(x)).collect::<Vec<_>>()).collect::<Vec<_>>()),
            ),
            ChannelModel::Mac2(mac) => {
                let nested: Vec<Vec<Vec<f64>>> = (0..mac.input1_size())
                    .map(|x1| {
                        (0..mac.input2_size())
                            .map(|x2| mac.slice(x1, x2).probs().iter().map(|&x| f(x)).collect())
                            .collect()
                    })
                    .collect();
                (mac.output_size(), serde_json::json!(nested))
            }
        };
        ChannelDocument { m, kind: self.kind(), probs }
    }

    pub fn from_document(doc: &ChannelDocument) -> Result<Self> {
        let parse = |e: serde_json::Error| Error::Parse(e.to_string());
        let conv = |v: Vec<f64>| v.into_iter().map(T::lit).collect::<Vec<T>>();
        let model = match doc.kind {
            ChannelKind::Additive => {
                let v: Vec<f64> = serde_json::from_value(doc.probs.clone()).map_err(parse)?;
                ChannelModel::Additive(AdditiveNoiseChannel::new(Pmf::new(conv(v))?))
            }
            ChannelKind::Dmc => {
                let v: Vec<Vec<f64>> = serde_json::from_value(doc.probs.clone()).map_err(parse)?;
                ChannelModel::Dmc(Dmc::from_rows(v.into_iter().map(conv).collect())?)
            }
            ChannelKind::Mac2 => {
                let v: Vec<Vec<Vec<f64>>> = serde_json::from_value(doc.probs.clone()).map_err(parse)?;
                ChannelModel::Mac2(Mac2::from_nested(
                    v.into_iter().map(|r| r.into_iter().map(conv).collect()).collect(),
                )?)
            }
        };
        let out = match &model {
            ChannelModel::Additive(a) => a.modulus(),
            ChannelModel::Dmc(d) => d.output_size(),
            ChannelModel::Mac2(mc) => mc.output_size(),
        };
        if out != doc.m {
            return Err(Error::DimensionMismatch(format!("m = {} but probabilities cover {out} symbols", doc.m)));
        }
        Ok(model)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("channel document serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: ChannelDocument = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_document(&doc)
    }
}
