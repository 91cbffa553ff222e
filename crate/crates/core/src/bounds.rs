//! Exact rate and packet-number lower bounds, the JCM baseline parameters,
//! and comparisons of concrete arrays against both.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::array::Dpda;

/// A reduced fraction with positive denominator.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(BigRational);

impl Rational {
    /// # Panics
    /// Panics if `den` is zero.
    pub fn new(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Self {
        Rational(BigRational::new(num.into(), den.into()))
    }

    pub fn integer(n: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn abs_diff(&self, other: &Rational) -> Rational {
        let d = &self.0 - &other.0;
        Rational(if d < BigRational::zero() { -d } else { d })
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoundsError {
    #[error("Z must satisfy 1 <= Z <= F (got F={f}, Z={z})")]
    ZRange { f: usize, z: usize },
    #[error("no packet-number bound is known for Z/F = {ratio} with K={k}")]
    Unsupported { k: usize, ratio: String },
    #[error("the (K-2)/K bound needs K >= 3, got K={0}")]
    SmallK(usize),
    #[error("JCM parameters need 1 <= t < K, got K={k}, t={t}")]
    JcmRange { k: usize, t: usize },
    #[error("Z/F = {z}/{f} is not of the form t/K for K={k}")]
    NotJcmRatio { k: usize, f: usize, z: usize },
}

/// The memory ratios `Z/F` for which packet-number bounds are known.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum MemoryCase {
    #[serde(rename = "1/K")]
    OneOverK,
    #[serde(rename = "2/K")]
    TwoOverK,
    #[serde(rename = "(K-2)/K")]
    KMinusTwoOverK,
    #[serde(rename = "(K-1)/K")]
    KMinusOneOverK,
    #[serde(rename = "general")]
    General,
}

impl MemoryCase {
    /// Numerator `t` of `Z/F = t/K`, when the case names one.
    pub fn numerator(self, k: usize) -> Option<usize> {
        match self {
            MemoryCase::OneOverK => Some(1),
            MemoryCase::TwoOverK => Some(2),
            MemoryCase::KMinusTwoOverK => k.checked_sub(2),
            MemoryCase::KMinusOneOverK => k.checked_sub(1),
            MemoryCase::General => None,
        }
    }

    /// Classifies `Z/F` for `K` users. When several cases coincide (e.g. `2/K`
    /// and `(K−1)/K` at `K = 3`) every bound applies, so the case with the
    /// largest packet-number bound wins; ties resolve in declaration order.
    pub fn classify(k: usize, f: usize, z: usize) -> MemoryCase {
        let mut best: Option<(MemoryCase, BigUint)> = None;
        for c in [
            MemoryCase::OneOverK,
            MemoryCase::TwoOverK,
            MemoryCase::KMinusTwoOverK,
            MemoryCase::KMinusOneOverK,
        ] {
            if !c.numerator(k).is_some_and(|t| t > 0 && z * k == t * f) {
                continue;
            }
            let Ok(bound) = min_f_bound(k, c) else {
                continue;
            };
            if best.as_ref().is_none_or(|(_, b)| bound > *b) {
                best = Some((c, bound));
            }
        }
        best.map_or(MemoryCase::General, |(c, _)| c)
    }
}

impl fmt::Display for MemoryCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MemoryCase::OneOverK => "1/K",
            MemoryCase::TwoOverK => "2/K",
            MemoryCase::KMinusTwoOverK => "(K-2)/K",
            MemoryCase::KMinusOneOverK => "(K-1)/K",
            MemoryCase::General => "general",
        })
    }
}

impl std::str::FromStr for MemoryCase {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.replace(' ', "").as_str() {
            "1/K" => Ok(MemoryCase::OneOverK),
            "2/K" => Ok(MemoryCase::TwoOverK),
            "(K-2)/K" | "K-2/K" => Ok(MemoryCase::KMinusTwoOverK),
            "(K-1)/K" | "K-1/K" => Ok(MemoryCase::KMinusOneOverK),
            "general" => Ok(MemoryCase::General),
            other => Err(format!("unknown memory case {other:?}")),
        }
    }
}

/// `C(n, k)` with arbitrary precision.
pub fn binomial_big(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// Minimum rate `F/Z − 1` of any array with these `F` and `Z`.
pub fn rate_lower_bound(f: usize, z: usize) -> Result<Rational, BoundsError> {
    if z == 0 || z > f {
        return Err(BoundsError::ZRange { f, z });
    }
    Ok(Rational::new(f - z, z))
}

/// Smallest `F` compatible with minimal rate at the given memory ratio.
pub fn min_f_bound(k: usize, case: MemoryCase) -> Result<BigUint, BoundsError> {
    let kb = BigUint::from(k);
    match case {
        MemoryCase::OneOverK => Ok(kb),
        MemoryCase::TwoOverK => Ok((&kb * &kb).div_ceil(&BigUint::from(4u32))),
        MemoryCase::KMinusTwoOverK => {
            if k < 3 {
                return Err(BoundsError::SmallK(k));
            }
            let prod = &kb * BigUint::from(k - 2);
            Ok(if k % 2 == 1 { prod } else { prod / 2u32 })
        }
        MemoryCase::KMinusOneOverK => Ok(&kb * BigUint::from(k.saturating_sub(1))),
        MemoryCase::General => Err(BoundsError::Unsupported {
            k,
            ratio: "general".into(),
        }),
    }
}

/// Whether the packet-number bound for the case can be met at all. The
/// `2/K` bound `K²/4` is only reachable for even `K`.
pub fn f_bound_achievable(k: usize, case: MemoryCase) -> bool {
    !(case == MemoryCase::TwoOverK && k % 2 == 1)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct JcmParams {
    pub k: usize,
    pub t: usize,
    #[serde(serialize_with = "ser_big")]
    pub f: BigUint,
    #[serde(serialize_with = "ser_big")]
    pub z: BigUint,
    #[serde(serialize_with = "ser_big")]
    pub s: BigUint,
    pub rate: Rational,
}

fn ser_big<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

fn ser_opt_big<S: Serializer>(v: &Option<BigUint>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.collect_str(v),
        None => s.serialize_str("not covered"),
    }
}

/// Parameters of the JCM array for `K` users and `t = KM/N`.
pub fn jcm_params(k: usize, t: usize) -> Result<JcmParams, BoundsError> {
    if t == 0 || t >= k {
        return Err(BoundsError::JcmRange { k, t });
    }
    Ok(JcmParams {
        k,
        t,
        f: BigUint::from(t) * binomial_big(k, t),
        z: BigUint::from(t) * binomial_big(k - 1, t - 1),
        s: BigUint::from(t + 1) * binomial_big(k, t + 1),
        rate: Rational::new(k - t, t),
    })
}

/// Bounds for `K` users at memory ratio `Z/F`, optionally evaluated against
/// a concrete array.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundsReport {
    pub k: usize,
    pub case: MemoryCase,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub memory_ratio: Option<Rational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate_lower_bound: Option<Rational>,
    #[serde(serialize_with = "ser_opt_big")]
    pub f_lower_bound: Option<BigUint>,
    pub f_bound_achievable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub achieved: Option<Achieved>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Achieved {
    pub rate: Rational,
    pub f: usize,
    pub meets_rate_bound: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub meets_f_bound: Option<bool>,
}

impl BoundsReport {
    /// Report for a memory case alone.
    pub fn for_case(k: usize, case: MemoryCase) -> Result<Self, BoundsError> {
        let f_lower_bound = Some(min_f_bound(k, case)?);
        let memory_ratio = case.numerator(k).map(|t| Rational::new(t, k));
        let rate_lower_bound = case
            .numerator(k)
            .filter(|&t| t > 0)
            .map(|t| Rational::new(k - t, t));
        Ok(BoundsReport {
            k,
            case,
            memory_ratio,
            rate_lower_bound,
            f_lower_bound,
            f_bound_achievable: f_bound_achievable(k, case),
            achieved: None,
        })
    }

    /// Report for an array, classifying its memory ratio.
    pub fn for_array(p: &Dpda) -> Result<Self, BoundsError> {
        let (k, f, z) = (p.k(), p.f(), p.z());
        let case = MemoryCase::classify(k, f, z);
        let rate_bound = rate_lower_bound(f, z)?;
        let f_lower_bound = min_f_bound(k, case).ok();
        let rate = Rational::new(p.s(), p.lp() * f);
        let achieved = Achieved {
            meets_rate_bound: rate == rate_bound,
            meets_f_bound: f_lower_bound.as_ref().map(|b| BigUint::from(f) == *b),
            rate,
            f,
        };
        Ok(BoundsReport {
            k,
            case,
            memory_ratio: Some(Rational::new(z, f)),
            rate_lower_bound: Some(rate_bound),
            f_lower_bound,
            f_bound_achievable: f_bound_achievable(k, case),
            achieved: Some(achieved),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serializable")
    }

    /// Two-column aligned text table.
    pub fn to_table(&self) -> String {
        let mut rows: Vec<(String, String)> = vec![
            ("K".into(), self.k.to_string()),
            ("case".into(), self.case.to_string()),
        ];
        if let Some(r) = &self.memory_ratio {
            rows.push(("Z/F".into(), r.to_string()));
        }
        if let Some(r) = &self.rate_lower_bound {
            rows.push(("rate_lower_bound".into(), r.to_string()));
        }
        rows.push((
            "f_lower_bound".into(),
            self.f_lower_bound
                .as_ref()
                .map_or("not covered".into(), |b| b.to_string()),
        ));
        rows.push((
            "f_bound_achievable".into(),
            self.f_bound_achievable.to_string(),
        ));
        if let Some(a) = &self.achieved {
            rows.push(("achieved_rate".into(), a.rate.to_string()));
            rows.push(("achieved_f".into(), a.f.to_string()));
            rows.push(("meets_rate_bound".into(), a.meets_rate_bound.to_string()));
            rows.push((
                "meets_f_bound".into(),
                a.meets_f_bound.map_or("n/a".into(), |b| b.to_string()),
            ));
        }
        table(&rows)
    }
}

fn table(rows: &[(String, String)]) -> String {
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    rows.iter()
        .map(|(k, v)| format!("{k:<width$}  {v}\n"))
        .collect()
}

/// Packet number of an array against JCM at the same `K` and `Z/F`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct JcmComparison {
    pub k: usize,
    pub t: usize,
    pub f: usize,
    #[serde(serialize_with = "ser_big")]
    pub jcm_f: BigUint,
    /// `F / F_JCM`.
    pub ratio: Rational,
    pub rate: Rational,
    pub jcm_rate: Rational,
}

impl JcmComparison {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("comparison is serializable")
    }

    pub fn to_table(&self) -> String {
        table(&[
            ("K".into(), self.k.to_string()),
            ("t".into(), self.t.to_string()),
            ("F".into(), self.f.to_string()),
            ("jcm_F".into(), self.jcm_f.to_string()),
            ("ratio".into(), self.ratio.to_string()),
            ("rate".into(), self.rate.to_string()),
            ("jcm_rate".into(), self.jcm_rate.to_string()),
        ])
    }
}

pub fn compare_to_jcm(p: &Dpda) -> Result<JcmComparison, BoundsError> {
    let (k, f, z) = (p.k(), p.f(), p.z());
    if (k * z) % f != 0 {
        return Err(BoundsError::NotJcmRatio { k, f, z });
    }
    let t = k * z / f;
    let jcm = jcm_params(k, t).map_err(|_| BoundsError::NotJcmRatio { k, f, z })?;
    let ratio = Rational(BigRational::new(
        BigInt::from(f),
        BigInt::from(jcm.f.clone()),
    ));
    Ok(JcmComparison {
        k,
        t,
        f,
        jcm_f: jcm.f,
        ratio,
        rate: Rational::new(p.s(), p.lp() * f),
        jcm_rate: jcm.rate,
    })
}
