//! Continued fractions, convergents, Brjuno sums and noble truncations.
//!
//! A [`CFExpansion`] is a finite list of partial quotients optionally followed
//! by an infinite tail of ones. The textual form is `[a0;a1,a2,...]`, where a
//! trailing `...` stands for the all-ones tail, so `[0;1,1,...]` and `[0;...]`
//! are both the golden mean `(√5 − 1)/2`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Tail {
    /// Expansion stops after the listed partials; the value is rational.
    None,
    /// Expansion continues with `1, 1, 1, …`.
    AllOnes,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CFExpansion {
    pub a0: i64,
    pub partials: Vec<u64>,
    pub tail: Tail,
}

/// The `n`-th convergent `p/q` of an expansion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Convergent {
    pub n: usize,
    pub p: i128,
    pub q: i128,
}

impl Convergent {
    pub fn value<T: Real>(&self) -> T {
        from_i128::<T>(self.p) / from_i128::<T>(self.q)
    }
}

impl CFExpansion {
    pub fn new(a0: i64, partials: Vec<u64>, tail: Tail) -> Result<Self> {
        if partials.contains(&0) {
            return Err(Error::Precondition("partial quotients a_i (i >= 1) must be >= 1".into()));
        }
        Ok(CFExpansion { a0, partials, tail })
    }

    /// `[0; 1, 1, 1, …]`.
    pub fn golden() -> Self {
        CFExpansion { a0: 0, partials: Vec::new(), tail: Tail::AllOnes }
    }

    /// Partial quotient `a_i`, expanding the tail on demand; `None` past the
    /// end of a finite expansion.
    pub fn partial(&self, i: usize) -> Option<i128> {
        if i == 0 {
            return Some(self.a0 as i128);
        }
        match self.partials.get(i - 1) {
            Some(&a) => Some(a as i128),
            None if self.tail == Tail::AllOnes => Some(1),
            None => None,
        }
    }

    /// Number of available partials `a_1..a_m` (`None` when infinite).
    pub fn len_partials(&self) -> Option<usize> {
        match self.tail {
            Tail::None => Some(self.partials.len()),
            Tail::AllOnes => None,
        }
    }

    pub fn is_rational(&self) -> bool {
        self.tail == Tail::None
    }
}

impl FromStr for CFExpansion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let body = s
            .trim()
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .ok_or_else(|| Error::Parse(format!("continued fraction must be bracketed: {s:?}")))?;
        let (head, rest) = match body.split_once(';') {
            Some((h, r)) => (h, Some(r)),
            None => (body, None),
        };
        let a0: i64 = head.trim().parse().map_err(|_| Error::Parse(format!("bad integer part {head:?}")))?;
        let mut partials = Vec::new();
        let mut tail = Tail::None;
        if let Some(rest) = rest {
            let items: Vec<&str> = rest.split(',').map(str::trim).collect();
            for (idx, item) in items.iter().enumerate() {
                if *item == "..." {
                    if idx + 1 != items.len() {
                        return Err(Error::Parse("'...' may only end the expansion".into()));
                    }
                    tail = Tail::AllOnes;
                } else if item.is_empty() && items.len() == 1 {
                    // "[a0;]"
                } else {
                    let a: u64 = item.parse().map_err(|_| Error::Parse(format!("bad partial quotient {item:?}")))?;
                    partials.push(a);
                }
            }
        }
        CFExpansion::new(a0, partials, tail).map_err(|e| Error::Parse(e.to_string()))
    }
}

impl fmt::Display for CFExpansion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}", self.a0)?;
        let mut items: Vec<String> = self.partials.iter().map(u64::to_string).collect();
        if self.tail == Tail::AllOnes {
            items.push("...".into());
        }
        if !items.is_empty() {
            write!(f, ";{}", items.join(","))?;
        }
        write!(f, "]")
    }
}

/// Convergents `p_0/q_0 … p_{n_max}/q_{n_max}` from the standard recurrences
/// `p_n = a_n p_{n−1} + p_{n−2}`, `q_n = a_n q_{n−1} + q_{n−2}`.
/// Exact when `T` carries at least 128 mantissa bits; `p_n, q_n` leave `i64`
/// range after a few dozen large partial quotients.
fn from_i128<T: Real>(x: i128) -> T {
    let two32 = T::from_f64(4294967296.0);
    let hi = T::from_i64((x >> 64) as i64);
    let mid = T::from_i64(((x >> 32) & 0xffff_ffff) as i64);
    let lo = T::from_i64((x & 0xffff_ffff) as i64);
    (hi * two32.clone() + mid) * two32 + lo
}

pub fn convergents(cf: &CFExpansion, n_max: usize) -> Result<Vec<Convergent>> {
    let mut out = Vec::with_capacity(n_max + 1);
    let (mut p2, mut q2): (i128, i128) = (0, 1);
    let (mut p1, mut q1): (i128, i128) = (1, 0);
    for n in 0..=n_max {
        let a = cf.partial(n).ok_or_else(|| {
            Error::Precondition(format!(
                "convergent index {n} requested but {cf} has only {} partial quotients",
                cf.partials.len()
            ))
        })?;
        let p = a.checked_mul(p1).and_then(|x| x.checked_add(p2)).ok_or(Error::Range("convergents"))?;
        let q = a.checked_mul(q1).and_then(|x| x.checked_add(q2)).ok_or(Error::Range("convergents"))?;
        out.push(Convergent { n, p, q });
        (p2, q2, p1, q1) = (p1, q1, p, q);
    }
    Ok(out)
}

/// The golden tail value `g = (√5 − 1)/2 = [0; 1, 1, …]`.
pub fn golden_tail<T: Real>() -> T {
    (T::from_f64(5.0).sqrt() - T::one()) / T::from_f64(2.0)
}

/// Value of the expansion, evaluated by the backward recurrence
/// `x ← 1/(a_i + x)` starting from the tail value.
pub fn cf_value<T: Real>(cf: &CFExpansion) -> T {
    let mut x = match cf.tail {
        Tail::AllOnes => golden_tail::<T>(),
        Tail::None => T::zero(),
    };
    for &a in cf.partials.iter().rev() {
        x = T::one() / (T::from_i64(a as i64) + x);
    }
    T::from_i64(cf.a0) + x
}

/// Partial Brjuno-type sum `Σ_{n=0}^{N} log(q_{n+1}) / q_n` with a rigorous
/// tail bound when one is available.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BrjunoSum {
    pub partial_sum: f64,
    /// Upper bound on `Σ_{n>N}`; `None` when the expansion is not of bounded
    /// type or the bound's monotonicity hypothesis (`q_{N+1} ≥ 2`) fails.
    pub tail_bound: Option<f64>,
}

pub fn brjuno_sum(cf: &CFExpansion, n: usize) -> Result<BrjunoSum> {
    let conv = convergents(cf, n + 1)?;
    let partial_sum = conv.windows(2).map(|w| (w[1].q as f64).ln() / w[0].q as f64).sum();
    let tail_bound = match is_bounded_type(cf) {
        BoundedType { bounded: true, bound: Some(a_max), .. } => {
            let next = convergents(cf, n + 2)?;
            let (q1, q2) = (next[n + 1].q as f64, next[n + 2].q as f64);
            geometric_tail(a_max as f64, q1, q2)
        }
        _ => None,
    };
    Ok(BrjunoSum { partial_sum, tail_bound })
}

/// Tail estimate for `Σ_{n>N} log(q_{n+1})/q_n`, using
/// `log q_{n+1} ≤ log(A+1) + log q_n` and `q_{n+2} ≥ 2 q_n`: splitting the
/// tail by parity gives two sums `Σ_j (c + log(2^j Q))/(2^j Q)`, each at most
/// `2(c + log Q + log 2)/Q` once `x ↦ (c + log x)/x` is decreasing.
fn geometric_tail(a_max: f64, q_next: f64, q_next2: f64) -> Option<f64> {
    if q_next < 2.0 {
        return None;
    }
    let c = (a_max + 1.0).ln();
    let piece = |q: f64| 2.0 * (c + q.ln() + std::f64::consts::LN_2) / q;
    Some(piece(q_next) + piece(q_next2))
}

/// `[a_0; a_1, …, a_n, 1, 1, …]`. With `n = 0` the result is `[a_0; 1, 1, …]`,
/// whose value is `a_0 + g`.
pub fn noble_truncate(cf: &CFExpansion, n: usize) -> Result<CFExpansion> {
    let mut partials = Vec::with_capacity(n);
    for i in 1..=n {
        let a = cf.partial(i).ok_or_else(|| {
            Error::Precondition(format!("noble truncation at {n} needs {n} partials, {cf} has fewer"))
        })?;
        partials.push(a as u64);
    }
    // Strip trailing ones: they merge into the tail and keep the literal canonical.
    while partials.last() == Some(&1) {
        partials.pop();
    }
    Ok(CFExpansion { a0: cf.a0, partials, tail: Tail::AllOnes })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundedType {
    pub bounded: bool,
    /// Largest partial quotient `A` (over `i ≥ 1`) when bounded.
    pub bound: Option<u64>,
    pub rational: bool,
}

pub fn is_bounded_type(cf: &CFExpansion) -> BoundedType {
    match cf.tail {
        Tail::AllOnes => BoundedType {
            bounded: true,
            bound: Some(cf.partials.iter().copied().max().unwrap_or(1).max(1)),
            rational: false,
        },
        Tail::None => BoundedType { bounded: false, bound: None, rational: true },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::XReal;
    use num_traits::One;

    fn cf(s: &str) -> CFExpansion {
        s.parse().unwrap()
    }

    fn silver_like(len: usize) -> CFExpansion {
        CFExpansion::new(0, vec![2; len], Tail::None).unwrap()
    }

    #[test]
    fn parse_and_display() {
        let g = cf("[0;1,1,...]");
        assert_eq!(g.tail, Tail::AllOnes);
        assert_eq!(g.partials, vec![1, 1]);
        assert_eq!(cf("[0;...]"), CFExpansion::golden());
        assert_eq!(cf("[0;3]").to_string(), "[0;3]");
        assert_eq!(cf("[2]").partials.len(), 0);
        assert_eq!(cf(" [0; 2, 5 , ...] ").to_string(), "[0;2,5,...]");
        assert!("[0;1,...,2]".parse::<CFExpansion>().is_err());
        assert!("[0;0,1]".parse::<CFExpansion>().is_err());
        assert!("0;1".parse::<CFExpansion>().is_err());
    }

    #[test]
    fn fibonacci_denominators() {
        let q: Vec<i128> = convergents(&CFExpansion::golden(), 6).unwrap().iter().map(|c| c.q).collect();
        assert_eq!(q, vec![1, 1, 2, 3, 5, 8, 13]);
    }

    #[test]
    fn silver_convergents_by_hand() {
        let c = convergents(&cf("[0;2,2,2,2,2,2]"), 3).unwrap();
        let pq: Vec<(i128, i128)> = c.iter().map(|c| (c.p, c.q)).collect();
        assert_eq!(pq, vec![(0, 1), (1, 2), (2, 5), (5, 12)]);
    }

    #[test]
    fn finite_expansion_runs_out() {
        let c = convergents(&cf("[0;3]"), 1).unwrap();
        assert_eq!((c[1].p, c[1].q), (1, 3));
        assert!(matches!(convergents(&cf("[0;3]"), 2), Err(Error::Precondition(_))));
    }

    #[test]
    fn values_closed_forms() {
        let g: f64 = cf_value(&CFExpansion::golden());
        assert!((g - 0.618_033_988_749_89).abs() < 1e-14);
        let v: f64 = cf_value(&cf("[0;2,...]"));
        assert!((v - 0.381_966_011_25).abs() < 1e-11);
        assert!((v - g * g).abs() < 1e-15);
        let third: XReal = cf_value(&cf("[0;3]"));
        assert_eq!(third, XReal::one() / XReal::from_f64(3.0));
    }

    #[test]
    fn value_matches_mobius_form() {
        let e = cf("[0;3,1,4,1,5,9,2,6,...]");
        let c = convergents(&e, 8).unwrap();
        // The complete quotient after a_m is [1; 1, 1, …] = 1/g.
        let g: XReal = XReal::one() / golden_tail::<XReal>();
        let (pm, pm1) = (XReal::from_i64(c[8].p as i64), XReal::from_i64(c[7].p as i64));
        let (qm, qm1) = (XReal::from_i64(c[8].q as i64), XReal::from_i64(c[7].q as i64));
        let mobius = (pm * g.clone() + pm1) / (qm * g + qm1);
        let direct: XReal = cf_value(&e);
        let tol = XReal::from_f64(XReal::unit_roundoff() * 256.0);
        assert!((mobius - direct).abs() <= tol);
    }

    #[test]
    fn noble_truncations() {
        assert_eq!(noble_truncate(&CFExpansion::golden(), 7).unwrap(), CFExpansion::golden());
        let t = noble_truncate(&silver_like(20), 1).unwrap();
        assert_eq!(t.to_string(), "[0;2,...]");
        let v: f64 = cf_value(&t);
        assert!((v - 0.381_966).abs() < 1e-6);
        let s: f64 = cf_value(&silver_like(30));
        assert!((s - (2f64.sqrt() - 1.0)).abs() < 1e-15);
        let base = noble_truncate(&cf("[0;5,2,...]"), 0).unwrap();
        assert_eq!(base, CFExpansion::golden());
        assert!(noble_truncate(&cf("[0;3]"), 2).is_err());
    }

    #[test]
    fn bounded_type_flags() {
        assert_eq!(is_bounded_type(&CFExpansion::golden()).bound, Some(1));
        assert_eq!(is_bounded_type(&cf("[0;2,...]")).bound, Some(2));
        let fin = is_bounded_type(&cf("[0;3]"));
        assert!(!fin.bounded && fin.rational);
    }

    #[test]
    fn golden_brjuno_sum_stabilizes() {
        let g = CFExpansion::golden();
        let s15 = brjuno_sum(&g, 15).unwrap();
        let s20 = brjuno_sum(&g, 20).unwrap();
        let conv = convergents(&g, 21).unwrap();
        let slack: f64 = (16..=20).map(|n| (conv[n + 1].q as f64).ln() / conv[n].q as f64).sum();
        assert!(s20.partial_sum >= s15.partial_sum);
        assert!((s20.partial_sum - s15.partial_sum) <= slack + 1e-15);
        // The tail bound after 15 must cover what terms 16..20 actually add.
        assert!(s15.tail_bound.unwrap() >= s20.partial_sum - s15.partial_sum);
        // A long direct summation stays within the bound as well.
        let s60 = brjuno_sum(&g, 60).unwrap();
        assert!(s60.partial_sum - s20.partial_sum <= s20.tail_bound.unwrap());
        assert!(brjuno_sum(&cf("[0;3,4,5]"), 1).unwrap().tail_bound.is_none());
    }

    #[test]
    fn spike_in_partial_quotients() {
        // a_5 = 10^6: the term log(q_5)/q_4 picks up log(10^6 q_4)/q_4 (up to q_3 ≪ 10^6 q_4).
        let base = cf("[0;1,1,1,1,1,...]");
        let spiked = cf("[0;1,1,1,1,1000000,...]");
        let q4 = convergents(&base, 4).unwrap()[4].q as f64;
        let jump = brjuno_sum(&spiked, 4).unwrap().partial_sum - brjuno_sum(&base, 3).unwrap().partial_sum;
        let expected = (1e6 * q4).ln() / q4;
        assert!((jump - expected).abs() < 1e-5, "{jump} vs {expected}");
    }
}
