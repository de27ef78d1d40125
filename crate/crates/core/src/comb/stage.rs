//! Stage-indexed utility expressions and their comparison for all stages.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use crate::utility::Utility;

/// A utility as a function of a round index `n ≥ 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StageExpr {
    Const(Utility),
    /// `base + slope·n`
    Affine(Utility, Utility),
    /// `coeff·2^(rate·n + offset) + shift`
    Geo {
        coeff: Utility,
        rate: u64,
        offset: i64,
        shift: Utility,
    },
}

impl StageExpr {
    pub fn constant(q: impl Into<Utility>) -> Self {
        StageExpr::Const(q.into())
    }

    pub fn affine(base: impl Into<Utility>, slope: impl Into<Utility>) -> Self {
        StageExpr::Affine(base.into(), slope.into())
    }

    /// `2^(rate·n + offset)`
    pub fn pow2(rate: u64, offset: i64) -> Self {
        StageExpr::Geo {
            coeff: Utility::one(),
            rate,
            offset,
            shift: Utility::zero(),
        }
    }

    pub fn eval(&self, n: u64) -> Utility {
        match self {
            StageExpr::Const(q) => q.clone(),
            StageExpr::Affine(b, s) => b + &(s * &Utility::from_int(n as i64)),
            StageExpr::Geo {
                coeff,
                rate,
                offset,
                shift,
            } => {
                let e = (*rate as i64) * (n as i64) + offset;
                &(coeff * &Utility::pow2(e)) + shift
            }
        }
    }

    /// Rewrites `n ↦ alpha + beta·k`, giving an expression in `k`.
    pub fn substitute(&self, alpha: u64, beta: u64) -> StageExpr {
        match self {
            StageExpr::Const(_) => self.clone(),
            StageExpr::Affine(b, s) => {
                let base = b + &(s * &Utility::from_int(alpha as i64));
                let slope = s * &Utility::from_int(beta as i64);
                StageExpr::Affine(base, slope)
            }
            StageExpr::Geo {
                coeff,
                rate,
                offset,
                shift,
            } => StageExpr::Geo {
                coeff: coeff.clone(),
                rate: rate * beta,
                offset: offset + (*rate as i64) * (alpha as i64),
                shift: shift.clone(),
            },
        }
    }

    /// The expression takes one value at every stage.
    pub fn is_constant(&self) -> bool {
        match self {
            StageExpr::Const(_) => true,
            StageExpr::Affine(_, s) => s.is_zero(),
            StageExpr::Geo { coeff, rate, .. } => coeff.is_zero() || *rate == 0,
        }
    }

    fn to_poly(&self) -> ExpPoly {
        let mut p = ExpPoly::default();
        match self {
            StageExpr::Const(q) => p.constant = q.clone(),
            StageExpr::Affine(b, s) => {
                p.constant = b.clone();
                p.linear = s.clone();
            }
            StageExpr::Geo {
                coeff,
                rate,
                offset,
                shift,
            } => {
                let c = coeff * &Utility::pow2(*offset);
                p.constant = shift.clone();
                if *rate == 0 {
                    p.constant = &p.constant + &c;
                } else if !c.is_zero() {
                    p.exp.insert(*rate, c);
                }
            }
        }
        p
    }
}

impl fmt::Display for StageExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StageExpr::Const(q) => write!(f, "{q}"),
            StageExpr::Affine(b, s) => {
                if s.is_zero() {
                    write!(f, "{b}")
                } else if b.is_zero() {
                    write!(f, "{s}k")
                } else if s.is_negative() {
                    write!(f, "{b} - {}k", s.abs())
                } else {
                    write!(f, "{b} + {s}k")
                }
            }
            StageExpr::Geo {
                coeff,
                rate,
                offset,
                shift,
            } => {
                if *coeff != Utility::one() {
                    write!(f, "{coeff}·")?;
                }
                match (*rate, *offset) {
                    (0, o) => write!(f, "2^{o}")?,
                    (r, 0) => write!(f, "2^({r}k)")?,
                    (r, o) if o < 0 => write!(f, "2^({r}k - {})", -o)?,
                    (r, o) => write!(f, "2^({r}k + {o})")?,
                }
                if !shift.is_zero() {
                    if shift.is_negative() {
                        write!(f, " - {}", shift.abs())?;
                    } else {
                        write!(f, " + {shift}")?;
                    }
                }
                Ok(())
            }
        }
    }
}

/// Outcome of deciding `lhs ≥ rhs` for every `n ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForAllVerdict {
    /// `lhs ≥ rhs` everywhere, with equality somewhere.
    AlwaysGE,
    AlwaysGT,
    AlwaysEQ,
    /// Least `n` with `lhs < rhs`.
    FailsAt(u64),
}

impl ForAllVerdict {
    pub fn holds(self) -> bool {
        !matches!(self, ForAllVerdict::FailsAt(_))
    }
}

impl fmt::Display for ForAllVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ForAllVerdict::AlwaysGE => f.write_str("always ≥"),
            ForAllVerdict::AlwaysGT => f.write_str("always >"),
            ForAllVerdict::AlwaysEQ => f.write_str("always ="),
            ForAllVerdict::FailsAt(n) => write!(f, "fails at k={n}"),
        }
    }
}

/// `Σ c_r·2^(r·n) + linear·n + constant`, rates `r > 0` distinct.
#[derive(Debug, Clone, Default)]
struct ExpPoly {
    exp: BTreeMap<u64, Utility>,
    linear: Utility,
    constant: Utility,
}

impl ExpPoly {
    fn minus(mut self, other: &ExpPoly) -> ExpPoly {
        for (r, c) in &other.exp {
            let e = self.exp.entry(*r).or_insert_with(Utility::zero);
            *e = &*e - c;
        }
        self.exp.retain(|_, c| !c.is_zero());
        self.linear = &self.linear - &other.linear;
        self.constant = &self.constant - &other.constant;
        self
    }

    fn eval(&self, n: u64) -> Utility {
        let mut acc = &self.constant + &(&self.linear * &Utility::from_int(n as i64));
        for (r, c) in &self.exp {
            acc = &acc + &(c * &Utility::pow2((*r * n) as i64));
        }
        acc
    }

    /// `(N, s)`: for all `n ≥ N` the sign of the polynomial is `s`.
    /// `s` is `Equal` only for the zero polynomial.
    fn tail(&self) -> (u64, Ordering) {
        let sign = |u: &Utility| u.cmp(&Utility::zero());
        if let Some((&top, d)) = self.exp.iter().next_back() {
            // Bound everything else by R·(n+1)·2^(a'·n).
            let next_rate = self.exp.keys().rev().nth(1).copied().unwrap_or(0);
            let mut rest = &self.linear.abs() + &self.constant.abs();
            for (r, c) in &self.exp {
                if *r != top {
                    rest = &rest + &c.abs();
                }
            }
            let gap = top - next_rate;
            let mag = d.abs();
            let mut n = 0u64;
            loop {
                let lhs = &mag * &Utility::pow2((gap * n) as i64);
                let rhs = &rest * &Utility::from_int(n as i64 + 1);
                if lhs > rhs {
                    return (n, sign(d));
                }
                n += 1;
            }
        }
        if !self.linear.is_zero() {
            // |linear|·n > |constant|
            let mut n = 0u64;
            let l = self.linear.abs();
            let c = self.constant.abs();
            // Jump close to the threshold before stepping.
            let approx = c.as_rational() / l.as_rational();
            if let Some(start) = num_traits::ToPrimitive::to_u64(&approx.floor().to_integer()) {
                n = start;
            }
            while &l * &Utility::from_int(n as i64) <= c {
                n += 1;
            }
            return (n, sign(&self.linear));
        }
        (0, sign(&self.constant))
    }
}

/// Decides `lhs ≥ rhs` for all `n ≥ 0` exactly: the difference is
/// evaluated below a crossover bound past which its dominant term fixes
/// the sign.
pub fn stage_compare(lhs: &StageExpr, rhs: &StageExpr) -> ForAllVerdict {
    let diff = lhs.to_poly().minus(&rhs.to_poly());
    let (bound, tail) = diff.tail();
    let mut touched = false;
    for n in 0..bound {
        match diff.eval(n).cmp(&Utility::zero()) {
            Ordering::Less => return ForAllVerdict::FailsAt(n),
            Ordering::Equal => touched = true,
            Ordering::Greater => {}
        }
    }
    match tail {
        Ordering::Less => ForAllVerdict::FailsAt(bound),
        Ordering::Equal if !touched && bound == 0 => ForAllVerdict::AlwaysEQ,
        Ordering::Equal => ForAllVerdict::AlwaysGE,
        Ordering::Greater if touched => ForAllVerdict::AlwaysGE,
        Ordering::Greater => ForAllVerdict::AlwaysGT,
    }
}

/// Least `m` with `lhs > rhs` for every `n ≥ m`, if any.
pub fn strictly_greater_from(lhs: &StageExpr, rhs: &StageExpr) -> Option<u64> {
    let diff = lhs.to_poly().minus(&rhs.to_poly());
    let (bound, tail) = diff.tail();
    if tail != Ordering::Greater {
        return None;
    }
    let last_bad = (0..bound).rev().find(|&n| diff.eval(n) <= Utility::zero());
    Some(last_bad.map_or(0, |n| n + 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(lhs: &StageExpr, rhs: &StageExpr, upto: u64) -> ForAllVerdict {
        let mut eq_all = true;
        let mut eq_any = false;
        for n in 0..upto {
            let (a, b) = (lhs.eval(n), rhs.eval(n));
            if a < b {
                return ForAllVerdict::FailsAt(n);
            }
            eq_all &= a == b;
            eq_any |= a == b;
        }
        if eq_all {
            ForAllVerdict::AlwaysEQ
        } else if eq_any {
            ForAllVerdict::AlwaysGE
        } else {
            ForAllVerdict::AlwaysGT
        }
    }

    #[test]
    fn centipede_exponents() {
        let p = StageExpr::pow2(2, 2);
        let pi = StageExpr::pow2(2, 1);
        assert_eq!(stage_compare(&p, &pi), ForAllVerdict::AlwaysGT);
        assert_eq!(stage_compare(&pi, &p), ForAllVerdict::FailsAt(0));
        assert_eq!(p.eval(3), Utility::pow2(8));
    }

    #[test]
    fn dollar_auction_constant_gap() {
        let lhs = StageExpr::affine(0, -5);
        let rhs = StageExpr::affine(95, -5);
        assert_eq!(stage_compare(&rhs, &lhs), ForAllVerdict::AlwaysGT);
        assert_eq!(stage_compare(&lhs, &rhs), ForAllVerdict::FailsAt(0));
    }

    #[test]
    fn equal_constants() {
        let q = StageExpr::constant(Utility::ratio(3, 7));
        assert_eq!(stage_compare(&q, &q.clone()), ForAllVerdict::AlwaysEQ);
        let g = StageExpr::Geo { coeff: Utility::from_int(3), rate: 1, offset: 2, shift: Utility::from_int(-1) };
        assert_eq!(stage_compare(&g, &g), ForAllVerdict::AlwaysEQ);
    }

    #[test]
    fn late_crossovers_are_found() {
        // 2^n vs 100 + 10n: crossover between 7 and 8.
        let g = StageExpr::pow2(1, 0);
        let a = StageExpr::affine(100, 10);
        assert_eq!(stage_compare(&g, &a), ForAllVerdict::FailsAt(0));
        assert_eq!(stage_compare(&a, &g), ForAllVerdict::FailsAt(8));
        assert_eq!(strictly_greater_from(&g, &a), Some(8));
        // 95 - 5n vs 0: positive until n = 19, zero at 19, negative after.
        let d = StageExpr::affine(95, -5);
        let z = StageExpr::constant(0);
        assert_eq!(stage_compare(&d, &z), ForAllVerdict::FailsAt(20));
        assert_eq!(strictly_greater_from(&d, &z), None);
        // Tangency: 2^n + 2 - 2^n... use 2^(n) vs n + 1: equal at 0 and 1.
        let t = StageExpr::affine(1, 1);
        assert_eq!(stage_compare(&g, &t), ForAllVerdict::AlwaysGE);
        assert_eq!(strictly_greater_from(&g, &t), Some(2));
    }

    #[test]
    fn substitution_matches_evaluation() {
        let exprs = [
            StageExpr::pow2(2, 3),
            StageExpr::affine(95, -5),
            StageExpr::Geo { coeff: Utility::ratio(-1, 3), rate: 3, offset: -2, shift: Utility::from_int(7) },
        ];
        for e in &exprs {
            for (alpha, beta) in [(0, 1), (3, 2), (5, 0)] {
                let s = e.substitute(alpha, beta);
                for k in 0..6 {
                    assert_eq!(s.eval(k), e.eval(alpha + beta * k));
                }
            }
        }
    }

    #[test]
    fn agrees_with_brute_force_on_a_grid() {
        let mut exprs = Vec::new();
        for q in [-3i64, 0, 2] {
            exprs.push(StageExpr::constant(q));
            for s in [-2i64, 1] {
                exprs.push(StageExpr::affine(q, s));
            }
            for (rate, off) in [(1u64, 0i64), (2, -1)] {
                exprs.push(StageExpr::Geo { coeff: Utility::from_int(q), rate, offset: off, shift: Utility::from_int(1) });
            }
        }
        for a in &exprs {
            for b in &exprs {
                // Every crossover in this grid lies below 40.
                assert_eq!(stage_compare(a, b), brute(a, b, 40), "{a} vs {b}");
            }
        }
    }
}
