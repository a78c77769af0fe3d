//! Solovay-reducibility witnesses over finite prefixes, the approximation
//! speedup, and ratio diagnostics.
//!
//! Only clause (c) is decidable on a prefix. Clause (a) is checked as "the
//! approximation `q·α_s − β_s` is nondecreasing", and clause (b), which
//! mentions the true limits, is checked with the value at a later horizon
//! `H` standing in for the limit. Results of the horizon-proxy checks are
//! diagnostics, not certificates.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::Rational;
use crate::stream::{ApproxStream, Direction, Stage, StreamError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolovayError {
    #[error("q = {0} must be positive")]
    NonPositiveQ(Rational),
    #[error("p = {0} must be positive")]
    NonPositiveP(Rational),
    #[error("{0} stream must be increasing")]
    NotIncreasing(&'static str),
    #[error("horizon {horizon} must exceed the prefix length {prefix}")]
    BadHorizon { prefix: Stage, horizon: Stage },
    #[error(transparent)]
    Stream(#[from] StreamError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Clause {
    A,
    B,
    C,
}

/// Outcome of a prefix check: either it holds on the whole prefix or the
/// least failing stage is reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Holds,
    FailsAt(Stage),
}

impl Verdict {
    pub fn holds(self) -> bool {
        self == Verdict::Holds
    }
}

#[derive(Debug, Clone)]
pub struct SolovayWitness {
    q: Rational,
    clause: Clause,
    alpha: ApproxStream,
    beta: ApproxStream,
}

impl SolovayWitness {
    pub fn new(q: Rational, clause: Clause, alpha: ApproxStream, beta: ApproxStream) -> Result<Self, SolovayError> {
        if !q.is_positive() {
            return Err(SolovayError::NonPositiveQ(q));
        }
        if alpha.direction() != Direction::Increasing {
            return Err(SolovayError::NotIncreasing("alpha"));
        }
        if beta.direction() != Direction::Increasing {
            return Err(SolovayError::NotIncreasing("beta"));
        }
        Ok(SolovayWitness { q, clause, alpha, beta })
    }

    pub fn q(&self) -> &Rational {
        &self.q
    }

    pub fn clause(&self) -> Clause {
        self.clause
    }

    /// Same streams, different `q`.
    pub fn with_q(&self, q: Rational) -> Result<Self, SolovayError> {
        Self::new(q, self.clause, self.alpha.clone(), self.beta.clone())
    }

    /// Dispatches on the witness's clause; clause (b) needs `horizon`.
    pub fn check(&mut self, t: Stage, horizon: Option<Stage>) -> Result<Verdict, SolovayError> {
        match self.clause {
            Clause::A => check_clause_a(self, t),
            Clause::B => check_clause_b(self, t, horizon.unwrap_or(2 * t.max(1))),
            Clause::C => check_clause_c(self, t),
        }
    }
}

/// `β_{s+1} − β_s < q·(α_{s+1} − α_s)` for every `s < T`.
pub fn check_clause_c(w: &mut SolovayWitness, t: Stage) -> Result<Verdict, SolovayError> {
    let a = w.alpha.materialize(t)?.to_vec();
    let b = w.beta.materialize(t)?;
    for s in 0..t {
        let db = &b[s + 1] - &b[s];
        let da = &a[s + 1] - &a[s];
        if db >= &w.q * &da {
            return Ok(Verdict::FailsAt(s));
        }
    }
    Ok(Verdict::Holds)
}

/// `q·α_s − β_s` is nondecreasing from `s` to `s+1` for every `s < T`.
pub fn check_clause_a(w: &mut SolovayWitness, t: Stage) -> Result<Verdict, SolovayError> {
    let a = w.alpha.materialize(t)?.to_vec();
    let b = w.beta.materialize(t)?;
    let v = |s: usize| &(&w.q * &a[s]) - &b[s];
    for s in 0..t {
        if v(s + 1) < v(s) {
            return Ok(Verdict::FailsAt(s));
        }
    }
    Ok(Verdict::Holds)
}

/// Horizon proxy for clause (b): `β_H − β_s < q·(α_H − α_s)` for `s < T`.
pub fn check_clause_b(w: &mut SolovayWitness, t: Stage, horizon: Stage) -> Result<Verdict, SolovayError> {
    if horizon <= t {
        return Err(SolovayError::BadHorizon { prefix: t, horizon });
    }
    let a = w.alpha.materialize(horizon)?.to_vec();
    let b = w.beta.materialize(horizon)?;
    for s in 0..t {
        if &b[horizon] - &b[s] >= &w.q * &(&a[horizon] - &a[s]) {
            return Ok(Verdict::FailsAt(s));
        }
    }
    Ok(Verdict::Holds)
}

/// Bisection for the least `q` in `[lo, hi]` at which the clause holds on
/// the prefix, assuming the verdict is upward closed in `q`. Returns the
/// upper end of the final bracket, or `None` if it fails even at `hi`.
pub fn least_q(
    w: &SolovayWitness,
    t: Stage,
    horizon: Option<Stage>,
    lo: Rational,
    hi: Rational,
    iterations: usize,
) -> Result<Option<Rational>, SolovayError> {
    let test = |q: &Rational| -> Result<bool, SolovayError> {
        if !q.is_positive() {
            return Ok(false);
        }
        Ok(w.with_q(q.clone())?.check(t, horizon)?.holds())
    };
    if !test(&hi)? {
        return Ok(None);
    }
    let (mut lo, mut hi) = (lo, hi);
    let half = Rational::frac(1, 2);
    for _ in 0..iterations {
        let mid = (&lo + &hi) * &half;
        if test(&mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}

/// The speedup `γ` of `α` paced by `β`:
/// `γ_0 = min(α_0, p·β_0)`, `γ_{s+1} = min(α_{s+1}, γ_s + p·(β_{s+1} − β_s))`.
///
/// `γ` is increasing, never exceeds `α`, and its increments are bounded by
/// `p` times those of `β`. When `α − α_s < q·(β − β_s)` with `q < p`, `γ`
/// catches up with `α` in the limit.
pub fn speedup(alpha: ApproxStream, beta: ApproxStream, p: Rational) -> Result<ApproxStream, SolovayError> {
    if !p.is_positive() {
        return Err(SolovayError::NonPositiveP(p));
    }
    if alpha.direction() != Direction::Increasing {
        return Err(SolovayError::NotIncreasing("alpha"));
    }
    if beta.direction() != Direction::Increasing {
        return Err(SolovayError::NotIncreasing("beta"));
    }
    Ok(ApproxStream::speedup_of(alpha, beta, p))
}

/// Diagnostic `r_s = (α_H − α_s)/(β_H − β_s)` for `s < T`; `None` where the
/// denominator vanishes.
pub fn ratio_trace(
    alpha: &mut ApproxStream,
    beta: &mut ApproxStream,
    t: Stage,
    horizon: Stage,
) -> Result<Vec<Option<Rational>>, SolovayError> {
    if horizon <= t {
        return Err(SolovayError::BadHorizon { prefix: t, horizon });
    }
    let a = alpha.materialize(horizon)?.to_vec();
    let b = beta.materialize(horizon)?;
    Ok((0..t)
        .map(|s| (&a[horizon] - &a[s]).checked_div(&(&b[horizon] - &b[s])))
        .collect())
}
