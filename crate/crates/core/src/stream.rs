//! Monotone rational approximation streams.
//!
//! An increasing stream stands for a left-c.e. real and a decreasing stream
//! for a right-c.e. real. Streams are lazy: values are produced stage by
//! stage and cached, and every newly produced value is checked against the
//! stream's direction (and the open unit interval when flagged).

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::omega::{OmegaEnumeration, OmegaError};
use crate::rational::Rational;

pub type Stage = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Increasing,
    Decreasing,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Direction::Increasing => f.write_str("increasing"),
            Direction::Decreasing => f.write_str("decreasing"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StreamError {
    #[error("{direction} stream moved from {previous} to {value} at stage {stage}")]
    MonotonicityViolation {
        stage: Stage,
        previous: Box<Rational>,
        value: Box<Rational>,
        direction: Direction,
    },
    #[error("value {value} at stage {stage} is outside (0,1)")]
    OutOfUnitInterval { stage: Stage, value: Rational },
    #[error("negative factor {value} at stage {stage} in a product stream")]
    NegativeFactor { stage: Stage, value: Rational },
    #[error("invalid stream parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Omega(#[from] OmegaError),
}

/// Read-only access to a running engine's history of `α_t − β_t`.
pub trait EngineView {
    fn difference(&self, stage: Stage) -> Option<&Rational>;
}

/// A view with no history, for streams used outside an engine.
pub struct NoEngine;

impl EngineView for NoEngine {
    fn difference(&self, _stage: Stage) -> Option<&Rational> {
        None
    }
}

impl EngineView for [Rational] {
    fn difference(&self, stage: Stage) -> Option<&Rational> {
        self.get(stage)
    }
}

impl EngineView for Vec<Rational> {
    fn difference(&self, stage: Stage) -> Option<&Rational> {
        self.get(stage)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tracker {
    pub start: Rational,
    pub lag: usize,
    /// Fraction of the remaining gap closed per stage, in `(0, 1]`.
    pub gain: Rational,
}

#[derive(Debug, Clone)]
enum Generator {
    Constant(Rational),
    /// `pow` is `rate^{t+1}` for the next stage `t` to be generated.
    Geometric {
        limit: Rational,
        rate: Rational,
        pow: Rational,
    },
    /// Holds the last entry past the end of the table.
    Table(Vec<Rational>),
    Tracker(Tracker),
    Omega(Box<OmegaEnumeration>),
    Sum(Vec<ApproxStream>),
    /// `Σ_k a_k(s)·b_k(s)` over nonnegative factors.
    ProductSum(Vec<(ApproxStream, ApproxStream)>),
    Speedup {
        alpha: Box<ApproxStream>,
        beta: Box<ApproxStream>,
        p: Rational,
    },
}

/// A monotone stream of rationals with a cached materialized prefix.
#[derive(Debug, Clone)]
pub struct ApproxStream {
    direction: Direction,
    unit_interval: bool,
    label: String,
    generator: Generator,
    prefix: Vec<Rational>,
    held: Vec<Stage>,
}

fn check_open_unit(what: &str, r: &Rational) -> Result<(), StreamError> {
    if r.in_open_unit() {
        Ok(())
    } else {
        Err(StreamError::InvalidParameter(format!("{what} = {r} must lie in (0,1)")))
    }
}

impl ApproxStream {
    fn with(direction: Direction, label: String, generator: Generator) -> Self {
        ApproxStream {
            direction,
            unit_interval: false,
            label,
            generator,
            prefix: Vec::new(),
            held: Vec::new(),
        }
    }

    /// The constant stream; it is monotone in either direction.
    pub fn constant(value: Rational, direction: Direction) -> Self {
        let label = format!("constant({value})");
        Self::with(direction, label, Generator::Constant(value))
    }

    pub fn zero() -> Self {
        Self::constant(Rational::zero(), Direction::Increasing)
    }

    /// Geometric approach to `limit`:
    /// `limit − limit·rate^{s+1}` when increasing,
    /// `limit + (1−limit)·rate^{s+1}` when decreasing, so every value lies
    /// strictly inside `(0,1)`. Flagged unit-interval.
    pub fn constant_target(limit: Rational, direction: Direction, rate: Rational) -> Result<Self, StreamError> {
        check_open_unit("limit", &limit)?;
        check_open_unit("rate", &rate)?;
        let label = format!("target({limit}, {direction}, {rate})");
        let mut s = Self::with(
            direction,
            label,
            Generator::Geometric {
                limit,
                pow: rate.clone(),
                rate,
            },
        );
        s.unit_interval = true;
        Ok(s)
    }

    /// An explicit list of values; stage `s ≥ len` repeats the last entry.
    /// Monotonicity is checked as values are materialized.
    pub fn table(values: Vec<Rational>, direction: Direction) -> Result<Self, StreamError> {
        if values.is_empty() {
            return Err(StreamError::InvalidParameter(
                "table stream needs at least one value".into(),
            ));
        }
        Ok(Self::with(direction, "table".into(), Generator::Table(values)))
    }

    /// Adaptive adversary chasing the engine's `α − β`.
    ///
    /// `value(0) = start`; `value(s+1)` moves a `gain` fraction of the way from
    /// `value(s)` toward `α_{s−lag} − β_{s−lag}`. Targets on the wrong side of
    /// the current value are held (and recorded); values stay in `(0,1)`.
    pub fn tracker(start: Rational, direction: Direction, lag: usize, gain: Rational) -> Result<Self, StreamError> {
        check_open_unit("start", &start)?;
        if !gain.is_positive() || gain > Rational::one() {
            return Err(StreamError::InvalidParameter(format!(
                "gain = {gain} must lie in (0,1]"
            )));
        }
        let label = format!("tracker(lag {lag}, {direction})");
        let mut s = Self::with(direction, label, Generator::Tracker(Tracker { start, lag, gain }));
        s.unit_interval = true;
        Ok(s)
    }

    /// Increasing stream of `ω_s` for a toy machine.
    pub fn omega(enumeration: OmegaEnumeration) -> Self {
        let label = format!("omega({}, L={})", enumeration.machine().name, enumeration.max_len());
        Self::with(Direction::Increasing, label, Generator::Omega(Box::new(enumeration)))
    }

    /// Pointwise sum of same-direction streams.
    pub fn sum(parts: Vec<ApproxStream>) -> Result<Self, StreamError> {
        let direction = parts.first().map(|p| p.direction).unwrap_or(Direction::Increasing);
        if parts.iter().any(|p| p.direction != direction) {
            return Err(StreamError::InvalidParameter(
                "sum of streams with mixed directions".into(),
            ));
        }
        let label = parts.iter().map(|p| p.label.as_str()).collect::<Vec<_>>().join(" + ");
        Ok(Self::with(direction, label, Generator::Sum(parts)))
    }

    /// `Σ a_k·b_k` over increasing streams whose values must stay nonnegative.
    pub fn product_sum(terms: Vec<(ApproxStream, ApproxStream)>) -> Result<Self, StreamError> {
        if terms
            .iter()
            .any(|(a, b)| a.direction != Direction::Increasing || b.direction != Direction::Increasing)
        {
            return Err(StreamError::InvalidParameter("product terms must be increasing".into()));
        }
        Ok(Self::with(
            Direction::Increasing,
            "product".into(),
            Generator::ProductSum(terms),
        ))
    }

    pub(crate) fn speedup_of(alpha: ApproxStream, beta: ApproxStream, p: Rational) -> Self {
        let label = format!("speedup({}, {}, {p})", alpha.label, beta.label);
        Self::with(
            Direction::Increasing,
            label,
            Generator::Speedup {
                alpha: Box::new(alpha),
                beta: Box::new(beta),
                p,
            },
        )
    }

    pub fn with_unit_interval(mut self, flag: bool) -> Self {
        self.unit_interval = flag;
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn is_unit_interval(&self) -> bool {
        self.unit_interval
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_tracker(&self) -> bool {
        matches!(self.generator, Generator::Tracker(_))
    }

    /// Limit of a constant-target stream, if this is one.
    pub fn target_limit(&self) -> Option<&Rational> {
        match &self.generator {
            Generator::Geometric { limit, .. } => Some(limit),
            Generator::Constant(v) => Some(v),
            _ => None,
        }
    }

    /// Values materialized so far.
    pub fn prefix(&self) -> &[Rational] {
        &self.prefix
    }

    /// Stages at which a tracker held its value because its target lay on the
    /// wrong side.
    pub fn held_stages(&self) -> &[Stage] {
        &self.held
    }

    /// Materializes stages up to `s` in order and returns `value(s)`.
    pub fn advance(&mut self, s: Stage, view: &dyn EngineView) -> Result<Rational, StreamError> {
        while self.prefix.len() <= s {
            let t = self.prefix.len();
            let v = self.generate(t, view)?;
            if let Some(prev) = self.prefix.last() {
                let ok = match self.direction {
                    Direction::Increasing => &v >= prev,
                    Direction::Decreasing => &v <= prev,
                };
                if !ok {
                    return Err(StreamError::MonotonicityViolation {
                        stage: t,
                        previous: Box::new(prev.clone()),
                        value: Box::new(v),
                        direction: self.direction,
                    });
                }
            }
            if self.unit_interval && !v.in_open_unit() {
                return Err(StreamError::OutOfUnitInterval { stage: t, value: v });
            }
            self.prefix.push(v);
        }
        Ok(self.prefix[s].clone())
    }

    /// `value(s)` for a stream that does not consult an engine.
    pub fn value(&mut self, s: Stage) -> Result<Rational, StreamError> {
        self.advance(s, &NoEngine)
    }

    /// Materializes `0..=t` and returns the whole prefix.
    pub fn materialize(&mut self, t: Stage) -> Result<&[Rational], StreamError> {
        self.value(t)?;
        Ok(&self.prefix[..=t])
    }

    fn generate(&mut self, t: Stage, view: &dyn EngineView) -> Result<Rational, StreamError> {
        let direction = self.direction;
        let prev = self.prefix.last();
        let v = match &mut self.generator {
            Generator::Constant(v) => v.clone(),
            Generator::Geometric { limit, rate, pow } => {
                let v = match direction {
                    Direction::Increasing => &*limit - &(&*limit * &*pow),
                    Direction::Decreasing => &*limit + &((Rational::one() - &*limit) * &*pow),
                };
                *pow = &*pow * &*rate;
                v
            }
            Generator::Table(values) => values[t.min(values.len() - 1)].clone(),
            Generator::Tracker(tr) => match prev {
                None => tr.start.clone(),
                Some(prev) => {
                    let target = (t - 1).checked_sub(tr.lag).and_then(|u| view.difference(u));
                    let (v, held) = tracker_step(prev, target, direction, &tr.gain);
                    if held {
                        self.held.push(t);
                    }
                    v
                }
            },
            Generator::Omega(en) => en.value(t)?,
            Generator::Sum(parts) => {
                let mut acc = Rational::zero();
                for p in parts.iter_mut() {
                    acc += &p.advance(t, view)?;
                }
                acc
            }
            Generator::ProductSum(terms) => {
                let mut acc = Rational::zero();
                for (a, b) in terms.iter_mut() {
                    let x = a.advance(t, view)?;
                    let y = b.advance(t, view)?;
                    for f in [&x, &y] {
                        if f.is_negative() {
                            return Err(StreamError::NegativeFactor {
                                stage: t,
                                value: f.clone(),
                            });
                        }
                    }
                    acc += &(x * y);
                }
                acc
            }
            Generator::Speedup { alpha, beta, p } => {
                let a = alpha.advance(t, view)?;
                let b = beta.advance(t, view)?;
                match prev {
                    None => Rational::min_of(a, &*p * &b),
                    Some(prev) => {
                        let b_prev = beta.prefix[t - 1].clone();
                        Rational::min_of(a, prev + &(&*p * &(b - b_prev)))
                    }
                }
            }
        };
        Ok(v)
    }
}

/// One tracker move. Returns the new value and whether it held because the
/// target lay on the wrong side of `prev`.
fn tracker_step(prev: &Rational, target: Option<&Rational>, direction: Direction, gain: &Rational) -> (Rational, bool) {
    let Some(target) = target else {
        return (prev.clone(), false);
    };
    let wrong_side = match direction {
        Direction::Increasing => target < prev,
        Direction::Decreasing => target > prev,
    };
    if wrong_side {
        return (prev.clone(), true);
    }
    let zero = Rational::zero();
    let one = Rational::one();
    let eff = if target < &zero {
        zero.clone()
    } else if target > &one {
        one.clone()
    } else {
        target.clone()
    };
    let mut v = prev + &(gain * &(eff - prev));
    if v >= one {
        v = (prev + &one) * Rational::frac(1, 2);
    } else if v <= zero {
        v = prev * &Rational::frac(1, 2);
    }
    (v, false)
}

/// The pointwise sum `ω_s + x_s`, a translated halting probability. Both
/// inputs must be increasing and the sum must stay below 1 at `horizon`.
pub fn translate_omega(omega: ApproxStream, x: ApproxStream, horizon: Stage) -> Result<ApproxStream, StreamError> {
    let label = format!("{} + {}", omega.label(), x.label());
    let mut sum = ApproxStream::sum(vec![omega, x])?.with_label(label);
    let v = sum.value(horizon)?;
    if v >= Rational::one() {
        return Err(StreamError::InvalidParameter(format!(
            "translated value {v} at stage {horizon} is not below 1"
        )));
    }
    Ok(sum)
}

/// Which family an adversary belongs to: `L` entries (increasing) play `γ^i`,
/// `R` entries (decreasing) play `δ^i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    L,
    R,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::L => f.write_str("L"),
            Side::R => f.write_str("R"),
        }
    }
}

impl Side {
    pub fn direction(self) -> Direction {
        match self {
            Side::L => Direction::Increasing,
            Side::R => Direction::Decreasing,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteEntry {
    pub side: Side,
    pub index: usize,
    pub label: String,
    pub stream: ApproxStream,
}

/// Finite indexed family of adversaries `(γ^i)`, `(δ^i)`.
#[derive(Debug, Clone, Default)]
pub struct AdversarySuite {
    entries: Vec<SuiteEntry>,
}

impl AdversarySuite {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds an entry; its side is taken from the stream direction.
    pub fn push(&mut self, index: usize, stream: ApproxStream) -> Result<(), StreamError> {
        let side = match stream.direction() {
            Direction::Increasing => Side::L,
            Direction::Decreasing => Side::R,
        };
        if self.lookup(side, index).is_some() {
            return Err(StreamError::InvalidParameter(format!(
                "duplicate adversary {side}{index}"
            )));
        }
        let label = stream.label().to_string();
        self.entries.push(SuiteEntry {
            side,
            index,
            label,
            stream: stream.with_unit_interval(true),
        });
        Ok(())
    }

    /// Position `p` plays `γ^{p/2}` when even and `δ^{p/2}` when odd.
    pub fn from_positions(streams: Vec<ApproxStream>) -> Result<Self, StreamError> {
        let mut suite = Self::new();
        for (p, s) in streams.into_iter().enumerate() {
            let want = if p % 2 == 0 {
                Direction::Increasing
            } else {
                Direction::Decreasing
            };
            if s.direction() != want {
                return Err(StreamError::InvalidParameter(format!(
                    "suite position {p} must be {want}, got {}",
                    s.direction()
                )));
            }
            suite.push(p / 2, s)?;
        }
        Ok(suite)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[SuiteEntry] {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut [SuiteEntry] {
        &mut self.entries
    }

    pub fn lookup(&self, side: Side, index: usize) -> Option<usize> {
        self.entries.iter().position(|e| e.side == side && e.index == index)
    }

    /// Largest requirement index with an adversary, if any.
    pub fn max_index(&self) -> Option<usize> {
        self.entries.iter().map(|e| e.index).max()
    }

    /// The standard eight-entry suite: four constant targets, three trackers
    /// with lags 0, 1 and 2, and one entry derived from `omega`.
    pub fn standard(omega: ApproxStream) -> Result<Self, StreamError> {
        let half = Rational::frac(1, 2);
        let ct = |l: (i64, i64), d, r: (i64, i64)| {
            ApproxStream::constant_target(Rational::frac(l.0, l.1), d, Rational::frac(r.0, r.1))
        };
        let omega_shifted = ApproxStream::sum(vec![omega, ct((1, 16), Direction::Increasing, (1, 2))?])?
            .with_label("omega + target(1/16)");
        Self::from_positions(vec![
            ct((1, 3), Direction::Increasing, (1, 2))?,
            ct((2, 3), Direction::Decreasing, (1, 2))?,
            ApproxStream::tracker(Rational::frac(1, 8), Direction::Increasing, 0, half.clone())?,
            ApproxStream::tracker(Rational::frac(7, 8), Direction::Decreasing, 1, half.clone())?,
            ApproxStream::tracker(Rational::frac(1, 16), Direction::Increasing, 2, half)?,
            ct((1, 5), Direction::Decreasing, (1, 3))?,
            omega_shifted,
            ct((3, 4), Direction::Decreasing, (1, 4))?,
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::frac(n, d)
    }

    #[test]
    fn translate_by_zero_is_identity() {
        use crate::omega::{bundled, OmegaEnumeration};
        let om = || ApproxStream::omega(OmegaEnumeration::new(bundled("staggered").unwrap(), 3).unwrap());
        let mut t = translate_omega(om(), ApproxStream::zero(), 20).unwrap();
        let mut plain = om();
        for s in 0..20 {
            assert_eq!(t.value(s).unwrap(), plain.value(s).unwrap());
        }
    }

    #[test]
    fn translate_single_halt_by_target() {
        use crate::omega::{bundled, OmegaEnumeration};
        let om = ApproxStream::omega(OmegaEnumeration::new(bundled("single").unwrap(), 4).unwrap());
        let x = ApproxStream::constant_target(r(1, 4), Direction::Increasing, r(1, 2)).unwrap();
        let mut t = translate_omega(om, x, 30).unwrap();
        assert_eq!(t.value(0).unwrap(), r(1, 8));
        for s in 1..30u64 {
            let want = r(1, 2) + r(1, 4) - r(1, 4) * Rational::pow2_neg(s + 1);
            assert_eq!(t.value(s as usize).unwrap(), want);
        }
    }

    #[test]
    fn translate_rejects_sum_reaching_one() {
        use crate::omega::{bundled, OmegaEnumeration};
        let om = || ApproxStream::omega(OmegaEnumeration::new(bundled("single").unwrap(), 4).unwrap());
        assert!(translate_omega(om(), om(), 5).is_err());
        let x = ApproxStream::constant_target(r(1, 3), Direction::Increasing, r(1, 2)).unwrap();
        assert!(translate_omega(om(), x, 50).is_ok());
    }

    #[test]
    fn constant_target_closed_forms() {
        let mut s = ApproxStream::constant_target(r(1, 2), Direction::Increasing, r(1, 2)).unwrap();
        assert_eq!(s.value(0).unwrap(), r(1, 4));
        assert_eq!(s.value(2).unwrap(), r(7, 16));
        let mut s = ApproxStream::constant_target(r(1, 2), Direction::Decreasing, r(1, 2)).unwrap();
        assert_eq!(s.value(0).unwrap(), r(3, 4));
        assert_eq!(s.value(1).unwrap(), r(5, 8));
        let mut s = ApproxStream::constant_target(r(1, 3), Direction::Increasing, r(1, 4)).unwrap();
        assert_eq!(s.value(1).unwrap(), r(5, 16));
    }

    #[test]
    fn constant_target_rejects_bad_parameters() {
        for (l, rate) in [
            (r(0, 1), r(1, 2)),
            (r(1, 1), r(1, 2)),
            (r(1, 2), r(1, 1)),
            (r(1, 2), r(-1, 2)),
        ] {
            assert!(ApproxStream::constant_target(l, Direction::Increasing, rate).is_err());
        }
    }

    #[test]
    fn re_advance_is_reproducible() {
        let mut s = ApproxStream::constant_target(r(1, 2), Direction::Increasing, r(1, 2)).unwrap();
        let a = s.value(0).unwrap();
        s.value(10).unwrap();
        assert_eq!(s.value(0).unwrap(), a);
        assert_eq!(a, r(1, 4));
    }

    #[test]
    fn broken_generator_is_caught() {
        let mut s = ApproxStream::table(vec![r(1, 2), r(1, 4), r(3, 4)], Direction::Increasing).unwrap();
        assert_eq!(s.value(0).unwrap(), r(1, 2));
        assert!(matches!(
            s.value(2),
            Err(StreamError::MonotonicityViolation { stage: 1, .. })
        ));
    }

    #[test]
    fn unit_interval_flag_enforced() {
        let mut s = ApproxStream::table(vec![r(1, 2), r(1, 1)], Direction::Increasing)
            .unwrap()
            .with_unit_interval(true);
        assert!(matches!(
            s.value(1),
            Err(StreamError::OutOfUnitInterval { stage: 1, .. })
        ));
    }

    #[test]
    fn tracker_climbs_without_overshooting() {
        let view = vec![r(1, 2); 64];
        let mut t = ApproxStream::tracker(r(1, 4), Direction::Increasing, 0, r(1, 2)).unwrap();
        let mut prev = t.advance(0, &view).unwrap();
        for s in 1..40 {
            let v = t.advance(s, &view).unwrap();
            assert!(v > prev && v < r(1, 2));
            prev = v;
        }
        assert_eq!(t.value(1).unwrap(), r(3, 8));
    }

    #[test]
    fn tracker_holds_when_target_falls_below() {
        let view: Vec<Rational> = (0..10).map(|k| r(1, 4) - Rational::pow2_neg(k + 3)).collect();
        let mut t = ApproxStream::tracker(r(1, 2), Direction::Increasing, 0, r(1, 2)).unwrap();
        for s in 0..10 {
            assert_eq!(t.advance(s, &view).unwrap(), r(1, 2));
        }
        assert_eq!(t.held_stages(), &[1, 2, 3, 4, 5, 6, 7, 8, 9]);
    }

    #[test]
    fn tracker_lag_reads_older_history() {
        let view: Vec<Rational> = vec![r(1, 8), r(1, 8), r(3, 4), r(3, 4), r(3, 4)];
        let mut t = ApproxStream::tracker(r(1, 16), Direction::Increasing, 2, Rational::one()).unwrap();
        // value(s+1) is driven by the difference at stage s-2.
        assert_eq!(t.advance(1, &view).unwrap(), r(1, 16));
        assert_eq!(t.advance(2, &view).unwrap(), r(1, 16));
        assert_eq!(t.advance(3, &view).unwrap(), r(1, 8));
        assert_eq!(t.advance(4, &view).unwrap(), r(1, 8));
        assert_eq!(t.advance(5, &view).unwrap(), r(3, 4));
    }

    #[test]
    fn tracker_stays_inside_unit_interval() {
        let view = vec![r(3, 2); 8];
        let mut t = ApproxStream::tracker(r(1, 2), Direction::Increasing, 0, Rational::one()).unwrap();
        assert_eq!(t.advance(1, &view).unwrap(), r(3, 4));
        let view = vec![r(-1, 2); 8];
        let mut t = ApproxStream::tracker(r(1, 2), Direction::Decreasing, 0, Rational::one()).unwrap();
        assert_eq!(t.advance(1, &view).unwrap(), r(1, 4));
    }

    #[test]
    fn standard_suite_shape() {
        let omega = ApproxStream::omega(OmegaEnumeration::new(crate::omega::bundled("default").unwrap(), 12).unwrap());
        let suite = AdversarySuite::standard(omega).unwrap();
        assert_eq!(suite.len(), 8);
        assert_eq!(suite.entries().iter().filter(|e| e.stream.is_tracker()).count(), 3);
        assert_eq!(
            suite
                .entries()
                .iter()
                .filter(|e| e.stream.target_limit().is_some())
                .count(),
            4
        );
        for (p, e) in suite.entries().iter().enumerate() {
            assert_eq!(e.index, p / 2);
            assert_eq!(e.side, if p % 2 == 0 { Side::L } else { Side::R });
        }
    }

    #[test]
    fn from_positions_checks_directions() {
        let inc = ApproxStream::constant_target(r(1, 2), Direction::Increasing, r(1, 2)).unwrap();
        assert!(AdversarySuite::from_positions(vec![inc.clone(), inc]).is_err());
    }
}
