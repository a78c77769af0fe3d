//! Stage engine building `β = Σ_i β^i` against an adversary suite, with
//! growth paced by an increasing source `η`.
//!
//! Stage `s+1` is `L_i`-expansionary when `|α_{s+1} − B − γ^i_{s+1}| < 2^{-c_i[s]}`
//! and `R_i`-expansionary when `|α_{s+1} − B − δ^i_{s+1}| < 2^{-d_i[s]}`, where
//! `B = β_s` is the sum at the start of the stage. Within a stage the `d_i`
//! move first, then `q_i[s+1] = 2^{-(i+1+max_{j<i} d_j[s+1])}` is recomputed,
//! then every `L_i`-expansionary `i` adds `q_i[s+1]·(η_{s+1} − η_t)` to `β^i`,
//! `t` being its previous expansionary stage (or 0).

use serde::{Deserialize, Serialize};

use crate::engine::{error_stage, stages_of, EngineError};
use crate::rational::Rational;
use crate::report::{CheckResult, Stabilization, VerificationReport};
use crate::stream::{AdversarySuite, ApproxStream, Direction, Side, Stage, StreamError};
use crate::trace::{EventKind, Requirement, TraceError, TraceEvent};

pub const ENGINE_NAME: &str = "lemma2";

#[derive(Debug, Clone)]
pub struct Lemma2Config {
    pub alpha: ApproxStream,
    pub eta: ApproxStream,
    pub suite: AdversarySuite,
    pub stages: Stage,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequirementState {
    pub c: u64,
    pub d: u64,
    /// `q_i = 2^{-q_exp}`.
    pub q_exp: u64,
    pub beta_i: Rational,
    pub last_exp: Stage,
}

impl RequirementState {
    fn fresh(q_exp: u64) -> Self {
        RequirementState {
            c: 0,
            d: 0,
            q_exp,
            beta_i: Rational::zero(),
            last_exp: 0,
        }
    }

    pub fn q(&self) -> Rational {
        Rational::pow2_neg(self.q_exp)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lemma2State {
    pub stage: Stage,
    pub alpha: Rational,
    pub eta: Rational,
    pub beta: Rational,
    pub requirements: Vec<RequirementState>,
}

impl Lemma2State {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("state serializes")
    }

    /// Recomputes `q_exp` for every index from `from` on, returning the
    /// indices whose value changed with their previous exponent.
    fn refresh_q(&mut self, from: usize) -> Vec<(usize, u64)> {
        let mut changed = Vec::new();
        let mut max_d = self.requirements[..from].iter().map(|r| r.d).max().unwrap_or(0);
        for i in from..self.requirements.len() {
            let e = i as u64 + 1 + max_d;
            let r = &mut self.requirements[i];
            if r.q_exp != e {
                changed.push((i, r.q_exp));
                r.q_exp = e;
            }
            max_d = max_d.max(r.d);
        }
        changed
    }
}

/// `|α_{s+1} − B − adversary| < 2^{-param}` with exact arithmetic.
pub fn is_expansionary(alpha_next: &Rational, pre_beta: &Rational, adversary: &Rational, param: u64) -> bool {
    (alpha_next - pre_beta - adversary).abs_lt_pow2_neg(param)
}

#[derive(Debug, Clone)]
pub struct Lemma2Run {
    pub state: Lemma2State,
    pub trace: Vec<TraceEvent>,
}

pub struct Lemma2Engine {
    alpha: ApproxStream,
    eta: ApproxStream,
    suite: AdversarySuite,
    /// Suite positions in priority order.
    order: Vec<usize>,
    budget: Stage,
    state: Lemma2State,
    diffs: Vec<Rational>,
    eta_hist: Vec<Rational>,
    trace: Vec<TraceEvent>,
}

impl Lemma2Engine {
    pub fn new(config: Lemma2Config) -> Result<Self, EngineError> {
        let Lemma2Config {
            mut alpha,
            mut eta,
            suite,
            stages,
        } = config;
        if alpha.direction() != Direction::Increasing || eta.direction() != Direction::Increasing {
            return Err(EngineError::InvalidConfig("alpha and eta must be increasing".into()));
        }
        let a0 = alpha.advance(0, &Vec::new())?;
        let e0 = eta.advance(0, &Vec::new())?;
        check_eta(0, &e0)?;
        let mut order: Vec<usize> = (0..suite.len()).collect();
        order.sort_by_key(|&k| {
            let e = &suite.entries()[k];
            Requirement {
                side: e.side,
                index: e.index,
            }
            .priority()
        });
        let mut engine = Lemma2Engine {
            alpha,
            eta,
            suite,
            order,
            budget: stages,
            state: Lemma2State {
                stage: 0,
                alpha: a0.clone(),
                eta: e0.clone(),
                beta: Rational::zero(),
                requirements: vec![RequirementState::fresh(1)],
            },
            diffs: vec![a0.clone()],
            eta_hist: vec![e0.clone()],
            trace: Vec::new(),
        };
        engine.advance_suite(0)?;
        engine.log(TraceEvent::new(0, EventKind::Engine).new_val(ENGINE_NAME));
        engine.log(TraceEvent::new(0, EventKind::Budget).new_val(stages));
        engine.log(TraceEvent::new(0, EventKind::Stage).new_val(0));
        engine.log(TraceEvent::new(0, EventKind::Alpha).new_val(&a0));
        engine.log(TraceEvent::new(0, EventKind::Eta).new_val(&e0));
        if engine.suite.lookup(Side::L, 0).is_some() {
            engine.log(
                TraceEvent::new(0, EventKind::Q)
                    .req(Requirement::l(0))
                    .new_val(Rational::frac(1, 2)),
            );
        }
        Ok(engine)
    }

    pub fn state(&self) -> &Lemma2State {
        &self.state
    }

    pub fn trace(&self) -> &[TraceEvent] {
        &self.trace
    }

    pub fn budget(&self) -> Stage {
        self.budget
    }

    pub fn is_done(&self) -> bool {
        self.state.stage >= self.budget
    }

    fn log(&mut self, ev: TraceEvent) {
        self.trace.push(ev);
    }

    fn advance_suite(&mut self, s: Stage) -> Result<(), StreamError> {
        for e in self.suite.entries_mut() {
            e.stream.advance(s, &self.diffs)?;
        }
        Ok(())
    }

    /// The `L_i` predicate for the coming stage `state.stage + 1`.
    pub fn is_l_expansionary(&mut self, i: usize) -> Result<bool, EngineError> {
        self.predicate(Side::L, i)
    }

    /// The `R_i` predicate for the coming stage `state.stage + 1`.
    pub fn is_r_expansionary(&mut self, i: usize) -> Result<bool, EngineError> {
        self.predicate(Side::R, i)
    }

    fn predicate(&mut self, side: Side, i: usize) -> Result<bool, EngineError> {
        let s1 = self.state.stage + 1;
        if i >= s1 {
            return Err(EngineError::InvalidConfig(format!(
                "requirement {i} does not exist before stage {s1}"
            )));
        }
        let Some(k) = self.suite.lookup(side, i) else {
            return Ok(false);
        };
        let a = self.alpha.advance(s1, &self.diffs)?;
        let v = self.suite.entries_mut()[k].stream.advance(s1, &self.diffs)?;
        let r = &self.state.requirements[i];
        let param = if side == Side::L { r.c } else { r.d };
        Ok(is_expansionary(&a, &self.state.beta, &v, param))
    }

    pub fn step(&mut self) -> Result<(), EngineError> {
        let s = self.state.stage;
        let s1 = s + 1;
        let a1 = self.alpha.advance(s1, &self.diffs)?;
        let e1 = self.eta.advance(s1, &self.diffs)?;
        check_eta(s1, &e1)?;
        self.advance_suite(s1)?;

        self.log(TraceEvent::new(s1, EventKind::Stage).new_val(s1));
        if a1 != self.state.alpha {
            let old = std::mem::replace(&mut self.state.alpha, a1.clone());
            self.log(TraceEvent::new(s1, EventKind::Alpha).old(old).new_val(&a1));
        }
        if e1 != self.state.eta {
            let old = std::mem::replace(&mut self.state.eta, e1.clone());
            self.log(TraceEvent::new(s1, EventKind::Eta).old(old).new_val(&e1));
        }

        let base = &a1 - &self.state.beta;
        let mut l_hits = Vec::new();
        let mut r_hits = Vec::new();
        for pos in 0..self.order.len() {
            let entry = &self.suite.entries()[self.order[pos]];
            if entry.index > s {
                continue;
            }
            let (side, i) = (entry.side, entry.index);
            let v = entry.stream.prefix()[s1].clone();
            let r = &self.state.requirements[i];
            let param = if side == Side::L { r.c } else { r.d };
            if (&base - &v).abs_lt_pow2_neg(param) {
                if side == Side::L {
                    l_hits.push(i)
                } else {
                    r_hits.push(i)
                }
            }
            let kind = if side == Side::L {
                EventKind::Gamma
            } else {
                EventKind::Delta
            };
            self.log(TraceEvent::new(s1, kind).req(Requirement { side, index: i }).new_val(v));
        }

        for &i in &r_hits {
            let r = &mut self.state.requirements[i];
            r.d += 1;
            let (old, new) = (r.d - 1, r.d);
            self.log(
                TraceEvent::new(s1, EventKind::D)
                    .req(Requirement::r(i))
                    .old(old)
                    .new_val(new),
            );
        }

        self.state.requirements.push(RequirementState::fresh(0));
        // The new requirement starts at exponent 0 so it always shows up here.
        let from = r_hits.iter().min().map_or(s1, |&j| j + 1);
        for (i, old) in self.state.refresh_q(from) {
            if self.suite.lookup(Side::L, i).is_some() {
                let mut ev = TraceEvent::new(s1, EventKind::Q).req(Requirement::l(i));
                if i < s1 {
                    ev = ev.old(Rational::pow2_neg(old));
                }
                let new = self.state.requirements[i].q();
                self.log(ev.new_val(new));
            }
        }

        let mut total = Rational::zero();
        for &i in &l_hits {
            let t = self.state.requirements[i].last_exp;
            let inc = self.state.requirements[i].q() * (&e1 - &self.eta_hist[t]);
            let r = &mut self.state.requirements[i];
            r.c += 1;
            r.last_exp = s1;
            let old_c = r.c - 1;
            let new_c = r.c;
            let old_b = r.beta_i.clone();
            r.beta_i += &inc;
            let new_b = r.beta_i.clone();
            total += &inc;
            self.log(
                TraceEvent::new(s1, EventKind::C)
                    .req(Requirement::l(i))
                    .old(old_c)
                    .new_val(new_c),
            );
            if !inc.is_zero() {
                self.log(
                    TraceEvent::new(s1, EventKind::BetaI)
                        .req(Requirement::l(i))
                        .old(old_b)
                        .new_val(new_b),
                );
            }
        }
        if !total.is_zero() {
            let new = &self.state.beta + &total;
            let old = std::mem::replace(&mut self.state.beta, new.clone());
            self.log(TraceEvent::new(s1, EventKind::Beta).old(old).new_val(new));
        }

        self.state.stage = s1;
        self.diffs.push(&a1 - &self.state.beta);
        self.eta_hist.push(e1);
        Ok(())
    }

    pub fn run_to_end(&mut self) -> Result<(), EngineError> {
        while !self.is_done() {
            self.step()?;
        }
        Ok(())
    }

    pub fn finish(self) -> Lemma2Run {
        Lemma2Run {
            state: self.state,
            trace: self.trace,
        }
    }
}

fn check_eta(s: Stage, e: &Rational) -> Result<(), EngineError> {
    if e.is_negative() || *e >= Rational::one() {
        return Err(EngineError::InvalidConfig(format!(
            "eta at stage {s} is {e}, outside [0,1)"
        )));
    }
    Ok(())
}

pub fn run(config: Lemma2Config) -> Result<Lemma2Run, EngineError> {
    let mut engine = Lemma2Engine::new(config)?;
    engine.run_to_end()?;
    Ok(engine.finish())
}

/// Changes applied by one stage's records.
#[derive(Default)]
struct StageDelta {
    beta_before: Rational,
    observations: Vec<(Requirement, Rational)>,
    /// `(i, c before, last_exp before)`.
    c_changes: Vec<(usize, u64, Stage)>,
    d_changes: Vec<(usize, u64)>,
    beta_changes: Vec<(usize, Rational, Rational)>,
    logged_q: Vec<(usize, Rational)>,
}

struct Replayer {
    state: Option<Lemma2State>,
    budget: Option<u64>,
}

impl Replayer {
    fn new() -> Self {
        Replayer {
            state: None,
            budget: None,
        }
    }

    fn state_mut(&mut self, ev: &TraceEvent) -> Result<&mut Lemma2State, TraceError> {
        self.state.as_mut().ok_or_else(|| ev.malformed("record before stage 0"))
    }

    fn apply_stage(&mut self, stage: u64, events: &[TraceEvent]) -> Result<StageDelta, TraceError> {
        let mut delta = StageDelta {
            beta_before: self.state.as_ref().map_or_else(Rational::zero, |s| s.beta.clone()),
            ..StageDelta::default()
        };
        for ev in events {
            match ev.event_kind {
                EventKind::Engine => {
                    if ev.new_value.as_deref() != Some(ENGINE_NAME) {
                        return Err(ev.malformed("not a lemma2 trace"));
                    }
                }
                EventKind::Budget => self.budget = Some(ev.new_natural()?),
                EventKind::Stage => {
                    if ev.new_natural()? != stage {
                        return Err(ev.malformed("stage marker disagrees with record stage"));
                    }
                    match &mut self.state {
                        None if stage == 0 => {
                            self.state = Some(Lemma2State {
                                stage: 0,
                                alpha: Rational::zero(),
                                eta: Rational::zero(),
                                beta: Rational::zero(),
                                requirements: vec![RequirementState::fresh(1)],
                            })
                        }
                        Some(st) if st.stage as u64 + 1 == stage => {
                            st.stage += 1;
                            st.requirements.push(RequirementState::fresh(0));
                        }
                        _ => return Err(ev.malformed("stages out of order")),
                    }
                }
                EventKind::Alpha => {
                    let st = self.state_mut(ev)?;
                    expect_old(ev, &st.alpha, stage)?;
                    st.alpha = ev.new_rational()?;
                }
                EventKind::Eta => {
                    let st = self.state_mut(ev)?;
                    expect_old(ev, &st.eta, stage)?;
                    st.eta = ev.new_rational()?;
                }
                EventKind::Gamma | EventKind::Delta => {
                    let req = ev.requirement()?;
                    let want = if ev.event_kind == EventKind::Gamma {
                        Side::L
                    } else {
                        Side::R
                    };
                    if req.side != want || req.index as u64 >= stage {
                        return Err(ev.malformed("observation for a requirement that does not exist"));
                    }
                    delta.observations.push((req, ev.new_rational()?));
                }
                EventKind::D => {
                    let req = ev.requirement()?;
                    let r = requirement_mut(self.state_mut(ev)?, ev, req, Side::R)?;
                    if ev.old_natural()? != Some(r.d) {
                        return Err(ev.malformed("old d does not match"));
                    }
                    delta.d_changes.push((req.index, r.d));
                    r.d = ev.new_natural()?;
                }
                EventKind::C => {
                    let req = ev.requirement()?;
                    let r = requirement_mut(self.state_mut(ev)?, ev, req, Side::L)?;
                    if ev.old_natural()? != Some(r.c) {
                        return Err(ev.malformed("old c does not match"));
                    }
                    delta.c_changes.push((req.index, r.c, r.last_exp));
                    r.c = ev.new_natural()?;
                    r.last_exp = stage as Stage;
                }
                EventKind::Q => {
                    let req = ev.requirement()?;
                    requirement_mut(self.state_mut(ev)?, ev, req, Side::L)?;
                    delta.logged_q.push((req.index, ev.new_rational()?));
                }
                EventKind::BetaI => {
                    let req = ev.requirement()?;
                    let r = requirement_mut(self.state_mut(ev)?, ev, req, Side::L)?;
                    expect_old(ev, &r.beta_i, stage)?;
                    let new = ev.new_rational()?;
                    delta.beta_changes.push((req.index, r.beta_i.clone(), new.clone()));
                    r.beta_i = new;
                }
                EventKind::Beta => {
                    let st = self.state_mut(ev)?;
                    expect_old(ev, &st.beta, stage)?;
                    st.beta = ev.new_rational()?;
                }
                _ => return Err(ev.malformed("event kind not used by this engine")),
            }
        }
        let st = self.state.as_mut().ok_or_else(|| TraceError::Malformed {
            stage,
            message: "stage without a stage marker".into(),
        })?;
        if st.stage as u64 != stage {
            return Err(TraceError::Malformed {
                stage,
                message: "stage without a stage marker".into(),
            });
        }
        st.refresh_q(0);
        Ok(delta)
    }
}

fn expect_old(ev: &TraceEvent, current: &Rational, stage: u64) -> Result<(), TraceError> {
    let old = ev.old_rational()?;
    let ok = match old {
        Some(o) => &o == current,
        None => stage == 0 && current.is_zero(),
    };
    if ok {
        Ok(())
    } else {
        Err(ev.malformed(format!("old value does not match current {current}")))
    }
}

fn requirement_mut<'a>(
    st: &'a mut Lemma2State,
    ev: &TraceEvent,
    req: Requirement,
    side: Side,
) -> Result<&'a mut RequirementState, TraceError> {
    if req.side != side {
        return Err(ev.malformed(format!("requirement {req} has the wrong side")));
    }
    st.requirements
        .get_mut(req.index)
        .ok_or_else(|| ev.malformed(format!("requirement {req} does not exist")))
}

/// Rebuilds the final state from a trace alone.
pub fn replay(trace: &[TraceEvent]) -> Result<Lemma2State, TraceError> {
    let mut rp = Replayer::new();
    for (stage, events) in stages_of(trace)? {
        rp.apply_stage(stage, events)?;
    }
    rp.state.ok_or(TraceError::Malformed {
        stage: 0,
        message: "empty trace".into(),
    })
}

pub mod checks {
    pub const INTEGRITY: &str = "T0";
    pub const BETA_SUM: &str = "C1";
    pub const EXPANSIONARY: &str = "C2";
    pub const INCREMENT: &str = "C3";
    pub const MONOTONE: &str = "C4";
    pub const Q_FORMULA: &str = "C5";
    pub const V1: &str = "V1";
    pub const V2: &str = "V2";
    pub const V3: &str = "V3";
    pub const V4: &str = "V4";
}

struct Checks {
    integrity: CheckResult,
    beta_sum: CheckResult,
    expansionary: CheckResult,
    increment: CheckResult,
    monotone: CheckResult,
    q_formula: CheckResult,
    v1: CheckResult,
    v2: CheckResult,
    v3: CheckResult,
    v4: CheckResult,
}

impl Checks {
    fn new() -> Self {
        use checks::*;
        Checks {
            integrity: CheckResult::new(INTEGRITY, "trace is well formed and replays"),
            beta_sum: CheckResult::new(BETA_SUM, "beta equals the sum of the beta_i"),
            expansionary: CheckResult::new(EXPANSIONARY, "c_i/d_i move exactly at expansionary stages"),
            increment: CheckResult::new(
                INCREMENT,
                "beta_i grows by q_i*(eta_{s+1} - eta_t) at L_i-expansionary stages",
            ),
            monotone: CheckResult::new(MONOTONE, "c_i, d_i step by 1; alpha, eta, beta nondecreasing"),
            q_formula: CheckResult::new(Q_FORMULA, "logged q_i match 2^{-(i+1+max_{j<i} d_j)}"),
            v1: CheckResult::new(V1, "beta_s < 1"),
            v2: CheckResult::new(V2, "beta_i <= 2^{-i-1}*eta"),
            v3: CheckResult::new(V3, "growth below R_j bounded by 2^{-d_j}"),
            v4: CheckResult::new(
                V4,
                "pacing: beta_{t'} - beta_t >= q_i[t']*(eta_{t'} - eta_t) along L_i-expansionary stages",
            ),
        }
    }

    fn into_vec(self) -> Vec<CheckResult> {
        vec![
            self.integrity,
            self.beta_sum,
            self.expansionary,
            self.increment,
            self.monotone,
            self.q_formula,
            self.v1,
            self.v2,
            self.v3,
            self.v4,
        ]
    }
}

/// Per-requirement bookkeeping for the pacing check: the previous
/// expansionary stage with `β` and `η` there.
#[derive(Clone)]
struct Pacing {
    beta: Rational,
    eta: Rational,
}

/// Checks every stage of a trace. Reports depend on the trace only.
pub fn verify(trace: &[TraceEvent]) -> VerificationReport {
    let mut ck = Checks::new();
    let mut stats = Vec::new();
    let mut diagnostics = Vec::new();
    let mut final_stage = 0;
    match verify_inner(trace, &mut ck, &mut stats, &mut diagnostics, &mut final_stage) {
        Ok(()) => ck.integrity.record(true, None, None, String::new),
        Err(e) => ck.integrity.fail(error_stage(&e), None, e.to_string()),
    }
    VerificationReport {
        engine: ENGINE_NAME.to_string(),
        stages: final_stage,
        checks: ck.into_vec(),
        stabilization: stats,
        diagnostics,
    }
}

fn verify_inner(
    trace: &[TraceEvent],
    ck: &mut Checks,
    stats: &mut Vec<Stabilization>,
    diagnostics: &mut Vec<(String, String)>,
    final_stage: &mut u64,
) -> Result<(), TraceError> {
    let mut rp = Replayer::new();
    let mut eta_hist: Vec<Rational> = Vec::new();
    let mut alpha_prev: Option<Rational> = None;
    let mut running_sum = Rational::zero();
    let mut pacing: Vec<Option<Pacing>> = Vec::new();
    let mut last_change: std::collections::BTreeMap<Requirement, Option<u64>> = Default::default();
    let mut v4_equalities = 0u64;
    let mut l_events = 0u64;
    let mut r_events = 0u64;
    let one = Rational::one();

    for (stage, events) in stages_of(trace)? {
        let delta = rp.apply_stage(stage, events)?;
        let st = rp.state.as_ref().expect("apply_stage creates the state");
        let s = stage as usize;
        *final_stage = stage;
        eta_hist.push(st.eta.clone());
        if pacing.len() < st.requirements.len() {
            pacing.resize(st.requirements.len(), None);
        }

        for (req, _) in &delta.observations {
            last_change.entry(*req).or_insert(None);
        }
        if stage == 0 {
            if let Some(e) = events.iter().find(|e| e.event_kind == EventKind::Q) {
                last_change.entry(e.requirement()?).or_insert(None);
            }
        }

        // Monotonicity of the inputs and of beta.
        if let Some(prev) = &alpha_prev {
            ck.monotone.record(&st.alpha >= prev, Some(s), None, || {
                format!("alpha decreased: {} < {prev}", st.alpha)
            });
        }
        if s > 0 {
            let prev_eta = &eta_hist[s - 1];
            ck.monotone.record(&st.eta >= prev_eta, Some(s), None, || {
                format!("eta decreased: {} < {prev_eta}", st.eta)
            });
            ck.monotone.record(st.beta >= delta.beta_before, Some(s), None, || {
                format!("beta decreased: {} < {}", st.beta, delta.beta_before)
            });
        }
        alpha_prev = Some(st.alpha.clone());
        for &(i, old) in &delta.d_changes {
            let new = st.requirements[i].d;
            ck.monotone
                .record(new == old + 1, Some(s), Some(Requirement::r(i)), || {
                    format!("d moved {old} -> {new}")
                });
        }
        for &(i, old, _) in &delta.c_changes {
            let new = st.requirements[i].c;
            ck.monotone
                .record(new == old + 1, Some(s), Some(Requirement::l(i)), || {
                    format!("c moved {old} -> {new}")
                });
        }

        // Expansionary predicates against the pre-update beta.
        if s > 0 {
            for (req, v) in &delta.observations {
                let r = &st.requirements[req.index];
                let (moved, param_before) = match req.side {
                    Side::L => match delta.c_changes.iter().find(|c| c.0 == req.index) {
                        Some(&(_, old, _)) => (true, old),
                        None => (false, r.c),
                    },
                    Side::R => match delta.d_changes.iter().find(|d| d.0 == req.index) {
                        Some(&(_, old)) => (true, old),
                        None => (false, r.d),
                    },
                };
                let pred = is_expansionary(&st.alpha, &delta.beta_before, v, param_before);
                ck.expansionary.record(pred == moved, Some(s), Some(*req), || {
                    format!(
                        "|alpha - B - adversary| = |{} - {} - {v}| < 2^-{param_before} is {pred} but the parameter {}",
                        st.alpha,
                        delta.beta_before,
                        if moved { "moved" } else { "did not move" }
                    )
                });
                if moved {
                    last_change.insert(*req, Some(stage));
                    match req.side {
                        Side::L => l_events += 1,
                        Side::R => r_events += 1,
                    }
                }
            }
            for &(i, _, _) in &delta.c_changes {
                let seen = delta.observations.iter().any(|(r, _)| *r == Requirement::l(i));
                ck.expansionary.record(seen, Some(s), Some(Requirement::l(i)), || {
                    "c moved without an observation".into()
                });
            }
            for &(i, _) in &delta.d_changes {
                let seen = delta.observations.iter().any(|(r, _)| *r == Requirement::r(i));
                ck.expansionary.record(seen, Some(s), Some(Requirement::r(i)), || {
                    "d moved without an observation".into()
                });
            }
        }

        // q values as logged.
        for (i, q) in &delta.logged_q {
            let want = st.requirements[*i].q();
            ck.q_formula.record(q == &want, Some(s), Some(Requirement::l(*i)), || {
                format!("logged q = {q}, formula gives {want}")
            });
        }

        // Increments of beta_i.
        for &(i, ref old, ref new) in &delta.beta_changes {
            running_sum += &(new - old);
            let Some(&(_, _, t)) = delta.c_changes.iter().find(|c| c.0 == i) else {
                ck.increment.fail(
                    Some(s),
                    Some(Requirement::l(i)),
                    "beta_i moved at a stage that is not L_i-expansionary".into(),
                );
                continue;
            };
            let want = st.requirements[i].q() * (&st.eta - &eta_hist[t]);
            let got = new - old;
            ck.increment.record(got == want, Some(s), Some(Requirement::l(i)), || {
                format!("increment {got} != q_i*(eta_s - eta_{t}) = {want}")
            });
        }
        for &(i, _, t) in &delta.c_changes {
            if !delta.beta_changes.iter().any(|b| b.0 == i) {
                let want = st.requirements[i].q() * (&st.eta - &eta_hist[t]);
                ck.increment
                    .record(want.is_zero(), Some(s), Some(Requirement::l(i)), || {
                        format!("missing increment of {want}")
                    });
            }
        }
        ck.beta_sum.record(running_sum == st.beta, Some(s), None, || {
            format!("beta = {} but sum of beta_i = {running_sum}", st.beta)
        });

        // V1 at every stage.
        ck.v1
            .record(st.beta < one, Some(s), None, || format!("beta = {} >= 1", st.beta));

        // V2 at the stages where beta_i moves; the final stage is checked below.
        for &(i, _, ref new) in &delta.beta_changes {
            let bound = Rational::pow2_neg(i as u64 + 1) * &st.eta;
            ck.v2.record(new <= &bound, Some(s), Some(Requirement::l(i)), || {
                format!("beta_i = {new} > 2^-{}*eta = {bound}", i + 1)
            });
        }

        // V3: total growth of lower-priority requirements below each R_j.
        if let Some(max_i) = delta.beta_changes.iter().map(|b| b.0).max() {
            for j in 0..max_i {
                let dj = st.requirements[j].d;
                let mut total = Rational::zero();
                for &(i, ref old, ref new) in &delta.beta_changes {
                    if i > j {
                        let inc = new - old;
                        let each = Rational::pow2_neg(i as u64 + dj + 1) * &st.eta;
                        ck.v3.record(inc <= each, Some(s), Some(Requirement::r(j)), || {
                            format!("increment of beta_{i} = {inc} > 2^-(i+d_j+1)*eta = {each}")
                        });
                        total += &inc;
                    }
                }
                let cap = Rational::pow2_neg(dj);
                ck.v3.record(total <= cap, Some(s), Some(Requirement::r(j)), || {
                    format!("growth below R_{j} is {total} > 2^-{dj}")
                });
            }
        }

        // V4 along each requirement's expansionary stages, starting from stage 0.
        for &(i, _, _) in &delta.c_changes {
            let prev = pacing[i].clone().unwrap_or(Pacing {
                beta: Rational::zero(),
                eta: eta_hist[0].clone(),
            });
            let lhs = &st.beta - &prev.beta;
            let rhs = st.requirements[i].q() * (&st.eta - &prev.eta);
            ck.v4.record(lhs >= rhs, Some(s), Some(Requirement::l(i)), || {
                format!("beta grew by {lhs} < q_i*(eta growth) = {rhs}")
            });
            if lhs == rhs {
                v4_equalities += 1;
            }
            pacing[i] = Some(Pacing {
                beta: st.beta.clone(),
                eta: st.eta.clone(),
            });
        }
    }

    let st = rp.state.as_ref().ok_or(TraceError::Malformed {
        stage: 0,
        message: "empty trace".into(),
    })?;
    if let Some(b) = rp.budget {
        if b != st.stage as u64 {
            return Err(TraceError::Malformed {
                stage: st.stage as u64,
                message: format!("trace ends at stage {} but the budget is {b}", st.stage),
            });
        }
    }
    for (i, r) in st.requirements.iter().enumerate() {
        let bound = Rational::pow2_neg(i as u64 + 1) * &st.eta;
        ck.v2
            .record(r.beta_i <= bound, Some(st.stage), Some(Requirement::l(i)), || {
                format!("final beta_i = {} > {bound}", r.beta_i)
            });
    }
    stats.extend(last_change.into_iter().map(|(requirement, last_change)| Stabilization {
        requirement,
        last_change,
    }));
    diagnostics.push(("L-expansionary stages".into(), l_events.to_string()));
    diagnostics.push(("R-expansionary stages".into(), r_events.to_string()));
    diagnostics.push(("pacing steps with equality".into(), v4_equalities.to_string()));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::omega::{bundled, OmegaEnumeration};

    fn r(n: i64, d: i64) -> Rational {
        Rational::frac(n, d)
    }

    fn ct(l: Rational, dir: Direction, rate: Rational) -> ApproxStream {
        ApproxStream::constant_target(l, dir, rate).unwrap()
    }

    fn omega_eta() -> ApproxStream {
        ApproxStream::omega(OmegaEnumeration::new(bundled("default").unwrap(), 8).unwrap())
    }

    fn small_config(stages: Stage) -> Lemma2Config {
        let mut suite = AdversarySuite::new();
        suite
            .push(
                0,
                ApproxStream::tracker(r(1, 8), Direction::Increasing, 0, r(1, 2)).unwrap(),
            )
            .unwrap();
        suite.push(0, ct(r(2, 3), Direction::Decreasing, r(1, 2))).unwrap();
        suite.push(1, ct(r(1, 5), Direction::Increasing, r(1, 2))).unwrap();
        Lemma2Config {
            alpha: ct(r(1, 2), Direction::Increasing, r(1, 2)),
            eta: omega_eta(),
            suite,
            stages,
        }
    }

    #[test]
    fn zero_budget_leaves_beta_zero() {
        let run = run(small_config(0)).unwrap();
        assert_eq!(run.state.beta, Rational::zero());
        assert_eq!(run.state.stage, 0);
        assert_eq!(run.state.requirements.len(), 1);
        assert_eq!(run.state.requirements[0].q(), r(1, 2));
    }

    #[test]
    fn predicate_is_strict() {
        let a = r(3, 4);
        let b = r(0, 1);
        assert!(is_expansionary(&a, &b, &r(1, 4), 0));
        assert!(!is_expansionary(&a, &b, &r(1, 4), 1));
        assert!(is_expansionary(&a, &b, &r(5, 16), 1));
    }

    #[test]
    fn empty_suite_keeps_beta_zero_and_verifies() {
        let cfg = Lemma2Config {
            suite: AdversarySuite::new(),
            ..small_config(40)
        };
        let run = run(cfg).unwrap();
        assert!(run.state.beta.is_zero());
        let rep = verify(&run.trace);
        assert!(rep.passed(), "{}", rep.to_text());
    }

    #[test]
    fn q_follows_formula() {
        let run = run(small_config(60)).unwrap();
        let st = &run.state;
        let mut max_d = 0;
        for (i, req) in st.requirements.iter().enumerate() {
            let want = if i == 0 {
                r(1, 2)
            } else {
                Rational::pow2_neg(i as u64 + 1 + max_d)
            };
            assert_eq!(req.q(), want, "q_{i}");
            max_d = max_d.max(req.d);
        }
    }

    #[test]
    fn predicate_agrees_with_direct_evaluation() {
        let mut eng = Lemma2Engine::new(small_config(20)).unwrap();
        while !eng.is_done() {
            let s1 = eng.state().stage + 1;
            let b = eng.state().beta.clone();
            let c0 = eng.state().requirements[0].c;
            let predicted = eng.is_l_expansionary(0).unwrap();
            // Direct evaluation from the streams, independent of the engine's loop.
            let mut alpha = ct(r(1, 2), Direction::Increasing, r(1, 2));
            let a = alpha.value(s1).unwrap();
            let k = eng.suite.lookup(Side::L, 0).unwrap();
            let g = eng.suite.entries_mut()[k].stream.advance(s1, &eng.diffs).unwrap();
            assert_eq!(predicted, (&a - &b - &g).abs() < Rational::pow2_neg(c0));
            eng.step().unwrap();
            assert_eq!(eng.state().requirements[0].c, c0 + u64::from(predicted));
        }
    }

    #[test]
    fn tracker_fires_after_warm_up() {
        let run = run(small_config(20)).unwrap();
        assert!(run.state.requirements[0].c > 0);
        let first = run
            .trace
            .iter()
            .find(|e| e.event_kind == EventKind::C && e.requirement == Some(Requirement::l(0)))
            .unwrap();
        assert_eq!(first.stage, 1);
    }

    #[test]
    fn l0_increment_is_half_the_eta_gain() {
        // A table eta whose stage-1 value makes eta_1 - eta_0 = 1/8.
        let eta = ApproxStream::table(vec![r(0, 1), r(1, 8), r(1, 8)], Direction::Increasing).unwrap();
        let mut suite = AdversarySuite::new();
        suite
            .push(0, ApproxStream::constant(r(1, 2), Direction::Increasing))
            .unwrap();
        let cfg = Lemma2Config {
            alpha: ApproxStream::constant(r(1, 2), Direction::Increasing),
            eta,
            suite,
            stages: 1,
        };
        let run = run(cfg).unwrap();
        assert_eq!(run.state.requirements[0].beta_i, r(1, 16));
        assert_eq!(run.state.beta, r(1, 16));
    }

    #[test]
    fn hand_built_pacing_scenario() {
        // alpha = 1/2 constant, gamma^0 = 1/2 constant, eta = 0, 1/4, 1/2, 1/2.
        // Stage 1: B = 0, |1/2 - 0 - 1/2| = 0 < 1: beta^0 = 1/2*(1/4 - 0) = 1/8, c_0 = 1.
        // Stage 2: B = 1/8, |1/2 - 1/8 - 1/2| = 1/8 < 1/2: beta^0 += 1/2*(1/2 - 1/4) = 1/8, c_0 = 2.
        // Stage 3: B = 1/4, |−1/4| = 1/4 < 1/4 fails.
        let eta = ApproxStream::table(vec![r(0, 1), r(1, 4), r(1, 2)], Direction::Increasing).unwrap();
        let mut suite = AdversarySuite::new();
        suite
            .push(0, ApproxStream::constant(r(1, 2), Direction::Increasing))
            .unwrap();
        let cfg = Lemma2Config {
            alpha: ApproxStream::constant(r(1, 2), Direction::Increasing),
            eta,
            suite,
            stages: 3,
        };
        let run = run(cfg).unwrap();
        assert_eq!(run.state.beta, r(1, 4));
        assert_eq!(run.state.requirements[0].c, 2);
        assert_eq!(run.state.requirements[0].last_exp, 2);
        let rep = verify(&run.trace);
        assert!(rep.passed(), "{}", rep.to_text());
        // Both pacing steps are equalities: 1/8 = 1/2*(1/4) twice.
        assert!(rep
            .diagnostics
            .contains(&("pacing steps with equality".to_string(), "2".to_string())));
    }

    #[test]
    fn replay_reproduces_state() {
        let run = run(small_config(120)).unwrap();
        let back = replay(&run.trace).unwrap();
        assert_eq!(back, run.state);
        assert_eq!(back.to_json(), run.state.to_json());
    }

    #[test]
    fn verify_passes_on_standard_suite() {
        let suite = AdversarySuite::standard(omega_eta()).unwrap();
        let cfg = Lemma2Config {
            alpha: ct(r(1, 2), Direction::Increasing, r(1, 2)),
            eta: omega_eta(),
            suite,
            stages: 150,
        };
        let run = run(cfg).unwrap();
        let rep = verify(&run.trace);
        assert!(rep.passed(), "{}", rep.to_text());
    }

    #[test]
    fn tampered_beta_is_caught() {
        let mut run = run(small_config(60)).unwrap();
        let k = run.trace.iter().position(|e| e.event_kind == EventKind::BetaI).unwrap();
        let stage = run.trace[k].stage;
        let bumped = run.trace[k].new_rational().unwrap() + Rational::pow2_neg(40);
        run.trace[k].new_value = Some(bumped.to_string());
        let rep = verify(&run.trace);
        assert!(!rep.passed());
        let (check, failure) = rep.first_failure().unwrap();
        assert_eq!(failure.stage, Some(stage));
        assert!(!check.passed());
    }

    #[test]
    fn truncated_trace_fails_integrity() {
        let run = run(small_config(30)).unwrap();
        let cut = run
            .trace
            .iter()
            .rposition(|e| e.event_kind == EventKind::Stage)
            .unwrap();
        let rep = verify(&run.trace[..cut]);
        assert!(!rep.check(checks::INTEGRITY).unwrap().passed());
    }
}
