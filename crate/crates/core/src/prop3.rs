//! Finite-injury engine enumerating c.e. sets `A`, `B` so that
//! `α − β = Σ_{n∈A} 2^{-(n+1)} − Σ_{n∈B} 2^{-(n+1)}` avoids every adversary.
//!
//! Requirements are served in priority order `L0, R0, L1, R1, …`, one per
//! stage. `L_i` requires attention at stage `s+1` when `c_i` is undefined or
//! `|α_s − β_s − γ^i_{s+1}| < 2^{-c_i-3}`; `R_i` likewise with `d_i`, `δ^i`.
//! Serving an undefined parameter defines it; serving a defined one makes the
//! requirement act: `L_i` puts `c_i` into `B` and sets `ℓ_i = c_i + 3`, `R_i`
//! puts `d_i` into `A` and sets `r_i = d_i + 3`, and every lower-priority
//! requirement is initialized.

use std::collections::{BTreeMap, BTreeSet};

use num_integer::Roots;
use serde::{Deserialize, Serialize};

use crate::engine::{error_stage, stages_of, EngineError};
use crate::rational::Rational;
use crate::report::{CheckResult, Stabilization, VerificationReport};
use crate::stream::{AdversarySuite, Side, Stage, StreamError};
use crate::trace::{EventKind, Requirement, TraceError, TraceEvent};

pub const ENGINE_NAME: &str = "prop3";

/// Cantor pairing `⟨k, n⟩ = (k+n)(k+n+1)/2 + n`.
pub fn pair(k: u64, n: u64) -> u64 {
    let w = k + n;
    w * (w + 1) / 2 + n
}

pub fn unpair(v: u64) -> (u64, u64) {
    let w = ((8 * v + 1).sqrt() - 1) / 2;
    let n = v - w * (w + 1) / 2;
    (w - n, n)
}

/// Column `2i` for `L_i`, `2i + 1` for `R_i`.
pub fn column(req: Requirement) -> u64 {
    2 * req.index as u64 + u64::from(req.side == Side::R)
}

/// Least member of column `k` strictly above `floor`.
pub fn least_in_column_above(k: u64, floor: Option<u64>) -> u64 {
    let Some(f) = floor else {
        return pair(k, 0);
    };
    // pair(k, n) > n, so n = f + 1 always qualifies.
    let (mut lo, mut hi) = (0u64, f + 1);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if pair(k, mid) > f {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    pair(k, lo)
}

/// Weight `2^{-(n+1)}` of bit position `n`.
pub fn bit_weight(n: u64) -> Rational {
    Rational::pow2_neg(n + 1)
}

/// `param` undefined, or `|difference − adversary| < 2^{-param-3}`. A
/// requirement with no adversary never requires attention once defined.
pub fn requires_attention(param: Option<u64>, difference: &Rational, adversary: Option<&Rational>) -> bool {
    match (param, adversary) {
        (None, _) => true,
        (Some(p), Some(v)) => (difference - v).abs_lt_pow2_neg(p + 3),
        (Some(_), None) => false,
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prop3Requirement {
    pub c: Option<u64>,
    pub l: Option<u64>,
    pub d: Option<u64>,
    pub r: Option<u64>,
}

impl Prop3Requirement {
    pub fn param(&self, side: Side) -> Option<u64> {
        match side {
            Side::L => self.c,
            Side::R => self.d,
        }
    }

    pub fn restraint(&self, side: Side) -> Option<u64> {
        match side {
            Side::L => self.l,
            Side::R => self.r,
        }
    }

    fn slots(&mut self, side: Side) -> (&mut Option<u64>, &mut Option<u64>) {
        match side {
            Side::L => (&mut self.c, &mut self.l),
            Side::R => (&mut self.d, &mut self.r),
        }
    }

    fn describe(&self, side: Side) -> String {
        let show = |v: Option<u64>| v.map_or("-".to_string(), |x| x.to_string());
        match side {
            Side::L => format!("c={},l={}", show(self.c), show(self.l)),
            Side::R => format!("d={},r={}", show(self.d), show(self.r)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prop3State {
    pub stage: Stage,
    pub a: BTreeSet<u64>,
    pub b: BTreeSet<u64>,
    pub alpha: Rational,
    pub beta: Rational,
    pub requirements: Vec<Prop3Requirement>,
    /// Every value ever given to a parameter, in order of definition.
    pub used: Vec<u64>,
}

impl Prop3State {
    fn initial() -> Self {
        Prop3State {
            stage: 0,
            a: BTreeSet::new(),
            b: BTreeSet::new(),
            alpha: Rational::zero(),
            beta: Rational::zero(),
            requirements: vec![Prop3Requirement::default()],
            used: Vec::new(),
        }
    }

    pub fn difference(&self) -> Rational {
        &self.alpha - &self.beta
    }

    /// Largest used value or currently defined restraint.
    pub fn floor(&self) -> Option<u64> {
        let used = self.used.iter().copied().max();
        let restraints = self.requirements.iter().flat_map(|r| [r.l, r.r]).flatten().max();
        used.max(restraints)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("state serializes")
    }

    /// Requirements strictly below `req` in priority that have something
    /// defined, in priority order.
    fn lower_defined(&self, req: Requirement) -> Vec<Requirement> {
        let mut out = Vec::new();
        for (i, r) in self.requirements.iter().enumerate() {
            for side in [Side::L, Side::R] {
                let q = Requirement { index: i, side };
                if q > req && (r.param(side).is_some() || r.restraint(side).is_some()) {
                    out.push(q);
                }
            }
        }
        out
    }

    fn enumerate(&mut self, side: Side, n: u64) -> bool {
        // L acts into B, R acts into A.
        match side {
            Side::L => {
                self.beta += &bit_weight(n);
                self.b.insert(n)
            }
            Side::R => {
                self.alpha += &bit_weight(n);
                self.a.insert(n)
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Prop3Config {
    pub suite: AdversarySuite,
    pub stages: Stage,
}

#[derive(Debug, Clone)]
pub struct Prop3Run {
    pub state: Prop3State,
    pub trace: Vec<TraceEvent>,
}

pub struct Prop3Engine {
    suite: AdversarySuite,
    budget: Stage,
    state: Prop3State,
    diffs: Vec<Rational>,
    trace: Vec<TraceEvent>,
}

impl Prop3Engine {
    pub fn new(config: Prop3Config) -> Result<Self, EngineError> {
        let mut engine = Prop3Engine {
            suite: config.suite,
            budget: config.stages,
            state: Prop3State::initial(),
            diffs: vec![Rational::zero()],
            trace: Vec::new(),
        };
        engine.advance_suite(0)?;
        engine
            .trace
            .push(TraceEvent::new(0, EventKind::Engine).new_val(ENGINE_NAME));
        engine
            .trace
            .push(TraceEvent::new(0, EventKind::Budget).new_val(config.stages));
        engine.trace.push(TraceEvent::new(0, EventKind::Stage).new_val(0));
        Ok(engine)
    }

    pub fn state(&self) -> &Prop3State {
        &self.state
    }

    pub fn trace(&self) -> &[TraceEvent] {
        &self.trace
    }

    pub fn is_done(&self) -> bool {
        self.state.stage >= self.budget
    }

    fn advance_suite(&mut self, s: Stage) -> Result<(), StreamError> {
        for e in self.suite.entries_mut() {
            e.stream.advance(s, &self.diffs)?;
        }
        Ok(())
    }

    /// Whether `req` requires attention at the coming stage.
    pub fn requires_attention(&mut self, req: Requirement) -> Result<bool, EngineError> {
        let s1 = self.state.stage + 1;
        if req.index >= s1 {
            return Err(EngineError::InvalidConfig(format!(
                "{req} does not exist before stage {s1}"
            )));
        }
        self.advance_suite(s1)?;
        let param = self.state.requirements[req.index].param(req.side);
        Ok(requires_attention(
            param,
            &self.state.difference(),
            adversary_at(&self.suite, req, s1),
        ))
    }

    pub fn step(&mut self) -> Result<(), EngineError> {
        let s = self.state.stage;
        let s1 = s + 1;
        self.advance_suite(s1)?;
        self.trace.push(TraceEvent::new(s1, EventKind::Stage).new_val(s1));

        let diff = self.state.difference();
        let mut served = None;
        for i in 0..=s {
            for side in [Side::L, Side::R] {
                let req = Requirement { index: i, side };
                let param = self.state.requirements[i].param(side);
                let adv = adversary_at(&self.suite, req, s1);
                if param.is_some() {
                    if let Some(v) = adv {
                        let kind = if side == Side::L {
                            EventKind::Gamma
                        } else {
                            EventKind::Delta
                        };
                        self.trace.push(TraceEvent::new(s1, kind).req(req).new_val(v));
                    }
                }
                if served.is_none() && requires_attention(param, &diff, adv) {
                    served = Some(req);
                }
            }
        }

        if let Some(req) = served {
            match self.state.requirements[req.index].param(req.side) {
                None => {
                    let v = least_in_column_above(column(req), self.state.floor());
                    *self.state.requirements[req.index].slots(req.side).0 = Some(v);
                    self.state.used.push(v);
                    self.trace
                        .push(TraceEvent::new(s1, EventKind::Define).req(req).new_val(v));
                }
                Some(p) => {
                    let restraint = p + 3;
                    *self.state.requirements[req.index].slots(req.side).1 = Some(restraint);
                    self.trace
                        .push(TraceEvent::new(s1, EventKind::Act).req(req).old(p).new_val(restraint));
                    self.state.enumerate(req.side, p);
                    let kind = if req.side == Side::L {
                        EventKind::EnumerateB
                    } else {
                        EventKind::EnumerateA
                    };
                    self.trace.push(TraceEvent::new(s1, kind).req(req).new_val(p));
                    for low in self.state.lower_defined(req) {
                        let r = &mut self.state.requirements[low.index];
                        let old = r.describe(low.side);
                        let (param, restraint) = r.slots(low.side);
                        *param = None;
                        *restraint = None;
                        self.trace
                            .push(TraceEvent::new(s1, EventKind::Initialize).req(low).old(old));
                    }
                }
            }
        }

        self.state.requirements.push(Prop3Requirement::default());
        self.state.stage = s1;
        self.diffs.push(self.state.difference());
        Ok(())
    }

    pub fn run_to_end(&mut self) -> Result<(), EngineError> {
        while !self.is_done() {
            self.step()?;
        }
        Ok(())
    }

    pub fn finish(self) -> Prop3Run {
        Prop3Run {
            state: self.state,
            trace: self.trace,
        }
    }
}

fn adversary_at(suite: &AdversarySuite, req: Requirement, s: Stage) -> Option<&Rational> {
    suite
        .lookup(req.side, req.index)
        .map(|k| &suite.entries()[k].stream.prefix()[s])
}

pub fn run(config: Prop3Config) -> Result<Prop3Run, EngineError> {
    let mut engine = Prop3Engine::new(config)?;
    engine.run_to_end()?;
    Ok(engine.finish())
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Served {
    Define(u64),
    Act { param: u64, restraint: u64 },
}

#[derive(Default)]
struct StageDelta {
    observations: BTreeMap<Requirement, Rational>,
    served: Option<(Requirement, Served)>,
    /// `(set is A, n, newly added)`.
    enumerations: Vec<(bool, u64, bool)>,
    initialized: Vec<Requirement>,
}

struct Replayer {
    state: Option<Prop3State>,
    budget: Option<u64>,
}

impl Replayer {
    fn state_mut(&mut self, ev: &TraceEvent) -> Result<&mut Prop3State, TraceError> {
        self.state.as_mut().ok_or_else(|| ev.malformed("record before stage 0"))
    }

    fn apply_stage(&mut self, stage: u64, events: &[TraceEvent]) -> Result<StageDelta, TraceError> {
        let mut delta = StageDelta::default();
        for ev in events {
            match ev.event_kind {
                EventKind::Engine => {
                    if ev.new_value.as_deref() != Some(ENGINE_NAME) {
                        return Err(ev.malformed("not a prop3 trace"));
                    }
                }
                EventKind::Budget => self.budget = Some(ev.new_natural()?),
                EventKind::Stage => {
                    if ev.new_natural()? != stage {
                        return Err(ev.malformed("stage marker disagrees with record stage"));
                    }
                    match &mut self.state {
                        None if stage == 0 => self.state = Some(Prop3State::initial()),
                        Some(st) if st.stage as u64 + 1 == stage => {}
                        _ => return Err(ev.malformed("stages out of order")),
                    }
                }
                EventKind::Gamma | EventKind::Delta => {
                    let req = ev.requirement()?;
                    let want = if ev.event_kind == EventKind::Gamma {
                        Side::L
                    } else {
                        Side::R
                    };
                    let st = self.state_mut(ev)?;
                    if req.side != want || req.index >= st.requirements.len() {
                        return Err(ev.malformed("observation for a requirement that does not exist"));
                    }
                    delta.observations.insert(req, ev.new_rational()?);
                }
                EventKind::Define | EventKind::Act => {
                    let req = ev.requirement()?;
                    if delta.served.is_some() {
                        return Err(ev.malformed("two requirements served in one stage"));
                    }
                    let st = self.state_mut(ev)?;
                    let r = st
                        .requirements
                        .get_mut(req.index)
                        .ok_or_else(|| ev.malformed(format!("{req} does not exist")))?;
                    let (param, restraint) = r.slots(req.side);
                    if ev.event_kind == EventKind::Define {
                        if param.is_some() {
                            return Err(ev.malformed(format!("{req} defined twice")));
                        }
                        let v = ev.new_natural()?;
                        *param = Some(v);
                        st.used.push(v);
                        delta.served = Some((req, Served::Define(v)));
                    } else {
                        let p = ev.old_natural()?.ok_or_else(|| ev.malformed("act without parameter"))?;
                        if *param != Some(p) {
                            return Err(ev.malformed(format!("{req} acts with {p} but holds {param:?}")));
                        }
                        let rv = ev.new_natural()?;
                        *restraint = Some(rv);
                        delta.served = Some((
                            req,
                            Served::Act {
                                param: p,
                                restraint: rv,
                            },
                        ));
                    }
                }
                EventKind::EnumerateA | EventKind::EnumerateB => {
                    let n = ev.new_natural()?;
                    let into_a = ev.event_kind == EventKind::EnumerateA;
                    let st = self.state_mut(ev)?;
                    let fresh = st.enumerate(if into_a { Side::R } else { Side::L }, n);
                    if !fresh {
                        return Err(ev.malformed(format!("{n} enumerated twice")));
                    }
                    delta.enumerations.push((into_a, n, fresh));
                }
                EventKind::Initialize => {
                    let req = ev.requirement()?;
                    let st = self.state_mut(ev)?;
                    let r = st
                        .requirements
                        .get_mut(req.index)
                        .ok_or_else(|| ev.malformed(format!("{req} does not exist")))?;
                    let (param, restraint) = r.slots(req.side);
                    *param = None;
                    *restraint = None;
                    delta.initialized.push(req);
                }
                _ => return Err(ev.malformed("event kind not used by this engine")),
            }
        }
        let st = self.state.as_mut().ok_or(TraceError::Malformed {
            stage,
            message: "stage without a stage marker".into(),
        })?;
        if stage > 0 {
            if st.stage as u64 + 1 != stage {
                return Err(TraceError::Malformed {
                    stage,
                    message: "stage without a stage marker".into(),
                });
            }
            st.stage += 1;
            st.requirements.push(Prop3Requirement::default());
        }
        Ok(delta)
    }
}

pub fn replay(trace: &[TraceEvent]) -> Result<Prop3State, TraceError> {
    let mut rp = Replayer {
        state: None,
        budget: None,
    };
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
    pub const PRIORITY: &str = "P1";
    pub const ACTION: &str = "P2";
    pub const W1: &str = "W1";
    pub const W2: &str = "W2";
    pub const W3: &str = "W3";
    pub const W4: &str = "W4";
    pub const W5: &str = "W5";
}

struct Checks {
    integrity: CheckResult,
    priority: CheckResult,
    action: CheckResult,
    w1: CheckResult,
    w2: CheckResult,
    w3: CheckResult,
    w4: CheckResult,
    w5: CheckResult,
}

/// A requirement that acted and has not been initialized since.
struct Standing {
    stage: usize,
    param: u64,
    alpha: Rational,
    beta: Rational,
}

/// Saturating `2^k`.
fn pow2_sat(k: usize) -> u64 {
    if k >= 63 {
        u64::MAX
    } else {
        1 << k
    }
}

pub fn verify(trace: &[TraceEvent]) -> VerificationReport {
    use checks::*;
    let mut ck = Checks {
        integrity: CheckResult::new(INTEGRITY, "trace is well formed and replays"),
        priority: CheckResult::new(PRIORITY, "the least requirement requiring attention is served"),
        action: CheckResult::new(
            ACTION,
            "defines pick the least fresh column value; acts enumerate, restrain and initialize as prescribed",
        ),
        w1: CheckResult::new(W1, "at most one act between initializations; no attention after acting"),
        w2: CheckResult::new(W2, "separation margin after an uninitialized act"),
        w3: CheckResult::new(W3, "restraint obedience after an uninitialized act"),
        w4: CheckResult::new(
            W4,
            "position k initialized at most 2^k - 1 times and acts at most 2^k times",
        ),
        w5: CheckResult::new(W5, "column discipline and freshness; A and B disjoint"),
    };
    let mut stats = Vec::new();
    let mut diagnostics = Vec::new();
    let mut final_stage = 0;
    if let Err(e) = verify_inner(trace, &mut ck, &mut stats, &mut diagnostics, &mut final_stage) {
        ck.integrity.fail(error_stage(&e), None, e.to_string());
    } else {
        ck.integrity.record(true, None, None, String::new);
    }
    VerificationReport {
        engine: ENGINE_NAME.to_string(),
        stages: final_stage,
        checks: vec![ck.integrity, ck.priority, ck.action, ck.w1, ck.w2, ck.w3, ck.w4, ck.w5],
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
    let mut rp = Replayer {
        state: None,
        budget: None,
    };
    let mut standing: BTreeMap<Requirement, Standing> = BTreeMap::new();
    let mut acts_since_init: BTreeMap<Requirement, u64> = BTreeMap::new();
    let mut acts: BTreeMap<Requirement, u64> = BTreeMap::new();
    let mut inits: BTreeMap<Requirement, u64> = BTreeMap::new();
    let mut last_change: BTreeMap<Requirement, Option<u64>> = BTreeMap::new();
    let mut observed: BTreeSet<Requirement> = BTreeSet::new();
    let mut defines = 0u64;

    for (stage, events) in stages_of(trace)? {
        let s = stage as usize;
        *final_stage = stage;
        let pre = rp.state.clone();
        let delta = rp.apply_stage(stage, events)?;
        let st = rp.state.as_ref().expect("apply_stage creates the state");
        let Some(pre) = pre else { continue };
        let diff_pre = pre.difference();
        let diff = st.difference();

        observed.extend(delta.observations.keys().copied());

        // Attention as seen at the start of the stage.
        let mut expected = None;
        for (i, r) in pre.requirements.iter().enumerate() {
            for side in [Side::L, Side::R] {
                let req = Requirement { index: i, side };
                let param = r.param(side);
                if param.is_some() && !delta.observations.contains_key(&req) && standing.contains_key(&req) {
                    return Err(TraceError::Malformed {
                        stage,
                        message: format!("no observation for {req}, which has acted"),
                    });
                }
                let att = requires_attention(param, &diff_pre, delta.observations.get(&req));
                if att && expected.is_none() {
                    expected = Some(req);
                }
                if att && standing.contains_key(&req) {
                    ck.w1.fail(
                        Some(s),
                        Some(req),
                        "requires attention again after acting without initialization".into(),
                    );
                } else if standing.contains_key(&req) {
                    ck.w1.record(true, Some(s), Some(req), String::new);
                }
            }
        }
        let served = delta.served.as_ref().map(|(r, _)| *r);
        ck.priority
            .record(served == expected, Some(s), served.or(expected), || {
                format!("served {served:?}, but the least requirement requiring attention is {expected:?}")
            });

        if let Some((req, what)) = &delta.served {
            let req = *req;
            last_change.insert(req, Some(stage));
            match what {
                Served::Define(v) => {
                    defines += 1;
                    let want = least_in_column_above(column(req), pre.floor());
                    ck.action.record(*v == want, Some(s), Some(req), || {
                        format!("defined {v}, least fresh value is {want}")
                    });
                    ck.w5.record(unpair(*v).0 == column(req), Some(s), Some(req), || {
                        format!("{v} lies in column {}, not {}", unpair(*v).0, column(req))
                    });
                    if let Some(f) = pre.floor() {
                        ck.w5.record(*v > f, Some(s), Some(req), || {
                            format!("{v} is not above used values and restraints ({f})")
                        });
                    }
                }
                Served::Act { param, restraint } => {
                    *acts.entry(req).or_default() += 1;
                    let n = acts_since_init.entry(req).or_default();
                    *n += 1;
                    let count = *n;
                    ck.w1.record(count <= 1, Some(s), Some(req), || {
                        format!("act number {count} since the last initialization")
                    });
                    ck.action.record(*restraint == param + 3, Some(s), Some(req), || {
                        format!("restraint {restraint} != {param} + 3")
                    });
                    let into_a = req.side == Side::R;
                    let want_enum = vec![(into_a, *param, true)];
                    ck.action
                        .record(delta.enumerations == want_enum, Some(s), Some(req), || {
                            format!(
                                "enumerations {:?}, expected {param} into {}",
                                delta.enumerations,
                                if into_a { "A" } else { "B" }
                            )
                        });
                    let mut after_serve = pre.clone();
                    *after_serve.requirements[req.index].slots(req.side).1 = Some(*restraint);
                    let want_init = after_serve.lower_defined(req);
                    ck.action
                        .record(delta.initialized == want_init, Some(s), Some(req), || {
                            format!("initialized {:?}, expected {:?}", delta.initialized, want_init)
                        });
                    standing.insert(
                        req,
                        Standing {
                            stage: s,
                            param: *param,
                            alpha: st.alpha.clone(),
                            beta: st.beta.clone(),
                        },
                    );
                }
            }
        } else {
            ck.action.record(
                delta.enumerations.is_empty() && delta.initialized.is_empty(),
                Some(s),
                None,
                || "changes without a served requirement".into(),
            );
        }
        for req in &delta.initialized {
            *inits.entry(*req).or_default() += 1;
            acts_since_init.remove(req);
            standing.remove(req);
            last_change.insert(*req, Some(stage));
        }
        let overlap = st.a.intersection(&st.b).next().copied();
        ck.w5.record(overlap.is_none(), Some(s), None, || {
            format!("{} lies in both A and B", overlap.unwrap_or_default())
        });

        // Margins and restraints for requirements standing after an act.
        for (req, sd) in &standing {
            if sd.stage == s {
                continue;
            }
            let margin = Rational::pow2_neg(sd.param + 2);
            let Some(v) = delta.observations.get(req) else {
                return Err(TraceError::Malformed {
                    stage,
                    message: format!("no observation for {req}, which has acted"),
                });
            };
            match req.side {
                Side::L => {
                    let bound = v - &margin;
                    ck.w2.record(diff < bound, Some(s), Some(*req), || {
                        format!("alpha - beta = {diff} is not < gamma - 2^-{} = {bound}", sd.param + 2)
                    });
                    let moved = &st.alpha - &sd.alpha;
                    ck.w3.record(moved < margin, Some(s), Some(*req), || {
                        format!("alpha moved by {moved} >= 2^-{} since stage {}", sd.param + 2, sd.stage)
                    });
                }
                Side::R => {
                    let bound = v + &margin;
                    ck.w2.record(diff > bound, Some(s), Some(*req), || {
                        format!("alpha - beta = {diff} is not > delta + 2^-{} = {bound}", sd.param + 2)
                    });
                    let moved = &st.beta - &sd.beta;
                    ck.w3.record(moved < margin, Some(s), Some(*req), || {
                        format!("beta moved by {moved} >= 2^-{} since stage {}", sd.param + 2, sd.stage)
                    });
                }
            }
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
    let mut positions: BTreeSet<Requirement> = acts.keys().copied().collect();
    positions.extend(inits.keys().copied());
    for req in positions {
        let k = req.priority();
        let a = acts.get(&req).copied().unwrap_or(0);
        let n = inits.get(&req).copied().unwrap_or(0);
        ck.w4.record(n <= pow2_sat(k).saturating_sub(1), None, Some(req), || {
            format!("initialized {n} times, bound 2^{k} - 1")
        });
        ck.w4.record(a <= pow2_sat(k), None, Some(req), || {
            format!("acted {a} times, bound 2^{k}")
        });
    }
    stats.extend(last_change.into_iter().filter(|(req, _)| observed.contains(req)).map(
        |(requirement, last_change)| Stabilization {
            requirement,
            last_change,
        },
    ));
    diagnostics.push(("defines".into(), defines.to_string()));
    diagnostics.push(("acts".into(), acts.values().sum::<u64>().to_string()));
    diagnostics.push(("initializations".into(), inits.values().sum::<u64>().to_string()));
    diagnostics.push(("|A|".into(), st.a.len().to_string()));
    diagnostics.push(("|B|".into(), st.b.len().to_string()));
    Ok(())
}
