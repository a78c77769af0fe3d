//! A toy prefix-free machine and the dovetailed enumeration of its halting
//! probability.
//!
//! The machine `U` is "universal by adjunction" over a finite table of
//! sub-machines: a program `σ_e ∗ τ` is routed to sub-machine `M_e` with tail
//! `τ`. Each `M_e` is a three-register counter machine whose input is a
//! natural number read from `τ` through a self-delimiting code
//! (`1^k 0 w` with `|w| = k`). Since the dispatch prefixes are pairwise
//! incomparable and only complete codewords are accepted, the halting domain
//! is prefix-free by construction.
//!
//! Stage `s` of the enumeration runs every program of length `≤ L` for
//! `bound(s) = s` steps; `ω_s` sums `2^-|p|` over the programs found halting.

use std::fmt;

use thiserror::Error;

use crate::rational::Rational;

pub type Bits = Vec<bool>;

pub const REGISTERS: usize = 3;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OmegaError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("dispatch prefixes {0:?} and {1:?} are comparable")]
    PrefixConflict(String, String),
    #[error("sub-machine {name:?}: {message}")]
    BadSubMachine { name: String, message: String },
    #[error("halting programs {0} and {1} are comparable: domain is not prefix-free")]
    NotPrefixFree(String, String),
    #[error("Kraft sum reached {0} at stage {1}")]
    KraftViolation(Rational, usize),
    #[error("unknown bundled machine {0:?}")]
    UnknownMachine(String),
    #[error("maximum program length must be at least 1")]
    ZeroLength,
}

/// Counter-machine instruction set (eight opcodes over three registers).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Inc(usize),
    /// Saturates at zero.
    Dec(usize),
    Clr(usize),
    Jz(usize, usize),
    Jnz(usize, usize),
    Jmp(usize),
    /// Halt if the register is zero, otherwise fall through.
    Hz(usize),
    Halt,
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Op::Inc(r) => write!(f, "inc r{r}"),
            Op::Dec(r) => write!(f, "dec r{r}"),
            Op::Clr(r) => write!(f, "clr r{r}"),
            Op::Jz(r, t) => write!(f, "jz r{r} {t}"),
            Op::Jnz(r, t) => write!(f, "jnz r{r} {t}"),
            Op::Jmp(t) => write!(f, "jmp {t}"),
            Op::Hz(r) => write!(f, "hz r{r}"),
            Op::Halt => write!(f, "halt"),
        }
    }
}

/// Register file and program counter of one computation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecState {
    pub pc: usize,
    pub regs: [u64; REGISTERS],
    pub steps: u64,
    pub halted: bool,
}

impl ExecState {
    pub fn with_input(n: u64) -> Self {
        ExecState {
            pc: 0,
            regs: [n, 0, 0],
            steps: 0,
            halted: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubMachine {
    pub name: String,
    pub code: Vec<Op>,
}

impl SubMachine {
    pub fn new(name: impl Into<String>, code: Vec<Op>) -> Result<Self, OmegaError> {
        let name = name.into();
        let len = code.len();
        for op in &code {
            let (reg, target) = match *op {
                Op::Inc(r) | Op::Dec(r) | Op::Clr(r) | Op::Hz(r) => (Some(r), None),
                Op::Jz(r, t) | Op::Jnz(r, t) => (Some(r), Some(t)),
                Op::Jmp(t) => (None, Some(t)),
                Op::Halt => (None, None),
            };
            if reg.is_some_and(|r| r >= REGISTERS) {
                return Err(OmegaError::BadSubMachine {
                    name,
                    message: format!("register out of range in `{op}`"),
                });
            }
            if target.is_some_and(|t| t > len) {
                return Err(OmegaError::BadSubMachine {
                    name,
                    message: format!("jump target out of range in `{op}`"),
                });
            }
        }
        Ok(SubMachine { name, code })
    }

    /// Executes one instruction. Running off the end of the code acts as
    /// `halt`. Returns `true` once the computation has halted.
    pub fn step(&self, st: &mut ExecState) -> bool {
        if st.halted {
            return true;
        }
        st.steps += 1;
        let Some(&op) = self.code.get(st.pc) else {
            st.halted = true;
            return true;
        };
        match op {
            Op::Inc(r) => {
                st.regs[r] = st.regs[r].saturating_add(1);
                st.pc += 1;
            }
            Op::Dec(r) => {
                st.regs[r] = st.regs[r].saturating_sub(1);
                st.pc += 1;
            }
            Op::Clr(r) => {
                st.regs[r] = 0;
                st.pc += 1;
            }
            Op::Jz(r, t) => st.pc = if st.regs[r] == 0 { t } else { st.pc + 1 },
            Op::Jnz(r, t) => st.pc = if st.regs[r] != 0 { t } else { st.pc + 1 },
            Op::Jmp(t) => st.pc = t,
            Op::Hz(r) => {
                if st.regs[r] == 0 {
                    st.halted = true;
                } else {
                    st.pc += 1;
                }
            }
            Op::Halt => st.halted = true,
        }
        st.halted
    }

    /// Runs on tail `τ` for at most `budget` steps.
    pub fn run(&self, tail: &[bool], budget: u64) -> Outcome {
        match decode_input(tail) {
            None => Outcome::Undefined,
            Some(n) => self.run_on(n, budget),
        }
    }

    pub fn run_on(&self, n: u64, budget: u64) -> Outcome {
        let mut st = ExecState::with_input(n);
        while st.steps < budget {
            if self.step(&mut st) {
                return Outcome::Halted {
                    steps: st.steps,
                    regs: st.regs,
                };
            }
        }
        Outcome::Running
    }

    /// Every intermediate state, starting with the initial one.
    pub fn trace(&self, tail: &[bool], budget: u64) -> Option<Vec<ExecState>> {
        let n = decode_input(tail)?;
        let mut st = ExecState::with_input(n);
        let mut out = vec![st.clone()];
        while st.steps < budget && !st.halted {
            self.step(&mut st);
            out.push(st.clone());
        }
        Some(out)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    /// Not a complete program: no dispatch prefix matches, or the tail is not
    /// exactly one codeword. Such programs never halt.
    Undefined,
    Halted {
        steps: u64,
        regs: [u64; REGISTERS],
    },
    /// Budget exhausted without halting.
    Running,
}

impl Outcome {
    pub fn halted_within(&self, budget: u64) -> bool {
        matches!(self, Outcome::Halted { steps, .. } if *steps <= budget)
    }
}

/// Self-delimiting code for naturals: `n = 2^k - 1 + value(w)` is written
/// `1^k 0 w` with `|w| = k`. Bijective onto the codeword set.
pub fn encode_input(n: u64) -> Bits {
    let m = n + 1;
    let k = 63 - m.leading_zeros() as usize;
    let mut out = vec![true; k];
    out.push(false);
    for b in (0..k).rev() {
        out.push((m >> b) & 1 == 1);
    }
    out
}

/// Inverse of [`encode_input`]; `None` unless `bits` is exactly one codeword.
pub fn decode_input(bits: &[bool]) -> Option<u64> {
    let k = bits.iter().take_while(|&&b| b).count();
    if k >= 63 || bits.len() != 2 * k + 1 {
        return None;
    }
    let mut m: u64 = 1;
    for &b in &bits[k + 1..] {
        m = (m << 1) | b as u64;
    }
    Some(m - 1)
}

pub fn bits_to_string(bits: &[bool]) -> String {
    if bits.is_empty() {
        return "ε".to_string();
    }
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

fn is_prefix(a: &[bool], b: &[bool]) -> bool {
    a.len() <= b.len() && b[..a.len()] == *a
}

/// `U` together with its dispatch table `σ_e ↦ M_e`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToyMachine {
    pub name: String,
    entries: Vec<(Bits, SubMachine)>,
}

impl ToyMachine {
    pub fn new(name: impl Into<String>, entries: Vec<(Bits, SubMachine)>) -> Result<Self, OmegaError> {
        for (i, (a, _)) in entries.iter().enumerate() {
            for (b, _) in &entries[i + 1..] {
                if is_prefix(a, b) || is_prefix(b, a) {
                    return Err(OmegaError::PrefixConflict(bits_to_string(a), bits_to_string(b)));
                }
            }
        }
        Ok(ToyMachine {
            name: name.into(),
            entries,
        })
    }

    pub fn entries(&self) -> &[(Bits, SubMachine)] {
        &self.entries
    }

    /// Index of the sub-machine whose prefix starts `program`, and the tail.
    pub fn dispatch<'p>(&self, program: &'p [bool]) -> Option<(usize, &'p [bool])> {
        self.entries
            .iter()
            .position(|(sigma, _)| is_prefix(sigma, program))
            .map(|e| (e, &program[self.entries[e].0.len()..]))
    }

    pub fn run(&self, program: &[bool], budget: u64) -> Outcome {
        match self.dispatch(program) {
            None => Outcome::Undefined,
            Some((e, tail)) => self.entries[e].1.run(tail, budget),
        }
    }

    pub fn trace(&self, program: &[bool], budget: u64) -> Option<Vec<ExecState>> {
        let (e, tail) = self.dispatch(program)?;
        self.entries[e].1.trace(tail, budget)
    }

    /// All complete programs of length `≤ max_len`, in dispatch-table order.
    pub fn programs_up_to(&self, max_len: usize) -> Vec<(usize, Bits, u64)> {
        let mut out = Vec::new();
        for (e, (sigma, _)) in self.entries.iter().enumerate() {
            let mut k = 0usize;
            while sigma.len() + 2 * k < max_len && k < 62 {
                let first = (1u64 << k) - 1;
                for n in first..first + (1u64 << k) {
                    let mut p = sigma.clone();
                    p.extend(encode_input(n));
                    out.push((e, p, n));
                }
                k += 1;
            }
        }
        out
    }

    /// Parses the textual machine format:
    ///
    /// ```text
    /// # comment
    /// machine staggered
    /// sub 0 fast
    ///   hz r0
    ///   jmp 1
    /// end
    /// ```
    ///
    /// `sub` takes the dispatch prefix (`-` for the empty prefix) and an
    /// optional name.
    pub fn parse(text: &str) -> Result<Self, OmegaError> {
        let mut name = String::from("unnamed");
        let mut entries = Vec::new();
        let mut current: Option<(Bits, String, Vec<Op>)> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| OmegaError::Parse { line: line_no, message };
            let words: Vec<&str> = line.split_whitespace().collect();
            match words[0] {
                "machine" if current.is_none() => {
                    name = words
                        .get(1)
                        .ok_or_else(|| err("machine needs a name".into()))?
                        .to_string();
                }
                "sub" if current.is_none() => {
                    let prefix = words.get(1).ok_or_else(|| err("sub needs a prefix".into()))?;
                    let bits = parse_bits(prefix).ok_or_else(|| err(format!("bad prefix {prefix:?}")))?;
                    let sub_name = words
                        .get(2)
                        .map(|s| s.to_string())
                        .unwrap_or_else(|| format!("M{}", entries.len()));
                    current = Some((bits, sub_name, Vec::new()));
                }
                "end" => {
                    let (bits, sub_name, code) = current.take().ok_or_else(|| err("`end` outside sub".into()))?;
                    entries.push((bits, SubMachine::new(sub_name, code)?));
                }
                _ => {
                    let Some((_, _, code)) = current.as_mut() else {
                        return Err(err(format!("unexpected {:?}", words[0])));
                    };
                    code.push(parse_op(&words).map_err(err)?);
                }
            }
        }
        if current.is_some() {
            return Err(OmegaError::Parse {
                line: text.lines().count(),
                message: "missing `end`".into(),
            });
        }
        ToyMachine::new(name, entries)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("machine {}\n", self.name);
        for (sigma, sub) in &self.entries {
            let prefix = if sigma.is_empty() {
                "-".to_string()
            } else {
                bits_to_string(sigma)
            };
            out.push_str(&format!("sub {prefix} {}\n", sub.name));
            for op in &sub.code {
                out.push_str(&format!("  {op}\n"));
            }
            out.push_str("end\n");
        }
        out
    }
}

fn parse_bits(s: &str) -> Option<Bits> {
    if s == "-" {
        return Some(Vec::new());
    }
    s.chars()
        .map(|c| match c {
            '0' => Some(false),
            '1' => Some(true),
            _ => None,
        })
        .collect()
}

fn parse_op(words: &[&str]) -> Result<Op, String> {
    let reg = |i: usize| -> Result<usize, String> {
        let w = words.get(i).ok_or_else(|| format!("`{}` needs a register", words[0]))?;
        w.strip_prefix('r')
            .and_then(|n| n.parse().ok())
            .ok_or_else(|| format!("bad register {w:?}"))
    };
    let target = |i: usize| -> Result<usize, String> {
        let w = words.get(i).ok_or_else(|| format!("`{}` needs a target", words[0]))?;
        w.parse().map_err(|_| format!("bad jump target {w:?}"))
    };
    let op = match words[0] {
        "inc" => Op::Inc(reg(1)?),
        "dec" => Op::Dec(reg(1)?),
        "clr" => Op::Clr(reg(1)?),
        "jz" => Op::Jz(reg(1)?, target(2)?),
        "jnz" => Op::Jnz(reg(1)?, target(2)?),
        "jmp" => Op::Jmp(target(1)?),
        "hz" => Op::Hz(reg(1)?),
        "halt" => Op::Halt,
        other => return Err(format!("unknown opcode {other:?}")),
    };
    Ok(op)
}

const SINGLE: &str = "\
machine single
# only the program `0` halts, after one step
sub - zero
  hz r0
  jmp 1
end
";

const STAGGERED: &str = "\
machine staggered
# three halting programs: 00 at step 1, 100 at step 4, 110 at step 7
sub 0 fast
  hz r0
  jmp 1
end
sub 10 medium
  jnz r0 4
  inc r1
  inc r1
  halt
  jmp 4
end
sub 11 slow
  jnz r0 7
  inc r1
  inc r1
  inc r1
  inc r1
  inc r1
  halt
  jmp 7
end
";

const SILENT: &str = "\
machine silent
sub - spin
  jmp 0
end
";

const DEFAULT: &str = "\
machine default
sub 00 countdown
  jz r0 3
  dec r0
  jmp 0
  halt
end
sub 01 even
  jz r0 5
  dec r0
  jz r0 6
  dec r0
  jmp 0
  halt
  jmp 6
end
sub 10 doubling
  inc r1
  jz r0 12
  dec r0
  jz r1 8
  dec r1
  inc r2
  inc r2
  jmp 3
  jz r2 1
  dec r2
  inc r1
  jmp 8
  jz r1 15
  dec r1
  jmp 12
  halt
end
sub 11 mod3
  jz r0 7
  dec r0
  jz r0 8
  dec r0
  jz r0 7
  dec r0
  jmp 0
  halt
  jmp 8
end
";

const MIRROR: &str = "\
machine mirror
sub 0 doubling
  inc r1
  jz r0 12
  dec r0
  jz r1 8
  dec r1
  inc r2
  inc r2
  jmp 3
  jz r2 1
  dec r2
  inc r1
  jmp 8
  jz r1 15
  dec r1
  jmp 12
  halt
end
sub 10 odd
  jz r0 6
  dec r0
  jz r0 5
  dec r0
  jmp 0
  halt
  jmp 6
end
sub 110 countdown
  jz r0 3
  dec r0
  jmp 0
  halt
end
sub 111 mod3
  jz r0 7
  dec r0
  jz r0 8
  dec r0
  jz r0 7
  dec r0
  jmp 0
  halt
  jmp 8
end
";

pub const BUNDLED: &[&str] = &["default", "mirror", "single", "staggered", "silent"];

pub fn bundled(name: &str) -> Result<ToyMachine, OmegaError> {
    let text = match name {
        "default" => DEFAULT,
        "mirror" => MIRROR,
        "single" => SINGLE,
        "staggered" => STAGGERED,
        "silent" => SILENT,
        other => return Err(OmegaError::UnknownMachine(other.to_string())),
    };
    ToyMachine::parse(text)
}

/// Incremental dovetailed enumeration of `ω_s`.
#[derive(Debug, Clone)]
pub struct OmegaEnumeration {
    machine: ToyMachine,
    max_len: usize,
    running: Vec<(usize, Bits, ExecState)>,
    halted: Vec<(Bits, u64)>,
    values: Vec<Rational>,
}

impl OmegaEnumeration {
    pub fn new(machine: ToyMachine, max_len: usize) -> Result<Self, OmegaError> {
        if max_len == 0 {
            return Err(OmegaError::ZeroLength);
        }
        let running = machine
            .programs_up_to(max_len)
            .into_iter()
            .map(|(e, p, n)| (e, p, ExecState::with_input(n)))
            .collect();
        Ok(OmegaEnumeration {
            machine,
            max_len,
            running,
            halted: Vec::new(),
            values: vec![Rational::zero()],
        })
    }

    pub fn machine(&self) -> &ToyMachine {
        &self.machine
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    /// Programs found halting so far with their halting step.
    pub fn halted(&self) -> &[(Bits, u64)] {
        &self.halted
    }

    /// `ω_s`, running the dovetailing schedule forward as needed.
    pub fn value(&mut self, s: usize) -> Result<Rational, OmegaError> {
        while self.values.len() <= s {
            self.advance_stage()?;
        }
        Ok(self.values[s].clone())
    }

    fn advance_stage(&mut self) -> Result<(), OmegaError> {
        let stage = self.values.len();
        let mut omega = self.values[stage - 1].clone();
        let mut still = Vec::with_capacity(self.running.len());
        for (e, p, mut st) in std::mem::take(&mut self.running) {
            if self.machine.entries[e].1.step(&mut st) {
                for (q, _) in &self.halted {
                    if is_prefix(q, &p) || is_prefix(&p, q) {
                        return Err(OmegaError::NotPrefixFree(bits_to_string(q), bits_to_string(&p)));
                    }
                }
                omega += &Rational::pow2_neg(p.len() as u64);
                self.halted.push((p, st.steps));
            } else {
                still.push((e, p, st));
            }
        }
        self.running = still;
        if omega >= Rational::one() {
            return Err(OmegaError::KraftViolation(omega, stage));
        }
        self.values.push(omega);
        Ok(())
    }
}

/// `ω_s` computed from scratch: every bit string of length `≤ max_len` is
/// run through `U` for `bound(s) = s` steps.
pub fn enumerate_omega(machine: &ToyMachine, max_len: usize, s: usize) -> Result<Rational, OmegaError> {
    if max_len == 0 {
        return Err(OmegaError::ZeroLength);
    }
    let mut omega = Rational::zero();
    let mut halting: Vec<Bits> = Vec::new();
    for len in 0..=max_len {
        for code in 0..(1u64 << len) {
            let p: Bits = (0..len).rev().map(|b| (code >> b) & 1 == 1).collect();
            if machine.run(&p, s as u64).halted_within(s as u64) {
                omega += &Rational::pow2_neg(len as u64);
                halting.push(p);
            }
        }
    }
    for (i, a) in halting.iter().enumerate() {
        for b in &halting[i + 1..] {
            if is_prefix(a, b) || is_prefix(b, a) {
                return Err(OmegaError::NotPrefixFree(bits_to_string(a), bits_to_string(b)));
            }
        }
    }
    if omega >= Rational::one() {
        return Err(OmegaError::KraftViolation(omega, s));
    }
    Ok(omega)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn input_code_round_trip_and_lengths() {
        assert_eq!(encode_input(0), vec![false]);
        assert_eq!(encode_input(1), vec![true, false, false]);
        assert_eq!(encode_input(2), vec![true, false, true]);
        assert_eq!(encode_input(3).len(), 5);
        for n in 0..2000 {
            assert_eq!(decode_input(&encode_input(n)), Some(n));
        }
        assert_eq!(decode_input(&[]), None);
        assert_eq!(decode_input(&[false, false]), None);
        assert_eq!(decode_input(&[true, false]), None);
    }

    #[test]
    fn single_halt_machine() {
        let m = bundled("single").unwrap();
        let mut en = OmegaEnumeration::new(m.clone(), 9).unwrap();
        assert_eq!(en.value(0).unwrap(), Rational::zero());
        for s in 1..20 {
            assert_eq!(en.value(s).unwrap(), Rational::frac(1, 2));
            assert_eq!(enumerate_omega(&m, 9, s).unwrap(), Rational::frac(1, 2));
        }
    }

    #[test]
    fn silent_machine_is_zero() {
        let m = bundled("silent").unwrap();
        let mut en = OmegaEnumeration::new(m.clone(), 11).unwrap();
        for s in 0..50 {
            assert_eq!(en.value(s).unwrap(), Rational::zero());
        }
        assert_eq!(enumerate_omega(&m, 11, 49).unwrap(), Rational::zero());
    }

    #[test]
    fn staggered_jumps_match_brute_force() {
        let m = bundled("staggered").unwrap();
        // Oracle: halting times of each complete program, found by running
        // every bit string independently.
        let mut halts: Vec<(usize, u64)> = Vec::new();
        for len in 0..=9usize {
            for code in 0..(1u64 << len) {
                let p: Bits = (0..len).rev().map(|b| (code >> b) & 1 == 1).collect();
                if let Outcome::Halted { steps, .. } = m.run(&p, 1000) {
                    halts.push((len, steps));
                }
            }
        }
        assert_eq!(halts, vec![(2, 1), (3, 4), (3, 7)]);
        let mut en = OmegaEnumeration::new(m, 9).unwrap();
        let expected = |s: u64| {
            halts
                .iter()
                .filter(|(_, t)| *t <= s)
                .fold(Rational::zero(), |acc, (len, _)| acc + Rational::pow2_neg(*len as u64))
        };
        for s in 0..12 {
            assert_eq!(en.value(s).unwrap(), expected(s as u64), "stage {s}");
        }
        assert_eq!(en.value(1).unwrap(), Rational::frac(1, 4));
        assert_eq!(en.value(4).unwrap(), Rational::frac(3, 8));
        assert_eq!(en.value(7).unwrap(), Rational::frac(1, 2));
    }

    #[test]
    fn incremental_agrees_with_from_scratch() {
        for name in ["default", "mirror"] {
            let m = bundled(name).unwrap();
            let mut en = OmegaEnumeration::new(m.clone(), 10).unwrap();
            for s in [0, 1, 2, 5, 9, 17, 40] {
                assert_eq!(
                    en.value(s).unwrap(),
                    enumerate_omega(&m, 10, s).unwrap(),
                    "{name} s={s}"
                );
            }
        }
    }

    #[test]
    fn comparable_prefixes_rejected() {
        let text = "sub 0\n halt\nend\nsub 01\n halt\nend\n";
        assert!(matches!(ToyMachine::parse(text), Err(OmegaError::PrefixConflict(_, _))));
    }

    #[test]
    fn parse_errors_name_the_line() {
        let err = ToyMachine::parse("sub 1\n  frob r0\nend\n").unwrap_err();
        assert!(matches!(err, OmegaError::Parse { line: 2, .. }));
        assert!(ToyMachine::parse("sub 1\n inc r7\nend\n").is_err());
        assert!(ToyMachine::parse("sub 1\n jmp 9\nend\n").is_err());
        assert!(ToyMachine::parse("sub 1\n halt\n").is_err());
    }

    #[test]
    fn text_format_round_trips() {
        for name in BUNDLED {
            let m = bundled(name).unwrap();
            assert_eq!(ToyMachine::parse(&m.to_text()).unwrap(), m);
        }
    }

    #[test]
    fn doubling_machine_runs_exponentially() {
        let m = bundled("default").unwrap();
        let sub = &m.entries()[2].1;
        let t = |n| match sub.run_on(n, 1 << 20) {
            Outcome::Halted { steps, regs } => {
                assert_eq!(regs, [0, 0, 0]);
                steps
            }
            _ => panic!("should halt"),
        };
        // Iteration k costs 13·2^k + 4 steps, clearing r1 costs 3·2^n + 1.
        for n in 0..12u64 {
            assert_eq!(t(n), 16 * (1 << n) + 4 * n - 9, "n = {n}");
        }
    }
}
