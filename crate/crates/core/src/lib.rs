//! Exact-arithmetic laboratory for left-c.e., right-c.e. and d.c.e. reals.
//!
//! Streams of rationals stand for computably approximable reals; on top of
//! them sit Solovay-reducibility checks, the approximation speedup, a toy
//! halting-probability enumerator, and two stage-by-stage priority
//! constructions that write replayable traces and verify them.

pub mod cli;
pub mod config;
pub mod dce;
pub mod engine;
pub mod lemma2;
pub mod omega;
pub mod prop3;
pub mod rational;
pub mod report;
pub mod solovay;
pub mod stream;
pub mod trace;

pub use engine::EngineError;
pub use rational::Rational;
pub use stream::{AdversarySuite, ApproxStream, Direction, Side, Stage};
