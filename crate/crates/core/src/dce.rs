//! Differences of left-c.e. reals at the approximation level.
//!
//! A [`DcReal`] is a pair of increasing streams `(left, right)` standing for
//! `lim left − lim right`. Sums, negation and differences act componentwise;
//! the product uses the four-term expansion, restricted to nonnegative
//! components so that both result components stay increasing.

use crate::rational::Rational;
use crate::stream::{ApproxStream, Direction, Stage, StreamError};

#[derive(Debug, Clone)]
pub struct DcReal {
    left: ApproxStream,
    right: ApproxStream,
}

impl DcReal {
    pub fn new(left: ApproxStream, right: ApproxStream) -> Result<Self, StreamError> {
        if left.direction() != Direction::Increasing || right.direction() != Direction::Increasing {
            return Err(StreamError::InvalidParameter(
                "both components of a d.c.e. real must be increasing".into(),
            ));
        }
        Ok(DcReal { left, right })
    }

    /// A left-c.e. real viewed as `x − 0`.
    pub fn from_left_ce(x: ApproxStream) -> Result<Self, StreamError> {
        Self::new(x, ApproxStream::zero())
    }

    pub fn left(&self) -> &ApproxStream {
        &self.left
    }

    pub fn right(&self) -> &ApproxStream {
        &self.right
    }

    pub fn left_mut(&mut self) -> &mut ApproxStream {
        &mut self.left
    }

    pub fn right_mut(&mut self) -> &mut ApproxStream {
        &mut self.right
    }

    /// `left(s) − right(s)`.
    pub fn value_at(&mut self, s: Stage) -> Result<Rational, StreamError> {
        let l = self.left.value(s)?;
        let r = self.right.value(s)?;
        Ok(l - r)
    }

    /// `value_at(t)` for every `t ≤ s`.
    pub fn values_to(&mut self, s: Stage) -> Result<Vec<Rational>, StreamError> {
        (0..=s).map(|t| self.value_at(t)).collect()
    }
}

pub fn dc_add(x: &DcReal, y: &DcReal) -> DcReal {
    DcReal {
        left: sum2(&x.left, &y.left),
        right: sum2(&x.right, &y.right),
    }
}

pub fn dc_neg(x: &DcReal) -> DcReal {
    DcReal {
        left: x.right.clone(),
        right: x.left.clone(),
    }
}

pub fn dc_sub(x: &DcReal, y: &DcReal) -> DcReal {
    dc_add(x, &dc_neg(y))
}

/// `(a − b)(c − d) = (ac + bd) − (ad + bc)`. Component values must be
/// nonnegative; a negative one surfaces as [`StreamError::NegativeFactor`]
/// when the product is materialized.
pub fn dc_mul(x: &DcReal, y: &DcReal) -> DcReal {
    let prod = |a: &ApproxStream, b: &ApproxStream, c: &ApproxStream, d: &ApproxStream| {
        ApproxStream::product_sum(vec![(a.clone(), b.clone()), (c.clone(), d.clone())])
            .expect("d.c.e. components are increasing")
    };
    DcReal {
        left: prod(&x.left, &y.left, &x.right, &y.right),
        right: prod(&x.left, &y.right, &x.right, &y.left),
    }
}

fn sum2(a: &ApproxStream, b: &ApproxStream) -> ApproxStream {
    ApproxStream::sum(vec![a.clone(), b.clone()]).expect("d.c.e. components are increasing")
}
