use serde::Serialize;

use crate::cf::source::CoefficientSource;
use crate::error::Result;
use crate::moebius::{t_map, BoundaryPoint, MoebiusMap};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Recurrence,
    Composition,
}

/// Convergents `τ_n` for consecutive `n` starting at 1.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergentTrace {
    pub method: Method,
    pub indices: Vec<usize>,
    pub values: Vec<BoundaryPoint>,
    pub prec: u32,
}

impl ConvergentTrace {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `τ_n`, if `n` is in the trace.
    pub fn get(&self, n: usize) -> Option<&BoundaryPoint> {
        let first = *self.indices.first()?;
        self.values.get(n.checked_sub(first)?)
    }

    pub(crate) fn half_angles(&self) -> Vec<Scalar> {
        self.values.iter().map(|v| v.half_angle(self.prec)).collect()
    }
}

fn usable_len(src: &dyn CoefficientSource, n: usize) -> usize {
    src.len().map_or(n, |len| len.min(n))
}

/// `τ_n = T_{a₁}∘…∘T_{a_n}(0)` for `n = 1..=max_n`, accumulating the
/// product from the left.
pub fn trace_by_composition(src: &dyn CoefficientSource, max_n: usize) -> Result<ConvergentTrace> {
    let prec = src.prec();
    let n = usable_len(src, max_n);
    let zero = BoundaryPoint::Finite(Scalar::zero(prec));
    let mut product = MoebiusMap::identity(prec);
    let mut values = Vec::with_capacity(n);
    for i in 1..=n {
        product = product.compose(&t_map(&src.coefficient(i)?)?);
        values.push(product.apply_boundary(&zero));
    }
    Ok(ConvergentTrace {
        method: Method::Composition,
        indices: (1..=n).collect(),
        values,
        prec,
    })
}

/// `τ_n = p_n/q_n` from `p_k = p_{k−1} − a_k·p_{k−2}`, `q_k = q_{k−1} −
/// a_k·q_{k−2}`, seeded with `p₋₁ = 1, p₀ = 0, q₋₁ = 0, q₀ = 1`.
///
/// The four running values are rescaled together when they grow, which
/// leaves every ratio unchanged.
pub fn trace_by_recurrence(src: &dyn CoefficientSource, max_n: usize) -> Result<ConvergentTrace> {
    let prec = src.prec();
    let n = usable_len(src, max_n);
    let (mut p_prev, mut p) = (Scalar::one(prec), Scalar::zero(prec));
    let (mut q_prev, mut q) = (Scalar::zero(prec), Scalar::one(prec));
    let big = Scalar::pow2(64, prec);
    let mut values = Vec::with_capacity(n);
    for i in 1..=n {
        let a = src.coefficient(i)?;
        let p_next = &p - &a * &p_prev;
        let q_next = &q - &a * &q_prev;
        p_prev = p;
        q_prev = q;
        p = p_next;
        q = q_next;
        values.push(if q.is_zero() {
            BoundaryPoint::Infinity
        } else {
            BoundaryPoint::Finite(&p / &q)
        });
        let scale = p.abs().max(q.abs()).max(p_prev.abs()).max(q_prev.abs());
        if scale > big {
            for v in [&mut p, &mut q, &mut p_prev, &mut q_prev] {
                *v = &*v / &scale;
            }
        }
    }
    Ok(ConvergentTrace {
        method: Method::Recurrence,
        indices: (1..=n).collect(),
        values,
        prec,
    })
}

pub fn convergent_by_composition(src: &dyn CoefficientSource, n: usize) -> Result<BoundaryPoint> {
    last(trace_by_composition(src, n)?, n)
}

pub fn convergent_by_recurrence(src: &dyn CoefficientSource, n: usize) -> Result<BoundaryPoint> {
    last(trace_by_recurrence(src, n)?, n)
}

fn last(trace: ConvergentTrace, n: usize) -> Result<BoundaryPoint> {
    if trace.len() < n || n == 0 {
        return Err(crate::error::Error::IndexOutOfRange(n));
    }
    Ok(trace.values.into_iter().last().expect("non-empty"))
}
