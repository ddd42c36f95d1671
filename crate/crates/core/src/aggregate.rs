//! Mergeable aggregate states.
//!
//! States are created from their first input, so a stored state is never
//! empty. Integer sums accumulate in 128 bits and are range-checked against
//! `i64` when a cube is produced; that makes the overflow outcome a function of
//! the input multiset alone, not of partitioning or merge order. Real sums
//! carry a Neumaier compensation term.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::schema::MeasureKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AggFn {
    Sum,
    Count,
    Min,
    Max,
    Mean,
}

impl AggFn {
    pub const ALL: [AggFn; 5] = [AggFn::Sum, AggFn::Count, AggFn::Min, AggFn::Max, AggFn::Mean];

    pub fn as_str(self) -> &'static str {
        match self {
            AggFn::Sum => "sum",
            AggFn::Count => "count",
            AggFn::Min => "min",
            AggFn::Max => "max",
            AggFn::Mean => "mean",
        }
    }
}

impl fmt::Display for AggFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A finalized measure value as it appears in cells and result documents.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Int(i64),
    Real(f64),
}

impl Value {
    pub fn as_f64(self) -> f64 {
        match self {
            Value::Int(v) => v as f64,
            Value::Real(v) => v,
        }
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => a == b,
            (Value::Real(a), Value::Real(b)) => a.to_bits() == b.to_bits(),
            _ => false,
        }
    }
}

impl Eq for Value {}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Real(v) => write!(f, "{v}"),
        }
    }
}

#[inline]
fn neumaier_add(sum: &mut f64, comp: &mut f64, v: f64) {
    let t = *sum + v;
    if sum.abs() >= v.abs() {
        *comp += (*sum - t) + v;
    } else {
        *comp += (v - t) + *sum;
    }
    *sum = t;
}

#[derive(Debug, Clone, Copy)]
enum Acc {
    Count(u64),
    IntSum { sum: i128, count: u64 },
    RealSum { sum: f64, comp: f64, count: u64 },
    IntExt(i64),
    RealExt(f64),
}

/// Running aggregate of one measure under one function.
#[derive(Debug, Clone, Copy)]
pub struct AggState {
    func: AggFn,
    acc: Acc,
}

impl AggState {
    pub fn from_int(func: AggFn, v: i64) -> Self {
        let acc = match func {
            AggFn::Count => Acc::Count(1),
            AggFn::Sum | AggFn::Mean => Acc::IntSum {
                sum: v as i128,
                count: 1,
            },
            AggFn::Min | AggFn::Max => Acc::IntExt(v),
        };
        Self { func, acc }
    }

    pub fn from_real(func: AggFn, v: f64) -> Self {
        let acc = match func {
            AggFn::Count => Acc::Count(1),
            AggFn::Sum | AggFn::Mean => Acc::RealSum {
                sum: v,
                comp: 0.0,
                count: 1,
            },
            AggFn::Min | AggFn::Max => Acc::RealExt(v),
        };
        Self { func, acc }
    }

    pub fn func(&self) -> AggFn {
        self.func
    }

    /// Input kind this state accumulates; `None` for counts, which carry no values.
    pub fn kind(&self) -> Option<MeasureKind> {
        match self.acc {
            Acc::Count(_) => None,
            Acc::IntSum { .. } | Acc::IntExt(_) => Some(MeasureKind::Integer),
            Acc::RealSum { .. } | Acc::RealExt(_) => Some(MeasureKind::Real),
        }
    }

    #[inline]
    pub fn push_int(&mut self, v: i64) {
        match &mut self.acc {
            Acc::Count(c) => *c += 1,
            Acc::IntSum { sum, count } => {
                *sum += v as i128;
                *count += 1;
            }
            Acc::IntExt(x) => {
                if (self.func == AggFn::Min && v < *x) || (self.func == AggFn::Max && v > *x) {
                    *x = v;
                }
            }
            Acc::RealSum { .. } | Acc::RealExt(_) => debug_assert!(false, "integer into real state"),
        }
    }

    #[inline]
    pub fn push_real(&mut self, v: f64) {
        match &mut self.acc {
            Acc::Count(c) => *c += 1,
            Acc::RealSum { sum, comp, count } => {
                neumaier_add(sum, comp, v);
                *count += 1;
            }
            Acc::RealExt(x) => {
                if (self.func == AggFn::Min && v < *x) || (self.func == AggFn::Max && v > *x) {
                    *x = v;
                }
            }
            Acc::IntSum { .. } | Acc::IntExt(_) => debug_assert!(false, "real into integer state"),
        }
    }

    /// Folds `other` into `self`. Returns false (and leaves `self` untouched)
    /// when the two states do not share a function and input kind.
    pub fn merge(&mut self, other: &AggState) -> bool {
        if self.func != other.func {
            return false;
        }
        match (&mut self.acc, &other.acc) {
            (Acc::Count(a), Acc::Count(b)) => *a += b,
            (Acc::IntSum { sum, count }, Acc::IntSum { sum: s, count: c }) => {
                *sum += s;
                *count += c;
            }
            (
                Acc::RealSum { sum, comp, count },
                Acc::RealSum {
                    sum: s,
                    comp: k,
                    count: c,
                },
            ) => {
                neumaier_add(sum, comp, *s);
                *comp += k;
                *count += c;
            }
            (Acc::IntExt(a), Acc::IntExt(b)) => {
                if (self.func == AggFn::Min && b < a) || (self.func == AggFn::Max && b > a) {
                    *a = *b;
                }
            }
            (Acc::RealExt(a), Acc::RealExt(b)) => {
                if (self.func == AggFn::Min && b < a) || (self.func == AggFn::Max && b > a) {
                    *a = *b;
                }
            }
            _ => return false,
        }
        true
    }

    /// Number of inputs folded into sum, mean and count states.
    pub fn count(&self) -> Option<u64> {
        match self.acc {
            Acc::Count(c) | Acc::IntSum { count: c, .. } | Acc::RealSum { count: c, .. } => Some(c),
            Acc::IntExt(_) | Acc::RealExt(_) => None,
        }
    }

    /// Exact integer sum, if this is an integer sum/mean state.
    pub fn int_sum(&self) -> Option<i128> {
        match self.acc {
            Acc::IntSum { sum, .. } => Some(sum),
            _ => None,
        }
    }

    /// False when an integer sum no longer fits in 64 bits.
    pub fn in_range(&self) -> bool {
        match self.acc {
            Acc::IntSum { sum, .. } if self.func == AggFn::Sum => i64::try_from(sum).is_ok(),
            _ => true,
        }
    }

    /// Finalized value. Means are realized as a quotient only here.
    ///
    /// Integer sums outside the `i64` range saturate; cube construction
    /// rejects them before they can be observed.
    pub fn finalize(&self) -> Value {
        match (self.func, self.acc) {
            (_, Acc::Count(c)) => Value::Int(c as i64),
            (AggFn::Mean, Acc::IntSum { sum, count }) => {
                let n = count as i128;
                let (q, r) = (sum / n, sum % n);
                Value::Real(q as f64 + r as f64 / count as f64)
            }
            (_, Acc::IntSum { sum, .. }) => {
                Value::Int(sum.clamp(i64::MIN as i128, i64::MAX as i128) as i64)
            }
            (AggFn::Mean, Acc::RealSum { sum, comp, count }) => {
                Value::Real((sum + comp) / count as f64)
            }
            (_, Acc::RealSum { sum, comp, .. }) => Value::Real(sum + comp),
            (_, Acc::IntExt(v)) => Value::Int(v),
            (_, Acc::RealExt(v)) => Value::Real(v),
        }
    }
}

impl PartialEq for Acc {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Acc::Count(a), Acc::Count(b)) => a == b,
            (Acc::IntSum { sum: a, count: c }, Acc::IntSum { sum: b, count: d }) => a == b && c == d,
            (
                Acc::RealSum {
                    sum: a,
                    comp: c,
                    count: n,
                },
                Acc::RealSum {
                    sum: b,
                    comp: d,
                    count: m,
                },
            ) => a.to_bits() == b.to_bits() && c.to_bits() == d.to_bits() && n == m,
            (Acc::IntExt(a), Acc::IntExt(b)) => a == b,
            (Acc::RealExt(a), Acc::RealExt(b)) => a.to_bits() == b.to_bits(),
            _ => false,
        }
    }
}

/// Bitwise equality: real components compare by their bit patterns.
impl PartialEq for AggState {
    fn eq(&self, other: &Self) -> bool {
        self.func == other.func && self.acc == other.acc
    }
}

impl Eq for AggState {}
