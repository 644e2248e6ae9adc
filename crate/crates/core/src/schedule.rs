//! Step-size families for the discrete replicator and the price controller.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ScheduleFamily {
    /// `1/n`
    InvN,
    /// `1/(1 + n ln n)`
    InvNLogN,
    /// `1/n^2`
    InvNSq,
    Constant(f64),
}

impl ScheduleFamily {
    pub fn label(&self) -> String {
        match self {
            ScheduleFamily::InvN => "1/n".into(),
            ScheduleFamily::InvNLogN => "1/(1+n log n)".into(),
            ScheduleFamily::InvNSq => "1/n^2".into(),
            ScheduleFamily::Constant(h) => format!("constant({h})"),
        }
    }

    /// File-name friendly tag.
    pub fn slug(&self) -> String {
        match self {
            ScheduleFamily::InvN => "inv_n".into(),
            ScheduleFamily::InvNLogN => "inv_n_log_n".into(),
            ScheduleFamily::InvNSq => "inv_n_sq".into(),
            ScheduleFamily::Constant(h) => format!("constant_{h}"),
        }
    }
}

impl fmt::Display for ScheduleFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for ScheduleFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace(' ', "");
        match key.as_str() {
            "1/n" | "inv_n" | "invn" => Ok(ScheduleFamily::InvN),
            "1/(1+nlogn)" | "1/(1+nlog(n))" | "inv_n_log_n" | "invnlogn" => {
                Ok(ScheduleFamily::InvNLogN)
            }
            "1/n^2" | "1/n2" | "inv_n_sq" | "invnsq" => Ok(ScheduleFamily::InvNSq),
            _ => {
                let inner = key
                    .strip_prefix("constant(")
                    .and_then(|r| r.strip_suffix(')'))
                    .or_else(|| key.strip_prefix("constant:"))
                    .or_else(|| key.strip_prefix("constant_"));
                match inner.map(str::parse::<f64>) {
                    Some(Ok(h)) if h > 0.0 && h.is_finite() => Ok(ScheduleFamily::Constant(h)),
                    _ => Err(Error::UnsupportedSchedule(s.to_string())),
                }
            }
        }
    }
}

/// The three conditions on a step sequence `a(n)` under which the coupled
/// price/population iteration converges.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScheduleFlags {
    pub sums_to_infinity: bool,
    pub square_summable: bool,
    /// `1 / (n a(n)) -> 0`; `None` where the question is moot (finite step mass).
    pub slower_than_inv_n: Option<bool>,
}

impl ScheduleFlags {
    pub fn stochastic_approximation(&self) -> bool {
        self.sums_to_infinity && self.square_summable
    }

    pub fn two_timescale(&self) -> bool {
        self.stochastic_approximation() && self.slower_than_inv_n == Some(true)
    }
}

/// Step sequence `b(n) = base(n + offset)` for `n = 1, 2, ...`.
///
/// The offset only shifts where the sequence starts; it leaves every flag unchanged.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepSchedule {
    pub family: ScheduleFamily,
    pub offset: u64,
}

impl StepSchedule {
    pub fn new(family: ScheduleFamily) -> Self {
        StepSchedule { family, offset: 0 }
    }

    pub fn inv_n() -> Self {
        Self::new(ScheduleFamily::InvN)
    }

    pub fn inv_n_log_n() -> Self {
        Self::new(ScheduleFamily::InvNLogN)
    }

    pub fn inv_n_sq() -> Self {
        Self::new(ScheduleFamily::InvNSq)
    }

    pub fn constant(h: f64) -> Self {
        Self::new(ScheduleFamily::Constant(h))
    }

    pub fn with_offset(mut self, offset: u64) -> Self {
        self.offset = offset;
        self
    }

    /// Step at iteration `n >= 1`.
    pub fn step<T: Scalar>(&self, n: u64) -> T {
        let m = T::from_count(n + self.offset);
        match self.family {
            ScheduleFamily::InvN => m.recip(),
            ScheduleFamily::InvNLogN => (T::one() + m * m.ln()).recip(),
            ScheduleFamily::InvNSq => (m * m).recip(),
            ScheduleFamily::Constant(h) => T::lit(h),
        }
    }

    pub fn flags(&self) -> ScheduleFlags {
        validate_schedule(self.family)
    }
}

impl From<ScheduleFamily> for StepSchedule {
    fn from(family: ScheduleFamily) -> Self {
        StepSchedule::new(family)
    }
}

/// Analytic flags of a schedule family.
pub fn validate_schedule(family: ScheduleFamily) -> ScheduleFlags {
    match family {
        ScheduleFamily::InvN => ScheduleFlags {
            sums_to_infinity: true,
            square_summable: true,
            slower_than_inv_n: Some(false),
        },
        ScheduleFamily::InvNLogN => ScheduleFlags {
            sums_to_infinity: true,
            square_summable: true,
            slower_than_inv_n: Some(true),
        },
        ScheduleFamily::InvNSq => ScheduleFlags {
            sums_to_infinity: false,
            square_summable: true,
            slower_than_inv_n: None,
        },
        ScheduleFamily::Constant(_) => ScheduleFlags {
            sums_to_infinity: true,
            square_summable: false,
            slower_than_inv_n: Some(false),
        },
    }
}

/// Parses a family name and returns its flags.
pub fn validate_schedule_name(name: &str) -> Result<ScheduleFlags> {
    Ok(validate_schedule(name.parse()?))
}
