//! Real-valued operation counters used for complexity accounting.

use std::ops::{Add, AddAssign};

/// Multiplications, divisions, exponentials and logarithms on real numbers.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OpCounters {
    pub mul: u64,
    pub div: u64,
    pub exp: u64,
    pub log: u64,
}

impl OpCounters {
    pub fn is_zero(&self) -> bool {
        *self == OpCounters::default()
    }
}

impl AddAssign for OpCounters {
    fn add_assign(&mut self, rhs: Self) {
        self.mul += rhs.mul;
        self.div += rhs.div;
        self.exp += rhs.exp;
        self.log += rhs.log;
    }
}

impl Add for OpCounters {
    type Output = OpCounters;

    fn add(mut self, rhs: Self) -> Self {
        self += rhs;
        self
    }
}

/// Counters split by receiver stage.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StageOps {
    pub detector: OpCounters,
    pub decoder: OpCounters,
    pub bridge: OpCounters,
}

impl StageOps {
    pub fn total(&self) -> OpCounters {
        self.detector + self.decoder + self.bridge
    }
}

impl AddAssign for StageOps {
    fn add_assign(&mut self, rhs: Self) {
        self.detector += rhs.detector;
        self.decoder += rhs.decoder;
        self.bridge += rhs.bridge;
    }
}

/// Operation counts per symbol as floating point values, used for predictions
/// and averaged measurements.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct OpRates {
    pub mul: f64,
    pub div: f64,
    pub exp: f64,
    pub log: f64,
}

impl OpRates {
    pub fn from_counts(ops: OpCounters, per: f64) -> Self {
        OpRates {
            mul: ops.mul as f64 / per,
            div: ops.div as f64 / per,
            exp: ops.exp as f64 / per,
            log: ops.log as f64 / per,
        }
    }

    pub fn scale(self, factor: f64) -> Self {
        OpRates {
            mul: self.mul * factor,
            div: self.div * factor,
            exp: self.exp * factor,
            log: self.log * factor,
        }
    }
}

impl Add for OpRates {
    type Output = OpRates;

    fn add(self, rhs: Self) -> Self {
        OpRates {
            mul: self.mul + rhs.mul,
            div: self.div + rhs.div,
            exp: self.exp + rhs.exp,
            log: self.log + rhs.log,
        }
    }
}
