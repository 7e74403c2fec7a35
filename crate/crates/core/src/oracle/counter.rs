use std::ops::Sub;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EntryPoint {
    Value,
    Gradient,
    Hessian,
    ThirdDirectional,
    HessianTrace,
}

/// Per-entry-point call tallies. Safe to bump from several threads at once.
#[derive(Debug, Default)]
pub struct CallCounter {
    value: AtomicU64,
    gradient: AtomicU64,
    hessian: AtomicU64,
    third: AtomicU64,
    trace: AtomicU64,
}

impl CallCounter {
    pub fn new() -> Self {
        Self::default()
    }

    fn slot(&self, entry: EntryPoint) -> &AtomicU64 {
        match entry {
            EntryPoint::Value => &self.value,
            EntryPoint::Gradient => &self.gradient,
            EntryPoint::Hessian => &self.hessian,
            EntryPoint::ThirdDirectional => &self.third,
            EntryPoint::HessianTrace => &self.trace,
        }
    }

    pub fn bump(&self, entry: EntryPoint) {
        self.slot(entry).fetch_add(1, Ordering::Relaxed);
    }

    pub fn get(&self, entry: EntryPoint) -> u64 {
        self.slot(entry).load(Ordering::Relaxed)
    }

    pub fn snapshot(&self) -> CallCounts {
        CallCounts {
            value: self.get(EntryPoint::Value),
            gradient: self.get(EntryPoint::Gradient),
            hessian: self.get(EntryPoint::Hessian),
            third_directional: self.get(EntryPoint::ThirdDirectional),
            hessian_trace: self.get(EntryPoint::HessianTrace),
        }
    }

    pub fn reset(&self) {
        for e in [
            EntryPoint::Value,
            EntryPoint::Gradient,
            EntryPoint::Hessian,
            EntryPoint::ThirdDirectional,
            EntryPoint::HessianTrace,
        ] {
            self.slot(e).store(0, Ordering::Relaxed);
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallCounts {
    pub value: u64,
    pub gradient: u64,
    pub hessian: u64,
    pub third_directional: u64,
    pub hessian_trace: u64,
}

impl CallCounts {
    pub fn total(&self) -> u64 {
        self.value + self.gradient + self.hessian + self.third_directional + self.hessian_trace
    }
}

impl Sub for CallCounts {
    type Output = CallCounts;

    fn sub(self, rhs: CallCounts) -> CallCounts {
        CallCounts {
            value: self.value - rhs.value,
            gradient: self.gradient - rhs.gradient,
            hessian: self.hessian - rhs.hessian,
            third_directional: self.third_directional - rhs.third_directional,
            hessian_trace: self.hessian_trace - rhs.hessian_trace,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bumps_are_per_slot() {
        let c = CallCounter::new();
        c.bump(EntryPoint::Value);
        c.bump(EntryPoint::Hessian);
        c.bump(EntryPoint::Hessian);
        let s = c.snapshot();
        assert_eq!(s.value, 1);
        assert_eq!(s.hessian, 2);
        assert_eq!(s.total(), 3);
        c.reset();
        assert_eq!(c.snapshot().total(), 0);
    }

    #[test]
    fn concurrent_bumps_are_not_lost() {
        let c = CallCounter::new();
        std::thread::scope(|s| {
            for _ in 0..4 {
                s.spawn(|| {
                    for _ in 0..1000 {
                        c.bump(EntryPoint::Gradient);
                    }
                });
            }
        });
        assert_eq!(c.get(EntryPoint::Gradient), 4000);
    }
}
