use crate::error::{Error, Result};

pub const DEFAULT_BUDGET: u64 = 10_000_000;
pub const BUDGET_ENV: &str = "RECUR_BUDGET";

/// Enumeration cap, `RECUR_BUDGET` when set and parseable, else 10^7.
pub fn enumeration_budget() -> u64 {
    std::env::var(BUDGET_ENV)
        .ok()
        .and_then(|v| v.trim().replace('_', "").parse::<u64>().ok())
        .unwrap_or(DEFAULT_BUDGET)
}

pub fn check(needed: u128, budget: u64) -> Result<()> {
    if needed > u128::from(budget) {
        return Err(Error::Budget { needed, budget });
    }
    Ok(())
}

/// Running counter that fails once `budget` units have been spent.
#[derive(Debug, Clone)]
pub struct Meter {
    spent: u64,
    budget: u64,
}

impl Meter {
    pub fn new(budget: u64) -> Self {
        Meter { spent: 0, budget }
    }

    pub fn from_env() -> Self {
        Meter::new(enumeration_budget())
    }

    pub fn spend(&mut self, n: u64) -> Result<()> {
        self.spent = self.spent.saturating_add(n);
        check(self.spent.into(), self.budget)
    }

    pub fn spent(&self) -> u64 {
        self.spent
    }
}
