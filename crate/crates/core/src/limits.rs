use std::time::{Duration, Instant};

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum LimitError {
    #[error("node budget of {0} terms exhausted")]
    NodeBudget(usize),
    #[error("deadline reached")]
    Deadline,
}

/// Resource bounds shared by every search in the crate.
#[derive(Debug, Clone, Copy)]
pub struct Limits {
    pub node_budget: usize,
    pub deadline: Option<Instant>,
}

impl Limits {
    pub const DEFAULT_NODE_BUDGET: usize = 100_000;

    pub fn new(node_budget: usize) -> Self {
        Limits { node_budget, deadline: None }
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.deadline = Some(Instant::now() + timeout);
        self
    }

    pub fn check_deadline(&self) -> Result<(), LimitError> {
        match self.deadline {
            Some(d) if Instant::now() >= d => Err(LimitError::Deadline),
            _ => Ok(()),
        }
    }

    pub fn check_nodes(&self, n: usize) -> Result<(), LimitError> {
        if n > self.node_budget {
            return Err(LimitError::NodeBudget(self.node_budget));
        }
        self.check_deadline()
    }
}

impl Default for Limits {
    fn default() -> Self {
        Limits::new(Self::DEFAULT_NODE_BUDGET)
    }
}
