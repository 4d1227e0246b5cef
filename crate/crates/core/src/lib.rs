//! Regret-minimizing convex optimization from noisy function values.

pub mod confint;
pub mod geometry;
pub mod oracle;
pub mod bandit1d;
pub mod banditnd;
pub mod harness;
