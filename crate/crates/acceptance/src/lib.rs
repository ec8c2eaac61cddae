//! Oracles and fixtures shared by the acceptance report and the core
//! integration suites.

#[path = "../../core/tests/common/mod.rs"]
pub mod oracle;
