//! Command implementations and the report server behind the `auditboard` binary.

pub mod commands;
pub mod server;
