//! IO companion to `qsdp-core`: JSON schemas for matrices, problems, instance
//! specs and solve reports, CSV trace emission, run manifests, and the
//! command implementations behind the `qsdp` binary.

pub mod commands;
pub mod schema;

/// Exit code conventions of every subcommand.
pub mod exit_codes {
    pub const OK: i32 = 0;
    pub const INPUT_ERROR: i32 = 1;
    pub const MAX_ITERS: i32 = 2;
    pub const DIVERGED: i32 = 3;
    pub const NUMERICAL_FAILURE: i32 = 4;
}
