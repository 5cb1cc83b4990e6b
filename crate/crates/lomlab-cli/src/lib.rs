//! Batch front-end for `lomlab`: instance files in, JSON reports out.

pub mod corpus;
pub mod criteria;
pub mod ops;
pub mod report;
pub mod suite;

pub use ops::{Failure, Operation};

/// Exit status for a failed run.
pub mod exit {
    use lomlab::Error;

    pub const OK: i32 = 0;
    pub const INVALID: i32 = 2;
    pub const PRECONDITION: i32 = 3;
    pub const SUITE_FAILED: i32 = 4;

    pub fn for_error(e: &Error) -> i32 {
        if e.is_validation() {
            INVALID
        } else {
            PRECONDITION
        }
    }
}
