//! Acceptance checks for `fraclap-dyadic`. The checks live in
//! `tests/acceptance.rs` and print one PASS or FAIL line per criterion:
//!
//! ```text
//! cargo test -p fraclap-validation --test acceptance
//! ```
