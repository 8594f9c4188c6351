//! Holds no code. The acceptance checks live in `tests/acceptance.rs`; this
//! package sorts last in the workspace so `cargo test` runs them after every
//! other test binary.
