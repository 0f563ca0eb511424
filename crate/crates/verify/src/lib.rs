//! Acceptance suite for the acceptance criteria; see `tests/acceptance.rs`.
