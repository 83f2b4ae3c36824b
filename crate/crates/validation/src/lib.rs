//! Acceptance suite for `risnoma`; see `tests/acceptance.rs`.
