//! Report types and renderers shared between the `vibronic-qes` binary and
//! its integration tests.

pub mod report;
