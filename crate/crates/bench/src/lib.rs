//! Benchmarks and the fixture generator for `devcert`.
