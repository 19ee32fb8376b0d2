//! Unit-testing programming exercises: generated from one declarative task
//! configuration, graded in a resource-limited sandbox, answered with
//! feedback (score, statistics, a failing example and a hint).
//!
//! The grading pipeline for one submission runs four phases:
//!
//! 1. pre-process: fill the task template with the learner's code fragment;
//! 2. generate: build the test suite and write `data.csv`;
//! 3. execute: run the learner's code over the suite, producing `data.res`;
//! 4. feedback: run the reference solution (`solution.res`), compare and
//!    synthesize the feedback document.

pub mod api;
pub mod cli;
pub mod codegen;
pub mod config;
pub mod grading;
pub mod runner;
pub mod sandbox;
pub mod taskstore;
pub mod testgen;
pub mod value;

pub use value::{parse_value, render_value, SemType, Value};
