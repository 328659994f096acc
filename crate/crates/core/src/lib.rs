// SPDX-License-Identifier: Apache-2.0

//! Twin a project's collaboration process into a multi-directed labeled graph
//! built from issue/forward event logs, and mine it.
//!
//! The pipeline runs in five stages:
//!
//! 1. [`ingest`] parses issue, forward and user exports, cleans them, joins
//!    the three record kinds and attaches label text.
//! 2. [`netbuild`] turns the enriched records into a [`netbuild::CollabGraph`]
//!    (one edge per forward), collapses it into weighted simple graphs and
//!    writes GML.
//! 3. [`metrics`] computes network statistics, degree/closeness/betweenness
//!    centralities and a Louvain community partition.
//! 4. [`fcu`] finds frequently collaborating user pairs from edge counts.
//! 5. [`rulemine`] mines Apriori association rules between forwards handled
//!    within the same issue.
//!
//! [`pipeline`] wires everything together and hosts the seeded synthetic log
//! generator used by the tests and the `collabtwin synth` subcommand.
//!
//! The heavy kernels (per-source shortest paths, itemset support counting) run
//! on rayon when the `parallel` feature is on (the default) and fall back to
//! plain iterators otherwise. Results are identical either way; see [`par`].

pub mod fcu;
pub mod ingest;
pub mod metrics;
pub mod netbuild;
pub mod par;
pub mod pipeline;
pub mod rulemine;

mod ids;

pub use ids::{ForwardId, IssueId, UserId};
pub use par::Parallelism;
