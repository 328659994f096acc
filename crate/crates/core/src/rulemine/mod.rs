// SPDX-License-Identifier: Apache-2.0

//! Association rules between forwards that occur within the same issue.
//!
//! Each issue becomes a transaction whose items are the forwards handled in
//! it (`"src->dst"`, or `"src->dst:LABEL"` in labeled mode). Apriori finds the
//! frequent itemsets and [`generate_rules`] scores every split of each one.
//!
//! ```
//! use collabtwin::rulemine::{apriori_frequent, generate_rules, MiningParams, Transaction};
//! use collabtwin::IssueId;
//!
//! let tx: Vec<Transaction> = [["1->2", "2->1"], ["1->2", "2->1"], ["3->4", "4->5"]]
//!     .iter()
//!     .enumerate()
//!     .map(|(i, items)| Transaction::new(IssueId(i as u64), items.iter().copied()))
//!     .collect();
//! let frequent = apriori_frequent(&tx, 0.5).unwrap();
//! let params = MiningParams { min_support: 0.5, min_confidence: 0.75, min_lift: 1.2, ..Default::default() };
//! let rules = generate_rules(&frequent, &params);
//! assert_eq!(rules.len(), 2);
//! assert_eq!(rules[0].to_string(), "{'1->2'} => {'2->1'}");
//! ```

mod apriori;
mod rules;
mod transactions;

pub use apriori::*;
pub use rules::*;
pub use transactions::*;
