// SPDX-License-Identifier: Apache-2.0

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::io::{self, Write};

use serde::Serialize;

use super::{FrequentItemsets, Itemset, MiningError};
use crate::netbuild::LabelAxis;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiningParams {
    pub min_support: f64,
    pub min_confidence: f64,
    pub min_lift: f64,
    pub labeled: bool,
    pub label_axis: LabelAxis,
}

impl Default for MiningParams {
    fn default() -> Self {
        MiningParams { min_support: 0.014, min_confidence: 0.75, min_lift: 3.0, labeled: false, label_axis: LabelAxis::Level }
    }
}

impl MiningParams {
    pub fn validate(&self) -> Result<(), MiningError> {
        if self.min_support.is_nan() || self.min_support <= 0.0 || self.min_support > 1.0 {
            return Err(MiningError::Support(self.min_support));
        }
        if !(0.0..=1.0).contains(&self.min_confidence) {
            return Err(MiningError::Confidence(self.min_confidence));
        }
        if self.min_lift.is_nan() || self.min_lift < 0.0 {
            return Err(MiningError::Lift(self.min_lift));
        }
        Ok(())
    }
}

/// `antecedent => consequent` with its scores and the counts they came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssociationRule {
    pub antecedent: Itemset,
    pub consequent: Itemset,
    pub support: f64,
    pub confidence: f64,
    pub lift: f64,
    pub joint_count: u64,
    pub antecedent_count: u64,
    pub consequent_count: u64,
    pub denominator: u64,
}

impl AssociationRule {
    fn score(antecedent: Itemset, consequent: Itemset, joint: u64, a: u64, b: u64, n: u64) -> Self {
        // Lift from counts so that a rule and its mirror get the same bits.
        let lift = (joint as u128 * n as u128) as f64 / (a as u128 * b as u128) as f64;
        AssociationRule {
            antecedent,
            consequent,
            support: joint as f64 / n as f64,
            confidence: joint as f64 / a as f64,
            lift,
            joint_count: joint,
            antecedent_count: a,
            consequent_count: b,
            denominator: n,
        }
    }

    /// Every item of the rule, sorted.
    pub fn pattern(&self) -> Itemset {
        self.antecedent.union(&self.consequent)
    }

    fn cmp_lift(&self, other: &Self) -> Ordering {
        let l =
            self.joint_count as u128 * other.antecedent_count as u128 * other.consequent_count as u128 * self.denominator as u128;
        let r =
            other.joint_count as u128 * self.antecedent_count as u128 * self.consequent_count as u128 * other.denominator as u128;
        l.cmp(&r)
    }

    fn cmp_support(&self, other: &Self) -> Ordering {
        (self.joint_count as u128 * other.denominator as u128).cmp(&(other.joint_count as u128 * self.denominator as u128))
    }
}

impl fmt::Display for AssociationRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} => {}", self.antecedent, self.consequent)
    }
}

/// Scores every split of every frequent itemset with two or more items.
/// Sorted by lift, then support (both descending), then rule text.
pub fn generate_rules(frequent: &FrequentItemsets, params: &MiningParams) -> Vec<AssociationRule> {
    let n = frequent.denominator();
    let mut rules = Vec::new();
    for (itemset, joint) in frequent.iter().filter(|(s, _)| s.len() >= 2) {
        if (joint as f64 / n as f64) < params.min_support {
            continue;
        }
        let items = itemset.items();
        let k = items.len();
        for mask in 1..(1u64 << k) - 1 {
            let pick = |inside: bool| Itemset::new((0..k).filter(|&i| (mask >> i & 1 == 1) == inside).map(|i| items[i].clone()));
            let (ea, eb) = (pick(true), pick(false));
            let (Some(a), Some(b)) = (frequent.count(&ea), frequent.count(&eb)) else {
                continue;
            };
            let rule = AssociationRule::score(ea, eb, joint, a, b, n);
            if rule.confidence >= params.min_confidence && rule.lift >= params.min_lift {
                rules.push(rule);
            }
        }
    }
    rules.sort_by(|x, y| y.cmp_lift(x).then_with(|| y.cmp_support(x)).then_with(|| x.to_string().cmp(&y.to_string())));
    rules
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RuleViolation {
    pub rule: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub checked: usize,
    pub mirror_pairs: usize,
    pub violations: Vec<RuleViolation>,
}

impl ConsistencyReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

const IDENTITY_TOLERANCE: f64 = 1e-9;

/// Recomputes confidence and lift from the itemset supports in `frequent`
/// and checks that mirror rules agree on support and lift.
pub fn verify_rule_consistency(rules: &[AssociationRule], frequent: &FrequentItemsets) -> ConsistencyReport {
    let mut report = ConsistencyReport { checked: rules.len(), ..Default::default() };
    let mut flag = |rule: &AssociationRule, message: String| {
        report.violations.push(RuleViolation { rule: rule.to_string(), message });
    };
    for r in rules {
        let (Some(s_ab), Some(s_a), Some(s_b)) =
            (frequent.support(&r.pattern()), frequent.support(&r.antecedent), frequent.support(&r.consequent))
        else {
            flag(r, "itemset missing from the frequent table".into());
            continue;
        };
        if r.antecedent.is_empty() || r.consequent.is_empty() || !r.antecedent.is_disjoint(&r.consequent) {
            flag(r, "antecedent and consequent must be nonempty and disjoint".into());
        }
        if (r.support - s_ab).abs() > IDENTITY_TOLERANCE {
            flag(r, format!("support {} differs from itemset support {s_ab}", r.support));
        }
        if !(r.support > 0.0 && r.support <= r.confidence + IDENTITY_TOLERANCE && r.confidence <= 1.0 + IDENTITY_TOLERANCE) {
            flag(r, format!("expected 0 < support <= confidence <= 1, got {} and {}", r.support, r.confidence));
        }
        let conf = s_ab / s_a;
        if (r.confidence - conf).abs() > IDENTITY_TOLERANCE {
            flag(r, format!("confidence {} but support ratio gives {conf}", r.confidence));
        }
        let lift = r.confidence / s_b;
        if r.lift.is_nan() || r.lift <= 0.0 || (r.lift - lift).abs() > IDENTITY_TOLERANCE * lift.max(1.0) {
            flag(r, format!("lift {} but confidence / consequent support gives {lift}", r.lift));
        }
    }
    let index: BTreeMap<(&Itemset, &Itemset), &AssociationRule> =
        rules.iter().map(|r| ((&r.antecedent, &r.consequent), r)).collect();
    for r in rules {
        let Some(m) = index.get(&(&r.consequent, &r.antecedent)) else { continue };
        if r.antecedent > r.consequent {
            continue;
        }
        report.mirror_pairs += 1;
        if r.support != m.support || r.lift != m.lift {
            flag(r, format!("mirror {m} has support {} lift {} vs {} {}", m.support, m.lift, r.support, r.lift));
        }
    }
    report
}

#[derive(Serialize)]
struct RuleRecord<'a> {
    pattern: Itemset,
    antecedent: &'a Itemset,
    consequent: &'a Itemset,
    support: f64,
    confidence: f64,
    lift: f64,
    joint_count: u64,
    antecedent_count: u64,
    consequent_count: u64,
    denominator: u64,
}

impl<'a> From<&'a AssociationRule> for RuleRecord<'a> {
    fn from(r: &'a AssociationRule) -> Self {
        RuleRecord {
            pattern: r.pattern(),
            antecedent: &r.antecedent,
            consequent: &r.consequent,
            support: r.support,
            confidence: r.confidence,
            lift: r.lift,
            joint_count: r.joint_count,
            antecedent_count: r.antecedent_count,
            consequent_count: r.consequent_count,
            denominator: r.denominator,
        }
    }
}

/// CSV with columns `pattern,antecedent,consequent,support,confidence,lift`,
/// rounded to 5, 4 and 2 decimals.
pub fn write_rules_csv<W: Write>(rules: &[AssociationRule], sink: W) -> io::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(sink);
    w.write_record(["pattern", "antecedent", "consequent", "support", "confidence", "lift"])?;
    for r in rules {
        w.write_record([
            r.pattern().to_string(),
            r.antecedent.to_string(),
            r.consequent.to_string(),
            format!("{:.5}", r.support),
            format!("{:.4}", r.confidence),
            format!("{:.2}", r.lift),
        ])?;
    }
    w.flush()
}

/// JSON array of rules at full precision, with their counts.
pub fn write_rules_json<W: Write>(rules: &[AssociationRule], mut sink: W) -> io::Result<()> {
    let records: Vec<RuleRecord> = rules.iter().map(RuleRecord::from).collect();
    serde_json::to_writer_pretty(&mut sink, &records)?;
    sink.write_all(b"\n")
}
