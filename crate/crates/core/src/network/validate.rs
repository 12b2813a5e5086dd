use std::collections::HashSet;
use std::fmt;

use num_complex::Complex64;

use super::Network;
use crate::linalg::is_finite;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    DuplicateId,
    DanglingReference,
    PositiveBase,
    PositiveFrequency,
    PositiveKv,
    NoSource,
    SourceImpedance,
    BranchImpedance,
    BranchLength,
    SelfLoop,
    OrderedSpan,
    SelfCoupling,
    CouplingValue,
    RelayOrientation,
    RelaySetting,
}

impl Rule {
    pub fn name(&self) -> &'static str {
        match self {
            Rule::DuplicateId => "duplicate-id",
            Rule::DanglingReference => "dangling-reference",
            Rule::PositiveBase => "positive-base",
            Rule::PositiveFrequency => "positive-frequency",
            Rule::PositiveKv => "positive-kv",
            Rule::NoSource => "no-source",
            Rule::SourceImpedance => "source-impedance",
            Rule::BranchImpedance => "branch-impedance",
            Rule::BranchLength => "branch-length",
            Rule::SelfLoop => "self-loop",
            Rule::OrderedSpan => "ordered-span",
            Rule::SelfCoupling => "self-coupling",
            Rule::CouplingValue => "coupling-value",
            Rule::RelayOrientation => "relay-orientation",
            Rule::RelaySetting => "relay-setting",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    /// Offending element, e.g. `branch L1`.
    pub element: String,
    pub rule: Rule,
    /// For dangling references, the kind of the missing target.
    pub kind: &'static str,
    /// For dangling references, the missing id; otherwise a description.
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.rule {
            Rule::DanglingReference => write!(
                f,
                "{}: [{}] references undefined {} `{}`",
                self.element,
                self.rule.name(),
                self.kind,
                self.detail
            ),
            _ => write!(f, "{}: [{}] {}", self.element, self.rule.name(), self.detail),
        }
    }
}

fn nonzero_finite(z: Complex64) -> bool {
    is_finite(z) && z.norm() > 0.0
}

/// Check every network invariant; an empty result means the network is valid.
pub fn validate(n: &Network) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |element: String, rule: Rule, kind: &'static str, detail: String| {
        out.push(Violation {
            element,
            rule,
            kind,
            detail,
        })
    };

    if !(n.base_mva > 0.0 && n.base_mva.is_finite()) {
        push("network".into(), Rule::PositiveBase, "network", format!("base_mva = {}", n.base_mva));
    }
    if !(n.frequency_hz > 0.0 && n.frequency_hz.is_finite()) {
        push(
            "network".into(),
            Rule::PositiveFrequency,
            "network",
            format!("frequency_hz = {}", n.frequency_hz),
        );
    }

    let mut ids = HashSet::new();
    for b in &n.buses {
        if !ids.insert(b.id.as_str()) {
            push(format!("bus {}", b.id), Rule::DuplicateId, "bus", "duplicate bus id".into());
        }
        if !(b.kv > 0.0 && b.kv.is_finite()) {
            push(format!("bus {}", b.id), Rule::PositiveKv, "bus", format!("kv = {}", b.kv));
        }
    }
    let bus_exists = |id: &str| n.buses.iter().any(|b| b.id == id);

    if n.sources.is_empty() {
        push("network".into(), Rule::NoSource, "network", "at least one source required".into());
    }
    let mut source_ids = HashSet::new();
    for s in &n.sources {
        let el = format!("source {}", s.id);
        if !source_ids.insert(s.id.as_str()) {
            push(el.clone(), Rule::DuplicateId, "source", "duplicate source id".into());
        }
        if !bus_exists(&s.bus) {
            push(el.clone(), Rule::DanglingReference, "bus", s.bus.clone());
        }
        if !nonzero_finite(s.z1) || !nonzero_finite(s.z0) {
            push(el.clone(), Rule::SourceImpedance, "source", "z1 and z0 must be finite and non-zero".into());
        }
        if !is_finite(s.emf) {
            push(el, Rule::SourceImpedance, "source", "emf must be finite".into());
        }
    }

    let mut branch_ids = HashSet::new();
    for b in &n.branches {
        let el = format!("branch {}", b.id);
        if !branch_ids.insert(b.id.as_str()) {
            push(el.clone(), Rule::DuplicateId, "branch", "duplicate branch id".into());
        }
        for bus in [&b.from_bus, &b.to_bus] {
            if !bus_exists(bus) {
                push(el.clone(), Rule::DanglingReference, "bus", bus.clone());
            }
        }
        if b.from_bus == b.to_bus {
            push(el.clone(), Rule::SelfLoop, "branch", "from_bus equals to_bus".into());
        }
        if !nonzero_finite(b.z1) || !nonzero_finite(b.z0) {
            push(el.clone(), Rule::BranchImpedance, "branch", "z1 and z0 must be finite and non-zero".into());
        }
        if !(b.length_km > 0.0 && b.length_km.is_finite()) {
            push(el, Rule::BranchLength, "branch", format!("length_km = {}", b.length_km));
        }
    }
    let branch_exists = |id: &str| n.branches.iter().any(|b| b.id == id);

    for c in &n.couplings {
        let el = format!("coupling {}", c.name());
        for id in [&c.branch_a, &c.branch_b] {
            if !branch_exists(id) {
                push(el.clone(), Rule::DanglingReference, "branch", id.clone());
            }
        }
        if c.branch_a == c.branch_b {
            push(el.clone(), Rule::SelfCoupling, "coupling", "a branch cannot couple with itself".into());
        }
        for (name, span) in [("span_a", c.span_a), ("span_b", c.span_b)] {
            if !span.is_ordered() {
                push(
                    el.clone(),
                    Rule::OrderedSpan,
                    "coupling",
                    format!("{name} ({}, {}) must satisfy 0 <= from < to <= 1", span.from, span.to),
                );
            }
        }
        if !is_finite(c.z0m) {
            push(el, Rule::CouplingValue, "coupling", "z0m must be finite".into());
        }
    }

    let mut relay_ids = HashSet::new();
    for r in &n.relays {
        let el = format!("relay {}", r.id);
        if !relay_ids.insert(r.id.as_str()) {
            push(el.clone(), Rule::DuplicateId, "relay", "duplicate relay id".into());
        }
        if !branch_exists(&r.point.branch) {
            push(el.clone(), Rule::DanglingReference, "branch", r.point.branch.clone());
        }
        if r.point.orientation != 1.0 && r.point.orientation != -1.0 {
            push(el.clone(), Rule::RelayOrientation, "relay", "orientation must be +1 or -1".into());
        }
        if let Some(g) = &r.goc {
            if let Err(m) = g.check() {
                push(el.clone(), Rule::RelaySetting, "relay", format!("goc: {m}"));
            }
        }
        if let Some(d) = &r.distance {
            if let Err(m) = d.check() {
                push(el.clone(), Rule::RelaySetting, "relay", format!("distance: {m}"));
            }
        }
        if let Some(p) = &r.pilot {
            if let Err(m) = p.config.check() {
                push(el.clone(), Rule::RelaySetting, "relay", format!("pilot: {m}"));
            }
            if !n.relays.iter().any(|x| x.id == p.remote) {
                push(el.clone(), Rule::DanglingReference, "relay", p.remote.clone());
            }
        }
    }

    if let Some(s) = &n.study {
        if let Some(b) = &s.monitored_branch {
            if !branch_exists(b) {
                push("study".into(), Rule::DanglingReference, "branch", b.clone());
            }
        }
        for r in [&s.primary_relay, &s.backup_relay, &s.reach_relay, &s.pilot_relay]
            .into_iter()
            .flatten()
        {
            if !n.relays.iter().any(|x| &x.id == r) {
                push("study".into(), Rule::DanglingReference, "relay", r.clone());
            }
        }
    }
    out
}
