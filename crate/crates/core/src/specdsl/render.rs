use std::fmt::Write;

use crate::rules::RuleSet;

/// Renders a rule set as spec text that parses back to an equal rule set.
pub fn render_spec(rules: &RuleSet) -> String {
    let c = rules.complex();
    let mut out = String::new();
    let _ = writeln!(out, "slots {};", c.slot_count());
    for l in c.labels() {
        let _ = writeln!(
            out,
            "diff {} up {} down {};",
            l.name, l.up_slot, l.down_slot
        );
    }
    for a in c.atoms() {
        let _ = writeln!(out, "atom {} {};", a.name, a.base_index);
    }
    for r in rules.max_order_rules() {
        let _ = writeln!(
            out,
            "maxorder {} on {} = {};",
            c.label_name(r.label),
            r.pattern.display(c),
            r.bound
        );
    }
    for r in rules.max_power_rules() {
        let _ = writeln!(out, "maxpower {} = {};", r.pattern.display(c), r.bound);
    }
    for ideal in rules.ideals() {
        let mut parts: Vec<String> = Vec::new();
        let members = ideal.members();
        let mut i = 0;
        while i < members.len() {
            let mut j = i;
            while j < members.len() && members[j] == members[i] {
                j += 1;
            }
            let shown = members[i].display(c).to_string();
            parts.push(if j - i > 1 {
                format!("{shown}^{}", j - i)
            } else {
                shown
            });
            i = j;
        }
        let _ = writeln!(out, "ideal {{ {} }};", parts.join(", "));
    }
    for ((a, b), v) in rules.commutations() {
        let _ = writeln!(
            out,
            "commute {} {} = {};",
            c.label_name(*a),
            c.label_name(*b),
            v
        );
    }
    for cond in rules.conditions() {
        let _ = writeln!(out, "cond {} = {};", cond.lhs.display(c), cond.rhs);
    }
    out
}
