//! Built-in table of worked identities and closed products, checked against the engine.

use mcde_core::oracle::{collapse, positional_expand, PositionedProduct};
use mcde_core::sample::{random_product, random_rules, ProductShape};
use mcde_core::{
    hierarchy, is_closed, parse_expr, parse_spec, transfer_cancel, Expression, LabelId, Mode,
    Monomial, RuleSet,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Shared declarations. `e` comes first so it sorts before `d` inside words.
pub const HEADER: &str =
    "slots 2; diff e up 2 down 2; diff d up 1 down 1; atom phi; atom psi; atom chi;";

/// An identity obtained by differentiating a vanishing seed along `path`.
pub struct IdentityCase {
    pub tag: &'static str,
    pub rules: &'static str,
    pub seed: &'static str,
    pub path: &'static [&'static str],
    /// Expected rendering; `0` when the identity is trivial or cancels.
    pub expected: &'static str,
    /// Apply transfer cancellation before comparing.
    pub transfer: bool,
}

/// A product closed under `label`. Each line of `rules` is one rule; dropping
/// any one of them must break closure.
pub struct ClosureCase {
    pub tag: &'static str,
    pub rules: &'static str,
    pub candidate: &'static str,
    pub label: &'static str,
    pub mode: Mode,
}

pub const IDENTITY_CASES: &[IdentityCase] = &[
    IdentityCase {
        tag: "pair-ideal",
        rules: "ideal { phi, psi };",
        seed: "{phi, psi}",
        path: &["d"],
        expected: "{[d]phi, psi} + {phi, [d]psi}",
        transfer: false,
    },
    IdentityCase {
        tag: "pair-ideal-two-labels",
        rules: "ideal { phi, psi }; commute d e = 0; commute e d = 0;",
        seed: "{phi, psi}",
        path: &["d", "e"],
        expected: "{[d]phi, [e]psi} + {[e]phi, [d]psi}",
        transfer: false,
    },
    IdentityCase {
        tag: "pair-ideal-two-labels-transfer",
        rules: "ideal { phi, psi }; commute d e = 0; commute e d = 0;",
        seed: "{phi, psi}",
        path: &["d", "e"],
        expected: "0",
        transfer: true,
    },
    IdentityCase {
        tag: "power",
        rules: "maxpower phi = 3;",
        seed: "{phi^3}",
        path: &["d"],
        expected: "3*{[d]phi, phi^2}",
        transfer: false,
    },
    IdentityCase {
        tag: "power-second-layer",
        rules: "maxpower phi = 3; commute e d = 0;",
        seed: "{phi^3}",
        path: &["d", "e"],
        expected: "6*{[d]phi, [e]phi, phi}",
        transfer: false,
    },
    IdentityCase {
        tag: "power-second-layer-trivial",
        rules: "maxpower phi = 3; commute e d = 0; ideal { [d]phi, [e]phi };",
        seed: "{phi^3}",
        path: &["d", "e"],
        expected: "0",
        transfer: false,
    },
    IdentityCase {
        tag: "derivative-power",
        rules: "maxpower [d]phi = 2;",
        seed: "{[d]phi^2, phi}",
        path: &["d"],
        expected: "2*{[d^2]phi, [d]phi, phi}",
        transfer: false,
    },
    IdentityCase {
        tag: "derivative-power-two-atoms",
        rules: "maxpower [d]phi = 2;",
        seed: "{[d]phi^2, [d]psi}",
        path: &["d"],
        expected: "2*{[d^2]phi, [d]phi, [d]psi}",
        transfer: false,
    },
    IdentityCase {
        tag: "derivative-power-two-atoms-trivial",
        rules: "maxpower [d]phi = 2; maxorder d on phi = 2;",
        seed: "{[d]phi^2, [d]psi}",
        path: &["d"],
        expected: "0",
        transfer: false,
    },
    IdentityCase {
        tag: "mixed-power",
        rules: "maxpower psi = 2;",
        seed: "{phi, psi^2}",
        path: &["d"],
        expected: "2*{phi, [d]psi, psi}",
        transfer: false,
    },
];

pub const CLOSURE_CASES: &[ClosureCase] = &[
    ClosureCase {
        tag: "one-label/first-order-bound",
        rules: "maxorder d on phi = 1;",
        candidate: "{phi^2}",
        label: "d",
        mode: Mode::Plain,
    },
    ClosureCase {
        tag: "one-label/first-derivative-power",
        rules: "maxorder d on phi = 2;",
        candidate: "{[d]phi^2}",
        label: "d",
        mode: Mode::Plain,
    },
    ClosureCase {
        tag: "one-label/first-derivative-with-atom",
        rules: "maxorder d on phi = 2;\nmaxpower [d]phi = 3;",
        candidate: "{[d]phi^2, phi}",
        label: "d",
        mode: Mode::Plain,
    },
    ClosureCase {
        tag: "higher-order/top-derivative",
        rules: "maxorder d on phi = 3;",
        candidate: "{[d^2]phi^2}",
        label: "d",
        mode: Mode::Plain,
    },
    ClosureCase {
        tag: "higher-order/derivative-with-atom",
        rules: "maxorder d on phi = 2;\nmaxpower [d]phi = 2;",
        candidate: "{[d]phi, phi^3}",
        label: "d",
        mode: Mode::Plain,
    },
    ClosureCase {
        tag: "powers/top-order",
        rules: "maxorder d on phi = 4;",
        candidate: "{[d^3]phi^2}",
        label: "d",
        mode: Mode::Plain,
    },
    ClosureCase {
        tag: "powers/adjacent-pair-ideals",
        rules: "ideal { [d^2]phi, [d]phi };\nideal { [d^4]phi, [d^3]phi };",
        candidate: "{[d]phi^2, [d^3]phi^2}",
        label: "d",
        mode: Mode::Plain,
    },
    ClosureCase {
        tag: "powers/adjacent-power-ideal",
        rules: "ideal { [d^2]phi, [d]phi^2 };",
        candidate: "{[d]phi^3}",
        label: "d",
        mode: Mode::Plain,
    },
    ClosureCase {
        tag: "powers/cross-pair-ideals",
        rules: "ideal { [d^2]phi, [d^3]phi };\nideal { [d^4]phi, [d]phi };",
        candidate: "{[d]phi, [d^3]phi}",
        label: "d",
        mode: Mode::Plain,
    },
    ClosureCase {
        tag: "powers/cross-power-ideal",
        rules: "ideal { [d^2]phi, [d^3]phi^2 };\nmaxorder d on phi = 4;",
        candidate: "{[d]phi, [d^3]phi^2}",
        label: "d",
        mode: Mode::Plain,
    },
    ClosureCase {
        tag: "powers/two-level-bounds",
        rules: "maxorder d on phi = 3;\nmaxpower [d^2]phi = 3;",
        candidate: "{[d^2]phi^2, [d]phi^2}",
        label: "d",
        mode: Mode::Plain,
    },
    ClosureCase {
        tag: "powers/two-level-ideal",
        rules: "maxorder d on phi = 3;\nideal { [d^2]phi^2 };",
        candidate: "{[d^2]phi, [d]phi}",
        label: "d",
        mode: Mode::Plain,
    },
    ClosureCase {
        tag: "two-labels/outer-bound",
        rules: "maxorder d on [e]phi = 1;\nmaxorder d on phi = 2;\nmaxpower [d]phi = 2;",
        candidate: "{[e]phi, [d]phi, phi^2}",
        label: "d",
        mode: Mode::Plain,
    },
    ClosureCase {
        tag: "two-labels/nested-bound",
        rules: "maxorder d on [e d]phi = 1;\nmaxorder d on phi = 2;\nmaxpower [d]phi = 2;",
        candidate: "{[e d]phi, [d]phi, phi^2}",
        label: "d",
        mode: Mode::Plain,
    },
    ClosureCase {
        tag: "two-atoms/derivative-pair-ideal",
        rules: "ideal { [d]phi, [d]psi };\nmaxorder d on phi = 2;",
        candidate: "{[d]phi, psi}",
        label: "d",
        mode: Mode::Plain,
    },
    ClosureCase {
        tag: "two-atoms/annihilating-composition",
        rules: "commute d e = 0;\nideal { [e]phi, [d]psi };",
        candidate: "{[e]phi, psi}",
        label: "d",
        mode: Mode::Plain,
    },
    ClosureCase {
        tag: "two-atoms/commuting-transfer",
        rules: "commute d e = 1;\nideal { [d]phi, psi };\nideal { phi, [d]psi };\nideal { phi, [e]psi };",
        candidate: "{[e]phi, psi}",
        label: "d",
        mode: Mode::Transfer,
    },
    ClosureCase {
        tag: "three-atoms/cross-ideal",
        rules: "maxorder d on [e]phi = 1;\nmaxorder d on psi = 2;\nideal { [e]phi, [d]chi };",
        candidate: "{[e]phi, [d]psi, chi^2}",
        label: "d",
        mode: Mode::Plain,
    },
    ClosureCase {
        tag: "three-atoms/derivative-ideal",
        rules: "maxorder d on [e]phi = 1;\nmaxorder d on psi = 2;\nideal { [d]psi, [d]chi };",
        candidate: "{[e]phi, [d]psi, chi^2}",
        label: "d",
        mode: Mode::Plain,
    },
    ClosureCase {
        tag: "several-atoms/bounded-powers",
        rules: "maxorder d on phi = 2;\nmaxpower [d]phi = 3;\nmaxorder d on psi = 2;\nmaxpower [d]psi = 2;",
        candidate: "{[d]phi^2, phi, [d]psi, psi^2}",
        label: "d",
        mode: Mode::Plain,
    },
    ClosureCase {
        tag: "several-atoms/pair-ideal",
        rules: "maxorder d on phi = 3;\nideal { [d]psi, psi };",
        candidate: "{[d^2]phi^2, psi^2}",
        label: "d",
        mode: Mode::Plain,
    },
    ClosureCase {
        tag: "several-atoms/power-ideal",
        rules: "maxorder d on phi = 3;\nideal { [d]psi, psi^2 };",
        candidate: "{[d^2]phi^2, psi^3}",
        label: "d",
        mode: Mode::Transfer,
    },
    ClosureCase {
        tag: "words/order-overflow",
        rules: "maxorder d on [e]phi = 2;",
        candidate: "{[d e]phi^2}",
        label: "d",
        mode: Mode::Plain,
    },
    ClosureCase {
        tag: "words/repeated-factor",
        rules: "maxpower [d e]phi = 2;\nmaxorder d on [e]phi = 2;",
        candidate: "{[e]phi, [d e]phi}",
        label: "d",
        mode: Mode::Plain,
    },
];

/// Number of random products in the oracle equivalence check.
pub const ORACLE_TRIALS: usize = 300;
pub const ORACLE_SEED: u64 = 0x5eed;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckResult {
    pub tag: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(tag: impl Into<String>, outcome: Result<(), String>) -> Self {
        let (passed, detail) = match outcome {
            Ok(()) => (true, String::new()),
            Err(d) => (false, d),
        };
        CheckResult {
            tag: tag.into(),
            passed,
            detail,
        }
    }
}

pub fn case_rules(rules: &str) -> Result<RuleSet, String> {
    parse_spec(&format!("{HEADER}\n{rules}")).map_err(|e| e.to_string())
}

fn label(r: &RuleSet, name: &str) -> Result<LabelId, String> {
    r.complex()
        .label_id(name)
        .ok_or_else(|| format!("no label {name}"))
}

fn single(r: &RuleSet, text: &str) -> Result<Monomial, String> {
    let e = parse_expr(r, text).map_err(|e| e.to_string())?;
    let mut ms = e.monomials();
    if ms.len() != 1 {
        return Err(format!("`{text}` is not a single product"));
    }
    Ok(ms.remove(0))
}

/// The identity along `c.path`, or zero when some layer is trivial.
pub fn identity_of(c: &IdentityCase) -> Result<Expression, String> {
    let r = case_rules(c.rules)?;
    let seed = single(&r, c.seed)?;
    let path = c
        .path
        .iter()
        .map(|n| label(&r, n))
        .collect::<Result<Vec<_>, _>>()?;
    let mut labels = path.clone();
    labels.dedup();
    let found = hierarchy(&r, &seed, &labels, path.len()).map_err(|e| e.to_string())?;
    let e = found
        .into_iter()
        .find(|i| i.applied == path)
        .map(|i| i.expression)
        .unwrap_or_else(|| Expression::zero(r.complex().clone()));
    Ok(if c.transfer {
        transfer_cancel(&r, &e)
    } else {
        e
    })
}

fn check_identity(c: &IdentityCase) -> Result<(), String> {
    let got = identity_of(c)?.to_string();
    if got == c.expected {
        Ok(())
    } else {
        Err(format!("expected `{}`, got `{got}`", c.expected))
    }
}

/// Verdict for the candidate of `c` under the given rule text.
pub fn closure_verdict(c: &ClosureCase, rules: &str) -> Result<(bool, Expression), String> {
    let r = case_rules(rules)?;
    let m = single(&r, c.candidate)?;
    let l = label(&r, c.label)?;
    let v = is_closed(&r, l, &m, c.mode).map_err(|e| e.to_string())?;
    Ok((v.closed, v.witness))
}

/// Rule texts with one line removed, paired with the removed line.
pub fn mutations(rules: &str) -> Vec<(String, String)> {
    let lines: Vec<&str> = rules.lines().collect();
    (0..lines.len())
        .map(|i| {
            let kept: Vec<&str> = lines
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, l)| *l)
                .collect();
            (lines[i].to_string(), kept.join("\n"))
        })
        .collect()
}

fn check_closure(c: &ClosureCase) -> Result<(), String> {
    let (closed, witness) = closure_verdict(c, c.rules)?;
    if !closed {
        return Err(format!("not closed, witness `{witness}`"));
    }
    for (dropped, rest) in mutations(c.rules) {
        if closure_verdict(c, &rest)?.0 {
            return Err(format!("still closed without `{dropped}`"));
        }
    }
    Ok(())
}

/// Engine and positional expansion must agree on random products.
pub fn check_oracle(trials: usize, seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shape = ProductShape {
        max_distinct: 3,
        max_multiplicity: 2,
        max_word_length: 2,
        max_order: 2,
    };
    for t in 0..trials {
        let r = random_rules(&mut rng, false);
        let m = Monomial::unit(random_product(&mut rng, r.complex(), shape));
        let p = PositionedProduct::from_monomial(&m).map_err(|e| e.to_string())?;
        let e = Expression::from_monomial(r.complex().clone(), m);
        for l in r.complex().label_ids() {
            let engine = mcde_core::differentiate(&r, l, &e).map_err(|e| e.to_string())?;
            let positional = collapse(
                &r,
                &positional_expand(&r, l, &p).map_err(|e| e.to_string())?,
            );
            if engine != positional {
                return Err(format!(
                    "trial {t}: engine `{engine}` vs positional `{positional}`"
                ));
            }
        }
    }
    Ok(())
}

pub fn run_all() -> Vec<CheckResult> {
    let mut out = Vec::new();
    for c in IDENTITY_CASES {
        out.push(CheckResult::new(
            format!("identity/{}", c.tag),
            check_identity(c),
        ));
    }
    for c in CLOSURE_CASES {
        out.push(CheckResult::new(
            format!("closed/{}", c.tag),
            check_closure(c),
        ));
    }
    out.push(CheckResult::new(
        "oracle/random-products",
        check_oracle(ORACLE_TRIALS, ORACLE_SEED),
    ));
    out
}
