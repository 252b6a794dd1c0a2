//! Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use mcde_cli::run;
use mcde_cli::verify::{closure_verdict, mutations, CLOSURE_CASES};
use mcde_core::oracle::{collapse, positional_expand, positional_vanishes, PositionedProduct};
use mcde_core::sample::{random_product, random_rules, ProductShape};
use mcde_core::{
    derive_identity, differentiate, hierarchy, parse_expr, parse_spec, render_spec, Expression,
    Factor, FactorPattern, LabelId, Letter, Monomial, MultiIndex, OperatorWord, Product, RuleSet,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LIMIT_TRANSFER: Duration = Duration::from_secs(1);
const LIMIT_POWER: Duration = Duration::from_secs(1);
const LIMIT_CLOSED_SUITE: Duration = Duration::from_secs(10);
const LIMIT_ORACLE: Duration = Duration::from_secs(60);
const LIMIT_SEARCH: Duration = Duration::from_secs(60);

const ORACLE_MONOMIALS: usize = 1000;
/// Four distinct factors of multiplicity three fill twelve slots.
const ORACLE_SLOT_CAP: usize = 12;
const UNIFORMITY_IDENTITIES: usize = 1000;
const ROUND_TRIP_SPECS: usize = 500;
const FUZZ_INPUTS: usize = 5000;
const SEED: u64 = 20_241_016;

type Outcome = Result<(), String>;
type Criterion = (&'static str, Option<Duration>, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Outcome {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> (Outcome, Duration) {
    let start = Instant::now();
    let out = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
    let took = start.elapsed();
    let out = match (out, limit) {
        (Ok(()), Some(l)) if took > l => Err(format!("took {took:.2?}, limit {l:?}")),
        (o, _) => o,
    };
    (out, took)
}

fn write_spec(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn transfer_identity() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let spec = write_spec(
        dir.path(),
        "pair.mc",
        "slots 2; diff e up 2 down 2; diff d up 1 down 1; atom phi; atom psi; ideal { phi, psi };",
    );
    let out = run([
        "mcde",
        "--spec",
        &spec,
        "identity",
        "--label",
        "d",
        "--seed",
        "{phi,psi}",
    ]);
    ensure(out.code == 0, || {
        format!("exit {}: {}", out.code, out.stderr)
    })?;
    ensure(out.stdout == "{[d]phi, psi} + {phi, [d]psi} = 0\n", || {
        format!("got {:?}", out.stdout)
    })
}

fn power_identities() -> Outcome {
    let base = "slots 2; diff e up 2 down 2; diff d up 1 down 1; atom phi; maxpower phi = 3; commute e d = 0;";
    let check = |rules: &str, want1: &str, want2: Option<&str>| -> Outcome {
        let r = parse_spec(rules).map_err(|e| e.to_string())?;
        let (e, d) = (
            r.complex().label_id("e").unwrap(),
            r.complex().label_id("d").unwrap(),
        );
        let seed = parse_expr(&r, "{phi^3}").unwrap().monomials().remove(0);
        let first = derive_identity(&r, d, &seed).map_err(|e| e.to_string())?;
        let got1 = first.map(|i| i.expression.to_string()).unwrap_or_default();
        ensure(got1 == want1, || format!("first layer {got1:?}"))?;
        let layers = hierarchy(&r, &seed, &[d, e], 2).map_err(|e| e.to_string())?;
        let got2 = layers
            .iter()
            .find(|i| i.applied == [d, e])
            .map(|i| i.expression.to_string());
        ensure(got2.as_deref() == want2, || {
            format!("second layer {got2:?}")
        })
    };
    check(base, "3*{[d]phi, phi^2}", Some("6*{[d]phi, [e]phi, phi}"))?;
    check(
        &format!("{base} ideal {{ [d]phi, [e]phi }};"),
        "3*{[d]phi, phi^2}",
        None,
    )
}

fn closed_suite() -> Outcome {
    for c in CLOSURE_CASES {
        let (closed, witness) = closure_verdict(c, c.rules)?;
        ensure(closed, || {
            format!("{}: not closed, witness {witness}", c.tag)
        })?;
        for (dropped, rest) in mutations(c.rules) {
            let (closed, _) = closure_verdict(c, &rest)?;
            ensure(!closed, || {
                format!("{}: still closed without `{dropped}`", c.tag)
            })?;
        }
    }
    Ok(())
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let shape = ProductShape {
        max_distinct: 4,
        max_multiplicity: 3,
        max_word_length: 2,
        max_order: 2,
    };
    for t in 0..ORACLE_MONOMIALS {
        let r = random_rules(&mut rng, false);
        let coeff = mcde_core::sample::random_scalar(&mut rng);
        let m = Monomial::new(coeff.clone(), random_product(&mut rng, r.complex(), shape));
        let positioned = PositionedProduct::from_monomial_capped(&m, ORACLE_SLOT_CAP)
            .map_err(|e| e.to_string())?;
        let e = Expression::from_monomial(r.complex().clone(), m);
        for l in r.complex().label_ids() {
            let engine = differentiate(&r, l, &e).map_err(|e| e.to_string())?;
            let expanded = positional_expand(&r, l, &positioned).map_err(|e| e.to_string())?;
            let oracle = collapse(&r, &expanded).scale(&coeff);
            ensure(engine == oracle, || {
                format!("monomial {t}: engine {engine} vs oracle {oracle}")
            })?;
        }
    }
    Ok(())
}

/// Multi-index from the declarations alone: base indices plus one shift per unit letter.
fn expected_index(r: &RuleSet, p: &Product) -> MultiIndex {
    let c = r.complex();
    let mut idx = MultiIndex::zero(c.slot_count());
    for (f, k) in p.iter() {
        for _ in 0..k {
            let base = &c.atom(f.atom).base_index;
            for s in 0..c.slot_count() {
                idx.upper[s] += base.upper[s];
                idx.lower[s] += base.lower[s];
            }
            for letter in f.word.letters() {
                let l = c.label(letter.label);
                idx.upper[l.up_slot - 1] += i64::from(letter.order);
                idx.lower[l.down_slot - 1] -= i64::from(letter.order);
            }
        }
    }
    idx
}

fn index_uniformity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 0x1d);
    let shape = ProductShape {
        max_distinct: 3,
        max_multiplicity: 3,
        max_word_length: 2,
        max_order: 2,
    };
    let mut checked = 0;
    let mut attempts = 0;
    while checked < UNIFORMITY_IDENTITIES {
        attempts += 1;
        ensure(attempts < 50 * UNIFORMITY_IDENTITIES, || {
            format!("only {checked} identities generated")
        })?;
        let mut r = random_rules(&mut rng, false);
        let p = random_product(&mut rng, r.complex(), shape);
        if r.product_vanishes(&p).is_none() {
            // Make the seed vanish by capping the power of one of its factors.
            let (f, k) = p
                .iter()
                .nth(rng.gen_range(0..p.distinct()))
                .map(|(f, k)| (f.clone(), k))
                .unwrap();
            if r.add_max_power(FactorPattern::exact(&f), k).is_err() {
                continue;
            }
        }
        let seed = Monomial::unit(p);
        let labels: Vec<LabelId> = r.complex().label_ids().collect();
        for id in hierarchy(&r, &seed, &labels, 2).map_err(|e| e.to_string())? {
            let mut want = expected_index(&r, &seed.product);
            for &l in &id.applied {
                let lab = r.complex().label(l);
                want.upper[lab.up_slot - 1] += 1;
                want.lower[lab.down_slot - 1] -= 1;
            }
            for (q, _) in id.expression.terms() {
                let got = expected_index(&r, q);
                ensure(got == want, || {
                    format!(
                        "identity {} has a term at {got}, expected {want}",
                        id.expression
                    )
                })?;
            }
            checked += 1;
        }
    }
    Ok(())
}

const SINGLE_LABEL_RULES: &str =
    "slots 1; diff d up 1 down 1; atom phi; maxorder d on phi = 2; maxpower [d]phi = 3;";

/// Every product of `phi`, `[d]phi`, `[d^2]phi` with multiplicities up to 3,
/// decided entirely by positional expansion.
fn brute_force_closed(r: &RuleSet) -> BTreeSet<String> {
    let c = r.complex();
    let d = c.label_id("d").unwrap();
    let phi = c.atom_id("phi").unwrap();
    let factor = |k: u32| {
        let word = if k == 0 {
            OperatorWord::empty()
        } else {
            OperatorWord::from_letters([Letter::new(d, k)]).unwrap()
        };
        Factor::new(word, phi)
    };
    let mut out = BTreeSet::new();
    for a in 0..=3u32 {
        for b in 0..=3u32 {
            for e in 0..=3u32 {
                if a + b + e == 0 {
                    continue;
                }
                let mut slots = Vec::new();
                for (k, n) in [(0, a), (1, b), (2, e)] {
                    slots.extend(std::iter::repeat_n(factor(k), n as usize));
                }
                let p = PositionedProduct::with_cap(slots.clone(), ORACLE_SLOT_CAP).unwrap();
                if positional_vanishes(r, &p) {
                    continue;
                }
                if collapse(r, &positional_expand(r, d, &p).unwrap()).is_zero() {
                    let product = Product::from_factors(
                        [(factor(0), a), (factor(1), b), (factor(2), e)]
                            .into_iter()
                            .filter(|x| x.1 > 0),
                    );
                    out.insert(Expression::from_product(c.clone(), product).to_string());
                }
            }
        }
    }
    out
}

fn bounded_search() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let spec = write_spec(dir.path(), "single.mc", SINGLE_LABEL_RULES);
    let out = run([
        "mcde",
        "--spec",
        &spec,
        "--format",
        "json",
        "search",
        "--bounds",
        "factors=3,word=2,order=2,mult=3",
    ]);
    ensure(out.code == 0, || out.stderr.clone())?;
    let v: serde_json::Value = serde_json::from_str(&out.stdout).map_err(|e| e.to_string())?;
    let found: BTreeSet<String> = v["entries"]
        .as_array()
        .ok_or("no entries")?
        .iter()
        .map(|e| {
            e["monomial"]["text"]
                .as_str()
                .unwrap_or_default()
                .to_string()
        })
        .collect();
    let expected: BTreeSet<String> = [
        "{[d]phi}",
        "{[d]phi^2}",
        "{[d]phi^2, phi}",
        "{[d]phi^2, phi^2}",
        "{[d]phi^2, phi^3}",
    ]
    .into_iter()
    .map(String::from)
    .collect();
    let r = parse_spec(SINGLE_LABEL_RULES).map_err(|e| e.to_string())?;
    let brute = brute_force_closed(&r);
    ensure(brute == expected, || {
        format!("independent checker found {brute:?}")
    })?;
    ensure(found == expected, || format!("search found {found:?}"))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let spec = write_spec(
        dir.path(),
        "two.mc",
        "slots 2; diff e up 2 down 2; diff d up 1 down 1; atom phi; atom psi; commute d e = 1;
         maxorder d on [*]phi = 2; maxorder e on [*]* = 2; maxpower [d]phi = 3; ideal { [d]phi, psi };",
    );
    let mut files = Vec::new();
    for (i, w) in ["1", "4", "1", "4"].iter().enumerate() {
        let path = dir.path().join(format!("cat{i}.json"));
        let out = run([
            "mcde",
            "--spec",
            &spec,
            "--workers",
            w,
            "search",
            "--bounds",
            "factors=3,word=2,order=1,mult=2",
            "--transfer",
            "--out",
            path.to_str().unwrap(),
        ]);
        ensure(out.code == 0, || out.stderr.clone())?;
        files.push(std::fs::read(&path).map_err(|e| e.to_string())?);
    }
    ensure(
        files.len() == 4 && files[1..].iter().all(|f| *f == files[0]),
        || "catalog bytes differ".into(),
    )?;
    ensure(files[0].len() > 2000, || {
        "catalog unexpectedly small".into()
    })
}

const TOKENS: [&str; 30] = [
    "slots", "diff", "atom", "maxorder", "maxpower", "ideal", "commute", "cond", "up", "down",
    "on", "n", "m", "phi", "d", "e", "{", "}", "[", "]", "(", ")", ",", ";", "=", "*", "^", "-",
    "1", "\n",
];

fn dsl_robustness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 0xd51);
    for i in 0..ROUND_TRIP_SPECS {
        let r = random_rules(&mut rng, true);
        let text = render_spec(&r);
        let back =
            parse_spec(&text).map_err(|e| format!("spec {i} failed to reparse: {e}\n{text}"))?;
        ensure(back == r && render_spec(&back) == text, || {
            format!("spec {i} changed on round trip:\n{text}")
        })?;
    }
    let sample = render_spec(&random_rules(&mut rng, true));
    let expr_rules = parse_spec("slots 1; diff d up 1 down 1; atom phi;").unwrap();
    for i in 0..FUZZ_INPUTS {
        let input: String = match i % 3 {
            0 => (0..rng.gen_range(0..40))
                .map(|_| TOKENS[rng.gen_range(0..TOKENS.len())])
                .collect::<Vec<_>>()
                .join(" "),
            1 => (0..rng.gen_range(0..60))
                .map(|_| char::from(rng.gen_range(0x20u8..0x7f)))
                .collect(),
            _ => {
                let mut s = sample.clone();
                for _ in 0..rng.gen_range(1..4) {
                    let at = rng.gen_range(0..=s.len());
                    let end = (at + rng.gen_range(0..5)).min(s.len());
                    s.replace_range(at..end, TOKENS[rng.gen_range(0..TOKENS.len())]);
                }
                s
            }
        };
        let ok = catch_unwind(|| {
            let _ = parse_spec(&input);
            let _ = parse_expr(&expr_rules, &input);
        });
        ensure(ok.is_ok(), || format!("parser panicked on {input:?}"))?;
    }
    Ok(())
}

fn main() {
    // Panics are reported through the criterion line instead.
    std::panic::set_hook(Box::new(|_| {}));
    let criteria: [Criterion; 8] = [
        (
            "1 transfer identity from a pair ideal",
            Some(LIMIT_TRANSFER),
            transfer_identity,
        ),
        (
            "2 power identity and its second layer",
            Some(LIMIT_POWER),
            power_identities,
        ),
        (
            "3 closed-product suite with mutation check",
            Some(LIMIT_CLOSED_SUITE),
            closed_suite,
        ),
        (
            "4 oracle equivalence on 1000 monomials",
            Some(LIMIT_ORACLE),
            oracle_equivalence,
        ),
        (
            "5 index uniformity on 1000 identities",
            None,
            index_uniformity,
        ),
        (
            "6 bounded search recovers the closed family",
            Some(LIMIT_SEARCH),
            bounded_search,
        ),
        (
            "7 search output identical across runs and workers",
            None,
            determinism,
        ),
        ("8 spec round trip and parser fuzzing", None, dsl_robustness),
    ];
    let mut failed = 0;
    for (name, limit, f) in criteria {
        let (outcome, took) = timed(limit, f);
        match outcome {
            Ok(()) => println!("PASS {name} ({took:.2?})"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name} ({took:.2?}): {why}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
