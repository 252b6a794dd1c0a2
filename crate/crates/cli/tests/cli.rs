use std::path::{Path, PathBuf};

use mcde_cli::catalog::CatalogDoc;
use mcde_cli::run;
use mcde_core::{parse_spec, search_closed, Mode, SearchBounds};

const HEADER: &str = "slots 2;\ndiff e up 2 down 2;\ndiff d up 1 down 1;\natom phi;\natom psi;\n";

fn spec_file(dir: &Path, rules: &str) -> PathBuf {
    let p = dir.join("rules.mc");
    std::fs::write(&p, format!("{HEADER}{rules}\n")).unwrap();
    p
}

fn mcde(spec: &Path, rest: &[&str]) -> mcde_cli::RunOutput {
    let mut args = vec![
        "mcde".to_string(),
        "--spec".into(),
        spec.display().to_string(),
    ];
    args.extend(rest.iter().map(|s| s.to_string()));
    run(args)
}

fn schema() -> jsonschema::JSONSchema {
    let text = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../docs/catalog.schema.json"
    ))
    .unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    jsonschema::JSONSchema::compile(&v).unwrap()
}

#[test]
fn identity_from_pair_ideal() {
    let dir = tempfile::tempdir().unwrap();
    let s = spec_file(dir.path(), "ideal { phi, psi };");
    let out = mcde(&s, &["identity", "--label", "d", "--seed", "{phi,psi}"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert_eq!(out.stdout, "{[d]phi, psi} + {phi, [d]psi} = 0\n");
}

#[test]
fn closed_and_not_closed() {
    let dir = tempfile::tempdir().unwrap();
    let s = spec_file(dir.path(), "maxorder d on phi = 2; maxpower [d]phi = 3;");
    let out = mcde(&s, &["closed", "--label", "d", "--expr", "{[d]phi^2, phi}"]);
    assert_eq!((out.code, out.stdout.as_str()), (0, "CLOSED\n"));
    let out = mcde(&s, &["closed", "--label", "d", "--expr", "{[d]phi, psi}"]);
    assert_eq!(out.code, 0);
    assert_eq!(out.stdout, "NOT CLOSED\nwitness: {[d]phi, [d]psi}\n");
    let out = mcde(
        &s,
        &[
            "--format", "json", "closed", "--label", "d", "--expr", "{phi}",
        ],
    );
    let v: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["closed"], false);
    assert_eq!(v["witness"], "{[d]phi}");
}

#[test]
fn bad_input_exits_two_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let s = spec_file(dir.path(), "");
    let out = mcde(&s, &["expand", "--label", "d", "--expr", "{bogus}"]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains(":1:2:"), "{}", out.stderr);
    assert!(out.stderr.contains("bogus"));

    let broken = dir.path().join("broken.mc");
    std::fs::write(&broken, "slots 1;\natom phi\nmaxpower phi = 2;\n").unwrap();
    let out = mcde(&broken, &["expand", "--label", "d", "--expr", "{phi}"]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("broken.mc:3:1:"), "{}", out.stderr);

    assert_eq!(run(["mcde"]).code, 2);
    assert_eq!(
        run(["mcde", "expand", "--label", "d", "--expr", "{phi}"]).code,
        2
    );
    assert_eq!(
        mcde(&s, &["identity", "--label", "d", "--seed", "{phi}"]).code,
        2
    );
    assert_eq!(mcde(&s, &["search", "--bounds", "factors=0"]).code, 2);
    assert_eq!(mcde(&s, &["search", "--bounds", "colour=2"]).code, 2);
    assert_eq!(run(["mcde", "--help"]).code, 0);
}

#[test]
fn expand_and_hierarchy_text() {
    let dir = tempfile::tempdir().unwrap();
    let s = spec_file(dir.path(), "maxpower phi = 3; commute e d = 0;");
    let out = mcde(&s, &["expand", "--label", "d", "--expr", "{phi^2} - {psi}"]);
    assert_eq!(out.stdout, "2*{[d]phi, phi} - {[d]psi}\n");
    let out = mcde(
        &s,
        &[
            "hierarchy",
            "--seed",
            "{phi^3}",
            "--labels",
            "d,e",
            "--depth",
            "2",
        ],
    );
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert!(
        out.stdout.contains("[d,e] 6*{[d]phi, [e]phi, phi} = 0\n"),
        "{}",
        out.stdout
    );
}

#[test]
fn saturate_lists_relations() {
    let dir = tempfile::tempdir().unwrap();
    let s = spec_file(dir.path(), "cond [d]psi = 0;");
    let out = mcde(&s, &["saturate", "--depth", "1"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert_eq!(
        out.stdout,
        "cond 0 [e] {[e d]psi} = 0 (uniform)\ncond 0 [d] {[d^2]psi} = 0 (uniform)\n"
    );
}

const SEARCH_RULES: &str =
    "maxorder d on [*]phi = 2; maxorder d on [*]psi = 2; ideal { [d]phi, [d]psi };";

#[test]
fn catalog_validates_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let s = spec_file(dir.path(), SEARCH_RULES);
    let file = dir.path().join("cat.json");
    let args = [
        "search",
        "--bounds",
        "factors=2,word=1,order=1,mult=2",
        "--labels",
        "d",
        "--out",
    ];
    let out = mcde(&s, &[&args[..], &[file.to_str().unwrap()]].concat());
    assert_eq!(out.code, 0, "{}", out.stderr);
    let text = std::fs::read_to_string(&file).unwrap();
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    let schema = schema();
    if let Err(errors) = schema.validate(&value) {
        let msgs: Vec<String> = errors.map(|e| e.to_string()).collect();
        panic!("schema violations: {msgs:?}");
    }

    let rules = parse_spec(&std::fs::read_to_string(&s).unwrap()).unwrap();
    let doc = CatalogDoc::from_json(&text).unwrap();
    assert_eq!(doc.to_json(), text);
    let d = rules.complex().label_id("d").unwrap();
    let b = SearchBounds::new(2, 1, 1, 2, rules.complex().atom_ids().collect(), vec![d]).unwrap();
    let direct = search_closed(&rules, &b, &[d], Mode::Plain, 1).unwrap();
    assert_eq!(doc.to_catalog(&rules).unwrap(), direct);
    assert!(!direct.entries.is_empty());

    let other = parse_spec(&format!("{HEADER}maxpower phi = 2;")).unwrap();
    assert!(doc.to_catalog(&other).is_err());
}

#[test]
fn schema_rejects_tampered_catalog() {
    let dir = tempfile::tempdir().unwrap();
    let s = spec_file(dir.path(), SEARCH_RULES);
    let out = mcde(
        &s,
        &[
            "--format",
            "json",
            "search",
            "--bounds",
            "factors=1,word=1,order=1,mult=1",
        ],
    );
    let mut v: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
    assert!(schema().is_valid(&v));
    v["entries"][0]["monomial"]["factors"][0]["mult"] = 0.into();
    assert!(!schema().is_valid(&v));
}

#[test]
fn search_output_is_identical_across_workers() {
    let dir = tempfile::tempdir().unwrap();
    let s = spec_file(dir.path(), &format!("{SEARCH_RULES} commute d e = 1;"));
    let go = |w: &str| {
        let out = mcde(
            &s,
            &[
                "--format",
                "json",
                "--workers",
                w,
                "search",
                "--bounds",
                "factors=2,word=2,order=1,mult=2",
                "--transfer",
            ],
        );
        assert_eq!(out.code, 0, "{}", out.stderr);
        out.stdout
    };
    let one = go("1");
    assert_eq!(one, go("4"));
    assert_eq!(one, go("1"));
}

#[test]
fn dedup_merges_renamed_atoms() {
    let dir = tempfile::tempdir().unwrap();
    let s = spec_file(dir.path(), SEARCH_RULES);
    let base = [
        "search",
        "--bounds",
        "factors=2,word=1,order=1,mult=1",
        "--labels",
        "d",
    ];
    let all = mcde(&s, &base).stdout;
    let merged = mcde(&s, &[&base[..], &["--dedup"]].concat()).stdout;
    assert!(all.contains("{phi, [d]psi}"), "{all}");
    assert!(!merged.contains("{phi, [d]psi}"), "{merged}");
    assert!(merged.lines().count() < all.lines().count());
}

#[test]
fn verify_suite_passes() {
    let out = run(["mcde", "verify-paper"]);
    assert_eq!(out.code, 0, "{}", out.stdout);
    assert!(out
        .stdout
        .contains("PASS closed/two-atoms/commuting-transfer"));
    assert!(!out.stdout.contains("FAIL"));
}
