//! The bundled `.ncs` files are the serialized library fixtures.

use std::path::PathBuf;

use nocon::fixtures::{example_scenario, pom_scenario};
use nocon::scenario::Scenario;
use nocon_cli::doc::{parse, to_json, ScenarioDocument};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn cases() -> [(&'static str, Scenario); 2] {
    [("example.ncs", example_scenario()), ("pom.ncs", pom_scenario())]
}

#[test]
fn fixtures_match_library() {
    for (name, sc) in cases() {
        let text = std::fs::read_to_string(fixture(name)).unwrap();
        assert_eq!(text, to_json(&ScenarioDocument::from_scenario(&sc)), "{name} is stale; run the ignored regenerate test");
        let doc: ScenarioDocument = parse(&text, name).unwrap();
        doc.to_scenario().unwrap();
    }
}

#[test]
#[ignore = "rewrites the bundled fixtures"]
fn regenerate_fixtures() {
    for (name, sc) in cases() {
        std::fs::write(fixture(name), to_json(&ScenarioDocument::from_scenario(&sc))).unwrap();
    }
}
