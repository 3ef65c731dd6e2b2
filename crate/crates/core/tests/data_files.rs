use std::path::PathBuf;

use neurorule::knowledge::{load_triples, CommonsenseGraph};
use neurorule::rules_io::{apply_edit, parse_rules, serialize_rules};
use neurorule::world::EntityVocabulary;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

#[test]
fn shipped_triples_match_the_builtin_vocabulary() {
    let loaded = load_triples(data("commonsense.tsv")).unwrap();
    assert_eq!(loaded, CommonsenseGraph::from_vocabulary(&EntityVocabulary::builtin()));
}

#[test]
fn shipped_rule_files_are_canonical() {
    for name in ["rules/hard-learned.rules", "rules/take-correction.rules"] {
        let text = std::fs::read_to_string(data(name)).unwrap();
        assert_eq!(serialize_rules(&parse_rules(&text).unwrap()), text, "{name}");
    }
}

#[test]
fn correction_replaces_only_take_pair() {
    let learned = parse_rules(&std::fs::read_to_string(data("rules/hard-learned.rules")).unwrap()).unwrap();
    let edit = parse_rules(&std::fs::read_to_string(data("rules/take-correction.rules")).unwrap()).unwrap();
    let fixed = apply_edit(&learned, &edit).unwrap();
    let changed: Vec<String> = learned
        .rules()
        .zip(fixed.rules())
        .filter(|(a, b)| a != b)
        .map(|(_, b)| b.to_string())
        .collect();
    assert_eq!(changed, ["[human] take(x,y) :- ¬atlocation(x,y)."]);
}
