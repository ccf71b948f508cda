//! Rule classifier on the labeled utterance fixture.

use std::time::Instant;

use docent_core::dialogue::{Intent, RuleClassifier};
use docent_core::worldmap::MapDocument;
use docent_core::AnnotatedMap;

const FIXTURE: &str = include_str!("data/intents.tsv");
const MAP: &str = include_str!("../../docent/fixtures/museum11.map");

#[test]
fn every_labeled_utterance_is_classified_correctly() {
    let doc: MapDocument = serde_json::from_str(MAP).unwrap();
    let map = AnnotatedMap::from_document(doc).unwrap();
    let began = Instant::now();
    let classifier = RuleClassifier::for_map(&map);
    let mut wrong = Vec::new();
    let mut total = 0;
    for line in FIXTURE.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()) {
        let (label, text) = line.split_once('\t').unwrap();
        let want = Intent::from_label(label).unwrap_or_else(|| panic!("bad label {label}"));
        let got = classifier.classify(text).unwrap();
        total += 1;
        if got != want {
            wrong.push(format!("{text:?}: want {want}, got {got}"));
        }
    }
    assert!(total >= 37, "fixture has {total} rows");
    assert!(wrong.is_empty(), "{} of {total} wrong:\n{}", wrong.len(), wrong.join("\n"));
    assert!(began.elapsed().as_secs_f64() < 1.0);
}
