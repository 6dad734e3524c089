//! Parsing the marker format, writing it back, and loading whole collections.

use std::collections::BTreeMap;

use delib_core::corpus::{
    load_collection, parse_annotated_document, select, serialize_document, Batch, Custodian, DocMeta, Label,
    LabelScope, Reviewer, Topic,
};
use delib_core::classifiers::KeywordModel;
use delib_core::synth::{synthetic_corpus, write_collection, SynthConfig};
use proptest::prelude::*;

fn meta(reviewer: Reviewer) -> DocMeta {
    DocMeta {
        source: "annotated_email.txt".into(),
        batch: Batch::K1,
        custodian: Custodian::Kagan,
        file_name: "Drugs".into(),
        topic: Topic::Drugs,
        reviewer,
        doc_ordinal: 0,
    }
}

const EMAIL: &str = include_str!("fixtures/annotated_email.txt");

#[test]
fn annotated_email_parses() {
    let doc = parse_annotated_document(EMAIL, &meta(Reviewer::A)).unwrap();
    let labels: Vec<Label> = doc.paragraphs.iter().map(|p| p.label(Reviewer::A).unwrap()).collect();
    assert_eq!(labels, [Label::T0, Label::D1, Label::D1, Label::D1, Label::D0, Label::D0]);
    assert!(doc.paragraphs[0].text.starts_with("Pat Doe\t\t03/04/97"));
    assert_eq!(doc.paragraphs[5].text, "Pat");
    assert_eq!(doc.paragraphs[2].id, "K1/Drugs/0/2");

    let again = parse_annotated_document(&serialize_document(&doc, Reviewer::A), &meta(Reviewer::A)).unwrap();
    assert_eq!(again, doc);

    assert!(!KeywordModel.predict(&doc.paragraphs[3].text));
    assert!(KeywordModel.predict(&doc.paragraphs[4].text));
}

#[test]
fn scopes_on_the_annotated_email() {
    let doc = parse_annotated_document(EMAIL, &meta(Reviewer::A)).unwrap();
    let corpus = delib_core::corpus::Corpus::from_documents([doc]).unwrap();
    let d0t0 = select(&corpus, &[Batch::K1], Reviewer::A, LabelScope::D0T0).unwrap();
    assert_eq!((d0t0.len(), d0t0.positives()), (6, 3));
    let d0 = select(&corpus, &[Batch::K1], Reviewer::A, LabelScope::D0).unwrap();
    assert_eq!((d0.len(), d0.positives()), (5, 3));
    assert!(select(&corpus, &[Batch::K1], Reviewer::B, LabelScope::D0).is_err());
}

#[test]
fn full_size_collection_round_trips_with_published_counts() {
    let corpus = synthetic_corpus(&SynthConfig {
        scale: 1.0,
        ..SynthConfig::default()
    })
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_collection(&corpus, dir.path()).unwrap();
    let back = load_collection(&manifest).unwrap();
    assert_eq!(back.content_hash(), corpus.content_hash());
    let expected: BTreeMap<Batch, usize> = Batch::ALL.iter().map(|&b| (b, b.published_paragraphs())).collect();
    assert_eq!(back.paragraph_counts, expected);
    assert_eq!(back.total_paragraphs(), 3023);
}

#[test]
fn wrong_expected_count_is_rejected() {
    let corpus = synthetic_corpus(&SynthConfig {
        scale: 0.05,
        ..SynthConfig::default()
    })
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_collection(&corpus, dir.path()).unwrap();
    let text = std::fs::read_to_string(&manifest).unwrap();
    let k1 = corpus.paragraph_counts[&Batch::K1];
    let bad = text.replace(
        &format!("{{\"expect\":{{\"batch\":\"K1\",\"paragraphs\":{k1}}}}}"),
        &format!("{{\"expect\":{{\"batch\":\"K1\",\"paragraphs\":{}}}}}", k1 + 1),
    );
    assert_ne!(bad, text);
    std::fs::write(&manifest, bad).unwrap();
    assert!(load_collection(&manifest).is_err());
}

fn label() -> impl Strategy<Value = Label> {
    prop_oneof![Just(Label::D1), Just(Label::D0), Just(Label::T0)]
}

proptest! {
    #[test]
    fn marker_format_round_trips(
        paras in prop::collection::vec((label(), prop::collection::vec("[A-Za-z][A-Za-z ,.]{0,30}", 1..4)), 1..8)
    ) {
        let mut raw = String::new();
        for (l, lines) in &paras {
            raw.push_str(l.marker());
            raw.push('\n');
            for line in lines {
                raw.push_str(line);
                raw.push('\n');
            }
        }
        let doc = parse_annotated_document(&raw, &meta(Reviewer::A)).unwrap();
        prop_assert_eq!(doc.paragraphs.len(), paras.len());
        for (p, (l, _)) in doc.paragraphs.iter().zip(&paras) {
            prop_assert_eq!(p.label(Reviewer::A), Some(*l));
        }
        let again = parse_annotated_document(&serialize_document(&doc, Reviewer::A), &meta(Reviewer::A)).unwrap();
        prop_assert_eq!(again, doc);
    }
}
