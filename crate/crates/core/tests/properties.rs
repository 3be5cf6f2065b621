use std::collections::{BTreeMap, BTreeSet, HashMap};

use proptest::prelude::*;
use psysym_core::annotations::{merge_relevance, AnnotationRecord};
use psysym_core::explain::{audit_scores, coverage, explain_user, verify_explanation, AuditThresholds, ExplainOptions};
use psysym_core::kg::fixture_kg;
use psysym_core::mdd::{post_features, reweight, subject_weight, PostFeatures, UserHistory, UserPost};
use psysym_core::retrieval::{evaluate_retrieval, lsh_dedup, DedupParams, MinHasher};
use psysym_core::{synth, KnowledgeGraph};

fn graphs() -> Vec<KnowledgeGraph> {
    vec![fixture_kg(), synth::world_kg()]
}

#[test]
fn kg_adjacency_is_symmetric_and_round_trips() {
    for kg in graphs() {
        for (d, s) in kg.edges() {
            assert!(kg.typical_symptom_ids(d).unwrap().contains(s));
            assert!(kg.diseases_of(s).unwrap().contains(d));
        }
        for d in kg.diseases() {
            for s in kg.typical_symptom_ids(&d.id).unwrap() {
                assert!(kg.edges().contains(&(d.id.clone(), s)));
            }
        }
        let total: usize = kg.diseases().iter().map(|d| kg.typical_symptoms(&d.id).unwrap().len()).sum();
        assert_eq!(total, kg.edges().len());
        let again = KnowledgeGraph::from_json_str(&kg.to_json_string()).unwrap();
        assert_eq!(again, kg);
    }
}

fn history(features: &[PostFeatures]) -> UserHistory {
    UserHistory {
        user_id: "u".into(),
        label: BTreeMap::new(),
        posts: (0..features.len())
            .map(|i| UserPost { created_utc: i as i64, text: format!("post number {i}") })
            .collect(),
    }
}

fn features(rows: &[Vec<f64>]) -> Vec<PostFeatures> {
    rows.iter()
        .map(|r| PostFeatures { p_rel: r.clone(), w_status: 1.0, w_subj: 1.0, f_symp: r.clone() })
        .collect()
}

const WORDS: [&str; 12] = [
    "sleep", "tired", "worry", "panic", "sad", "cannot", "focus", "again", "night", "every", "always", "hands",
];

fn sentence() -> impl Strategy<Value = String> {
    proptest::collection::vec(0..WORDS.len(), 3..9).prop_map(|ix| ix.iter().map(|&i| WORDS[i]).collect::<Vec<_>>().join(" "))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dedup_is_idempotent_and_keeps_distinct_texts(texts in proptest::collection::vec(sentence(), 1..25)) {
        let params = DedupParams::default();
        let candidates: Vec<(String, String)> =
            texts.iter().enumerate().map(|(i, t)| (format!("c{i:02}"), t.clone())).collect();
        let kept = lsh_dedup(&candidates, &params).unwrap();
        let survivors: Vec<(String, String)> =
            candidates.iter().filter(|(id, _)| kept.contains(id)).cloned().collect();
        prop_assert_eq!(lsh_dedup(&survivors, &params).unwrap(), kept.clone());

        let hasher = MinHasher::new(params.k, params.shingle_size, params.seed).unwrap();
        let sigs: Vec<_> = texts.iter().map(|t| hasher.signature(t)).collect();
        for (i, (id, _)) in candidates.iter().enumerate() {
            let best = (0..sigs.len())
                .filter(|&j| j != i)
                .map(|j| sigs[i].match_fraction(&sigs[j]))
                .fold(0.0, f64::max);
            if best < params.threshold {
                prop_assert!(kept.contains(id), "{} was removed with max match {}", id, best);
            }
        }
    }

    #[test]
    fn retrieval_eval_ignores_input_order(
        entries in proptest::collection::vec((0usize..30, 0usize..4, 0.0f64..1.0, any::<bool>()), 1..80),
        rotate in 0usize..80,
    ) {
        let build = |rows: &[(usize, usize, f64, bool)]| {
            let mut scores = HashMap::new();
            let mut gold = BTreeMap::new();
            for (s, y, score, pos) in rows {
                let key = (format!("s{s}"), format!("y{y}"));
                scores.insert(key.clone(), *score);
                gold.insert(key, *pos);
            }
            evaluate_retrieval(&scores, &gold, 0.5)
        };
        // Keep one row per key so rotation changes order but not content.
        let mut seen = BTreeSet::new();
        let rows: Vec<_> = entries.into_iter().filter(|(s, y, _, _)| seen.insert((*s, *y))).collect();
        let mut rotated = rows.clone();
        let k = rotate % rotated.len();
        rotated.rotate_left(k);
        rotated.reverse();
        prop_assert_eq!(build(&rows), build(&rotated));
    }

    #[test]
    fn relevance_merge_is_monotone(
        votes in proptest::collection::vec(proptest::collection::vec(any::<bool>(), 4), 1..5),
        who in 0usize..5,
        which in 0usize..4,
    ) {
        let symptoms = ["a", "b", "c", "d"];
        let record = |i: usize, v: &[bool]| AnnotationRecord {
            sentence_id: "p:0".into(),
            annotator_id: format!("ann{i}"),
            relevance: symptoms.iter().map(|s| s.to_string()).zip(v.iter().copied()).collect(),
            status: None,
        };
        let records: Vec<_> = votes.iter().enumerate().map(|(i, v)| record(i, v)).collect();
        let before = merge_relevance(&records).unwrap();
        let mut more = votes.clone();
        more[who % votes.len()][which] = true;
        let records: Vec<_> = more.iter().enumerate().map(|(i, v)| record(i, v)).collect();
        let after = merge_relevance(&records).unwrap();
        prop_assert!(before.relevant.is_subset(&after.relevant));
        prop_assert!(after.relevant.is_subset(&after.observed));
    }

    #[test]
    fn subject_weight_ignores_case_and_punctuation(
        words in proptest::collection::vec(prop_oneof![
            Just("i"), Just("my"), Just("me"), Just("she"), Just("he"), Just("they"), Just("her"), Just("feel"), Just("sad")
        ], 1..10),
        marks in proptest::collection::vec(prop_oneof![Just(""), Just(","), Just("!"), Just("."), Just("\"")], 10),
    ) {
        let plain = words.join(" ");
        let noisy = words
            .iter()
            .zip(&marks)
            .map(|(w, m)| format!("{m}{}{m}", w.to_uppercase()))
            .collect::<Vec<_>>()
            .join(" ");
        prop_assert_eq!(subject_weight(&plain), subject_weight(&noisy));
    }

    #[test]
    fn reweighting_never_exceeds_relevance(
        p_rel in proptest::collection::vec(0.0f64..=1.0, 1..12),
        w_status in 0.0f64..=1.0,
        w_subj in prop_oneof![Just(0.1), Just(0.9), Just(0.0)],
    ) {
        let f = reweight(&p_rel, w_status, w_subj).unwrap();
        for (fi, pi) in f.iter().zip(&p_rel) {
            prop_assert!(fi <= pi);
            if *pi == 0.0 || w_status == 0.0 || w_subj == 0.0 {
                prop_assert_eq!(*fi, 0.0);
            }
        }
        let pf = post_features(&[(p_rel.clone(), 1.0 - w_status)], p_rel.len(), w_subj, true).unwrap();
        for (a, b) in pf.f_symp.iter().zip(&f) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn explanations_are_faithful_and_coverage_is_monotone(
        rows in proptest::collection::vec(proptest::collection::vec(0.0f64..1.0, 16), 0..12),
        extra in proptest::collection::vec(0.0f64..1.0, 16),
    ) {
        let kg = fixture_kg();
        let order = kg.symptom_ids();
        let rows: Vec<Vec<f64>> = rows.iter().map(|r| r[..order.len()].to_vec()).collect();
        let extra = extra[..order.len()].to_vec();
        let feats = features(&rows);
        let user = history(&feats);
        let options = ExplainOptions::default();
        let mut grown_rows = rows.clone();
        grown_rows.push(extra);
        let grown = features(&grown_rows);
        for d in kg.diseases() {
            let expl = explain_user(&user, &feats, &d.id, &kg, &order, &options).unwrap();
            prop_assert!(verify_explanation(&expl, &feats, &order, options.threshold));
            for ev in &expl.typical {
                prop_assert!(ev.evidence_posts.windows(2).all(|w| w[0].value >= w[1].value));
                prop_assert!(ev.evidence_posts.iter().all(|p| p.post_index < user.posts.len()));
            }
            let before = coverage(&feats, &kg, &d.id, &order, options.threshold).unwrap();
            let after = coverage(&grown, &kg, &d.id, &order, options.threshold).unwrap();
            prop_assert!(after >= before);
            prop_assert_eq!(before, expl.coverage);
        }
    }

    #[test]
    fn audit_flags_are_exclusive(
        cases in proptest::collection::vec((any::<bool>(), 0.0f64..=1.0, proptest::option::of(0.0f64..=1.0)), 1..6),
    ) {
        let mut labels = BTreeMap::new();
        let mut coverages = BTreeMap::new();
        let mut probabilities = BTreeMap::new();
        for (i, (label, cov, prob)) in cases.iter().enumerate() {
            let d = format!("d{i}");
            labels.insert(d.clone(), *label);
            coverages.insert(d.clone(), *cov);
            if let Some(p) = prob {
                probabilities.insert(d, *p);
            }
        }
        let flags = audit_scores("u", &labels, &coverages, &probabilities, &AuditThresholds::default());
        let diseases: BTreeSet<&String> = flags.iter().map(|f| &f.disease).collect();
        prop_assert_eq!(diseases.len(), flags.len());
    }
}
