//! Algebraic properties of the secure-aware loss and its weight masks.

use std::collections::BTreeSet;

use proptest::prelude::*;
use secrev_core::model::{RawRecord, Source};
use secrev_core::sa_loss::{
    build_weight_mask, export_masks, identify_value_tokens, masks_to_jsonl, sa_loss, MaskRecord, TokenLogProbs,
    TokenSequence, DEFAULT_ALPHA, DEFAULT_BETA,
};
use secrev_core::{CodeDiff, DatasetEntry, ReviewComment, SecurityType};

fn index_sets(n: usize) -> impl Strategy<Value = (BTreeSet<usize>, BTreeSet<usize>)> {
    (prop::collection::btree_set(0..n, 0..=n), prop::collection::btree_set(0..n, 0..=n))
}

fn case() -> impl Strategy<Value = (usize, BTreeSet<usize>, BTreeSet<usize>, Vec<f64>)> {
    (1usize..200).prop_flat_map(|n| {
        (Just(n), index_sets(n), prop::collection::vec(-20.0f64..=0.0, n))
            .prop_map(|(n, (iv, ist), lp)| (n, iv, ist, lp))
    })
}

proptest! {
    #[test]
    fn zero_coefficients_give_plain_nll((n, iv, ist, lp) in case()) {
        let mask = build_weight_mask(n, &iv, &ist, 0.0, 0.0).unwrap();
        let plain: f64 = -lp.iter().sum::<f64>();
        let got = sa_loss(&TokenLogProbs::new(lp).unwrap(), &mask).unwrap();
        prop_assert!((got - plain).abs() <= 1e-12 * plain.abs().max(1.0));
    }

    #[test]
    fn uniform_closed_form(n in 1usize..200, frac_v in 0.0f64..1.0, frac_s in 0.0f64..1.0, l in -5.0f64..=0.0) {
        let v = (n as f64 * frac_v) as usize;
        let s = ((n - v) as f64 * frac_s) as usize;
        let iv: BTreeSet<usize> = (0..v).collect();
        let ist: BTreeSet<usize> = (v..v + s).collect();
        let mask = build_weight_mask(n, &iv, &ist, DEFAULT_ALPHA, DEFAULT_BETA).unwrap();
        let got = sa_loss(&TokenLogProbs::new(vec![l; n]).unwrap(), &mask).unwrap();
        let want = -(n as f64 + DEFAULT_ALPHA * v as f64 + DEFAULT_BETA * s as f64) * l;
        prop_assert!((got - want).abs() < 1e-12, "{} vs {}", got, want);
    }

    #[test]
    fn mask_sum_identity((n, iv, ist, _) in case(), alpha in 0u8..10, beta in 0u8..10) {
        let (a, b) = (alpha as f64, beta as f64);
        let mask = build_weight_mask(n, &iv, &ist, a, b).unwrap();
        let only_v = iv.difference(&ist).count() as f64;
        let only_s = ist.difference(&iv).count() as f64;
        let both = iv.intersection(&ist).count() as f64;
        prop_assert_eq!(mask.total(), n as f64 + a * only_v + b * only_s + (a + b) * both);
        prop_assert!(mask.weights.iter().all(|&w| w >= 1.0));
    }

    #[test]
    fn weighting_never_lowers_loss((n, iv, ist, lp) in case()) {
        let lp = TokenLogProbs::new(lp).unwrap();
        let weighted = sa_loss(&lp, &build_weight_mask(n, &iv, &ist, DEFAULT_ALPHA, DEFAULT_BETA).unwrap()).unwrap();
        let plain = sa_loss(&lp, &build_weight_mask(n, &iv, &ist, 0.0, 0.0).unwrap()).unwrap();
        prop_assert!(weighted >= plain);
        prop_assert!(plain >= 0.0);
    }

    #[test]
    fn linear_in_each_logprob((n, iv, ist, lp) in case(), pick in any::<prop::sample::Index>()) {
        let mask = build_weight_mask(n, &iv, &ist, DEFAULT_ALPHA, DEFAULT_BETA).unwrap();
        let t = pick.index(n);
        let h = 0.25;
        let mut shifted = lp.clone();
        shifted[t] -= h;
        let base = sa_loss(&TokenLogProbs::new(lp).unwrap(), &mask).unwrap();
        let moved = sa_loss(&TokenLogProbs::new(shifted).unwrap(), &mask).unwrap();
        let slope = (moved - base) / -h;
        prop_assert!((slope + mask.weights[t]).abs() < 1e-9, "{} vs {}", slope, -mask.weights[t]);
    }

    #[test]
    fn context_lines_do_not_matter(context in prop::collection::vec("[a-z_]{1,8}", 0..6)) {
        let comment = ReviewComment::new(SecurityType::InputValidation, "user_input flows into query", "bad", "escape user_input").unwrap();
        let seq = TokenSequence::from_comment(&comment);
        let base = CodeDiff::new("+query = build(user_input)").unwrap();
        let mut raw = String::from("+query = build(user_input)");
        for c in &context {
            raw.push_str(&format!("\n {c} = query"));
        }
        let with_context = CodeDiff::new(raw).unwrap();
        prop_assert_eq!(identify_value_tokens(&base, &seq), identify_value_tokens(&with_context, &seq));
    }
}

fn entry(id: &str, ty: SecurityType, diff: &str, comment: Option<ReviewComment>) -> DatasetEntry {
    let r = RawRecord { id: id.into(), lang: None, diff: diff.into(), comment_raw: None, extra: Default::default() };
    let src = if ty.is_issue() { Source::Keyword } else { Source::NonIssue };
    let mut e = r.into_entry(ty, src).unwrap();
    if comment.is_some() {
        e.comment = comment;
    }
    e
}

#[test]
fn export_examples() {
    let text = masks_to_jsonl(&export_masks(&[], DEFAULT_ALPHA, DEFAULT_BETA).unwrap(), DEFAULT_ALPHA, DEFAULT_BETA).unwrap();
    assert_eq!(text, "{\"_header\":{\"alpha\":2.0,\"beta\":5.0,\"format\":\"secrev-weight-mask\",\"version\":1}}\n");

    let ni = entry("n1", SecurityType::NonIssue, "+Security = Type", None);
    let recs = export_masks(&[ni], DEFAULT_ALPHA, DEFAULT_BETA).unwrap();
    let MaskRecord::Mask { tokens, weights, iv, ist, .. } = &recs[0] else { panic!("{recs:?}") };
    assert!(iv.is_empty());
    let heavy: Vec<&str> = (0..tokens.len()).filter(|&i| weights[i] > 1.0).map(|i| tokens[i].as_str()).collect();
    assert_eq!(heavy, ["Non", "-", "Issue"]);
    assert_eq!(ist.len(), 3);

    let c = ReviewComment::new(SecurityType::Concurrency, "counter is shared", "lost updates", "guard counter").unwrap();
    let entries = vec![
        entry("b", SecurityType::Concurrency, "+counter += 1", Some(c)),
        entry("a", SecurityType::Concurrency, "+x", None),
    ];
    let first = masks_to_jsonl(&export_masks(&entries, 2.0, 5.0).unwrap(), 2.0, 5.0).unwrap();
    let second = masks_to_jsonl(&export_masks(&entries, 2.0, 5.0).unwrap(), 2.0, 5.0).unwrap();
    assert_eq!(first, second);
    let lines: Vec<&str> = first.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("{\"id\":\"a\",\"error\""));
    assert!(lines[2].starts_with("{\"id\":\"b\",\"tokens\""));
}
