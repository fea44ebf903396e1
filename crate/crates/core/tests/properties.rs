use chrono::{NaiveDate, NaiveDateTime};
use finsent::flags::{Flag, RuleSet};
use finsent::index::{aggregate_daily, AggregateOptions, ArticleScore};
use finsent::signals::{confidence_features, expert_agreement, expert_kl, logit_features};
use finsent::ProbTriple;
use proptest::prelude::*;
use std::sync::LazyLock;

static RULES: LazyLock<RuleSet> = LazyLock::new(RuleSet::default_rules);

fn simplex() -> impl Strategy<Value = ProbTriple> {
    (1e-6f64..1.0, 1e-6f64..1.0, 1e-6f64..1.0).prop_map(|(a, b, c)| {
        let s = a + b + c;
        ProbTriple::new(a / s, b / s, c / s).unwrap()
    })
}

const VOCAB: &[&str] = &[
    "operating",
    "profit",
    "rose",
    "fell",
    "from",
    "to",
    "EUR",
    "13.1",
    "mn",
    "8.7",
    "loss",
    "narrowed",
    "widened",
    "costs",
    "decreased",
    "contract",
    "agreement",
    "signed",
    "expects",
    "earnings",
    "remain",
    "uncertain",
    "one-off",
    "the",
    "company",
    "net",
    "sales",
    "increased",
    "nonprofit",
    "a",
    "year",
];

fn headline() -> impl Strategy<Value = (Vec<String>, Vec<usize>, Vec<bool>)> {
    let words = prop::collection::vec(prop::sample::select(VOCAB).prop_map(str::to_string), 0..14);
    (
        words,
        prop::collection::vec(1usize..4, 14),
        prop::collection::vec(any::<bool>(), 14),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn signal_ranges(p in simplex(), q in simplex()) {
        let c = confidence_features(&p);
        prop_assert!(c.entropy >= 0.0 && c.entropy <= 3f64.ln() + 1e-12);
        prop_assert!(c.margin >= 0.0 && c.margin <= c.max_prob);
        prop_assert!(expert_kl(&p, &q) >= -1e-12);
        prop_assert!(expert_kl(&p, &p).abs() <= 1e-12);
        let a = expert_agreement(&p, &q);
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert_eq!(a, expert_agreement(&q, &p));
        prop_assert_eq!(expert_agreement(&p, &p), 1.0);
        prop_assert!(logit_features(&p).iter().all(|v| v.is_finite()));
    }

    #[test]
    fn flags_ignore_case_and_spacing((words, gaps, upper) in headline()) {
        let rules = &*RULES;
        let plain = words.join(" ");
        let spaced: String = words
            .iter()
            .zip(&gaps)
            .map(|(w, g)| format!("{w}{}", " ".repeat(*g)))
            .collect();
        let shouty: Vec<String> = words
            .iter()
            .zip(&upper)
            .map(|(w, u)| if *u { w.to_uppercase() } else { w.clone() })
            .collect();
        let base = rules.flag(&plain);
        prop_assert_eq!(base, rules.flag(&plain.to_uppercase()));
        prop_assert_eq!(base, rules.flag(&spaced));
        prop_assert_eq!(base, rules.flag(&shouty.join(" ")));
        prop_assert!(!(base.get(Flag::LossNarrowed) && base.get(Flag::LossWidened)));
    }

    #[test]
    fn prob_triples_round_trip_through_json(p in simplex()) {
        let s = serde_json::to_string(&p).unwrap();
        let back: ProbTriple = serde_json::from_str(&s).unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn daily_index_is_order_free_and_cumulative(
        raw in prop::collection::vec((0u32..20, 0u32..24, -1.1f64..1.0), 3..60),
        rot in 0usize..60,
    ) {
        let start = NaiveDate::from_ymd_opt(2024, 3, 4).unwrap();
        let calendar: Vec<NaiveDate> = (0..20).map(|d| start + chrono::Duration::days(d)).collect();
        let scores: Vec<ArticleScore> = raw
            .iter()
            .map(|&(d, h, s)| ArticleScore {
                timestamp: NaiveDateTime::new(calendar[d as usize], chrono::NaiveTime::from_hms_opt(h, 0, 0).unwrap()),
                s,
            })
            .collect();
        let distinct_days = {
            let mut d: Vec<u32> = raw.iter().map(|r| r.0).collect();
            d.sort();
            d.dedup();
            d.len()
        };
        let res = aggregate_daily(&scores, &calendar, AggregateOptions::default());
        if distinct_days < 2 {
            prop_assert!(res.is_err());
        } else if let Ok(a) = res {
            let mut rotated = scores.clone();
            rotated.rotate_left(rot % scores.len());
            let b = aggregate_daily(&rotated, &calendar, AggregateOptions::default()).unwrap();
            prop_assert_eq!(&a, &b);
            let s = &a.series;
            prop_assert_eq!(s.cumulative[0], s.points[0].z);
            for t in 1..s.len() {
                prop_assert!((s.cumulative[t] - s.cumulative[t - 1] - s.points[t].z).abs() < 1e-9);
            }
            let n: usize = s.points.iter().map(|p| p.n_articles).sum();
            prop_assert_eq!(n, scores.len());
        }
    }
}
