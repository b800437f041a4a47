use std::collections::BTreeMap;

use proptest::collection::vec as pvec;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use timelime_core::evaluate::{overlap_histogram, strict_overlap_score};
use timelime_core::explain::generate_samples;
use timelime_core::precedence::PrecedenceProfile;
use timelime_core::*;

fn interval() -> impl Strategy<Value = Interval> {
    (0.0..=1.0f64, 0.0..=1.0f64).prop_map(|(a, b)| Interval { lo: a.min(b), hi: a.max(b) })
}

fn entries(d: usize) -> impl Strategy<Value = Vec<ExplanationEntry>> {
    pvec((0..d, -1.0..1.0f64, interval()), 0..=d).prop_map(|raw| {
        let mut seen = std::collections::BTreeSet::new();
        raw.into_iter()
            .filter(|(f, ..)| seen.insert(*f))
            .map(|(feature, weight, interval)| ExplanationEntry { feature, weight, interval })
            .collect()
    })
}

fn explanation(entries: Vec<ExplanationEntry>) -> Explanation {
    Explanation { unit: "u".into(), entries, intercept: 0.0, fidelity: 0.0, raw_fidelity: 0.0, seed: 0, path_exhausted: false }
}

fn record(overlap: f64, ndpv: i64) -> EvaluationRecord {
    EvaluationRecord { unit: "u".into(), planner: PlannerId::Time, overlap, ndpv_delta: ndpv, plan_size: 1 }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn flip_is_an_involution(v in interval()) {
        let once = flip_around_mid(v);
        let twice = flip_around_mid(once);
        prop_assert!(0.0 <= once.lo && once.lo <= once.hi && once.hi <= 1.0);
        prop_assert!((twice.lo - v.lo).abs() <= f64::EPSILON);
        prop_assert!((twice.hi - v.hi).abs() <= f64::EPSILON);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn time_plan_is_a_subset_of_classical(
        es in entries(20),
        g in pvec(proptest::option::of(-5.0..5.0f64), 20),
        m in 1usize..=20,
    ) {
        let e = explanation(es);
        let profile = PrecedenceProfile::from_effects(g, m);
        let classical = classical_plan(&e);
        let time = time_plan(&e, &profile);
        for (f, iv) in &time.proposals {
            prop_assert_eq!(classical.proposals.get(f), Some(iv));
            prop_assert!(profile.is_precedented(*f));
        }
        prop_assert!(time.len() <= m.min(classical.len()));
        for entry in &e.entries {
            if entry.weight < 0.0 {
                prop_assert!(!classical.proposals.contains_key(&entry.feature));
            }
        }
        for iv in classical.proposals.values() {
            prop_assert!(0.0 <= iv.lo && iv.hi <= 1.0);
        }
    }

    #[test]
    fn overlap_is_bounded_and_order_free(
        props in pvec((0usize..20, interval()), 0..20),
        z in pvec(0.0..=1.0f64, 20),
        y in pvec(0.0..=1.0f64, 20),
        noise in pvec(0.0..=1.0f64, 20),
    ) {
        let forward: BTreeMap<usize, Interval> = props.iter().copied().collect();
        let plan = |p: BTreeMap<usize, Interval>| Plan { unit: "u".into(), planner: PlannerId::Classical, proposals: p, seed: None };
        let unit_z = CodeUnit::new("u", z.clone(), 0);
        let a = plan(forward.clone());
        let s = overlap_score(&a, &unit_z);
        prop_assert!((0.0..=1.0).contains(&s));
        let mut reordered: BTreeMap<usize, Interval> = BTreeMap::new();
        for (f, iv) in forward.iter().rev() {
            reordered.insert(*f, *iv);
        }
        prop_assert_eq!(overlap_score(&plan(reordered), &unit_z), s);

        // features outside the plan do not matter
        let mut moved = z.clone();
        for f in 0..20 {
            if !forward.contains_key(&f) {
                moved[f] = noise[f];
            }
        }
        prop_assert_eq!(overlap_score(&a, &CodeUnit::new("u", moved, 0)), s);

        let strict = strict_overlap_score(&a, &CodeUnit::new("u", y, 0), &unit_z);
        prop_assert!((0.0..=1.0).contains(&strict));
    }

    #[test]
    fn scores_are_linear_in_overlap(recs in pvec((0.0..=0.5f64, -20i64..20), 1..30)) {
        let base: Vec<EvaluationRecord> = recs.iter().map(|&(s, n)| record(s, n)).collect();
        let doubled: Vec<EvaluationRecord> = recs.iter().map(|&(s, n)| record(2.0 * s, n)).collect();
        let (s1, s2) = (weighted_score(&base), weighted_score(&doubled));
        prop_assert!((s2 - 2.0 * s1).abs() <= 1e-9 * (1.0 + s1.abs()));
        match (scaled_score(&base), scaled_score(&doubled)) {
            (ScaledScore::Value(a), ScaledScore::Value(b)) => prop_assert!((b - 2.0 * a).abs() <= 1e-9 * (1.0 + a.abs())),
            (ScaledScore::Undefined, ScaledScore::Undefined) => {
                prop_assert_eq!(recs.iter().map(|r| r.1).sum::<i64>(), 0)
            }
            other => prop_assert!(false, "mismatched definedness {:?}", other),
        }
        let h = overlap_histogram(&base);
        prop_assert_eq!(h.iter().sum::<usize>(), base.len());
    }

    #[test]
    fn hedges_g_is_scale_and_shift_invariant(
        x in pvec(-100.0..100.0f64, 2..15),
        y in pvec(-100.0..100.0f64, 2..15),
        c in 0.01..100.0f64,
        shift in -1000.0..1000.0f64,
    ) {
        let g = hedges_g(&x, &y).unwrap();
        let scaled = hedges_g(&x.iter().map(|v| v * c).collect::<Vec<_>>(), &y.iter().map(|v| v * c).collect::<Vec<_>>()).unwrap();
        let shifted = hedges_g(&x.iter().map(|v| v + shift).collect::<Vec<_>>(), &y.iter().map(|v| v + shift).collect::<Vec<_>>()).unwrap();
        prop_assert!((scaled - g).abs() <= 1e-9 * (1.0 + g.abs()), "{} vs {}", scaled, g);
        prop_assert!((shifted - g).abs() <= 1e-7 * (1.0 + g.abs()), "{} vs {}", shifted, g);
    }

    #[test]
    fn normalized_values_stay_in_unit_range(
        rows in pvec(pvec(-50.0..50.0f64, 3), 2..20),
        probe in pvec(-500.0..500.0f64, 3),
    ) {
        let units = rows.iter().enumerate().map(|(i, r)| CodeUnit::new(format!("u{i}"), r.clone(), 0)).collect();
        let data = ReleaseDataset::new("p", "1", 3, units).unwrap();
        let n = Normalizer::fit(&data);
        for u in n.apply(&data).units() {
            prop_assert!(u.features.iter().all(|v| (0.0..=1.0).contains(v)));
        }
        prop_assert!(n.transform(&probe).iter().all(|v| (0.0..=1.0).contains(v)));
    }
}

fn random_release(rng: &mut ChaCha8Rng, rows: usize, width: usize, positives: usize) -> ReleaseDataset {
    let units = (0..rows)
        .map(|i| {
            let f = (0..width).map(|_| rng.gen::<f64>()).collect();
            CodeUnit::new(format!("u{i:03}"), f, u32::from(i < positives))
        })
        .collect();
    ReleaseDataset::new("p", "1", width, units).unwrap()
}

/// Solve for a single `t` in `[0, 1]` with `s = a + t (b - a)` on every feature.
fn on_segment(s: &[f64], a: &[f64], b: &[f64]) -> bool {
    let mut t: Option<f64> = None;
    for ((&sv, &av), &bv) in s.iter().zip(a).zip(b) {
        let span = bv - av;
        if span.abs() < 1e-12 {
            if (sv - av).abs() > 1e-9 {
                return false;
            }
            continue;
        }
        let ti = (sv - av) / span;
        if !(-1e-9..=1.0 + 1e-9).contains(&ti) {
            return false;
        }
        match t {
            Some(t0) if (t0 - ti).abs() > 1e-7 => return false,
            None => t = Some(ti),
            _ => {}
        }
    }
    true
}

#[test]
fn smote_reaches_parity_with_convex_synthetic_units() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for case in 0..40 {
        let rows = rng.gen_range(8..60);
        let positives = rng.gen_range(2..rows - 1);
        let width = rng.gen_range(1..6);
        let data = random_release(&mut rng, rows, width, positives);
        let out = smote(&data, 5, case).unwrap();
        let defective = out.defective_count();
        assert_eq!(defective, out.len() - defective, "case {case}");
        assert_eq!(&out.units()[..rows], data.units());
        let minority_label = u8::from(positives * 2 < rows);
        let minority: Vec<&CodeUnit> = data.units().iter().filter(|u| u.label() == minority_label).collect();
        for s in &out.units()[rows..] {
            assert_eq!(s.label(), minority_label);
            let found = minority
                .iter()
                .any(|a| minority.iter().any(|b| a.name != b.name && on_segment(&s.features, &a.features, &b.features)));
            assert!(found, "case {case}: {} is not between two minority units", s.name);
        }
    }
}

#[test]
fn smote_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let data = random_release(&mut rng, 40, 4, 10);
    let out = smote(&data, 5, 1).unwrap();
    assert_eq!((out.defective_count(), out.len() - out.defective_count()), (30, 30));

    let balanced = random_release(&mut rng, 10, 2, 5);
    assert_eq!(smote(&balanced, 5, 1).unwrap(), balanced);

    let two = random_release(&mut rng, 9, 3, 2);
    let out = smote(&two, 1, 4).unwrap();
    let (p, q) = (&two.units()[0].features, &two.units()[1].features);
    for s in &out.units()[9..] {
        assert!(on_segment(&s.features, p, q));
    }
    assert_eq!(smote(&random_release(&mut rng, 9, 3, 1), 5, 1), Err(Error::Rebalance { found: 1 }));
}

#[test]
fn sampler_bin_occupancy_follows_frequencies() {
    let d = Discretizer::from_cuts(vec![vec![0.5]]);
    let s = generate_samples(&[0.2], &d, 5000, 41).unwrap();
    let low = s.features[1..].iter().filter(|r| r[0] <= 0.5).count() as f64 / 5000.0;
    assert!((low - 0.5).abs() <= 0.02, "occupancy {low}");
    assert_eq!(s.weights[0], 1.0);
    assert!(s.weights.iter().all(|w| *w > 0.0 && *w <= 1.0));

    let single = Discretizer::from_cuts(vec![vec![]; 3]);
    let one = generate_samples(&[0.1, 0.5, 0.9], &single, 1, 2).unwrap();
    assert!(one.features[1].iter().all(|v| (0.0..=1.0).contains(v)));
    assert_eq!(one, generate_samples(&[0.1, 0.5, 0.9], &single, 1, 2).unwrap());
}

#[test]
fn random_walk_rate_is_one_half_per_feature() {
    let unit = CodeUnit::new("u", vec![0.5; 20], 1);
    let mut counts = [0usize; 20];
    for run in 0..10_000u64 {
        let plan = random_walk_plan(&unit, 0.5, seed::derive(7, run)).unwrap();
        let first = plan.proposals.values().next().copied();
        for (f, iv) in &plan.proposals {
            counts[*f] += 1;
            assert_eq!(Some(*iv), first);
        }
    }
    for (f, c) in counts.iter().enumerate() {
        let rate = *c as f64 / 10_000.0;
        assert!((rate - 0.5).abs() <= 0.015, "feature {f} rate {rate}");
    }
    assert!(random_walk_plan(&unit, 0.0, 1).unwrap().is_empty());
    assert_eq!(random_walk_plan(&unit, 1.0, 1).unwrap().len(), 20);
}

#[test]
fn kernel_weight_decreases_with_distance() {
    let w = 0.75 * 20f64.sqrt();
    assert_eq!(kernel_weight(0.0, w), 1.0);
    assert!((kernel_weight(w, w) - (-1f64).exp()).abs() < 1e-15);
    let grid: Vec<f64> = (0..100).map(|i| kernel_weight(i as f64 * 0.1, w)).collect();
    assert!(grid.windows(2).all(|p| p[1] < p[0]));
}

/// Probability is an affine function of the features, clipped to [0, 1].
struct Linear {
    coef: Vec<f64>,
    flipped: bool,
}

impl BlackBox for Linear {
    fn feature_count(&self) -> usize {
        self.coef.len()
    }
    fn predict_proba(&self, x: &[f64]) -> Result<f64> {
        let p = (0.5 + self.coef.iter().zip(x).map(|(c, v)| c * (v - 0.5)).sum::<f64>()).clamp(0.0, 1.0);
        Ok(if self.flipped { 1.0 - p } else { p })
    }
}

fn quartiles(d: usize) -> Discretizer {
    Discretizer::from_cuts(vec![vec![0.25, 0.5, 0.75]; d])
}

#[test]
fn linear_black_box_top_features_are_the_largest_coefficients() {
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    let magnitudes = [0.40, 0.25, 0.15, 0.08, 0.04, 0.02];
    for case in 0..30u64 {
        let mut coef: Vec<f64> = magnitudes.iter().map(|m| if rng.gen_bool(0.5) { *m } else { -*m }).collect();
        for i in (1..6).rev() {
            coef.swap(i, rng.gen_range(0..=i));
        }
        let features: Vec<f64> = (0..6).map(|_| rng.gen::<f64>()).collect();
        let unit = CodeUnit::new("u", features, 1);
        let model = Linear { coef: coef.clone(), flipped: false };
        let mut by_size: Vec<usize> = (0..6).collect();
        by_size.sort_by(|&a, &b| coef[b].abs().total_cmp(&coef[a].abs()));
        for k in 1..=3 {
            // two equal bins: leaving the instance's bin shifts every feature by
            // 0.5 on average, so importance is proportional to |coefficient|
            let halves = Discretizer::from_cuts(vec![vec![0.5]; 6]);
            let e = explain_instance(&model, &unit, &halves, k, 5000, case).unwrap();
            let mut got: Vec<usize> = e.entries.iter().map(|x| x.feature).collect();
            got.sort_unstable();
            let mut want = by_size[..k].to_vec();
            want.sort_unstable();
            assert_eq!(got, want, "case {case} k {k} coef {coef:?} weights {:?}", e.entries);
            assert!((0.0..=1.0).contains(&e.fidelity));
            for entry in &e.entries {
                assert!(entry.interval.contains(unit.features[entry.feature]));
            }
        }
    }
}

#[test]
fn flipping_the_black_box_negates_weights() {
    let coef = vec![0.35, -0.2, 0.12, -0.07, 0.03, 0.01];
    let mut rng = ChaCha8Rng::seed_from_u64(52);
    for case in 0..20u64 {
        let unit = CodeUnit::new("u", (0..6).map(|_| rng.gen::<f64>()).collect(), 1);
        let a = explain_instance(&Linear { coef: coef.clone(), flipped: false }, &unit, &quartiles(6), 4, 2000, case).unwrap();
        let b = explain_instance(&Linear { coef: coef.clone(), flipped: true }, &unit, &quartiles(6), 4, 2000, case).unwrap();
        assert_eq!(a.entries.len(), b.entries.len());
        for (p, q) in a.entries.iter().zip(&b.entries) {
            assert_eq!(p.feature, q.feature);
            assert!((p.weight + q.weight).abs() < 1e-9, "case {case}: {} vs {}", p.weight, q.weight);
        }
    }
}
