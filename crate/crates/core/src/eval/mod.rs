//! Metrics, baselines, slice analyses, and report/plot-data writers.
//!
//! Ground truth for a test name is its own histogram's top-k states (the
//! split is by name, so a test name's full-corpus and test-side counts
//! coincide). A prediction "hits" when it shares any state with the truth
//! top-k; a "modal hit" requires the first prediction to equal the modal
//! state.

mod lowess;

pub use lowess::lowess;

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::corpus::NameHistogram;
use crate::error::{Error, Result};
use crate::models::RecurrentModel;

/// Anything that can rank states for a name.
pub trait Predict: Sync {
    fn top_k(&self, name: &str, k: usize) -> Result<Vec<String>>;
    /// Label used in report rows.
    fn label(&self) -> String;
}

impl Predict for RecurrentModel<f32> {
    fn top_k(&self, name: &str, k: usize) -> Result<Vec<String>> {
        Ok(self
            .predict_top_k(name, k)?
            .into_iter()
            .map(|(state, _)| state)
            .collect())
    }

    fn label(&self) -> String {
        self.meta.kind.as_str().to_string()
    }
}

/// Always predicts the most populous state of the corpus it was fit on.
#[derive(Clone, Debug, PartialEq)]
pub struct MajorityBaseline {
    pub state: String,
    /// The state's record share — the baseline's expected modal accuracy
    /// when truth is drawn record-wise.
    pub share: f64,
}

/// Fits the majority baseline: the state with the largest record total
/// across the given histograms, with its record share.
pub fn majority_baseline(histograms: &[NameHistogram]) -> Result<MajorityBaseline> {
    if histograms.is_empty() {
        return Err(Error::InvalidArg(
            "majority baseline needs a non-empty corpus".into(),
        ));
    }
    let mut totals: BTreeMap<&str, u64> = BTreeMap::new();
    let mut grand_total = 0u64;
    for hist in histograms {
        for (state, count) in &hist.state_counts {
            *totals.entry(state.as_str()).or_insert(0) += count;
            grand_total += count;
        }
    }
    let (state, count) = totals
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then_with(|| b.0.cmp(a.0)))
        .expect("non-empty corpus");
    Ok(MajorityBaseline {
        state: state.to_string(),
        share: *count as f64 / grand_total as f64,
    })
}

impl Predict for MajorityBaseline {
    fn top_k(&self, _name: &str, k: usize) -> Result<Vec<String>> {
        Ok(if k == 0 {
            Vec::new()
        } else {
            vec![self.state.clone()]
        })
    }

    fn label(&self) -> String {
        "majority".to_string()
    }
}

/// Count-based lookup: seen names rank their own training states, unseen
/// names fall back to the global prior; short rankings are padded from the
/// prior.
#[derive(Clone, Debug)]
pub struct NaiveBayes {
    by_name: HashMap<String, Vec<String>>,
    prior: Vec<String>,
}

impl NaiveBayes {
    /// Builds the lookup from training-side histograms only.
    pub fn fit(train_histograms: &[NameHistogram]) -> Result<Self> {
        if train_histograms.is_empty() {
            return Err(Error::InvalidArg(
                "naive Bayes needs a non-empty training corpus".into(),
            ));
        }
        let mut by_name = HashMap::with_capacity(train_histograms.len());
        let mut totals: BTreeMap<String, u64> = BTreeMap::new();
        for hist in train_histograms {
            let ranked: Vec<String> = hist
                .top_k_states(hist.state_counts.len())
                .into_iter()
                .map(|(state, _)| state)
                .collect();
            by_name.insert(hist.last_name.clone(), ranked);
            for (state, count) in &hist.state_counts {
                *totals.entry(state.clone()).or_insert(0) += count;
            }
        }
        let mut prior: Vec<(String, u64)> = totals.into_iter().collect();
        prior.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        Ok(NaiveBayes {
            by_name,
            prior: prior.into_iter().map(|(state, _)| state).collect(),
        })
    }

    pub fn prior(&self) -> &[String] {
        &self.prior
    }
}

impl Predict for NaiveBayes {
    fn top_k(&self, name: &str, k: usize) -> Result<Vec<String>> {
        let mut out: Vec<String> = match self.by_name.get(name) {
            Some(ranked) => ranked.iter().take(k).cloned().collect(),
            None => Vec::new(),
        };
        for state in &self.prior {
            if out.len() >= k {
                break;
            }
            if !out.contains(state) {
                out.push(state.clone());
            }
        }
        Ok(out)
    }

    fn label(&self) -> String {
        "naivebayes".to_string()
    }
}

/// One evaluated test name.
#[derive(Clone, Debug, PartialEq)]
pub struct TopKOutcome {
    pub name: String,
    pub predicted: Vec<String>,
    pub truth_topk: Vec<String>,
    pub hit: bool,
    pub modal_hit: bool,
    pub popularity: u64,
    pub female_share: Option<f64>,
}

/// Accuracy aggregate over one slice of the test set.
#[derive(Clone, Debug, PartialEq)]
pub struct SliceReport {
    pub slice: String,
    pub n: usize,
    pub topk_accuracy: f64,
    pub modal_accuracy: f64,
}

fn report_over<'a>(
    slice: String,
    outcomes: impl Iterator<Item = &'a TopKOutcome>,
) -> SliceReport {
    let mut n = 0usize;
    let mut hits = 0usize;
    let mut modal_hits = 0usize;
    for outcome in outcomes {
        n += 1;
        hits += outcome.hit as usize;
        modal_hits += outcome.modal_hit as usize;
    }
    SliceReport {
        slice,
        n,
        topk_accuracy: hits as f64 / n as f64,
        modal_accuracy: modal_hits as f64 / n as f64,
    }
}

/// Scores a predictor over every test histogram; parallel over names with
/// an order-preserving collect, so results are thread-count invariant.
pub fn evaluate<P: Predict + ?Sized>(
    predictor: &P,
    test_histograms: &[NameHistogram],
    k: usize,
) -> Result<(Vec<TopKOutcome>, SliceReport)> {
    if test_histograms.is_empty() {
        return Err(Error::EmptyTestSet);
    }
    if k == 0 {
        return Err(Error::InvalidArg("k must be at least 1".into()));
    }
    let outcomes: Vec<TopKOutcome> = test_histograms
        .par_iter()
        .map(|hist| {
            let predicted = predictor.top_k(&hist.last_name, k)?;
            let truth_topk: Vec<String> = hist
                .top_k_states(k)
                .into_iter()
                .map(|(state, _)| state)
                .collect();
            let hit = predicted.iter().any(|p| truth_topk.contains(p));
            let modal_hit = match (predicted.first(), truth_topk.first()) {
                (Some(p), Some(t)) => p == t,
                _ => false,
            };
            Ok(TopKOutcome {
                name: hist.last_name.clone(),
                predicted,
                truth_topk,
                hit,
                modal_hit,
                popularity: hist.popularity(),
                female_share: hist.female_share(),
            })
        })
        .collect::<Result<_>>()?;
    let report = report_over("test_set".to_string(), outcomes.iter());
    Ok((outcomes, report))
}

/// Popularity-weighted sample without replacement of `n` names
/// (exponential-keys method), reported as one slice. When `n` covers the
/// whole set the report says so and equals the full-set report.
pub fn slice_weighted_random(outcomes: &[TopKOutcome], n: usize, seed: u64) -> SliceReport {
    if n >= outcomes.len() {
        return report_over(
            format!("weighted_random_{n}_all_{}", outcomes.len()),
            outcomes.iter(),
        );
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Key u^(1/w) per name; the n largest keys form the sample.
    let mut keyed: Vec<(f64, &TopKOutcome)> = outcomes
        .iter()
        .map(|outcome| {
            let u: f64 = rng.gen();
            let w = outcome.popularity.max(1) as f64;
            (u.powf(1.0 / w), outcome)
        })
        .collect();
    keyed.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap()
            .then_with(|| a.1.name.cmp(&b.1.name))
    });
    report_over(
        format!("weighted_random_{n}"),
        keyed.iter().take(n).map(|(_, o)| *o),
    )
}

/// Reports over the `n` most and `n` least popular names (popularity ties
/// break by name, so selection is deterministic).
pub fn slice_extremes(outcomes: &[TopKOutcome], n: usize) -> (SliceReport, SliceReport) {
    let mut order: Vec<&TopKOutcome> = outcomes.iter().collect();
    order.sort_by(|a, b| {
        a.popularity
            .cmp(&b.popularity)
            .then_with(|| a.name.cmp(&b.name))
    });
    let take = n.min(order.len());
    let bottom = report_over(
        format!("least_popular_{n}"),
        order.iter().take(take).copied(),
    );
    let top = report_over(
        format!("most_popular_{n}"),
        order.iter().rev().take(take).copied(),
    );
    (top, bottom)
}

/// Per-state accuracy row.
#[derive(Clone, Debug, PartialEq)]
pub struct StateAccuracy {
    pub state: String,
    pub n: usize,
    pub topk_accuracy: f64,
    pub modal_accuracy: f64,
}

/// Groups names by their truth modal state and reports a seeded sample of
/// up to `per_state_n` names per state, in state order.
pub fn per_state_accuracy(
    outcomes: &[TopKOutcome],
    per_state_n: usize,
    seed: u64,
) -> Vec<StateAccuracy> {
    let mut groups: BTreeMap<&str, Vec<&TopKOutcome>> = BTreeMap::new();
    for outcome in outcomes {
        if let Some(modal) = outcome.truth_topk.first() {
            groups.entry(modal.as_str()).or_default().push(outcome);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(groups.len());
    for (state, group) in groups {
        let take = per_state_n.min(group.len());
        let report = if take == group.len() {
            report_over(String::new(), group.iter().copied())
        } else {
            let mut chosen = rand::seq::index::sample(&mut rng, group.len(), take).into_vec();
            chosen.sort_unstable();
            report_over(String::new(), chosen.iter().map(|&i| group[i]))
        };
        rows.push(StateAccuracy {
            state: state.to_string(),
            n: report.n,
            topk_accuracy: report.topk_accuracy,
            modal_accuracy: report.modal_accuracy,
        });
    }
    rows
}

/// Raw slice table: exact fractions for downstream tooling.
pub fn write_slice_reports(path: &Path, reports: &[SliceReport]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut emit = || -> std::io::Result<()> {
        writeln!(w, "slice,n,topk_accuracy,modal_accuracy")?;
        for r in reports {
            writeln!(
                w,
                "{},{},{:.6},{:.6}",
                r.slice, r.n, r.topk_accuracy, r.modal_accuracy
            )?;
        }
        w.flush()
    };
    emit().map_err(|e| Error::io(path, e))
}

/// Wide accuracy table, one row per model: top-k percentage by slice plus
/// the full-set modal percentage, one decimal place.
pub fn write_wide_table(
    path: &Path,
    rows: &[(String, SliceReport, SliceReport, SliceReport, SliceReport)],
) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut emit = || -> std::io::Result<()> {
        writeln!(
            w,
            "model,test_set,weighted_random,most_popular,least_popular,modal_test_set"
        )?;
        for (model, full, weighted, top, bottom) in rows {
            writeln!(
                w,
                "{},{:.1},{:.1},{:.1},{:.1},{:.1}",
                model,
                full.topk_accuracy * 100.0,
                weighted.topk_accuracy * 100.0,
                top.topk_accuracy * 100.0,
                bottom.topk_accuracy * 100.0,
                full.modal_accuracy * 100.0,
            )?;
        }
        w.flush()
    };
    emit().map_err(|e| Error::io(path, e))
}

/// Per-state table: top-k and modal percentages, one decimal place.
pub fn write_per_state(path: &Path, rows: &[StateAccuracy]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut emit = || -> std::io::Result<()> {
        writeln!(w, "state,n,topk_pct,modal_pct")?;
        for r in rows {
            writeln!(
                w,
                "{},{},{:.1},{:.1}",
                r.state,
                r.n,
                r.topk_accuracy * 100.0,
                r.modal_accuracy * 100.0
            )?;
        }
        w.flush()
    };
    emit().map_err(|e| Error::io(path, e))
}

/// Sorts the (x, y) points, smooths them, and writes `x,y,smoothed` rows.
pub fn write_plot_data(
    path: &Path,
    points: &[(f64, f64)],
    fraction: f64,
    iterations: usize,
) -> Result<()> {
    let mut sorted: Vec<(f64, f64)> = points.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let smoothed = lowess(&sorted, fraction, iterations)?;
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut emit = || -> std::io::Result<()> {
        writeln!(w, "x,y,smoothed")?;
        for ((x, y), (_, s)) in sorted.iter().zip(&smoothed) {
            writeln!(w, "{x},{y},{s}")?;
        }
        w.flush()
    };
    emit().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn hist(name: &str, states: &[(&str, u64)], female: u64, sex_known: u64) -> NameHistogram {
        let state_counts: BTreeMap<String, u64> =
            states.iter().map(|(s, c)| (s.to_string(), *c)).collect();
        NameHistogram {
            last_name: name.to_string(),
            total: state_counts.values().sum(),
            state_counts,
            female,
            sex_known,
        }
    }

    /// Oracle predictor: echoes the truth it is given at construction.
    struct FixedPredictor(HashMap<String, Vec<String>>);

    impl Predict for FixedPredictor {
        fn top_k(&self, name: &str, k: usize) -> Result<Vec<String>> {
            Ok(self
                .0
                .get(name)
                .cloned()
                .unwrap_or_default()
                .into_iter()
                .take(k)
                .collect())
        }

        fn label(&self) -> String {
            "fixed".to_string()
        }
    }

    #[test]
    fn majority_baseline_reports_the_record_share() {
        let hists = vec![
            hist("aaa", &[("A", 4), ("B", 1)], 0, 0),
            hist("bbb", &[("A", 3)], 0, 0),
            hist("ccc", &[("B", 2)], 0, 0),
        ];
        let baseline = majority_baseline(&hists).unwrap();
        assert_eq!(baseline.state, "A");
        assert!((baseline.share - 0.7).abs() < 1e-12);
    }

    #[test]
    fn majority_baseline_single_state_share_is_one() {
        let hists = vec![hist("aaa", &[("Goa", 5)], 0, 0)];
        let baseline = majority_baseline(&hists).unwrap();
        assert_eq!(baseline.state, "Goa");
        assert_eq!(baseline.share, 1.0);
        assert!(majority_baseline(&[]).is_err());
    }

    #[test]
    fn naive_bayes_ranks_seen_names_by_count() {
        let nb = NaiveBayes::fit(&[
            hist("aaa", &[("UP", 5), ("Bihar", 1)], 0, 0),
            hist("bbb", &[("Goa", 9)], 0, 0),
        ])
        .unwrap();
        assert_eq!(nb.top_k("aaa", 2).unwrap(), vec!["UP", "Bihar"]);
        assert_eq!(nb.prior(), ["Goa", "UP", "Bihar"]);
    }

    #[test]
    fn naive_bayes_unseen_names_use_the_prior() {
        let nb = NaiveBayes::fit(&[
            hist("aaa", &[("UP", 5), ("Bihar", 3)], 0, 0),
            hist("bbb", &[("Goa", 9)], 0, 0),
        ])
        .unwrap();
        assert_eq!(nb.top_k("zzz", 2).unwrap(), vec!["Goa", "UP"]);
    }

    #[test]
    fn naive_bayes_pads_short_rankings_from_the_prior() {
        let nb = NaiveBayes::fit(&[
            hist("aaa", &[("Bihar", 1)], 0, 0),
            hist("bbb", &[("Goa", 9), ("UP", 4)], 0, 0),
        ])
        .unwrap();
        // Seen name with one state: own state first, then prior states
        // (skipping duplicates).
        assert_eq!(nb.top_k("aaa", 3).unwrap(), vec!["Bihar", "Goa", "UP"]);
    }

    fn toy_outcomes() -> (Vec<NameHistogram>, FixedPredictor) {
        let hists = vec![
            hist("aaa", &[("A", 6), ("B", 2)], 3, 4),
            hist("bbb", &[("B", 5)], 0, 0),
            hist("ccc", &[("C", 4), ("A", 4)], 1, 2),
            hist("ddd", &[("A", 1)], 1, 1),
        ];
        let mut table = HashMap::new();
        table.insert("aaa".to_string(), vec!["A".to_string()]);
        table.insert("bbb".to_string(), vec!["C".to_string()]); // miss
        table.insert("ccc".to_string(), vec!["C".to_string(), "B".to_string()]);
        table.insert("ddd".to_string(), vec!["B".to_string(), "A".to_string()]);
        (hists, FixedPredictor(table))
    }

    #[test]
    fn evaluate_scores_hits_and_modal_hits() {
        let (hists, predictor) = toy_outcomes();
        let (outcomes, report) = evaluate(&predictor, &hists, 3).unwrap();
        assert_eq!(outcomes.len(), 4);
        // aaa: predicted [A], truth [A,B] → hit + modal hit.
        assert!(outcomes[0].hit && outcomes[0].modal_hit);
        // bbb: predicted [C], truth [B] → miss.
        assert!(!outcomes[1].hit && !outcomes[1].modal_hit);
        // ccc: truth ties A-before-C... counts: A 4, C 4 → lex asc: [A, C];
        // predicted [C, B] → hit (C shared), modal miss (C ≠ A).
        assert!(outcomes[2].hit && !outcomes[2].modal_hit);
        // ddd: predicted [B, A], truth [A] → hit, modal miss.
        assert!(outcomes[3].hit && !outcomes[3].modal_hit);
        assert_eq!(report.n, 4);
        assert!((report.topk_accuracy - 0.75).abs() < 1e-12);
        assert!((report.modal_accuracy - 0.25).abs() < 1e-12);
        assert!(report.topk_accuracy >= report.modal_accuracy);
        // Popularity and female share flow through from the histograms.
        assert_eq!(outcomes[0].popularity, 8);
        assert_eq!(outcomes[0].female_share, Some(0.75));
        assert_eq!(outcomes[1].female_share, None);
    }

    #[test]
    fn evaluate_rejects_an_empty_test_set() {
        let (_, predictor) = toy_outcomes();
        assert!(matches!(
            evaluate(&predictor, &[], 3),
            Err(Error::EmptyTestSet)
        ));
    }

    #[test]
    fn oracle_predictor_scores_one() {
        let hists = vec![
            hist("aaa", &[("A", 6), ("B", 2)], 0, 0),
            hist("bbb", &[("B", 5)], 0, 0),
        ];
        let mut table = HashMap::new();
        for h in &hists {
            table.insert(
                h.last_name.clone(),
                h.top_k_states(3).into_iter().map(|(s, _)| s).collect(),
            );
        }
        let (_, report) = evaluate(&FixedPredictor(table), &hists, 3).unwrap();
        assert_eq!(report.topk_accuracy, 1.0);
        assert_eq!(report.modal_accuracy, 1.0);
    }

    fn many_outcomes(n: usize) -> Vec<TopKOutcome> {
        (0..n)
            .map(|i| TopKOutcome {
                name: format!("name{i:04}"),
                predicted: vec!["A".into()],
                truth_topk: vec![if i % 2 == 0 { "A".into() } else { "B".into() }],
                hit: i % 2 == 0,
                modal_hit: i % 2 == 0,
                popularity: (i as u64 % 10) + 1,
                female_share: None,
            })
            .collect()
    }

    #[test]
    fn weighted_sample_is_seeded_and_covers_all_when_n_is_large() {
        let outcomes = many_outcomes(50);
        let a = slice_weighted_random(&outcomes, 20, 9);
        let b = slice_weighted_random(&outcomes, 20, 9);
        let c = slice_weighted_random(&outcomes, 20, 10);
        assert_eq!(a, b);
        assert_eq!(a.n, 20);
        assert!(a != c || a.topk_accuracy == c.topk_accuracy); // seeds differ ⇒ may differ
        let all = slice_weighted_random(&outcomes, 100, 9);
        assert_eq!(all.n, 50);
        assert!(all.slice.contains("all"));
        let full = report_over("x".into(), outcomes.iter());
        assert_eq!(all.topk_accuracy, full.topk_accuracy);
    }

    #[test]
    fn weighted_sampling_prefers_popular_names() {
        // Two tiers: popularity 100 vs 1. Over many seeds the popular tier
        // must dominate the sample.
        let mut outcomes = many_outcomes(40);
        for (i, o) in outcomes.iter_mut().enumerate() {
            o.popularity = if i < 20 { 100 } else { 1 };
            o.hit = i < 20; // hits mark the popular tier
        }
        let mut popular_share = 0.0;
        for seed in 0..50 {
            let report = slice_weighted_random(&outcomes, 10, seed);
            popular_share += report.topk_accuracy;
        }
        popular_share /= 50.0;
        assert!(
            popular_share > 0.9,
            "popular tier occupied only {popular_share:.3} of the samples"
        );
    }

    #[test]
    fn extremes_take_the_sorted_head_and_tail() {
        let mut outcomes = many_outcomes(10);
        for (i, o) in outcomes.iter_mut().enumerate() {
            o.popularity = (i as u64 + 1) * 10; // 10, 20, ..., 100
            o.hit = i >= 7; // only the three most popular hit
            o.modal_hit = o.hit;
        }
        let (top, bottom) = slice_extremes(&outcomes, 3);
        assert_eq!(top.n, 3);
        assert_eq!(top.topk_accuracy, 1.0);
        assert_eq!(bottom.topk_accuracy, 0.0);
        let (t2, b2) = slice_extremes(&outcomes, 100);
        assert_eq!(t2.n, 10);
        assert_eq!(t2.topk_accuracy, b2.topk_accuracy);
    }

    #[test]
    fn per_state_groups_by_modal_truth() {
        let (hists, predictor) = toy_outcomes();
        let (outcomes, _) = evaluate(&predictor, &hists, 3).unwrap();
        let rows = per_state_accuracy(&outcomes, 1000, 1);
        // Modal states: aaa→A, bbb→B, ccc→A (tie break), ddd→A.
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].state, "A");
        assert_eq!(rows[0].n, 3);
        assert!((rows[0].topk_accuracy - 1.0).abs() < 1e-12);
        assert!((rows[0].modal_accuracy - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(rows[1].state, "B");
        assert_eq!(rows[1].topk_accuracy, 0.0);
    }

    #[test]
    fn per_state_sampling_is_seeded_and_capped() {
        let mut outcomes = many_outcomes(200);
        for o in &mut outcomes {
            o.truth_topk = vec!["A".to_string()];
        }
        let a = per_state_accuracy(&outcomes, 50, 3);
        let b = per_state_accuracy(&outcomes, 50, 3);
        assert_eq!(a, b);
        assert_eq!(a[0].n, 50);
    }

    #[test]
    fn report_files_have_documented_shapes() {
        let dir = tempfile::tempdir().unwrap();
        let reports = vec![SliceReport {
            slice: "test_set".into(),
            n: 4,
            topk_accuracy: 0.75,
            modal_accuracy: 0.25,
        }];
        let slices = dir.path().join("slices.csv");
        write_slice_reports(&slices, &reports).unwrap();
        let text = std::fs::read_to_string(&slices).unwrap();
        assert_eq!(
            text,
            "slice,n,topk_accuracy,modal_accuracy\ntest_set,4,0.750000,0.250000\n"
        );

        let wide = dir.path().join("wide.csv");
        let r = reports[0].clone();
        write_wide_table(
            &wide,
            &[("gru".to_string(), r.clone(), r.clone(), r.clone(), r)],
        )
        .unwrap();
        let text = std::fs::read_to_string(&wide).unwrap();
        assert_eq!(
            text,
            "model,test_set,weighted_random,most_popular,least_popular,modal_test_set\n\
             gru,75.0,75.0,75.0,75.0,25.0\n"
        );

        let per_state = dir.path().join("per_state.csv");
        write_per_state(
            &per_state,
            &[StateAccuracy {
                state: "Punjab".into(),
                n: 1000,
                topk_accuracy: 0.971,
                modal_accuracy: 0.5,
            }],
        )
        .unwrap();
        let text = std::fs::read_to_string(&per_state).unwrap();
        assert_eq!(text, "state,n,topk_pct,modal_pct\nPunjab,1000,97.1,50.0\n");

        let plot = dir.path().join("plot.csv");
        let points: Vec<(f64, f64)> = (0..20).map(|i| (i as f64, 0.5)).collect();
        write_plot_data(&plot, &points, 2.0 / 3.0, 3).unwrap();
        let text = std::fs::read_to_string(&plot).unwrap();
        assert!(text.starts_with("x,y,smoothed\n0,0.5,0.5"));
        assert_eq!(text.lines().count(), 21);
    }
}
