use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ols::ols;
use crate::surprisal::SurprisalTable;
use crate::trials::{DistractorKind, RTTrial};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionScope {
    #[default]
    All,
    Critical,
    NonCritical,
}

/// Which trials enter a fit. Incorrect and opening-mask decisions never do.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialFilter {
    pub kind: Option<DistractorKind>,
    pub scope: RegionScope,
    pub max_rt: Option<f64>,
}

impl Default for TrialFilter {
    /// Correct L-Maze decisions in every region.
    fn default() -> Self {
        TrialFilter {
            kind: Some(DistractorKind::L),
            scope: RegionScope::All,
            max_rt: None,
        }
    }
}

impl TrialFilter {
    pub fn with_scope(self, scope: RegionScope) -> Self {
        TrialFilter { scope, ..self }
    }

    pub fn accepts(&self, t: &RTTrial) -> bool {
        t.is_usable()
            && self.kind.is_none_or(|k| t.kind() == k)
            && self.max_rt.is_none_or(|m| t.rt() <= m)
            && match self.scope {
                RegionScope::All => true,
                RegionScope::Critical => t.row.critical,
                RegionScope::NonCritical => !t.row.critical,
            }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FitOptions {
    /// Add a fixed intercept offset per participant.
    pub participant_offsets: bool,
    /// Add a fixed intercept offset per (suite, item).
    pub item_offsets: bool,
}

/// `rt ~ intercept + β_s·surprisal + β_f·log_freq + β_l·length (+ offsets)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub provider: String,
    pub filter: TrialFilter,
    pub options: FitOptions,
    pub names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub p_values: Vec<f64>,
    pub r_squared: f64,
    pub residual_sd: f64,
    pub n: usize,
    /// Offset levels; the first of each list is the baseline.
    pub participants: Vec<String>,
    pub items: Vec<(String, u32)>,
}

const INTERCEPT: usize = 0;
const SURPRISAL: usize = 1;
const FREQ: usize = 2;
const LENGTH: usize = 3;

impl LinearFit {
    pub fn intercept(&self) -> f64 {
        self.coefficients[INTERCEPT]
    }

    /// Milliseconds of slowdown per bit of surprisal.
    pub fn ms_per_bit(&self) -> f64 {
        self.coefficients[SURPRISAL]
    }

    pub fn ms_per_bit_p(&self) -> f64 {
        self.p_values[SURPRISAL]
    }

    pub fn freq_slope(&self) -> f64 {
        self.coefficients[FREQ]
    }

    pub fn length_slope(&self) -> f64 {
        self.coefficients[LENGTH]
    }

    /// Fitted RT for a trial. Unseen offset levels contribute nothing.
    pub fn predict(&self, t: &RTTrial, surprisal: f64) -> f64 {
        let mut y = self.intercept()
            + self.ms_per_bit() * surprisal
            + self.freq_slope() * t.log_freq
            + self.length_slope() * t.word_length as f64;
        let mut col = 4;
        if self.options.participant_offsets {
            if let Some(i) = self.participants.iter().skip(1).position(|p| *p == t.row.participant) {
                y += self.coefficients[col + i];
            }
            col += self.participants.len() - 1;
        }
        if self.options.item_offsets {
            let key = (t.row.suite_tag.clone(), t.row.item_id);
            if let Some(i) = self.items.iter().skip(1).position(|k| *k == key) {
                y += self.coefficients[col + i];
            }
        }
        y
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("fit serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Surprisal of the word a trial responded to, checking that the table and
/// the log agree on the word.
pub(crate) fn trial_surprisal(table: &SurprisalTable, t: &RTTrial) -> Result<f64> {
    let r = &t.row;
    let entry = table.get(&r.suite_tag, r.item_id, &r.condition)?;
    match entry.words.get(r.word_index) {
        Some(w) if *w == r.word => Ok(entry.bits[r.word_index]),
        other => Err(Error::MissingEntry(format!(
            "{}: word {} of {}/{}/{} is {:?} in the table but {:?} in the log",
            table.provider, r.word_index, r.suite_tag, r.item_id, r.condition, other, r.word
        ))),
    }
}

fn levels<K: Ord + Clone>(keys: impl Iterator<Item = K>) -> Vec<K> {
    let set: std::collections::BTreeSet<K> = keys.collect();
    set.into_iter().collect()
}

/// Ordinary least squares fit of RT on surprisal, log frequency and length.
pub fn fit_rt_model(
    trials: &[RTTrial],
    filter: TrialFilter,
    table: &SurprisalTable,
    options: FitOptions,
) -> Result<LinearFit> {
    let used: Vec<&RTTrial> = trials.iter().filter(|t| filter.accepts(t)).collect();
    let surprisal: Vec<f64> = used.iter().map(|t| trial_surprisal(table, t)).collect::<Result<_>>()?;

    let participants = levels(used.iter().map(|t| t.row.participant.clone()));
    let items = levels(used.iter().map(|t| (t.row.suite_tag.clone(), t.row.item_id)));
    let p_index: BTreeMap<&str, usize> = participants.iter().enumerate().map(|(i, p)| (p.as_str(), i)).collect();
    let i_index: BTreeMap<(&str, u32), usize> =
        items.iter().enumerate().map(|(i, (s, id))| ((s.as_str(), *id), i)).collect();

    let mut names: Vec<String> = ["intercept", "surprisal", "log_freq", "length"].map(String::from).to_vec();
    let p_off = names.len();
    if options.participant_offsets {
        names.extend(participants.iter().skip(1).map(|p| format!("participant:{p}")));
    }
    let i_off = names.len();
    if options.item_offsets {
        names.extend(items.iter().skip(1).map(|(s, id)| format!("item:{s}/{id}")));
    }

    let p = names.len();
    let n = used.len();
    if n < 10 * p {
        return Err(Error::InsufficientData(format!(
            "{n} trials for {p} coefficients; at least {} needed",
            10 * p
        )));
    }

    let mut x = DMatrix::<f64>::zeros(n, p);
    for (row, (t, s)) in used.iter().zip(&surprisal).enumerate() {
        x[(row, INTERCEPT)] = 1.0;
        x[(row, SURPRISAL)] = *s;
        x[(row, FREQ)] = t.log_freq;
        x[(row, LENGTH)] = t.word_length as f64;
        if options.participant_offsets {
            let level = p_index[t.row.participant.as_str()];
            if level > 0 {
                x[(row, p_off + level - 1)] = 1.0;
            }
        }
        if options.item_offsets {
            let level = i_index[&(t.row.suite_tag.as_str(), t.row.item_id)];
            if level > 0 {
                x[(row, i_off + level - 1)] = 1.0;
            }
        }
    }
    let y: Vec<f64> = used.iter().map(|t| t.rt()).collect();
    let fit = ols(&x, &y)?;
    Ok(LinearFit {
        provider: table.provider.clone(),
        filter,
        options,
        names,
        coefficients: fit.coefficients,
        std_errors: fit.std_errors,
        p_values: fit.p_values,
        r_squared: fit.r_squared,
        residual_sd: fit.residual_sd,
        n,
        participants,
        items,
    })
}

/// Slowdown in ms implied by a surprisal difference.
pub fn predicted_slowdown(fit: &LinearFit, delta_bits: f64) -> f64 {
    fit.ms_per_bit() * delta_bits
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::surprisal::{FrequencyTable, SentenceKey, SentenceSurprisal};
    use crate::suite::{Region, RegionedSentence};
    use crate::trials::RtRow;
    use proptest::prelude::*;
    use rand::Rng;
    use rand_distr::{Distribution, Normal};

    /// One long pseudo-sentence per participant with known predictors.
    pub(crate) fn synthetic(n: usize, noise: f64, seed: u64) -> (Vec<RTTrial>, SurprisalTable) {
        let mut g = crate::rng::stream(seed, 0);
        let words: Vec<String> = (0..n).map(|i| format!("w{}{}", "x".repeat(i % 9), i)).collect();
        let bits: Vec<f64> = (0..n).map(|_| g.random_range(0.0..20.0)).collect();
        let sentence = RegionedSentence {
            regions: vec![Region {
                index: 1,
                label: "all".into(),
                text: words.join(" "),
                critical: false,
            }],
        };
        let mut table = SurprisalTable::new("synthetic");
        table.insert(SentenceKey::new("SYN", 1, "c"), SentenceSurprisal::new(&sentence, bits.clone()).unwrap());
        let freq = FrequencyTable::default();
        let normal = Normal::new(0.0, noise.max(f64::MIN_POSITIVE)).unwrap();
        let trials = words
            .iter()
            .enumerate()
            .map(|(i, w)| {
                let mut t = RTTrial::new(
                    RtRow {
                        participant: "p".into(),
                        suite_tag: "SYN".into(),
                        item_id: 1,
                        condition: "c".into(),
                        word_index: i,
                        word: w.clone(),
                        region: "all".into(),
                        critical: false,
                        distractor: "zzz".into(),
                        distractor_kind: DistractorKind::L,
                        correct: true,
                        rt_ms: 1.0,
                    },
                    &freq,
                );
                t.log_freq = g.random_range(-3.0..15.0);
                let e = if noise > 0.0 { normal.sample(&mut g) } else { 0.0 };
                t.row.rt_ms = 300.0 + 15.0 * bits[i] + 2.0 * t.word_length as f64 - 5.0 * t.log_freq + e;
                t
            })
            .collect();
        (trials, table)
    }

    #[test]
    fn noiseless_recovery_is_exact() {
        let (trials, table) = synthetic(400, 0.0, 3);
        let fit = fit_rt_model(&trials, TrialFilter::default(), &table, FitOptions::default()).unwrap();
        for (got, want) in fit.coefficients.iter().zip([300.0, 15.0, -5.0, 2.0]) {
            assert!((got - want).abs() < 1e-8, "{got} vs {want}");
        }
        assert_eq!(fit.names[1], "surprisal");
        let back = LinearFit::from_json(&fit.to_json()).unwrap();
        assert_eq!(back, fit);
    }

    #[test]
    fn too_few_trials_and_wrong_words() {
        let (trials, table) = synthetic(39, 0.0, 3);
        assert!(matches!(
            fit_rt_model(&trials, TrialFilter::default(), &table, FitOptions::default()),
            Err(Error::InsufficientData(_))
        ));
        let (mut trials, table) = synthetic(60, 0.0, 3);
        trials[5].row.word = "other".into();
        assert!(matches!(
            fit_rt_model(&trials, TrialFilter::default(), &table, FitOptions::default()),
            Err(Error::MissingEntry(_))
        ));
    }

    #[test]
    fn filter_respects_kind_scope_and_cutoff() {
        let (mut trials, _) = synthetic(3, 0.0, 1);
        trials[0].row.distractor_kind = DistractorKind::G;
        trials[1].row.critical = true;
        let f = TrialFilter::default();
        assert!(!f.accepts(&trials[0]) && f.accepts(&trials[1]) && f.accepts(&trials[2]));
        assert!(!f.with_scope(RegionScope::NonCritical).accepts(&trials[1]));
        assert!(!f.with_scope(RegionScope::Critical).accepts(&trials[2]));
        let cut = TrialFilter {
            max_rt: Some(trials[2].rt() - 1.0),
            ..f
        };
        assert!(!cut.accepts(&trials[2]));
        trials[2].row.distractor_kind = DistractorKind::Mask;
        assert!(!TrialFilter { kind: None, ..f }.accepts(&trials[2]));
    }

    #[test]
    fn offsets_absorb_participant_shifts() {
        let (mut trials, table) = synthetic(600, 0.0, 7);
        for (i, t) in trials.iter_mut().enumerate() {
            t.row.participant = format!("p{}", i % 3);
            t.row.rt_ms += 40.0 * (i % 3) as f64;
        }
        let opts = FitOptions {
            participant_offsets: true,
            item_offsets: false,
        };
        let fit = fit_rt_model(&trials, TrialFilter::default(), &table, opts).unwrap();
        assert_eq!(fit.names.len(), 6);
        assert!((fit.coefficients[4] - 40.0).abs() < 1e-8);
        assert!((fit.coefficients[5] - 80.0).abs() < 1e-8);
        let s = trial_surprisal(&table, &trials[2]).unwrap();
        assert!((fit.predict(&trials[2], s) - trials[2].rt()).abs() < 1e-8);
    }

    #[test]
    fn predicted_slowdown_products() {
        let (trials, table) = synthetic(100, 0.0, 3);
        let mut fit = fit_rt_model(&trials, TrialFilter::default(), &table, FitOptions::default()).unwrap();
        fit.coefficients[SURPRISAL] = 12.0;
        assert_eq!(predicted_slowdown(&fit, 5.0), 60.0);
        assert_eq!(predicted_slowdown(&fit, 0.0), 0.0);
        fit.coefficients[SURPRISAL] = 0.5;
        assert_eq!(predicted_slowdown(&fit, 4.0), 2.0);
    }

    proptest! {
        #[test]
        fn predicted_slowdown_is_linear(beta in -30.0f64..30.0, a in -20.0f64..20.0, b in -20.0f64..20.0) {
            let (trials, table) = synthetic(60, 0.0, 3);
            let mut fit = fit_rt_model(&trials, TrialFilter::default(), &table, FitOptions::default()).unwrap();
            fit.coefficients[SURPRISAL] = beta;
            let lhs = predicted_slowdown(&fit, a + b);
            let rhs = predicted_slowdown(&fit, a) + predicted_slowdown(&fit, b);
            prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()));
        }
    }
}
