//! Synthetic Maze RT logs with a known generating process, for dry runs and
//! recovery checks.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maze::{latin_square_condition, list_count, MaterialsBundle, MASK};
use crate::rng;
use crate::suite::TestSuite;
use crate::surprisal::{FrequencyTable, SurprisalTable};
use crate::trials::{DistractorKind, RtRow};

/// `rt = base + ms_per_bit·s + length_ms·len + freq_ms·log_freq + offsets + noise`,
/// plus `effect_ms` on every critical word of an ungrammatical condition and
/// `lmaze_shift_ms` on every L-Maze decision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimParams {
    pub participants: usize,
    pub base_ms: f64,
    pub ms_per_bit: f64,
    pub length_ms: f64,
    pub freq_ms: f64,
    pub effect_ms: f64,
    pub noise_sd: f64,
    pub participant_sd: f64,
    pub item_sd: f64,
    /// Probability that a non-mask decision is wrong, ending the sentence.
    pub error_rate: f64,
    pub lmaze_shift_ms: f64,
    /// L-Maze rate for non-critical words when no materials are supplied.
    pub rate: f64,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams {
            participants: 24,
            base_ms: 300.0,
            ms_per_bit: 15.0,
            length_ms: 2.0,
            freq_ms: -5.0,
            effect_ms: 0.0,
            noise_sd: 20.0,
            participant_sd: 0.0,
            item_sd: 0.0,
            error_rate: 0.0,
            lmaze_shift_ms: 0.0,
            rate: 0.25,
        }
    }
}

fn normal(sd: f64) -> Result<Normal<f64>> {
    Normal::new(0.0, sd).map_err(|e| Error::InvalidArgument(format!("bad standard deviation {sd}: {e}")))
}

/// Simulates one Latin-square session per participant over every suite.
///
/// Participant `p` reads list `p mod L`. Distractors come from `materials`
/// when given; otherwise the first word is masked, critical words are L and
/// other words are L with probability `rate`, with a placeholder distractor.
pub fn simulate_rt_log(
    suites: &[TestSuite],
    table: &SurprisalTable,
    freq: &FrequencyTable,
    materials: Option<&MaterialsBundle>,
    params: SimParams,
    seed: u64,
) -> Result<Vec<RtRow>> {
    if params.participants == 0 {
        return Err(Error::InvalidArgument("simulation needs at least one participant".into()));
    }
    if !(0.0..1.0).contains(&params.error_rate) {
        return Err(Error::InvalidArgument(format!("error rate must lie in [0, 1), got {}", params.error_rate)));
    }
    let noise = normal(params.noise_sd)?;
    let p_sd = normal(params.participant_sd)?;
    let i_sd = normal(params.item_sd)?;
    let lists = list_count(suites);
    let mut rows = Vec::new();
    for p in 0..params.participants {
        let participant = format!("P{:03}", p + 1);
        let p_offset = p_sd.sample(&mut rng::stream_path(seed, &[1, p as u64]));
        let list = p % lists;
        for suite in suites {
            let ungrammatical = suite.ungrammatical_conditions();
            for (position, item) in suite.items.iter().enumerate() {
                let condition = latin_square_condition(suite, position, list);
                let sentence = item.sentence(condition)?;
                let entry = table.get(&suite.tag, item.item_id, condition)?;
                let words = sentence.words();
                let regions = sentence.word_regions();
                let critical = sentence.word_critical();
                let served = match materials {
                    Some(m) => Some(m.item(&suite.tag, item.item_id, condition).ok_or_else(|| {
                        Error::MissingEntry(format!("materials lack {}/{}/{condition}", suite.tag, item.item_id))
                    })?),
                    None => None,
                };
                let item_key = [rng::key_id(&suite.tag), item.item_id as u64];
                let i_offset = i_sd.sample(&mut rng::stream_path(seed, &[2, item_key[0], item_key[1]]));
                let mut g = rng::stream_path(seed, &[3, p as u64, item_key[0], item_key[1]]);
                for (i, word) in words.iter().enumerate() {
                    let (distractor, kind) = match served {
                        Some(m) => {
                            let c = &m.choices[i];
                            (c.distractor.clone(), c.kind)
                        }
                        None => {
                            let kind = if i == 0 {
                                DistractorKind::Mask
                            } else if critical[i] {
                                DistractorKind::L
                            } else {
                                let path = [4, item_key[0], item_key[1], rng::key_id(condition), i as u64];
                                if rng::stream_path(seed, &path).random::<f64>() < params.rate {
                                    DistractorKind::L
                                } else {
                                    DistractorKind::G
                                }
                            };
                            let d = if kind == DistractorKind::Mask { MASK } else { "-" };
                            (d.to_string(), kind)
                        }
                    };
                    let mut rt = params.base_ms
                        + params.ms_per_bit * entry.bits[i]
                        + params.length_ms * word.chars().count() as f64
                        + params.freq_ms * freq.log_freq(word)
                        + p_offset
                        + i_offset
                        + noise.sample(&mut g);
                    if critical[i] && ungrammatical.contains(condition) {
                        rt += params.effect_ms;
                    }
                    if kind == DistractorKind::L {
                        rt += params.lmaze_shift_ms;
                    }
                    let correct = kind == DistractorKind::Mask || g.random::<f64>() >= params.error_rate;
                    rows.push(RtRow {
                        participant: participant.clone(),
                        suite_tag: suite.tag.clone(),
                        item_id: item.item_id,
                        condition: condition.to_string(),
                        word_index: i,
                        word: word.to_string(),
                        region: regions[i].to_string(),
                        critical: critical[i],
                        distractor,
                        distractor_kind: kind,
                        correct,
                        rt_ms: rt.max(50.0),
                    });
                    if !correct {
                        break;
                    }
                }
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::suite::fixtures::minimal;
    use crate::surprisal::{SentenceKey, SentenceSurprisal};
    use crate::trials::check_rows;

    fn table() -> SurprisalTable {
        let suite = minimal();
        let mut t = SurprisalTable::new("t");
        for (c, s) in &suite.items[0].sentences {
            t.insert(SentenceKey::new("MIN", 1, c), SentenceSurprisal::new(s, vec![1.0, 2.0, 3.0, 4.0]).unwrap());
        }
        t
    }

    #[test]
    fn latin_square_and_determinism() {
        let suites = vec![minimal()];
        let f = FrequencyTable::default();
        let params = SimParams {
            participants: 4,
            noise_sd: 0.0,
            ..SimParams::default()
        };
        let rows = simulate_rt_log(&suites, &table(), &f, None, params, 7).unwrap();
        assert_eq!(rows.len(), 16);
        check_rows(&rows).unwrap();
        let conds: Vec<&str> = rows.iter().step_by(4).map(|r| r.condition.as_str()).collect();
        assert_eq!(conds, ["good", "bad", "good", "bad"]);
        // noiseless: 300 + 15·3 + 2·3 − 5·log_freq(unknown)
        let expect = 300.0 + 45.0 + 6.0 - 5.0 * crate::surprisal::UNKNOWN_LOG2_FREQ;
        assert!((rows[2].rt_ms - expect).abs() < 1e-9);
        assert_eq!(rows[0].distractor_kind, DistractorKind::Mask);
        assert_eq!(rows[2].distractor_kind, DistractorKind::L);
        assert_eq!(rows, simulate_rt_log(&suites, &table(), &f, None, params, 7).unwrap());
    }

    #[test]
    fn errors_end_the_sentence() {
        let suites = vec![minimal()];
        let params = SimParams {
            participants: 50,
            error_rate: 0.5,
            ..SimParams::default()
        };
        let rows = simulate_rt_log(&suites, &table(), &FrequencyTable::default(), None, params, 1).unwrap();
        assert!(rows.len() < 200);
        for w in rows.windows(2) {
            if !w[0].correct && w[1].participant == w[0].participant {
                assert_eq!(w[1].word_index, 0, "no words after an error");
            }
        }
    }
}
