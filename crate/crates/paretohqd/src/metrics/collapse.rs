//! Language-collapse detection: phrase repetition and extreme brevity.
//!
//! A response is collapsed when it has fewer than five words, or when any
//! phrase of two to four consecutive words occurs at least four times
//! (overlapping occurrences counted). Tokenization lowercases, keeps
//! intra-word apostrophes, and strips all other punctuation so repeats
//! across sentence boundaries still match.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

/// Why a response was flagged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CollapseReason {
    Repetition,
    TooShort,
    None,
}

/// Verdict for one response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollapseVerdict {
    pub collapsed: bool,
    pub reason: CollapseReason,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trigger_phrase: Option<String>,
    pub word_count: usize,
}

/// Minimum word count below which a response counts as collapsed.
pub const MIN_WORDS: usize = 5;
/// A phrase occurring at least this many times flags the response.
pub const REPEAT_THRESHOLD: usize = 4;
/// Phrase lengths scanned for repetition.
pub const NGRAM_RANGE: std::ops::RangeInclusive<usize> = 2..=4;

/// Lowercases, keeps apostrophes only between letters or digits, replaces
/// all other punctuation with spaces, and splits on whitespace.
pub fn tokenize(text: &str) -> Vec<String> {
    let lowered = text.to_lowercase();
    let chars: Vec<char> = lowered.chars().map(|c| if c == '\u{2019}' { '\'' } else { c }).collect();
    let mut cleaned = String::with_capacity(chars.len());
    for (i, &c) in chars.iter().enumerate() {
        if c.is_alphanumeric() {
            cleaned.push(c);
        } else if c == '\'' {
            let prev_word = i > 0 && chars[i - 1].is_alphanumeric();
            let next_word = i + 1 < chars.len() && chars[i + 1].is_alphanumeric();
            if prev_word && next_word {
                cleaned.push(c);
            } else {
                cleaned.push(' ');
            }
        } else {
            cleaned.push(' ');
        }
    }
    cleaned.split_whitespace().map(str::to_string).collect()
}

/// Classifies one response. Deterministic; whitespace and case do not
/// matter.
pub fn detect_collapse(response: &str) -> CollapseVerdict {
    let words = tokenize(response);
    if words.len() < MIN_WORDS {
        return CollapseVerdict {
            collapsed: true,
            reason: CollapseReason::TooShort,
            trigger_phrase: None,
            word_count: words.len(),
        };
    }

    // Count every 2-4 word phrase, overlapping occurrences included.
    let mut counts: HashMap<&[String], usize> = HashMap::new();
    for n in NGRAM_RANGE {
        if words.len() < n {
            break;
        }
        for window in words.windows(n) {
            *counts.entry(window).or_insert(0) += 1;
        }
    }

    // Report the earliest repeated phrase by position, shortest first on a
    // positional tie.
    for start in 0..words.len() {
        for n in NGRAM_RANGE {
            if start + n > words.len() {
                break;
            }
            let phrase = &words[start..start + n];
            if counts[phrase] >= REPEAT_THRESHOLD {
                return CollapseVerdict {
                    collapsed: true,
                    reason: CollapseReason::Repetition,
                    trigger_phrase: Some(phrase.join(" ")),
                    word_count: words.len(),
                };
            }
        }
    }

    CollapseVerdict {
        collapsed: false,
        reason: CollapseReason::None,
        trigger_phrase: None,
        word_count: words.len(),
    }
}

/// Fraction of responses flagged as collapsed.
pub fn collapse_rate<S: AsRef<str>>(responses: &[S]) -> crate::error::Result<f64> {
    if responses.is_empty() {
        return Err(crate::error::Error::InvalidArgument(
            "collapse rate of an empty response set".into(),
        ));
    }
    let collapsed = responses
        .iter()
        .filter(|r| detect_collapse(r.as_ref()).collapsed)
        .count();
    Ok(collapsed as f64 / responses.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn short_response_is_collapsed() {
        let v = detect_collapse("Sure, here it is:");
        assert!(v.collapsed);
        assert_eq!(v.reason, CollapseReason::TooShort);
        assert_eq!(v.word_count, 4);
    }

    #[test]
    fn empty_response_is_collapsed() {
        let v = detect_collapse("");
        assert!(v.collapsed);
        assert_eq!(v.reason, CollapseReason::TooShort);
        assert_eq!(v.word_count, 0);
    }

    #[test]
    fn emoji_only_response_has_no_words() {
        let v = detect_collapse("\u{1f44c}\u{1f3fe} \u{1f44d}\u{1f3fe}");
        assert!(v.collapsed);
        assert_eq!(v.word_count, 0);
    }

    #[test]
    fn repeated_question_collapses_via_bigram() {
        let v = detect_collapse("What?  What?  What?  What?  What?");
        assert!(v.collapsed);
        assert_eq!(v.reason, CollapseReason::Repetition);
        assert_eq!(v.trigger_phrase.as_deref(), Some("what what"));
    }

    #[test]
    fn three_occurrences_do_not_collapse() {
        let v = detect_collapse("call me later and call me later or call me later instead");
        assert!(!v.collapsed, "three repeats stay under the threshold");
    }

    #[test]
    fn four_occurrences_collapse() {
        let v = detect_collapse(
            "call me later and call me later or call me later instead call me later",
        );
        assert!(v.collapsed);
        assert_eq!(v.reason, CollapseReason::Repetition);
    }

    #[test]
    fn repetition_across_punctuation_is_caught() {
        let v = detect_collapse("Can you explain? Can you explain? Can you explain? Can you explain?");
        assert!(v.collapsed);
        assert_eq!(v.trigger_phrase.as_deref(), Some("can you explain can"));
    }

    #[test]
    fn detection_ignores_case_and_outer_whitespace() {
        let base = "Nice to meet you. NICE to meet YOU. nice TO MEET you. Nice to Meet You.";
        let padded = format!("   {}   ", base.to_uppercase());
        let a = detect_collapse(base);
        let b = detect_collapse(&padded);
        assert_eq!(a.collapsed, b.collapsed);
        assert_eq!(a.trigger_phrase, b.trigger_phrase);
        assert_eq!(a.word_count, b.word_count);
    }

    #[test]
    fn apostrophes_stay_inside_words() {
        let words = tokenize("Don't worry, it's fine — I'm sure!");
        assert_eq!(words, ["don't", "worry", "it's", "fine", "i'm", "sure"]);
        // Quoting apostrophes are separators, not word characters.
        let words = tokenize("'hello' he said");
        assert_eq!(words, ["hello", "he", "said"]);
    }

    #[test]
    fn fluent_text_is_not_collapsed() {
        let v = detect_collapse(
            "The committee reviewed the proposal in detail and suggested several \
             improvements before approving the final version for publication next month.",
        );
        assert!(!v.collapsed);
        assert_eq!(v.reason, CollapseReason::None);
    }

    #[test]
    fn collapse_rate_counts_flagged_fraction() {
        let fluent = "This answer explains the whole procedure carefully and politely.";
        let responses = vec![
            fluent, fluent, fluent, fluent, fluent, fluent, fluent,
            "Sure, here it is:",
            "Ok.",
            "What? What? What? What? What?",
        ];
        let rate = collapse_rate(&responses).unwrap();
        assert!((rate - 0.3).abs() < 1e-12);

        let all_fluent = vec![fluent; 4];
        assert_eq!(collapse_rate(&all_fluent).unwrap(), 0.0);

        let all_short = vec!["Sure, here it is:"; 3];
        assert_eq!(collapse_rate(&all_short).unwrap(), 1.0);

        assert!(collapse_rate::<&str>(&[]).is_err());
    }

    proptest! {
        /// Splicing any phrase four times into fluent filler always flags.
        #[test]
        fn spliced_phrase_always_detected(
            phrase_len in 2usize..=4,
            phrase_seed in 0usize..26,
            positions in proptest::collection::vec(0usize..40, 4),
            filler_len in 20usize..60,
        ) {
            let vocab = [
                "alpha", "bridge", "candle", "drift", "ember", "forest", "garden",
                "harbor", "island", "jungle", "kernel", "lantern", "meadow",
                "needle", "orchard", "pebble", "quartz", "ridge", "summit",
                "timber", "upland", "valley", "willow", "zephyr", "basin", "cliff",
            ];
            let phrase: Vec<String> = (0..phrase_len)
                .map(|i| format!("{}{}", vocab[(phrase_seed + i) % vocab.len()], i))
                .collect();
            let filler: Vec<String> = (0..filler_len)
                .map(|i| vocab[(i * 7 + phrase_seed) % vocab.len()].to_string())
                .collect();
            // Insert the phrase at four cut points; cutting the filler can
            // never split a phrase copy.
            let mut cuts: Vec<usize> = positions.iter().map(|p| p.min(&filler_len)).copied().collect();
            cuts.sort_unstable();
            let mut words: Vec<String> = Vec::new();
            let mut prev = 0usize;
            for cut in cuts {
                words.extend_from_slice(&filler[prev..cut]);
                words.extend_from_slice(&phrase);
                prev = cut;
            }
            words.extend_from_slice(&filler[prev..]);
            let text = words.join(" ");
            let verdict = detect_collapse(&text);
            prop_assert!(verdict.collapsed, "missed splice in {text}");
            prop_assert_eq!(verdict.reason, CollapseReason::Repetition);
        }
    }
}
