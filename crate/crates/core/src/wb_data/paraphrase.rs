//! Optional paraphrasing of indicator names through a chat model.

use serde::Serialize;
use tracing::warn;

use super::IndicatorMeta;
use crate::harness::{ChatProvider, Message};
use crate::value::fold;

pub const PARAPHRASE_PROMPT: &str = r#"You are a helpful assistant that paraphrases World Bank indicator names using the context provided in the additional description.
Return exactly three clear, concise **noun phrases** that faithfully represent the meaning of the original indicator name. Output them as a semicolon-delimited list.
These noun phrases will be inserted into questions like:
- "Which country in Eastern Europe had the highest <paraphrased indicator name> in 2020?"
- "Was the average <paraphrased indicator name> in Northern America higher or lower than the value for Ghana in 2020?"
- "What was the <paraphrased indicator name> in 2020 for the country with the highest value in South Asia?"
- "Did <country> have a higher <paraphrased indicator name> than <other_country> in 2020?"
Write the paraphrases **as if a person were using them to ask a question like the ones above**. Make them sound **natural and conversational**, like something someone would realistically say or hear, without compromising technical accuracy.
Follow these guidelines:
- Make all outputs concise, grammatical, easy to understand and **suitable for inserting into questions** like these.
- Compress the phrase into the **shortest possible form** while retaining the meaning.
- Do not use the words **total** or **average** in the paraphrase as this will interfere with the grammar of the wider questions.
- Include bracketed elements, e.g., "(% of GDP)" as natural language phrases, such as "as a percentage of GDP".
- **Do not include units of measurement**, e.g., "in US dollars", or "in TEUs".
- Avoid embellished and abstract language, or esoteric terms. If an indicator name is very simple (e.g., 'rural population', 'net migration', 'surface area'), use that as one of the three paraphrases.
- **Only capitalize proper nouns or acronyms**. Even though these are noun phrases, they will be inserted into the middle of sentences.
- Use the additional description only to **clarify meaning**, not to add new information.
- To repeat, paraphrases should be **noun phrases**. Start the phrase with something like 'count of', 'number of', 'percentage of', 'area of', 'rate of' if you are not sure how to begin.
Reminder: preserve the meaning of the original indicator name; shorten as much as possible; and do not use unusual phrasing."#;

/// Attempts per indicator: the first request plus two retries.
pub const PARAPHRASE_ATTEMPTS: usize = 3;

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ParaphraseReport {
    pub paraphrased: usize,
    /// Indicators whose replies never parsed into three phrases.
    pub fell_back: Vec<String>,
    /// Indicators skipped because the provider failed.
    pub provider_failed: Vec<String>,
}

/// Splits a semicolon-delimited reply into exactly three distinct non-empty
/// phrases. Surrounding quotes, list bullets and trailing full stops are
/// stripped.
pub fn parse_paraphrase_reply(reply: &str) -> Option<Vec<String>> {
    let phrases: Vec<String> = reply
        .trim()
        .split(';')
        .map(|p| {
            p.trim()
                .trim_start_matches(['-', '*', '\u{2022}'])
                .trim()
                .trim_matches(['"', '\'', '`'])
                .trim_end_matches('.')
                .trim()
                .to_string()
        })
        .filter(|p| !p.is_empty())
        .collect();
    if phrases.len() != 3 || phrases.iter().any(|p| p.contains('\n')) {
        return None;
    }
    let mut seen: Vec<String> = phrases.iter().map(|p| fold(p)).collect();
    seen.sort();
    seen.dedup();
    (seen.len() == 3).then_some(phrases)
}

fn user_message(ind: &IndicatorMeta) -> String {
    format!(
        "Indicator name: {}\nAdditional description: {}",
        ind.name, ind.description
    )
}

/// Fills in paraphrases for indicators that have none. Malformed replies are
/// retried; after [`PARAPHRASE_ATTEMPTS`] the indicator keeps its raw name
/// only. Provider errors skip the indicator with a warning.
pub fn paraphrase_indicators(
    mut catalogue: Vec<IndicatorMeta>,
    provider: &dyn ChatProvider,
) -> (Vec<IndicatorMeta>, ParaphraseReport) {
    let mut report = ParaphraseReport::default();
    for ind in catalogue.iter_mut().filter(|i| i.paraphrases.is_empty()) {
        let messages = [Message::system(PARAPHRASE_PROMPT), Message::user(user_message(ind))];
        let mut outcome = None;
        for attempt in 1..=PARAPHRASE_ATTEMPTS {
            match provider.chat(&messages, &[]) {
                Ok(reply) => {
                    let text = reply.content.unwrap_or_default();
                    if let Some(p) = parse_paraphrase_reply(&text) {
                        outcome = Some(Ok(p));
                        break;
                    }
                    warn!("{}: malformed paraphrase reply (attempt {attempt}): {text:?}", ind.code);
                }
                Err(e) => {
                    warn!("{}: paraphrase provider failed: {e}", ind.code);
                    outcome = Some(Err(()));
                    break;
                }
            }
        }
        match outcome {
            Some(Ok(p)) => {
                ind.paraphrases = p;
                report.paraphrased += 1;
            }
            Some(Err(())) => report.provider_failed.push(ind.code.to_string()),
            None => report.fell_back.push(ind.code.to_string()),
        }
    }
    (catalogue, report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{ProviderError, ScriptedProvider};

    fn reply(text: &str) -> Message {
        Message::assistant(Some(text.into()), Vec::new())
    }

    fn secondary() -> IndicatorMeta {
        IndicatorMeta::new("SE.SEC.ENRR", "School enrolment, secondary (% gross)", "Gross enrolment ratio.").unwrap()
    }

    #[test]
    fn parses_three_phrases() {
        assert_eq!(
            parse_paraphrase_reply("Secondary school enrolment rate; secondary enrolment rate; gross secondary school enrolment").unwrap(),
            vec!["Secondary school enrolment rate", "secondary enrolment rate", "gross secondary school enrolment"]
        );
        assert_eq!(parse_paraphrase_reply("\"a\"; b.; - c").unwrap(), vec!["a", "b", "c"]);
        assert!(parse_paraphrase_reply("a; b").is_none());
        assert!(parse_paraphrase_reply("a; b; c; d").is_none());
        assert!(parse_paraphrase_reply("a; A; b").is_none());
        assert!(parse_paraphrase_reply("").is_none());
    }

    #[test]
    fn paraphrases_are_attached() {
        let provider = ScriptedProvider::new([reply(
            "Secondary school enrolment rate; secondary enrolment rate; gross secondary school enrolment",
        )]);
        let (cat, report) = paraphrase_indicators(vec![secondary()], &provider);
        assert!(cat[0].paraphrases.contains(&"Secondary school enrolment rate".to_string()));
        assert_eq!(report.paraphrased, 1);
        let req = &provider.requests()[0];
        assert_eq!(req.messages[0].content.as_deref(), Some(PARAPHRASE_PROMPT));
        assert!(req.tool_names.is_empty());
    }

    #[test]
    fn retries_then_falls_back_to_raw_name() {
        let provider = ScriptedProvider::new([reply("a; b"), reply("a; b"), reply("a; b"), reply("x; y; z")]);
        let (cat, report) = paraphrase_indicators(vec![secondary()], &provider);
        assert!(cat[0].paraphrases.is_empty());
        assert_eq!(report.fell_back, vec!["SE.SEC.ENRR"]);
        assert_eq!(provider.requests().len(), PARAPHRASE_ATTEMPTS);
    }

    #[test]
    fn second_attempt_can_succeed() {
        let provider = ScriptedProvider::new([reply("a; b"), reply("x; y; z")]);
        let (cat, _) = paraphrase_indicators(vec![secondary()], &provider);
        assert_eq!(cat[0].paraphrases, vec!["x", "y", "z"]);
    }

    #[test]
    fn provider_failure_skips_indicator() {
        let provider = ScriptedProvider::default();
        provider.push(Err(ProviderError::Transport("down".into())));
        let (cat, report) = paraphrase_indicators(vec![secondary()], &provider);
        assert!(cat[0].paraphrases.is_empty());
        assert_eq!(report.provider_failed, vec!["SE.SEC.ENRR"]);
    }
}
