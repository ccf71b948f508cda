use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use thiserror::Error;

use super::lexicon::{self, has_any, has_phrase, singular, tokenize};
use super::Intent;
use crate::gateway::{GatewayError, GatewayRequest, LanguageModel, Purpose};
use crate::worldmap::AnnotatedMap;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassifyError {
    #[error("utterance is empty")]
    EmptyUtterance,
    #[error("classifier backend failed: {0}")]
    Backend(#[from] GatewayError),
}

/// Deterministic keyword classifier.
///
/// Precedence, first match wins:
/// 1. low-level: a directional phrase and no exhibit or place reference
///    outside it;
/// 2. high-level: a motion verb plus an exhibit or place reference, or a
///    bare "next exhibit" style fragment of at most four words;
/// 3. inquiry: a question form plus museum vocabulary;
/// 4. comment: a statement with museum vocabulary;
/// 5. free chat.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RuleClassifier {
    vocabulary: BTreeSet<String>,
    /// Lowercased exhibit and area names, as phrases.
    place_names: Vec<String>,
    /// Distinctive single words taken from those names.
    name_words: BTreeSet<String>,
}

impl RuleClassifier {
    /// Built-in lexicon only.
    pub fn new() -> Self {
        RuleClassifier {
            vocabulary: lexicon::MUSEUM_WORDS.iter().map(|w| w.to_string()).collect(),
            ..Default::default()
        }
    }

    /// Built-in lexicon extended with the map's exhibit and area names.
    pub fn for_map(map: &AnnotatedMap) -> Self {
        let mut c = RuleClassifier::new();
        let names = map
            .exhibits()
            .iter()
            .map(|e| e.name.as_str())
            .chain(map.areas().iter().map(|a| a.name.as_str()));
        for name in names {
            let tokens = tokenize(name);
            if tokens.is_empty() {
                continue;
            }
            c.place_names.push(tokens.join(" "));
            for t in tokens {
                if t.len() >= 4 && !lexicon::STOPWORDS.contains(&t.as_str()) {
                    c.vocabulary.insert(singular(&t).to_string());
                    c.name_words.insert(singular(&t).to_string());
                }
            }
        }
        c
    }

    fn has_museum_word(&self, tokens: &[String]) -> bool {
        tokens
            .iter()
            .any(|t| self.vocabulary.contains(t) || self.vocabulary.contains(singular(t)))
    }

    /// Exhibit number, place word, or a known exhibit/area name.
    pub fn has_place_reference(&self, tokens: &[String]) -> bool {
        !lexicon::numbers(tokens).is_empty()
            || has_any(tokens, lexicon::PLACE_WORDS)
            || self.place_names.iter().any(|p| has_phrase(tokens, p))
            || tokens.iter().any(|t| self.name_words.contains(singular(t)))
    }

    pub fn classify(&self, utterance: &str) -> Result<Intent, ClassifyError> {
        let trimmed = utterance.trim();
        let tokens = tokenize(trimmed);
        if tokens.is_empty() {
            return Err(ClassifyError::EmptyUtterance);
        }
        let place = self.has_place_reference(&tokens);
        if let Some((pos, len, _)) = lexicon::directional_span(&tokens) {
            // "around" in "turn around" is not a destination.
            let rest: Vec<String> = tokens[..pos].iter().chain(&tokens[pos + len..]).cloned().collect();
            if !self.has_place_reference(&rest) {
                return Ok(Intent::LowLevelControl);
            }
        }
        if place && has_any(&tokens, lexicon::MOTION_VERBS) {
            return Ok(Intent::HighLevelControl);
        }
        let question = trimmed.ends_with('?')
            || lexicon::INTERROGATIVE_STARTS.contains(&tokens[0].as_str())
            || has_any(&tokens, lexicon::INQUIRY_PHRASES);
        if !question && tokens.len() <= 4 && tokens.iter().any(|t| t == "next") {
            return Ok(Intent::HighLevelControl);
        }
        let museum = self.has_museum_word(&tokens);
        Ok(match (museum, question) {
            (true, true) => Intent::InquiryAboutMuseum,
            (true, false) => Intent::Comment,
            (false, _) => Intent::FreeChat,
        })
    }
}

pub enum ClassifierBackend<'a> {
    Rules(&'a RuleClassifier),
    Llm(&'a dyn LanguageModel),
}

const CLASSIFY_PROMPT: &str = "You label what a museum visitor says to a guide robot. \
Answer with exactly one label and nothing else:\n\
inquiry_about_museum - a question about the museum, its exhibits or geology\n\
comment - a remark or answer about the museum or its exhibits\n\
free_chat - small talk unrelated to the museum\n\
low_level_control - a directional command such as moving forward, backward, turning, or stopping\n\
high_level_control - a request to go to an exhibit, the next stop, or to be shown around\n\n\
Examples:\n\
\"move back a little\" -> low_level_control\n\
\"take me to the meteorites\" -> high_level_control\n\
\"how old is this fossil?\" -> inquiry_about_museum\n\
\"that crystal is huge\" -> comment\n\
\"do you like pizza?\" -> free_chat";

/// Labels an utterance with one of the five intents.
///
/// The language-model route must answer a label verbatim; one retry is
/// allowed before the failure surfaces.
pub fn classify(utterance: &str, backend: &ClassifierBackend<'_>) -> Result<Intent, ClassifyError> {
    if utterance.trim().is_empty() {
        return Err(ClassifyError::EmptyUtterance);
    }
    match backend {
        ClassifierBackend::Rules(rules) => rules.classify(utterance),
        ClassifierBackend::Llm(llm) => {
            let req = GatewayRequest::new(Purpose::Classify, CLASSIFY_PROMPT, utterance.trim());
            let mut last = GatewayError::InvalidLabel(String::new());
            for _ in 0..2 {
                match llm.complete(&req) {
                    Ok(text) => match Intent::from_label(text.trim()) {
                        Some(i) => return Ok(i),
                        None => last = GatewayError::InvalidLabel(text),
                    },
                    Err(e) => last = e,
                }
            }
            Err(ClassifyError::Backend(last))
        }
    }
}
