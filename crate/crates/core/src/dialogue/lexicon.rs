//! Word lists and phrase matching shared by the rule-based classifier, goal
//! extraction and log coding.

use alloc::string::String;
use alloc::vec::Vec;

use crate::navsim::Directional;

/// Lowercases, drops apostrophes and splits on anything not alphanumeric.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for ch in text.chars() {
        if ch == '\'' || ch == '\u{2019}' {
            continue;
        }
        if ch.is_alphanumeric() {
            cur.extend(ch.to_lowercase());
        } else if !cur.is_empty() {
            out.push(core::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// Position of the first whole-word occurrence of `phrase` in `tokens`.
pub fn find_phrase<S: AsRef<str>>(tokens: &[S], phrase: &str) -> Option<usize> {
    let words: Vec<&str> = phrase.split_whitespace().collect();
    if words.is_empty() || words.len() > tokens.len() {
        return None;
    }
    (0..=tokens.len() - words.len()).find(|&i| {
        words
            .iter()
            .zip(&tokens[i..])
            .all(|(w, t)| *w == t.as_ref())
    })
}

pub fn has_phrase<S: AsRef<str>>(tokens: &[S], phrase: &str) -> bool {
    find_phrase(tokens, phrase).is_some()
}

pub fn has_any<S: AsRef<str>>(tokens: &[S], phrases: &[&str]) -> bool {
    phrases.iter().any(|p| has_phrase(tokens, p))
}

/// Directional phrases, longest first so "turn left" wins over "left".
pub const DIRECTIONAL: &[(&str, Directional)] = &[
    ("turn to the left", Directional::TurnLeft),
    ("turn to the right", Directional::TurnRight),
    ("to the left", Directional::TurnLeft),
    ("to the right", Directional::TurnRight),
    ("turn left", Directional::TurnLeft),
    ("turn right", Directional::TurnRight),
    ("rotate left", Directional::TurnLeft),
    ("rotate right", Directional::TurnRight),
    ("turn around", Directional::TurnLeft),
    ("back up", Directional::Backward),
    ("go back", Directional::Backward),
    ("move back", Directional::Backward),
    ("backwards", Directional::Backward),
    ("backward", Directional::Backward),
    ("reverse", Directional::Backward),
    ("forwards", Directional::Forward),
    ("forward", Directional::Forward),
    ("closer", Directional::Forward),
    ("stop", Directional::Stop),
    ("halt", Directional::Stop),
    ("freeze", Directional::Stop),
];

/// The directional command mentioned earliest in the utterance.
pub fn directional<S: AsRef<str>>(tokens: &[S]) -> Option<Directional> {
    directional_span(tokens).map(|(_, _, c)| c)
}

/// Like [`directional`], with the matched phrase's token position and length.
pub fn directional_span<S: AsRef<str>>(tokens: &[S]) -> Option<(usize, usize, Directional)> {
    let mut best: Option<(usize, usize, Directional)> = None;
    for &(phrase, cmd) in DIRECTIONAL {
        if let Some(pos) = find_phrase(tokens, phrase) {
            let len = phrase.split_whitespace().count();
            let better = match best {
                None => true,
                Some((bp, bl, _)) => pos < bp || (pos == bp && len > bl),
            };
            if better {
                best = Some((pos, len, cmd));
            }
        }
    }
    best
}

pub const MOTION_VERBS: &[&str] = &[
    "go", "take", "show", "bring", "move on", "navigate", "lead", "head", "guide", "visit", "give",
    "start", "begin", "can we see", "can i see", "lets see", "to see",
];

/// Place words that count as a navigation target on their own.
pub const PLACE_WORDS: &[&str] = &["next", "around", "there", "another", "tour"];

pub const NEXT_WORDS: &[&str] = &["next", "there", "another", "following"];

pub const AROUND_PHRASES: &[&str] = &["around", "a tour", "the tour", "somewhere"];

pub const INTERROGATIVE_STARTS: &[&str] = &[
    "what", "whats", "why", "how", "hows", "when", "where", "wheres", "who", "whos", "whose",
    "which", "is", "are", "was", "were", "does", "do", "did", "can", "could", "would", "will",
    "should", "have", "has",
];

pub const INQUIRY_PHRASES: &[&str] = &[
    "tell me", "explain", "describe", "i wonder", "want to know", "curious about", "more about",
];

/// Geology and museum words recognised without a loaded map.
pub const MUSEUM_WORDS: &[&str] = &[
    "mineral", "rock", "stone", "fossil", "crystal", "geology", "geological", "geologist",
    "igneous", "sedimentary", "metamorphic", "magma", "lava", "granite", "basalt", "quartz",
    "pyrite", "galena", "ore", "gem", "exhibit", "museum", "dinosaur", "meteorite", "trilobite",
    "ammonite", "glacier", "glacial", "specimen", "case", "display", "sediment", "erosion",
    "volcano", "volcanic", "iron", "lead", "gold", "silver", "copper", "calcite", "feldspar",
    "mica", "amethyst", "apatite", "sulfur", "bone", "skeleton", "mastodon", "layer", "strata",
    "cambrian", "jurassic", "earth", "shell", "track", "slab", "formation", "boulder",
    "marble", "sandstone", "limestone", "shale", "mine", "miner", "mining", "gallery", "ice",
];

pub const AFFIRMATIONS: &[&str] = &[
    "yes", "yeah", "yep", "yup", "sure", "ok", "okay", "sounds good", "lets go", "go ahead",
    "of course", "why not", "please do", "absolutely", "alright", "all right", "definitely",
];

pub const NEGATIONS: &[&str] = &[
    "no", "nope", "not now", "no thanks", "maybe later", "rather not", "not yet", "skip",
    "dont", "stay here", "nah",
];

/// Politeness markers; any one marks an utterance as polite.
pub const POLITENESS_MARKERS: &[&str] = &[
    "could you", "can you", "would you", "will you", "please", "may i", "shall we",
    "would it be possible",
];

/// English plural folding good enough for lexicon lookups.
pub fn singular(word: &str) -> &str {
    if word.len() > 3 && word.ends_with('s') && !word.ends_with("ss") {
        &word[..word.len() - 1]
    } else {
        word
    }
}

/// Words too common to identify an exhibit by themselves.
pub const STOPWORDS: &[&str] = &[
    "the", "and", "of", "a", "an", "in", "on", "to", "for", "with", "from", "at", "by", "this",
    "that", "these", "those", "hall", "room", "area", "case",
];

pub fn is_affirmation<S: AsRef<str>>(tokens: &[S]) -> bool {
    has_any(tokens, AFFIRMATIONS) && !is_negation(tokens)
}

pub fn is_negation<S: AsRef<str>>(tokens: &[S]) -> bool {
    has_any(tokens, NEGATIONS)
}

/// Numeric tokens, in order of appearance.
pub fn numbers<S: AsRef<str>>(tokens: &[S]) -> Vec<u64> {
    tokens
        .iter()
        .filter_map(|t| {
            let t = t.as_ref();
            if !t.is_empty() && t.len() <= 9 && t.bytes().all(|b| b.is_ascii_digit()) {
                t.parse().ok()
            } else {
                None
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenizing() {
        assert_eq!(tokenize("What's your favorite movie?"), ["whats", "your", "favorite", "movie"]);
        assert_eq!(tokenize("  Exhibit #13!! "), ["exhibit", "13"]);
        assert!(tokenize("?!").is_empty());
    }

    #[test]
    fn phrases_are_whole_words() {
        let t = tokenize("Tell me more about Galena.");
        assert!(has_phrase(&t, "tell me"));
        assert!(!has_phrase(&t, "go"));
        assert!(!has_phrase(&t, "me more about galena now"));
    }

    #[test]
    fn earliest_directional_wins() {
        assert_eq!(directional(&tokenize("turn left then go forward")), Some(Directional::TurnLeft));
        assert_eq!(directional(&tokenize("please back up a bit")), Some(Directional::Backward));
        assert_eq!(directional(&tokenize("move to the right")), Some(Directional::TurnRight));
        assert_eq!(directional(&tokenize("hello")), None);
    }

    #[test]
    fn yes_and_no() {
        assert!(is_affirmation(&tokenize("Sounds good, take me there.")));
        assert!(!is_affirmation(&tokenize("no, not now")));
        assert!(is_negation(&tokenize("Maybe later.")));
    }
}
