use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

/// Text normalization applied to candidates.
///
/// Stored text only ever receives whitespace collapsing and NFC. Lowercasing
/// and quote stripping feed the duplicate-detection key and nothing else.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct NormalizationConfig {
    pub collapse_whitespace: bool,
    pub unicode_nfc: bool,
    pub lowercase_for_dedup: bool,
    pub strip_outer_quotes: bool,
}

impl Default for NormalizationConfig {
    fn default() -> Self {
        NormalizationConfig {
            collapse_whitespace: true,
            unicode_nfc: true,
            lowercase_for_dedup: true,
            strip_outer_quotes: false,
        }
    }
}

const QUOTE_PAIRS: &[(char, char)] = &[
    ('"', '"'),
    ('\'', '\''),
    ('\u{201c}', '\u{201d}'),
    ('\u{2018}', '\u{2019}'),
    ('`', '`'),
];

impl NormalizationConfig {
    /// Text as stored in suites.
    pub fn display(&self, text: &str) -> String {
        let text = if self.unicode_nfc {
            text.nfc().collect::<String>()
        } else {
            text.to_string()
        };
        if self.collapse_whitespace {
            text.split_whitespace().collect::<Vec<_>>().join(" ")
        } else {
            text
        }
    }

    /// Key used to decide whether two candidates are the same text.
    pub fn dedup_key(&self, text: &str) -> String {
        let mut key = self.display(text);
        if self.strip_outer_quotes {
            key = strip_quotes(&key).trim().to_string();
        }
        if self.lowercase_for_dedup {
            key = key.to_lowercase();
        }
        key
    }
}

fn strip_quotes(text: &str) -> &str {
    let mut s = text.trim();
    loop {
        let mut chars = s.chars();
        let (Some(first), Some(last)) = (chars.next(), chars.next_back()) else {
            return s;
        };
        match QUOTE_PAIRS
            .iter()
            .find(|(open, close)| *open == first && *close == last)
        {
            Some(_) => s = s[first.len_utf8()..s.len() - last.len_utf8()].trim(),
            None => return s,
        }
    }
}
