//! Character classes and tokenization shared by cleaning, keyword matching,
//! and the c-TF-IDF vocabulary.
//!
//! Emoji are detected by code-point block. The table covers the pictographic
//! blocks plus the joiners and modifiers that glue multi-codepoint emoji
//! sequences together (ZWJ, variation selectors, skin tones, tag characters,
//! keycap combiner, regional indicators).

use alloc::string::String;
use alloc::vec::Vec;
use unicode_general_category::{get_general_category, GeneralCategory};

/// Inclusive code-point ranges treated as emoji.
pub const EMOJI_RANGES: &[(u32, u32)] = &[
    (0x00A9, 0x00A9),   // copyright sign
    (0x00AE, 0x00AE),   // registered sign
    (0x200D, 0x200D),   // zero width joiner
    (0x203C, 0x203C),
    (0x2049, 0x2049),
    (0x20E3, 0x20E3),   // combining enclosing keycap
    (0x2122, 0x2122),
    (0x2139, 0x2139),
    (0x2194, 0x21AA),   // arrows used as emoji
    (0x231A, 0x23FF),   // misc technical (watch, hourglass, media controls)
    (0x24C2, 0x24C2),
    (0x25A0, 0x25FF),   // geometric shapes
    (0x2600, 0x27BF),   // misc symbols, dingbats
    (0x2900, 0x297F),
    (0x2B00, 0x2BFF),   // misc symbols and arrows
    (0x3030, 0x3030),
    (0x303D, 0x303D),
    (0x3297, 0x3299),
    (0xFE00, 0xFE0F),   // variation selectors
    (0x1F000, 0x1F0FF), // mahjong, domino, playing cards
    (0x1F100, 0x1F1FF), // enclosed alphanumeric supplement, regional indicators
    (0x1F200, 0x1F2FF), // enclosed ideographic supplement
    (0x1F300, 0x1F5FF), // misc symbols and pictographs
    (0x1F600, 0x1F64F), // emoticons
    (0x1F680, 0x1F6FF), // transport and map
    (0x1F700, 0x1F77F), // alchemical
    (0x1F780, 0x1F7FF), // geometric shapes extended
    (0x1F800, 0x1F8FF), // supplemental arrows-c
    (0x1F900, 0x1F9FF), // supplemental symbols and pictographs
    (0x1FA00, 0x1FAFF), // chess, symbols and pictographs extended-a
    (0xE0020, 0xE007F), // tag characters (flag subdivisions)
];

pub fn is_emoji(c: char) -> bool {
    let cp = c as u32;
    EMOJI_RANGES
        .binary_search_by(|&(lo, hi)| {
            if hi < cp {
                core::cmp::Ordering::Less
            } else if lo > cp {
                core::cmp::Ordering::Greater
            } else {
                core::cmp::Ordering::Equal
            }
        })
        .is_ok()
}

/// Letters, combining marks and numbers. Marks matter for Indic and other
/// scripts whose vowel signs are not alphabetic on their own.
pub fn is_word_char(c: char) -> bool {
    use GeneralCategory::*;
    matches!(
        get_general_category(c),
        UppercaseLetter
            | LowercaseLetter
            | TitlecaseLetter
            | ModifierLetter
            | OtherLetter
            | NonspacingMark
            | SpacingMark
            | EnclosingMark
            | DecimalNumber
            | LetterNumber
            | OtherNumber
    ) && !is_emoji(c)
}

/// Whitespace split. Runs of non-Latin script without spaces stay whole.
pub fn tokens(text: &str) -> impl Iterator<Item = &str> {
    text.split_whitespace()
}

/// Lowercases and turns every non-word character into a separator, then
/// splits. Used for matching keywords against text that may not have been
/// through the full cleaning pass.
pub fn normalize_tokens(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for c in text.chars() {
        if is_word_char(c) {
            cur.extend(c.to_lowercase());
        } else if !cur.is_empty() {
            out.push(core::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}
