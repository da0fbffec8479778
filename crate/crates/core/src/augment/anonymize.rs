//! Replacement of email addresses, user mentions and phone numbers by tags.
//!
//! Passes run in a fixed order: emails, then mentions, then phones. Mentions
//! and phones are not matched when immediately preceded by a word character
//! or by one of the tags, which keeps the transform idempotent.

use std::sync::LazyLock;

use regex::Regex;

pub const EMAIL_TAG: &str = "[EMAIL]";
pub const USER_TAG: &str = "[USER]";
pub const PHONE_TAG: &str = "[PHONE]";

const TAGS: [&str; 3] = [EMAIL_TAG, USER_TAG, PHONE_TAG];

const PHONE_MIN_DIGITS: usize = 7;
const PHONE_MAX_DIGITS: usize = 15;

static EMAIL: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"[\w.%+\-]+@[\w\-]+(?:\.[\w\-]+)+").expect("email regex"));
static MENTION: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"@\w{2,}").expect("mention regex"));
static PHONE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\+?\(?\d[\d \-.()]*\d").expect("phone regex"));

// Same notions of word character and digit as the regex engine's \w and \d.
static WORD_CHAR: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\A\w\z").expect("word regex"));
static DIGIT: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\d").expect("digit regex"));

fn is_word(c: char) -> bool {
    let mut buf = [0u8; 4];
    WORD_CHAR.is_match(c.encode_utf8(&mut buf))
}

fn blocked_before(text: &str, start: usize) -> bool {
    let before = &text[..start];
    if TAGS.iter().any(|t| before.ends_with(t)) {
        return true;
    }
    before.chars().next_back().is_some_and(is_word)
}

fn blocked_after(text: &str, end: usize) -> bool {
    text[end..].chars().next().is_some_and(is_word)
}

fn replace_matches(
    text: &str,
    re: &Regex,
    tag: &str,
    mut accept: impl FnMut(&str, regex::Match<'_>) -> bool,
) -> String {
    let mut out = String::with_capacity(text.len());
    let mut last = 0;
    for m in re.find_iter(text) {
        if accept(text, m) {
            out.push_str(&text[last..m.start()]);
            out.push_str(tag);
            last = m.end();
        }
    }
    out.push_str(&text[last..]);
    out
}

pub fn replace_emails(text: &str) -> String {
    replace_matches(text, &EMAIL, EMAIL_TAG, |_, _| true)
}

pub fn replace_mentions(text: &str) -> String {
    replace_matches(text, &MENTION, USER_TAG, |t, m| {
        !blocked_before(t, m.start())
    })
}

pub fn replace_phones(text: &str) -> String {
    replace_matches(text, &PHONE, PHONE_TAG, |t, m| {
        let digits = DIGIT.find_iter(m.as_str()).count();
        (PHONE_MIN_DIGITS..=PHONE_MAX_DIGITS).contains(&digits)
            && !blocked_before(t, m.start())
            && !blocked_after(t, m.end())
    })
}

/// Replace emails by `[EMAIL]`, `@handles` by `[USER]` and phone numbers by
/// `[PHONE]`. All other characters are left unchanged.
pub fn anonymize(text: &str) -> String {
    replace_phones(&replace_mentions(&replace_emails(text)))
}
