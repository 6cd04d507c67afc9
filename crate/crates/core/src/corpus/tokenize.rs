use serde::{Deserialize, Serialize};

/// Characters split off the front and back of whitespace-delimited chunks.
pub const DETACHED_PUNCT: &[char] = &['.', ',', ';', ':', '!', '?', '"', '\'', '(', ')'];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    pub index: usize,
}

fn is_detached(c: char) -> bool {
    DETACHED_PUNCT.contains(&c)
}

/// Split `text` into raw token strings.
pub(crate) fn split_words(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for chunk in text.split_whitespace() {
        let lead = chunk.chars().take_while(|&c| is_detached(c)).count();
        let chars: Vec<char> = chunk.chars().collect();
        if lead == chars.len() {
            out.extend(chars.iter().map(|c| c.to_string()));
            continue;
        }
        let trail = chars.iter().rev().take_while(|&&c| is_detached(c)).count();
        out.extend(chars[..lead].iter().map(|c| c.to_string()));
        out.push(chars[lead..chars.len() - trail].iter().collect());
        out.extend(chars[chars.len() - trail..].iter().map(|c| c.to_string()));
    }
    out
}

/// Whitespace split followed by detachment of leading/trailing punctuation.
pub fn tokenize(text: &str) -> Vec<Token> {
    split_words(text)
        .into_iter()
        .enumerate()
        .map(|(index, text)| Token { text, index })
        .collect()
}
