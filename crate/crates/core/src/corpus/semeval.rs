//! Reader for the SemEval-2010 Task 8 record format:
//!
//! ```text
//! 8001<TAB>"The most common <e1>audits</e1> were about <e2>waste</e2> and recycling."
//! Message-Topic(e1,e2)
//! Comment: Assuming an audit = an audit document.
//!
//! ```

use super::tokenize::{split_words, Token};
use super::{CorpusError, Dataset, EntitySpan, LabeledSentence, Split};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Region {
    Outside,
    E1,
    E2,
}

fn malformed(id: u64, reason: impl Into<String>) -> CorpusError {
    CorpusError::MalformedRecord { id, reason: reason.into() }
}

/// Tokenize a marked-up sentence; tags are token boundaries.
pub(crate) fn parse_marked_sentence(id: u64, text: &str) -> Result<(Vec<Token>, EntitySpan, EntitySpan), CorpusError> {
    let mut words: Vec<String> = Vec::new();
    let mut spans: [Option<(usize, usize)>; 2] = [None, None];
    let mut region = Region::Outside;
    let mut region_start = 0usize;
    let mut rest = text;

    loop {
        let next_tag = ["<e1>", "</e1>", "<e2>", "</e2>"]
            .iter()
            .filter_map(|t| rest.find(t).map(|pos| (pos, *t)))
            .min_by_key(|&(pos, _)| pos);
        let (segment, tag) = match next_tag {
            Some((pos, tag)) => (&rest[..pos], Some(tag)),
            None => (rest, None),
        };
        words.extend(split_words(segment));
        let Some(tag) = tag else { break };
        rest = &rest[segment.len() + tag.len()..];

        match (tag, region) {
            ("<e1>", Region::Outside) | ("<e2>", Region::Outside) => {
                let slot = if tag == "<e1>" { 0 } else { 1 };
                if spans[slot].is_some() {
                    return Err(malformed(id, format!("duplicate {tag}")));
                }
                region = if slot == 0 { Region::E1 } else { Region::E2 };
                region_start = words.len();
            }
            ("</e1>", Region::E1) | ("</e2>", Region::E2) => {
                let slot = if region == Region::E1 { 0 } else { 1 };
                if words.len() == region_start {
                    return Err(malformed(id, format!("empty entity {tag}")));
                }
                spans[slot] = Some((region_start, words.len() - 1));
                region = Region::Outside;
            }
            _ => return Err(malformed(id, format!("unpaired or nested tag {tag}"))),
        }
    }

    if region != Region::Outside {
        return Err(malformed(id, "unclosed entity tag"));
    }
    let [Some(e1), Some(e2)] = spans else {
        return Err(malformed(id, "missing <e1> or <e2> tag"));
    };
    let tokens = words
        .into_iter()
        .enumerate()
        .map(|(index, text)| Token { text, index })
        .collect();
    Ok((tokens, EntitySpan::from_bounds(e1.0, e1.1), EntitySpan::from_bounds(e2.0, e2.1)))
}

fn parse_sentence_line(line: &str) -> Result<(u64, &str), CorpusError> {
    let (id_part, body) = line
        .split_once('\t')
        .ok_or_else(|| malformed(0, format!("expected `<id>\\t\"...\"`, got {line:?}")))?;
    let id: u64 = id_part
        .trim()
        .parse()
        .map_err(|_| malformed(0, format!("bad sentence id {id_part:?}")))?;
    let body = body.trim();
    let body = body
        .strip_prefix('"')
        .and_then(|b| b.strip_suffix('"'))
        .ok_or_else(|| malformed(id, "sentence is not quoted"))?;
    Ok((id, body))
}

/// Parse a full corpus file into a dataset tagged with `split`.
pub fn parse_semeval(raw: &str, split: Split) -> Result<Dataset, CorpusError> {
    let raw = raw.strip_prefix('\u{feff}').unwrap_or(raw);
    let mut sentences = Vec::new();
    let mut lines = raw.lines().map(|l| l.trim_end_matches('\r'));

    while let Some(line) = lines.next() {
        if line.trim().is_empty() || line.trim_start().starts_with("Comment:") {
            continue;
        }
        let (id, body) = parse_sentence_line(line)?;
        let label = loop {
            match lines.next() {
                Some(l) if l.trim().is_empty() => return Err(malformed(id, "missing label line")),
                Some(l) if l.trim_start().starts_with("Comment:") => continue,
                Some(l) => break l.trim().to_string(),
                None => return Err(malformed(id, "missing label line")),
            }
        };
        if label.contains('\t') {
            return Err(malformed(id, "missing label line"));
        }
        let (tokens, e1, e2) = parse_marked_sentence(id, body)?;
        sentences.push(LabeledSentence { id, tokens, e1, e2, label });
    }
    Ok(Dataset::new(split, sentences))
}
