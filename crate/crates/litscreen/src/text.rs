//! Text normalization shared by prompt rendering and feature extraction.
//!
//! Corpora exported from review tools keep editorial artifacts: LaTeX
//! escapes such as `\%` or `\endash`, and stray control characters.
//! Stored records stay raw; cleanup happens where text is consumed.

/// Decode common LaTeX escapes and collapse control characters.
///
/// Single-character escapes (`\%`, `\&`, `\#`, `\_`, `\$`) become the bare
/// character; `\endash` and `\emdash` become `–` and `—`. Unrecognized
/// escapes are left verbatim. Every maximal run of control characters is
/// replaced by a single space.
pub fn clean_text(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut chars = raw.chars().peekable();
    let mut in_control_run = false;

    while let Some(c) = chars.next() {
        if c.is_control() {
            if !in_control_run {
                out.push(' ');
                in_control_run = true;
            }
            continue;
        }
        in_control_run = false;

        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.peek() {
            Some(&next) if matches!(next, '%' | '&' | '#' | '_' | '$') => {
                out.push(next);
                chars.next();
            }
            Some(&next) if next.is_ascii_alphabetic() => {
                let mut word = String::new();
                while let Some(&w) = chars.peek() {
                    if w.is_ascii_alphabetic() {
                        word.push(w);
                        chars.next();
                    } else {
                        break;
                    }
                }
                match word.as_str() {
                    // a recognized control word gobbles one following
                    // space, as TeX does
                    "endash" | "emdash" => {
                        out.push(if word == "endash" { '–' } else { '—' });
                        if chars.peek() == Some(&' ') {
                            chars.next();
                        }
                    }
                    _ => {
                        out.push('\\');
                        out.push_str(&word);
                    }
                }
            }
            _ => out.push('\\'),
        }
    }
    out
}

/// Lowercase and split on non-alphanumeric boundaries, decoding LaTeX
/// escapes first so `25\%` tokenizes as `25`.
pub fn tokenize(text: &str) -> Vec<String> {
    clean_text(text)
        .to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decodes_single_char_escapes() {
        assert_eq!(clean_text(r"growth of 25\% per year"), "growth of 25% per year");
        assert_eq!(clean_text(r"R\&D"), "R&D");
    }

    #[test]
    fn decodes_dash_words() {
        assert_eq!(clean_text(r"2019\endash 2023"), "2019–2023");
        assert_eq!(clean_text(r"a\emdash b"), "a—b");
    }

    #[test]
    fn unknown_escapes_survive() {
        assert_eq!(clean_text(r"\alpha decay"), r"\alpha decay");
        assert_eq!(clean_text("trailing\\"), "trailing\\");
    }

    #[test]
    fn control_runs_collapse_to_one_space() {
        assert_eq!(clean_text("a\t\tb"), "a b");
        assert_eq!(clean_text("a\r\nb"), "a b");
        assert_eq!(clean_text("plain text"), "plain text");
    }

    #[test]
    fn tokenize_lowercases_and_splits() {
        assert_eq!(
            tokenize(r"Model-Driven Engineering: 25\% faster!"),
            vec!["model", "driven", "engineering", "25", "faster"]
        );
        assert!(tokenize("  ---  ").is_empty());
    }
}
