//! Small text helpers shared by the classifier and the catalog matcher.

/// Lowercase alphanumeric tokens, splitting on everything else.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            cur.extend(ch.to_lowercase());
        } else if !cur.is_empty() {
            out.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// Kebab-case slug over alphanumeric runs: "The Office (US)" → "the-office-us".
pub fn slug(text: &str) -> String {
    tokenize(text).join("-")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenize_splits_on_punctuation_and_lowercases() {
        assert_eq!(
            tokenize("Crimson.Harbor (2022) 1080p_x265!"),
            vec!["crimson", "harbor", "2022", "1080p", "x265"]
        );
        assert!(tokenize("  ...  ").is_empty());
    }

    #[test]
    fn slug_is_kebab_case() {
        assert_eq!(slug("The Office (US)"), "the-office-us");
        assert_eq!(slug("Dune: Part Two"), "dune-part-two");
    }
}
