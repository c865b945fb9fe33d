/// Lowercase and split on runs of non-alphanumeric characters.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Contiguous word n-grams for each n in `n_min..=n_max`, joined by a
/// single space. Shorter n first, reading order within each n.
pub fn word_ngrams<S: AsRef<str>>(tokens: &[S], n_min: usize, n_max: usize) -> Vec<String> {
    assert!(1 <= n_min && n_min <= n_max, "invalid n-gram range {n_min}..{n_max}");
    let mut out = Vec::new();
    for n in n_min..=n_max {
        if n > tokens.len() {
            break;
        }
        for window in tokens.windows(n) {
            let mut gram = String::from(window[0].as_ref());
            for t in &window[1..] {
                gram.push(' ');
                gram.push_str(t.as_ref());
            }
            out.push(gram);
        }
    }
    out
}

/// Lowercase with whitespace runs collapsed to one space.
pub fn normalize_text(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

/// Character n-grams over the normalized text, spaces included.
pub fn char_ngrams(text: &str, n_min: usize, n_max: usize) -> Vec<String> {
    assert!(1 <= n_min && n_min <= n_max, "invalid n-gram range {n_min}..{n_max}");
    let chars: Vec<char> = normalize_text(text).chars().collect();
    let mut out = Vec::new();
    for n in n_min..=n_max {
        if n > chars.len() {
            break;
        }
        out.extend(chars.windows(n).map(|w| w.iter().collect::<String>()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn tokenizes() {
        assert_eq!(tokenize("Brexit talks, resume!"), ["brexit", "talks", "resume"]);
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("COVID-19"), ["covid", "19"]);
        assert_eq!(tokenize("Ünïcode café"), ["ünïcode", "café"]);
    }

    #[test]
    fn word_grams() {
        assert_eq!(word_ngrams(&["a", "b", "c"], 1, 2), ["a", "b", "c", "a b", "b c"]);
        assert_eq!(word_ngrams(&["a", "b", "c", "d"], 1, 3).len(), 9);
        assert!(word_ngrams(&["a"], 2, 3).is_empty());
    }

    #[test]
    fn char_grams() {
        assert_eq!(char_ngrams("abc", 2, 2), ["ab", "bc"]);
        assert_eq!(char_ngrams("ab cd", 3, 3), ["ab ", "b c", " cd"]);
        assert!(char_ngrams("", 1, 4).is_empty());
        assert_eq!(char_ngrams("A \t B", 3, 3), ["a b"]);
    }

    proptest! {
        #[test]
        fn word_gram_count(len in 0usize..20, n_min in 1usize..4, span in 0usize..3) {
            let n_max = n_min + span;
            let tokens: Vec<String> = (0..len).map(|i| format!("t{i}")).collect();
            let grams = word_ngrams(&tokens, n_min, n_max);
            if len >= n_max {
                let expected: usize = (n_min..=n_max).map(|n| len - n + 1).sum();
                prop_assert_eq!(grams.len(), expected);
            }
        }
    }
}
