//! Edit distances.

use alloc::vec::Vec;

/// Levenshtein distance by the two-row dynamic program.
pub fn levenshtein<T: PartialEq>(p: &[T], s: &[T]) -> usize {
    let (p, s) = if p.len() < s.len() { (s, p) } else { (p, s) };
    let mut prev: Vec<usize> = (0..=s.len()).collect();
    let mut cur = alloc::vec![0usize; s.len() + 1];
    for (i, a) in p.iter().enumerate() {
        cur[0] = i + 1;
        for (j, b) in s.iter().enumerate() {
            let sub = prev[j] + usize::from(a != b);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        core::mem::swap(&mut prev, &mut cur);
    }
    prev[s.len()]
}

/// Levenshtein distance divided by the longer length; `0` for two empty strings.
pub fn normalized_levenshtein<T: PartialEq>(p: &[T], s: &[T]) -> f64 {
    let m = p.len().max(s.len());
    if m == 0 {
        0.0
    } else {
        levenshtein(p, s) as f64 / m as f64
    }
}

/// Levenshtein over Unicode scalar values; ASCII inputs are compared bytewise.
pub fn levenshtein_str(p: &str, s: &str) -> usize {
    if p.is_ascii() && s.is_ascii() {
        levenshtein(p.as_bytes(), s.as_bytes())
    } else {
        let a: Vec<char> = p.chars().collect();
        let b: Vec<char> = s.chars().collect();
        levenshtein(&a, &b)
    }
}

pub fn normalized_levenshtein_str(p: &str, s: &str) -> f64 {
    if p.is_ascii() && s.is_ascii() {
        normalized_levenshtein(p.as_bytes(), s.as_bytes())
    } else {
        let a: Vec<char> = p.chars().collect();
        let b: Vec<char> = s.chars().collect();
        normalized_levenshtein(&a, &b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(p: &[u8], s: &[u8]) -> usize {
        match (p.split_last(), s.split_last()) {
            (None, _) => s.len(),
            (_, None) => p.len(),
            (Some((a, pr)), Some((b, sr))) => {
                let sub = naive(pr, sr) + usize::from(a != b);
                sub.min(naive(pr, s) + 1).min(naive(p, sr) + 1)
            }
        }
    }

    #[test]
    fn examples() {
        assert_eq!(levenshtein_str("", "abc"), 3);
        assert_eq!(normalized_levenshtein_str("", "abc"), 1.0);
        assert_eq!(levenshtein_str("kitten", "sitting"), naive(b"kitten", b"sitting"));
        assert_eq!(levenshtein_str("kitten", "sitting"), 3);
        assert_eq!(normalized_levenshtein_str("kitten", "sitting"), 3.0 / 7.0);
        assert_eq!(levenshtein_str("abc", "abc"), 0);
        assert_eq!(normalized_levenshtein_str("", ""), 0.0);
        assert_eq!(levenshtein_str("héllo", "hello"), 1);
    }
}
