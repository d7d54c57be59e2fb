use crate::corpus::Token;
use crate::vocab::Vocabulary;

/// A (target, context) id pair taken from a sliding window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ContextPair {
    pub target: u32,
    pub context: u32,
}

/// Pairs every position with the `window` positions on either side,
/// clipped at the stream boundaries. The window is fixed (no shrinkage).
pub fn context_pairs(ids: &[u32], window: usize) -> impl Iterator<Item = ContextPair> + '_ {
    (0..ids.len()).flat_map(move |i| {
        let lo = i.saturating_sub(window);
        let hi = (i + window).min(ids.len().saturating_sub(1));
        (lo..=hi)
            .filter(move |&j| j != i)
            .map(move |j| ContextPair {
                target: ids[i],
                context: ids[j],
            })
    })
}

/// Number of pairs [`context_pairs`] yields for a stream of `len` ids.
pub fn pair_count(len: usize, window: usize) -> u64 {
    (0..len)
        .map(|i| (i.min(window) + (len - 1 - i).min(window)) as u64)
        .sum()
}

/// Context pairs of a token stream. Out-of-vocabulary tokens are removed
/// first and do not take up window slots.
pub fn generate_contexts(stream: &[Token], vocab: &Vocabulary, window: usize) -> Vec<ContextPair> {
    let ids = vocab.encode(stream);
    context_pairs(&ids, window).collect()
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use super::*;
    use crate::vocab::{build_vocabulary, KindFilter, MinCount};
    use proptest::prelude::*;

    fn pairs(ids: &[u32], window: usize) -> Vec<(u32, u32)> {
        context_pairs(ids, window)
            .map(|p| (p.target, p.context))
            .collect()
    }

    #[test]
    fn window_one() {
        let got: HashSet<_> = pairs(&[0, 1, 2], 1).into_iter().collect();
        let want: HashSet<_> = [(0, 1), (1, 0), (1, 2), (2, 1)].into_iter().collect();
        assert_eq!(got, want);
    }

    #[test]
    fn singleton_has_no_pairs() {
        for w in 1..5 {
            assert!(pairs(&[7], w).is_empty());
        }
        assert!(pairs(&[], 3).is_empty());
    }

    #[test]
    fn window_two_counts() {
        let all = pairs(&[0, 1, 2, 3, 4], 2);
        assert_eq!(all.len(), 14);
        let contexts_of_c: HashSet<u32> = all.iter().filter(|p| p.0 == 2).map(|p| p.1).collect();
        assert_eq!(contexts_of_c, [0, 1, 3, 4].into_iter().collect());
    }

    #[test]
    fn oov_tokens_do_not_occupy_slots() {
        let known: Vec<Token> = ["a", "b"]
            .iter()
            .map(|w| Token::Word(w.to_string()))
            .collect();
        let vocab =
            build_vocabulary([known.as_slice()], MinCount::uniform(1), KindFilter::All).unwrap();
        let stream: Vec<Token> = ["a", "zzz", "zzz", "b"]
            .iter()
            .map(|w| Token::Word(w.to_string()))
            .collect();
        let got = generate_contexts(&stream, &vocab, 1);
        assert_eq!(got.len(), 2);
    }

    proptest! {
        // Brute force over all position pairs within the window.
        #[test]
        fn count_matches_enumeration(len in 0usize..40, window in 1usize..12) {
            let ids: Vec<u32> = (0..len as u32).collect();
            let mut brute = 0u64;
            for i in 0..len {
                for j in 0..len {
                    if i != j && i.abs_diff(j) <= window {
                        brute += 1;
                    }
                }
            }
            prop_assert_eq!(pair_count(len, window), brute);
            prop_assert_eq!(context_pairs(&ids, window).count() as u64, brute);
        }
    }
}
