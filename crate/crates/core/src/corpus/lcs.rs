//! Longest common substring via a suffix automaton, O(n + m).

use std::collections::HashMap;

/// Lowercased text with every whitespace run collapsed to one space.
pub fn normalize(text: &str) -> Vec<char> {
    let mut out = Vec::with_capacity(text.len());
    for word in text.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.extend(word.chars().flat_map(char::to_lowercase));
    }
    out
}

/// Length in characters of the longest substring shared by the normalized
/// forms of `a` and `b`.
pub fn lcs_length(a: &str, b: &str) -> usize {
    let a = normalize(a);
    let b = normalize(b);
    // Build over the shorter side; traversal cost is linear either way.
    if a.len() <= b.len() {
        SuffixAutomaton::new(&a).longest_common_substring(&b)
    } else {
        SuffixAutomaton::new(&b).longest_common_substring(&a)
    }
}

#[derive(Clone, Default)]
struct State {
    len: usize,
    link: Option<usize>,
    next: HashMap<char, usize>,
}

pub(crate) struct SuffixAutomaton {
    states: Vec<State>,
}

impl SuffixAutomaton {
    pub(crate) fn new(text: &[char]) -> Self {
        let mut states = Vec::with_capacity(2 * text.len() + 1);
        states.push(State::default());
        let mut last = 0;
        for &c in text {
            let cur = states.len();
            states.push(State {
                len: states[last].len + 1,
                ..State::default()
            });
            let mut p = Some(last);
            while let Some(pi) = p {
                if states[pi].next.contains_key(&c) {
                    break;
                }
                states[pi].next.insert(c, cur);
                p = states[pi].link;
            }
            match p {
                None => states[cur].link = Some(0),
                Some(pi) => {
                    let q = states[pi].next[&c];
                    if states[pi].len + 1 == states[q].len {
                        states[cur].link = Some(q);
                    } else {
                        let clone = states.len();
                        let mut cloned = states[q].clone();
                        cloned.len = states[pi].len + 1;
                        states.push(cloned);
                        let mut p = Some(pi);
                        while let Some(pj) = p {
                            if states[pj].next.get(&c) != Some(&q) {
                                break;
                            }
                            states[pj].next.insert(c, clone);
                            p = states[pj].link;
                        }
                        states[q].link = Some(clone);
                        states[cur].link = Some(clone);
                    }
                }
            }
            last = cur;
        }
        SuffixAutomaton { states }
    }

    pub(crate) fn longest_common_substring(&self, other: &[char]) -> usize {
        let mut state = 0;
        let mut len = 0;
        let mut best = 0;
        for c in other {
            loop {
                if let Some(&next) = self.states[state].next.get(c) {
                    state = next;
                    len += 1;
                    break;
                }
                match self.states[state].link {
                    Some(link) => {
                        state = link;
                        len = self.states[state].len;
                    }
                    None => {
                        len = 0;
                        break;
                    }
                }
            }
            best = best.max(len);
        }
        best
    }
}

#[cfg(test)]
pub(crate) mod oracle {
    /// Quadratic dynamic-programming LCS used to check the automaton.
    pub fn lcs_dp(a: &[char], b: &[char]) -> usize {
        let mut prev = vec![0usize; b.len() + 1];
        let mut best = 0;
        for &ca in a {
            let mut cur = vec![0usize; b.len() + 1];
            for (j, &cb) in b.iter().enumerate() {
                if ca == cb {
                    cur[j + 1] = prev[j] + 1;
                    best = best.max(cur[j + 1]);
                }
            }
            prev = cur;
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::oracle::lcs_dp;
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert_eq!(lcs_dp(&normalize("abcdef"), &normalize("zabcy")), 3);
        assert_eq!(lcs_length("abcdef", "zabcy"), 3);
        assert_eq!(lcs_length("", "x"), 0);
        let s = "Measles outbreak in the region";
        assert_eq!(lcs_length(s, s), normalize(s).len());
    }

    #[test]
    fn normalization_applies() {
        assert_eq!(lcs_length("The  Vaccine\nworks", "the vaccine works"), 17);
    }

    proptest! {
        #[test]
        fn matches_dp_oracle(a in "[abc ]{0,40}", b in "[abc ]{0,40}") {
            let expected = lcs_dp(&normalize(&a), &normalize(&b));
            prop_assert_eq!(lcs_length(&a, &b), expected);
        }

        #[test]
        fn symmetric_and_bounded(a in "\\PC{0,60}", b in "\\PC{0,60}") {
            let ab = lcs_length(&a, &b);
            prop_assert_eq!(ab, lcs_length(&b, &a));
            prop_assert!(ab <= normalize(&a).len().min(normalize(&b).len()));
        }
    }
}
