use std::collections::HashMap;

/// Parsed lists from repeated samples of one prompt.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunSet {
    runs: Vec<Vec<String>>,
}

impl RunSet {
    /// `None` when `runs` is empty.
    pub fn new(runs: Vec<Vec<String>>) -> Option<Self> {
        (!runs.is_empty()).then_some(RunSet { runs })
    }

    pub fn runs(&self) -> &[Vec<String>] {
        &self.runs
    }
}

/// The `k` most frequent strings across runs.
///
/// Ties are broken by first appearance (run index, then position within the
/// run), then lexicographically. Returns fewer than `k` items when fewer
/// distinct strings exist.
pub fn aggregate_top_k(runs: &RunSet, k: usize) -> Vec<String> {
    // value: (count, first run, first position)
    let mut stats: HashMap<&str, (usize, usize, usize)> = HashMap::new();
    for (r, run) in runs.runs.iter().enumerate() {
        for (p, item) in run.iter().enumerate() {
            stats.entry(item.as_str()).or_insert((0, r, p)).0 += 1;
        }
    }
    let mut ranked: Vec<_> = stats.into_iter().collect();
    ranked.sort_by(|(a, (ca, ra, pa)), (b, (cb, rb, pb))| {
        cb.cmp(ca).then(ra.cmp(rb)).then(pa.cmp(pb)).then(a.cmp(b))
    });
    ranked.into_iter().take(k).map(|(s, _)| s.to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rs(runs: &[&[&str]]) -> RunSet {
        RunSet::new(
            runs.iter()
                .map(|r| r.iter().map(|s| s.to_string()).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn counts_dominate() {
        assert_eq!(aggregate_top_k(&rs(&[&["a", "b"], &["a", "c"], &["a", "b"]]), 2), ["a", "b"]);
    }

    #[test]
    fn tie_goes_to_first_appearance() {
        assert_eq!(aggregate_top_k(&rs(&[&["a"], &["b"]]), 1), ["a"]);
        assert_eq!(aggregate_top_k(&rs(&[&["b"], &["a"]]), 1), ["b"]);
        assert_eq!(aggregate_top_k(&rs(&[&["x", "b", "a"]]), 3), ["x", "b", "a"]);
    }

    #[test]
    fn fewer_than_k() {
        assert_eq!(aggregate_top_k(&rs(&[&["a"]]), 5), ["a"]);
        assert!(RunSet::new(vec![]).is_none());
    }
}
