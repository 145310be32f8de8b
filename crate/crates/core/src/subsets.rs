//! Size-major lexicographic enumeration of small subsets.
//!
//! Subsets of a neighborhood are visited by size `0, 1, ..., max_size` and,
//! within a size, in lexicographic order of positions. All estimators that
//! sum over subsets use this order so floating-point results are reproducible.

/// Number of subsets of an `len`-element set with at most `max_size` elements.
pub fn count_upto(len: usize, max_size: usize) -> usize {
    (0..=max_size.min(len))
        .map(|k| crate::numeric::binomial(len, k) as usize)
        .sum()
}

/// Visits every subset of positions `0..len` with `min_size <= |S| <= max_size`.
///
/// The callback receives the selected positions in increasing order.
pub fn for_each_upto<F>(len: usize, min_size: usize, max_size: usize, mut f: F)
where
    F: FnMut(&[usize]),
{
    let max_size = max_size.min(len);
    let mut pos: Vec<usize> = Vec::with_capacity(max_size);
    for k in min_size..=max_size {
        pos.clear();
        pos.extend(0..k);
        loop {
            f(&pos);
            if !advance(&mut pos, len) {
                break;
            }
        }
    }
}

/// Moves `pos` to the next k-combination of `0..len`. Returns the first
/// changed slot, or `None` when the enumeration is exhausted.
#[inline]
pub(crate) fn advance_from(pos: &mut [usize], len: usize) -> Option<usize> {
    let k = pos.len();
    let mut t = k;
    while t > 0 {
        t -= 1;
        if pos[t] < len - k + t {
            pos[t] += 1;
            for u in t + 1..k {
                pos[u] = pos[u - 1] + 1;
            }
            return Some(t);
        }
    }
    None
}

#[inline]
fn advance(pos: &mut [usize], len: usize) -> bool {
    advance_from(pos, len).is_some()
}

/// Enumerates sums of products over subsets using prefix products.
///
/// For every subset `S` of positions with `1 <= |S| <= max_size`, calls
/// `f(positions, prefix)` where `prefix[t]` holds the running product state
/// after including the first `t + 1` selected positions. `step(state, pos)`
/// extends a product state by one element; `unit` is the empty state.
pub(crate) fn for_each_with_prefix<S, Step, F>(
    len: usize,
    max_size: usize,
    unit: S,
    step: Step,
    mut f: F,
) where
    S: Copy,
    Step: Fn(S, usize) -> S,
    F: FnMut(&[usize], S),
{
    let max_size = max_size.min(len);
    let mut pos: Vec<usize> = Vec::with_capacity(max_size);
    let mut prefix: Vec<S> = Vec::with_capacity(max_size);
    for k in 1..=max_size {
        pos.clear();
        pos.extend(0..k);
        prefix.clear();
        let mut acc = unit;
        for &p in &pos {
            acc = step(acc, p);
            prefix.push(acc);
        }
        loop {
            f(&pos, prefix[k - 1]);
            match advance_from(&mut pos, len) {
                None => break,
                Some(t) => {
                    let mut acc = if t == 0 { unit } else { prefix[t - 1] };
                    for u in t..k {
                        acc = step(acc, pos[u]);
                        prefix[u] = acc;
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumerates_in_size_major_lexicographic_order() {
        let mut seen = Vec::new();
        for_each_upto(4, 0, 2, |s| seen.push(s.to_vec()));
        let expected: Vec<Vec<usize>> = vec![
            vec![],
            vec![0],
            vec![1],
            vec![2],
            vec![3],
            vec![0, 1],
            vec![0, 2],
            vec![0, 3],
            vec![1, 2],
            vec![1, 3],
            vec![2, 3],
        ];
        assert_eq!(seen, expected);
        assert_eq!(count_upto(4, 2), 11);
    }

    #[test]
    fn max_size_clamped_to_len() {
        let mut count = 0;
        for_each_upto(3, 0, 10, |_| count += 1);
        assert_eq!(count, 8);
        assert_eq!(count_upto(3, 10), 8);
    }

    #[test]
    fn empty_set_yields_only_empty_subset() {
        let mut seen = Vec::new();
        for_each_upto(0, 0, 3, |s| seen.push(s.to_vec()));
        assert_eq!(seen, vec![Vec::<usize>::new()]);
    }

    #[test]
    fn prefix_products_match_direct_products() {
        let vals = [2.0, 3.0, 5.0, 7.0, 11.0];
        for_each_with_prefix(vals.len(), 3, 1.0f64, |acc, p| acc * vals[p], |pos, prod| {
            let direct: f64 = pos.iter().map(|&p| vals[p]).product();
            assert_eq!(prod, direct);
        });
        let mut count = 0;
        for_each_with_prefix(5, 3, (), |_, _| (), |_, _| count += 1);
        assert_eq!(count, count_upto(5, 3) - 1);
    }
}
