/// Orders slot counts into a slot sequence.
///
/// Slot `n` goes to the snapshot furthest behind its ideal cumulative share
/// `psi_i * (n + 1) / N` (ties to the lowest index), so repeats of each
/// snapshot are spread evenly over the window. Integer arithmetic only.
pub fn expand_schedule(psi: &[usize]) -> Vec<usize> {
    let total: usize = psi.iter().sum();
    let mut assigned = vec![0usize; psi.len()];
    let mut out = Vec::with_capacity(total);
    for n in 1..=total {
        // deficit_i * total = psi_i * n - total * assigned_i
        let pick = (0..psi.len())
            .filter(|&i| assigned[i] < psi[i])
            .max_by(|&a, &b| {
                let da = (psi[a] * n) as i128 - (total * assigned[a]) as i128;
                let db = (psi[b] * n) as i128 - (total * assigned[b]) as i128;
                da.cmp(&db).then(b.cmp(&a))
            })
            .expect("remaining slots imply a remaining snapshot");
        assigned[pick] += 1;
        out.push(pick);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn even_interleave() {
        assert_eq!(expand_schedule(&[2, 2]), vec![0, 1, 0, 1]);
    }

    #[test]
    fn single_snapshot() {
        assert_eq!(expand_schedule(&[4, 0]), vec![0, 0, 0, 0]);
    }

    #[test]
    fn three_to_one_gap() {
        let seq = expand_schedule(&[3, 1]);
        assert_eq!(seq, vec![0, 0, 1, 0]);
        let pos: Vec<usize> = (0..4).filter(|&k| seq[k] == 0).collect();
        let max_gap = pos.windows(2).map(|w| w[1] - w[0]).max().unwrap();
        assert!(max_gap <= 2);
    }

    #[test]
    fn empty_counts() {
        assert!(expand_schedule(&[0, 0]).is_empty());
        assert!(expand_schedule(&[]).is_empty());
    }

    proptest! {
        #[test]
        fn multiset_matches_counts(psi in proptest::collection::vec(0usize..9, 1..7)) {
            let seq = expand_schedule(&psi);
            prop_assert_eq!(seq.len(), psi.iter().sum::<usize>());
            for (i, &k) in psi.iter().enumerate() {
                prop_assert_eq!(seq.iter().filter(|&&s| s == i).count(), k);
            }
        }
    }
}
