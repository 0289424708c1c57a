mod common;

use clusterhop::scenario::ClusterAdjacency;
use clusterhop::snapshots::{enumerate_valid_snapshots, SnapshotSet};
use common::{brute_force_snapshots, paper71, paper71_pipeline};
use proptest::prelude::*;

#[test]
fn paper71_snapshots_match_brute_force() {
    let sc = paper71();
    let got = enumerate_valid_snapshots(sc.adjacency(), 3).unwrap();
    assert_eq!(got, brute_force_snapshots(sc.adjacency(), 3));
    for s in &got {
        assert_eq!(s.len(), 3);
        assert_eq!(sc.adjacency().quadratic_form(s), 0);
    }
}

#[test]
fn paper71_supply_columns_sum_active_clusters() {
    let pipe = paper71_pipeline();
    let set: SnapshotSet = pipe.snapshots().unwrap();
    for n in 0..set.len() {
        let col_sum: f64 = set.supply().column(n).iter().sum();
        let direct: f64 = set
            .members(n)
            .iter()
            .map(|&j| pipe.capacity.slot_bits[j])
            .sum();
        assert!((col_sum - direct).abs() <= 1e-9 * direct);
    }
}

fn graph(n: usize, edges: &[bool]) -> ClusterAdjacency {
    let mut adj = ClusterAdjacency::empty(n);
    let mut e = edges.iter();
    for i in 0..n {
        for j in (i + 1)..n {
            if *e.next().unwrap() {
                adj.connect(i, j);
            }
        }
    }
    adj
}

proptest! {
    #[test]
    fn enumeration_equals_brute_force(
        n in 1usize..=10,
        k in 1usize..=4,
        edges in proptest::collection::vec(proptest::bool::weighted(0.3), 45),
    ) {
        let adj = graph(n, &edges);
        prop_assert_eq!(enumerate_valid_snapshots(&adj, k).unwrap(), brute_force_snapshots(&adj, k));
    }
}
