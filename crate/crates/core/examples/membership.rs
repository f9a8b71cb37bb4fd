//! Membership of a cell in its cluster as the cell's own evidence turns
//! against the cluster's.

use clustered_ndt::clustering::{chi2_statistic, membership_from_counts, MembershipMode};

fn main() {
    let cluster = (90.0, 10.0);
    let smoothing = 0.5;
    println!("cluster evidence (o, e) = {cluster:?}");
    println!(
        "{:>4} {:>4} {:>12} {:>10} {:>12} {:>10}",
        "o", "e", "S normalized", "delta", "S literal", "delta"
    );
    for e in [0.0, 1.0, 2.0, 5.0, 10.0, 20.0] {
        let cell = (9.0, e);
        let sn = chi2_statistic(cell, cluster, MembershipMode::Normalized, smoothing);
        let sl = chi2_statistic(cell, cluster, MembershipMode::Literal, smoothing);
        println!(
            "{:>4} {:>4} {sn:>12.3} {:>10.4} {sl:>12.1} {:>10.2e}",
            cell.0,
            cell.1,
            membership_from_counts(cell, cluster, MembershipMode::Normalized, smoothing),
            membership_from_counts(cell, cluster, MembershipMode::Literal, smoothing),
        );
    }
    // A cell seen empty ten times inside a mostly occupied cluster.
    let s = chi2_statistic((0.0, 10.0), cluster, MembershipMode::Normalized, smoothing);
    let d = membership_from_counts((0.0, 10.0), cluster, MembershipMode::Normalized, smoothing);
    println!("cell (0, 10): S = {s}, delta = {d:.3e}");
}
