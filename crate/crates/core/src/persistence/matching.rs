use std::collections::VecDeque;

/// Hopcroft–Karp maximum bipartite matching.
///
/// `adj[u]` lists the right-side neighbours of left node `u`. Returns the
/// partner of every left node.
pub fn hopcroft_karp(adj: &[Vec<usize>], n_right: usize) -> Vec<Option<usize>> {
    const INF: usize = usize::MAX;
    let n_left = adj.len();
    let mut left_match: Vec<Option<usize>> = vec![None; n_left];
    let mut right_match: Vec<Option<usize>> = vec![None; n_right];
    let mut dist = vec![INF; n_left];

    loop {
        // layer the free left nodes
        let mut queue = VecDeque::new();
        for u in 0..n_left {
            if left_match[u].is_none() {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = INF;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                match right_match[v] {
                    None => found = true,
                    Some(w) if dist[w] == INF => {
                        dist[w] = dist[u] + 1;
                        queue.push_back(w);
                    }
                    Some(_) => {}
                }
            }
        }
        if !found {
            break;
        }

        let mut next_edge = vec![0usize; n_left];
        for u in 0..n_left {
            if left_match[u].is_none() {
                augment(
                    u,
                    adj,
                    &mut dist,
                    &mut next_edge,
                    &mut left_match,
                    &mut right_match,
                );
            }
        }
    }
    left_match
}

/// Iterative layered DFS from free left node `root`.
fn augment(
    root: usize,
    adj: &[Vec<usize>],
    dist: &mut [usize],
    next_edge: &mut [usize],
    left_match: &mut [Option<usize>],
    right_match: &mut [Option<usize>],
) -> bool {
    let mut path: Vec<usize> = vec![root];
    while let Some(&u) = path.last() {
        if next_edge[u] == adj[u].len() {
            dist[u] = usize::MAX;
            path.pop();
            continue;
        }
        let v = adj[u][next_edge[u]];
        next_edge[u] += 1;
        match right_match[v] {
            None => {
                // flip the alternating path ending at v
                let mut v = v;
                while let Some(u) = path.pop() {
                    let prev = left_match[u];
                    left_match[u] = Some(v);
                    right_match[v] = Some(u);
                    match prev {
                        Some(p) => v = p,
                        None => break,
                    }
                }
                return true;
            }
            Some(w) if dist[w] == dist[u] + 1 => path.push(w),
            Some(_) => {}
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn size(m: &[Option<usize>]) -> usize {
        m.iter().flatten().count()
    }

    /// Maximum matching size by trying every injective assignment.
    fn brute(adj: &[Vec<usize>], n_right: usize) -> usize {
        fn go(u: usize, adj: &[Vec<usize>], used: &mut Vec<bool>) -> usize {
            if u == adj.len() {
                return 0;
            }
            let mut best = go(u + 1, adj, used);
            for &v in &adj[u] {
                if !used[v] {
                    used[v] = true;
                    best = best.max(1 + go(u + 1, adj, used));
                    used[v] = false;
                }
            }
            best
        }
        go(0, adj, &mut vec![false; n_right])
    }

    #[test]
    fn small_cases() {
        assert_eq!(size(&hopcroft_karp(&[vec![0, 1], vec![0]], 2)), 2);
        assert_eq!(size(&hopcroft_karp(&[vec![0], vec![0]], 1)), 1);
        assert_eq!(size(&hopcroft_karp(&[], 0)), 0);
    }

    #[test]
    fn needs_augmenting_path() {
        // greedy 0-0 must be undone
        let adj = vec![vec![0, 1], vec![0], vec![1, 2]];
        let m = hopcroft_karp(&adj, 3);
        assert_eq!(size(&m), 3);
        assert_eq!(m[1], Some(0));
    }

    #[test]
    fn matches_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..300 {
            let nl = rng.gen_range(0..7);
            let nr = rng.gen_range(1..7);
            let adj: Vec<Vec<usize>> = (0..nl)
                .map(|_| (0..nr).filter(|_| rng.gen_bool(0.35)).collect())
                .collect();
            let m = hopcroft_karp(&adj, nr);
            // valid: edges exist, right side used once
            let mut used = vec![false; nr];
            for (u, v) in m.iter().enumerate() {
                if let Some(v) = *v {
                    assert!(adj[u].contains(&v));
                    assert!(!used[v]);
                    used[v] = true;
                }
            }
            assert_eq!(size(&m), brute(&adj, nr));
        }
    }
}
