use std::collections::VecDeque;

/// Maximum matching of a bipartite graph, left side `0..adj.len()`, right
/// side `0..n_right`.
#[derive(Debug, Clone)]
pub struct Matching {
    pub left_to_right: Vec<Option<usize>>,
    pub right_to_left: Vec<Option<usize>>,
    pub size: usize,
}

impl Matching {
    /// Left vertices reachable from an unmatched left vertex along
    /// alternating paths, together with the right vertices seen on the way.
    ///
    /// For a maximum matching the left set is the unique inclusion-minimal
    /// set attaining the maximum Hall deficiency, and the right set is its
    /// neighbourhood.
    pub fn alternating_reach(&self, adj: &[Vec<usize>]) -> (Vec<bool>, Vec<bool>) {
        let mut left_seen = vec![false; adj.len()];
        let mut right_seen = vec![false; self.right_to_left.len()];
        let mut queue = VecDeque::new();
        for (u, seen) in left_seen.iter_mut().enumerate() {
            if self.left_to_right[u].is_none() {
                *seen = true;
                queue.push_back(u);
            }
        }
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if right_seen[v] {
                    continue;
                }
                right_seen[v] = true;
                if let Some(w) = self.right_to_left[v] {
                    if !left_seen[w] {
                        left_seen[w] = true;
                        queue.push_back(w);
                    }
                }
            }
        }
        (left_seen, right_seen)
    }
}

const UNREACHED: usize = usize::MAX;

/// Hopcroft–Karp: repeated BFS layering from free left vertices, then a
/// DFS along the layers for a maximal set of vertex-disjoint shortest
/// augmenting paths.
pub fn hopcroft_karp(adj: &[Vec<usize>], n_right: usize) -> Matching {
    let n_left = adj.len();
    let mut left_to_right = vec![None; n_left];
    let mut right_to_left = vec![None; n_right];
    let mut dist = vec![UNREACHED; n_left];
    let mut size = 0;

    // greedy warm start
    for u in 0..n_left {
        if let Some(&v) = adj[u].iter().find(|&&v| right_to_left[v].is_none()) {
            left_to_right[u] = Some(v);
            right_to_left[v] = Some(u);
            size += 1;
        }
    }

    let mut next_edge = vec![0usize; n_left];
    while layer(adj, &left_to_right, &right_to_left, &mut dist) {
        next_edge.iter_mut().for_each(|e| *e = 0);
        for u in 0..n_left {
            if left_to_right[u].is_none()
                && augment(
                    u,
                    adj,
                    &mut left_to_right,
                    &mut right_to_left,
                    &mut dist,
                    &mut next_edge,
                )
            {
                size += 1;
            }
        }
    }

    Matching {
        left_to_right,
        right_to_left,
        size,
    }
}

fn layer(
    adj: &[Vec<usize>],
    left_to_right: &[Option<usize>],
    right_to_left: &[Option<usize>],
    dist: &mut [usize],
) -> bool {
    let mut queue = VecDeque::new();
    for (u, d) in dist.iter_mut().enumerate() {
        if left_to_right[u].is_none() {
            *d = 0;
            queue.push_back(u);
        } else {
            *d = UNREACHED;
        }
    }
    let mut found = false;
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            match right_to_left[v] {
                None => found = true,
                Some(w) if dist[w] == UNREACHED => {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
                Some(_) => {}
            }
        }
    }
    found
}

// Iterative DFS to stay clear of stack limits on long augmenting paths.
fn augment(
    root: usize,
    adj: &[Vec<usize>],
    left_to_right: &mut [Option<usize>],
    right_to_left: &mut [Option<usize>],
    dist: &mut [usize],
    next_edge: &mut [usize],
) -> bool {
    // stack of (left vertex, right vertex used to enter the next level)
    let mut path: Vec<(usize, usize)> = Vec::new();
    let mut u = root;
    loop {
        let mut advanced = false;
        while next_edge[u] < adj[u].len() {
            let v = adj[u][next_edge[u]];
            next_edge[u] += 1;
            match right_to_left[v] {
                None => {
                    // flip the path
                    path.push((u, v));
                    for &(a, b) in &path {
                        left_to_right[a] = Some(b);
                        right_to_left[b] = Some(a);
                    }
                    return true;
                }
                Some(w) if dist[w] == dist[u] + 1 => {
                    path.push((u, v));
                    u = w;
                    advanced = true;
                    break;
                }
                Some(_) => {}
            }
        }
        if !advanced {
            dist[u] = UNREACHED;
            match path.pop() {
                Some((prev, _)) => u = prev,
                None => return false,
            }
        }
    }
}
