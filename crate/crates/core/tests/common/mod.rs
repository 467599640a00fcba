//! Random instances and brute-force oracles shared by the integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

use qmetric_core::linalg::Rational;
use qmetric_core::metric::FiniteMetricSpace;
use qmetric_core::rng::SplitMix64;

/// Random metric on n points with distances drawn from `values`. Any set
/// of values inside [a, 2a] satisfies the triangle inequality.
pub fn random_space(rng: &mut SplitMix64, n: usize, values: &[Rational]) -> FiniteMetricSpace {
    let mut d = vec![vec![Rational::zero(); n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = values[rng.below(values.len())].clone();
            d[i][j] = v.clone();
            d[j][i] = v;
        }
    }
    FiniteMetricSpace::new((0..n).map(|i| format!("p{i}")).collect(), d).expect("values within [a, 2a]")
}

pub fn ones_and_twos() -> Vec<Rational> {
    vec![Rational::from(1), Rational::from(2)]
}

pub fn quarter_steps() -> Vec<Rational> {
    vec![Rational::new(1, 1), Rational::new(5, 4), Rational::new(3, 2), Rational::new(7, 4), Rational::new(2, 1)]
}

pub fn random_perm(rng: &mut SplitMix64, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut p);
    p
}

/// Y with Y[i][j] = X[p[i]][p[j]], so p is an isometry Y → X.
pub fn relabeled(x: &FiniteMetricSpace, p: &[usize]) -> FiniteMetricSpace {
    let n = x.len();
    let d = (0..n).map(|i| (0..n).map(|j| x.distance(p[i], p[j]).clone()).collect()).collect();
    FiniteMetricSpace::new((0..n).map(|i| format!("q{i}")).collect(), d).unwrap()
}

/// All permutations of 0..n in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                go(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

pub fn preserves(x: &FiniteMetricSpace, y: &FiniteMetricSpace, p: &[usize]) -> bool {
    (0..x.len()).all(|i| (0..x.len()).all(|j| x.distance(i, j) == y.distance(p[i], p[j])))
}

/// Brute-force list of isometries X → Y.
pub fn brute_isometries(x: &FiniteMetricSpace, y: &FiniteMetricSpace) -> Vec<Vec<usize>> {
    if x.len() != y.len() {
        return Vec::new();
    }
    permutations(x.len()).into_iter().filter(|p| preserves(x, y, p)).collect()
}

/// All-pairs BFS distances of an unweighted graph.
pub fn bfs(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<Option<usize>>> {
    let mut adj = vec![Vec::new(); n];
    for &(i, j) in edges {
        adj[i].push(j);
        adj[j].push(i);
    }
    (0..n)
        .map(|s| {
            let mut dist = vec![None; n];
            dist[s] = Some(0);
            let mut queue = std::collections::VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &v in &adj[u] {
                    if dist[v].is_none() {
                        dist[v] = Some(dist[u].unwrap() + 1);
                        queue.push_back(v);
                    }
                }
            }
            dist
        })
        .collect()
}

/// Random connected graph: a random spanning tree plus each remaining pair
/// with probability 1/3.
pub fn random_connected_graph(rng: &mut SplitMix64, n: usize) -> Vec<(usize, usize)> {
    let order = random_perm(rng, n);
    let mut edges = Vec::new();
    for k in 1..n {
        let parent = order[rng.below(k)];
        let (a, b) = (parent.min(order[k]), parent.max(order[k]));
        edges.push((a, b));
    }
    for i in 0..n {
        for j in i + 1..n {
            if !edges.contains(&(i, j)) && rng.below(3) == 0 {
                edges.push((i, j));
            }
        }
    }
    edges
}
