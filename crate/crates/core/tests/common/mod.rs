//! Independent oracles shared by the integration tests. Plain `u64`
//! arithmetic only; nothing here goes through the crate's matrix code.

#![allow(dead_code)]

pub use itertools_lite::{combinations, permutations};

/// Determinant by Leibniz expansion over all permutations.
pub fn det(m: &[Vec<u64>], q: u64) -> u64 {
    let n = m.len();
    let mut total: i128 = 0;
    for perm in permutations(n) {
        let mut prod: i128 = 1;
        for (r, &c) in perm.iter().enumerate() {
            prod = prod * m[r][c] as i128 % q as i128;
        }
        let inversions = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).filter(|&(a, b)| perm[a] > perm[b]).count();
        total += if inversions % 2 == 0 { prod } else { -prod };
    }
    total.rem_euclid(q as i128) as u64
}

/// Largest `k` with a nonzero `k × k` minor.
pub fn minor_rank(m: &[Vec<u64>], q: u64) -> usize {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    for k in (1..=rows.min(cols)).rev() {
        for rs in combinations(rows, k) {
            for cs in combinations(cols, k) {
                let sub: Vec<Vec<u64>> = rs.iter().map(|&r| cs.iter().map(|&c| m[r][c]).collect()).collect();
                if det(&sub, q) != 0 {
                    return k;
                }
            }
        }
    }
    0
}

/// `B[i][j] = Σ_k Σ_l G[k][i] · D[k][l] · G[l][j]` by a direct quadruple loop.
pub fn brute_key_matrix(g: &[Vec<u64>], d: &[Vec<u64>], q: u64) -> Vec<Vec<u64>> {
    let m = d.len();
    let n = g[0].len();
    let mut b = vec![vec![0u64; n]; n];
    for i in 0..n {
        // D · G_c(i) first keeps this O(m² N + m N²)
        let dgi: Vec<u64> = (0..m).map(|l| (0..m).map(|k| g[k][i] * d[k][l] % q).sum::<u64>() % q).collect();
        for j in 0..n {
            b[i][j] = (0..m).map(|l| dgi[l] * g[l][j] % q).sum::<u64>() % q;
        }
    }
    b
}

pub fn to_rows(m: &matrixkpd::Matrix) -> Vec<Vec<u64>> {
    (0..m.rows()).map(|r| m.row(r).iter().map(|e| e.value()).collect()).collect()
}

mod itertools_lite {
    /// All `k`-subsets of `0..n`, ascending.
    pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
        fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if cur.len() == k {
                out.push(cur.clone());
                return;
            }
            for x in start..n {
                cur.push(x);
                go(x + 1, n, k, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        go(0, n, k, &mut Vec::new(), &mut out);
        out
    }

    pub fn permutations(n: usize) -> Vec<Vec<usize>> {
        fn go(cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
            if cur.len() == used.len() {
                out.push(cur.clone());
                return;
            }
            for x in 0..used.len() {
                if !used[x] {
                    used[x] = true;
                    cur.push(x);
                    go(cur, used, out);
                    cur.pop();
                    used[x] = false;
                }
            }
        }
        let mut out = Vec::new();
        go(&mut Vec::new(), &mut vec![false; n], &mut out);
        out
    }
}
