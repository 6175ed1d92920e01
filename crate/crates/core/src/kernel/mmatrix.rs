//! Subtraction-free LU for `k·Id + L`, where `L` is a weighted graph Laplacian.
//!
//! `k·Id + L` is a nonsingular M-matrix whose row sums all equal `k`. The
//! elimination tracks those row sums ("slack") and the magnitudes of the
//! off-diagonal entries instead of the diagonal, so every update is a sum of
//! nonnegative terms. Solving with a nonnegative right-hand side is then
//! subtraction-free as well, which gives entrywise relative accuracy.

/// Symmetric coupling between states: `(L v)_i = Σ_j w_ij (v_i - v_j)`.
#[derive(Clone, Debug)]
pub struct Coupling {
    neighbors: Vec<Vec<(usize, f64)>>,
}

impl Coupling {
    pub fn new(neighbors: Vec<Vec<(usize, f64)>>) -> Self {
        Coupling { neighbors }
    }

    pub fn size(&self) -> usize {
        self.neighbors.len()
    }

    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.neighbors[i]
    }

    pub fn apply_laplacian(&self, v: &[f64], out: &mut [f64]) {
        for (i, nb) in self.neighbors.iter().enumerate() {
            out[i] = nb.iter().map(|&(j, w)| w * (v[i] - v[j])).sum();
        }
    }

    /// Dense `k·Id + L`, row-major.
    pub fn shifted_dense(&self, k: f64) -> Vec<f64> {
        let m = self.size();
        let mut a = vec![0.0; m * m];
        for (i, nb) in self.neighbors.iter().enumerate() {
            a[i * m + i] += k;
            for &(j, w) in nb {
                a[i * m + i] += w;
                a[i * m + j] -= w;
            }
        }
        a
    }
}

#[derive(Clone, Debug)]
pub struct ShiftedLaplacianLu {
    size: usize,
    /// `|L_ip|` below the diagonal, row-major.
    lower: Vec<f64>,
    /// `|U_pj|` above the diagonal, row-major.
    upper: Vec<f64>,
    pivots: Vec<f64>,
}

impl ShiftedLaplacianLu {
    pub fn factor(coupling: &Coupling, shift: f64) -> Self {
        assert!(shift > 0.0);
        let m = coupling.size();
        // off-diagonal magnitudes of the active Schur complement
        let mut off = vec![0.0; m * m];
        for i in 0..m {
            for &(j, w) in coupling.neighbors(i) {
                off[i * m + j] += w;
            }
        }
        let mut slack = vec![shift; m];
        let mut lower = vec![0.0; m * m];
        let mut pivots = vec![0.0; m];
        for p in 0..m {
            let pivot = slack[p] + ((p + 1)..m).map(|j| off[p * m + j]).sum::<f64>();
            pivots[p] = pivot;
            for i in (p + 1)..m {
                let l = off[i * m + p] / pivot;
                if l == 0.0 {
                    continue;
                }
                lower[i * m + p] = l;
                slack[i] += l * slack[p];
                for j in (p + 1)..m {
                    if j != i {
                        off[i * m + j] += l * off[p * m + j];
                    }
                }
            }
        }
        let mut upper = vec![0.0; m * m];
        for p in 0..m {
            for j in (p + 1)..m {
                upper[p * m + j] = off[p * m + j];
            }
        }
        ShiftedLaplacianLu {
            size: m,
            lower,
            upper,
            pivots,
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Solves `(k·Id + L) z = rhs`.
    pub fn solve_into(&self, rhs: &[f64], z: &mut [f64]) {
        let m = self.size;
        for i in 0..m {
            let mut acc = rhs[i];
            for q in 0..i {
                acc += self.lower[i * m + q] * z[q];
            }
            z[i] = acc;
        }
        for i in (0..m).rev() {
            let mut acc = z[i];
            for j in (i + 1)..m {
                acc += self.upper[i * m + j] * z[j];
            }
            z[i] = acc / self.pivots[i];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(m: usize, w: f64) -> Coupling {
        Coupling::new(
            (0..m)
                .map(|i| vec![((i + 1) % m, w), ((i + m - 1) % m, w * 0.5 + 0.25)])
                .collect::<Vec<_>>(),
        )
    }

    fn symmetric_ring(m: usize) -> Coupling {
        // weights symmetric by construction
        let mut nb = vec![Vec::new(); m];
        for i in 0..m {
            let j = (i + 1) % m;
            let w = 0.3 + i as f64 * 0.1;
            nb[i].push((j, w));
            nb[j].push((i, w));
            let far = (i + 3) % m;
            if i < far {
                nb[i].push((far, 1.7));
                nb[far].push((i, 1.7));
            }
        }
        Coupling::new(nb)
    }

    #[test]
    fn solves_against_dense_matvec() {
        for shift in [1.0, 2.0, 17.0] {
            let c = symmetric_ring(8);
            let lu = ShiftedLaplacianLu::factor(&c, shift);
            let rhs: Vec<f64> = (0..8).map(|i| (i as f64 * 0.7).sin()).collect();
            let mut z = vec![0.0; 8];
            lu.solve_into(&rhs, &mut z);
            let a = c.shifted_dense(shift);
            for i in 0..8 {
                let back: f64 = (0..8).map(|j| a[i * 8 + j] * z[j]).sum();
                assert!((back - rhs[i]).abs() < 1e-13, "{back} vs {}", rhs[i]);
            }
        }
    }

    #[test]
    fn constant_vector_scales_by_shift() {
        let c = ring(6, 2.0);
        let lu = ShiftedLaplacianLu::factor(&c, 3.0);
        let mut z = vec![0.0; 6];
        lu.solve_into(&[1.0; 6], &mut z);
        for v in z {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn nonnegative_rhs_gives_positive_solution() {
        let c = symmetric_ring(10);
        let lu = ShiftedLaplacianLu::factor(&c, 1.0);
        let mut rhs = vec![0.0; 10];
        rhs[4] = 1e-300;
        let mut z = vec![0.0; 10];
        lu.solve_into(&rhs, &mut z);
        assert!(z.iter().all(|&v| v > 0.0));
    }
}
