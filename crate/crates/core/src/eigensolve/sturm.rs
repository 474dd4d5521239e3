//! Windowed spectra of large sparse Hamiltonians without forming a dense
//! matrix.
//!
//! The number of eigenvalues below a shift `σ` equals the number of negative
//! pivots in an `LDLᵀ` factorization of `H - σ` (Sylvester's law of inertia).
//! The factorization is done on the envelope (skyline) of the lower triangle,
//! which for one-dimensional chains is banded except for a single wrapped row.
//! Bisection on these counts isolates individual eigenvalues by global index,
//! and inverse iteration with the same factorization yields the eigenvectors.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianMatrix;
use crate::lattice::{Boundary, LatticeCube};

/// Symmetric tridiagonal matrix (one-dimensional box with open ends).
#[derive(Debug, Clone)]
struct Chain {
    diag: Vec<f64>,
    off: Vec<f64>,
}

/// Inertia counts, bisection and inverse iteration for one Hamiltonian.
///
/// Sites are renumbered so that every periodic axis is traversed in folded
/// order `0, L-1, 1, L-2, ...`; wrapped bonds then sit at most two positions
/// apart and the matrix is banded, with bandwidth `2 L^(d-1)` for a periodic
/// cube instead of `L^d - 1`.
#[derive(Debug, Clone)]
pub struct EnvelopeSolver<'a> {
    h: &'a HamiltonianMatrix,
    n: usize,
    /// `order[new] = old` site index.
    order: Vec<usize>,
    first: Vec<usize>,
    offsets: Vec<usize>,
    diag: Vec<f64>,
    lower: Vec<f64>,
    bandwidth: usize,
    chain: Option<Chain>,
    norm: f64,
    pivmin: f64,
    bounds: (f64, f64),
    // factorization workspace
    l: Vec<f64>,
    d: Vec<f64>,
    u: Vec<f64>,
}

impl<'a> EnvelopeSolver<'a> {
    pub fn new(h: &'a HamiltonianMatrix) -> Self {
        let n = h.dim();
        let order = folded_order(h.cube());
        let mut pos = vec![0; n];
        for (new, &old) in order.iter().enumerate() {
            pos[old] = new;
        }
        let first: Vec<usize> = order
            .iter()
            .enumerate()
            .map(|(i, &old)| h.row(old).map(|(c, _)| pos[c]).min().unwrap_or(i).min(i))
            .collect();
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for (i, &f) in first.iter().enumerate() {
            offsets.push(offsets[i] + (i - f));
        }
        let mut lower = vec![0.0; offsets[n]];
        let mut diag = vec![0.0; n];
        for (i, &old) in order.iter().enumerate() {
            for (c, v) in h.row(old) {
                let j = pos[c];
                if j < i {
                    lower[offsets[i] + j - first[i]] += v;
                } else if j == i {
                    diag[i] += v;
                }
            }
        }
        let bandwidth = first.iter().enumerate().map(|(i, &f)| i - f).max().unwrap_or(0);
        let chain = (bandwidth == 1).then(|| Chain {
            diag: diag.clone(),
            off: (1..n).map(|i| lower[offsets[i]]).collect(),
        });
        let norm = h.norm_bound().max(f64::MIN_POSITIVE);
        let (lo, hi) = h.gershgorin();
        let pad = 4.0 * f64::EPSILON * norm + f64::MIN_POSITIVE;
        EnvelopeSolver {
            h,
            n,
            order,
            l: vec![0.0; lower.len()],
            d: vec![0.0; n],
            u: Vec::new(),
            first,
            offsets,
            diag,
            lower,
            bandwidth,
            chain,
            norm,
            pivmin: f64::EPSILON * norm,
            bounds: (lo - pad, hi + pad),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Half-bandwidth of the reordered matrix.
    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    /// Number of eigenvalues below `sigma` (an eigenvalue within roundoff of
    /// `sigma` may land on either side).
    pub fn count_below(&mut self, sigma: f64) -> usize {
        if self.n == 0 {
            return 0;
        }
        match &self.chain {
            Some(c) => count_chain(c, sigma, self.pivmin),
            None => self.factor(sigma),
        }
    }

    /// Counts for several shifts at once.
    pub fn counts_below(&mut self, sigmas: &[f64]) -> Vec<usize> {
        sigmas.iter().map(|&s| self.count_below(s)).collect()
    }

    /// Eigenvalues with global (ascending) indices `k0..k1`.
    pub fn eigenvalues_by_index(&mut self, k0: usize, k1: usize) -> Result<Vec<f64>> {
        if k0 > k1 || k1 > self.n {
            return Err(Error::InvalidArgument(format!(
                "index range {k0}..{k1} outside 0..{}",
                self.n
            )));
        }
        let mut out = vec![f64::NAN; k1 - k0];
        if k0 == k1 {
            return Ok(out);
        }
        let abstol = f64::EPSILON * self.norm;
        let (lo, hi) = self.bounds;
        let mut stack = vec![(lo, hi, 0usize, self.n)];
        while let Some((a, b, ca, cb)) = stack.pop() {
            if cb <= k0 || ca >= k1 || ca == cb {
                continue;
            }
            let mid = 0.5 * (a + b);
            let tol = abstol + 2.0 * f64::EPSILON * a.abs().max(b.abs());
            if b - a <= tol || mid <= a || mid >= b {
                for k in ca.max(k0)..cb.min(k1) {
                    out[k - k0] = mid;
                }
                continue;
            }
            let cm = self.count_below(mid).clamp(ca, cb);
            stack.push((mid, b, cm, cb));
            stack.push((a, mid, ca, cm));
        }
        if out.iter().any(|v| v.is_nan()) {
            return Err(Error::Solver("bisection lost an eigenvalue".into()));
        }
        Ok(out)
    }

    /// Unit eigenvectors for the given (ascending) eigenvalues by inverse
    /// iteration with a pivoted band LU of `H - σ`. Vectors whose eigenvalues
    /// lie closer than `1e-3 ‖H‖` are orthogonalized against each other.
    /// Convergence is judged by the residual against the Rayleigh quotient.
    pub fn eigenvectors(&mut self, values: &[f64], seed: u64) -> Result<Vec<Vec<f64>>> {
        const MAX_ITERS: usize = 12;
        let n = self.n;
        let cluster_gap = 1e-3 * self.norm;
        let residual_tol = 1e3 * f64::EPSILON * self.norm * (n as f64).sqrt();
        let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(values.len());
        let mut cluster_start = 0;
        let mut last_shift = f64::NEG_INFINITY;
        let mut x_old = vec![0.0; n];
        let mut hx = vec![0.0; n];
        let mut lu = BandLu::new(n, self.bandwidth);
        for (k, &e) in values.iter().enumerate() {
            if k > 0 && e - values[k - 1] > cluster_gap {
                cluster_start = k;
            }
            let mut sigma = e;
            if sigma <= last_shift {
                sigma = last_shift + 10.0 * f64::EPSILON * self.norm.max(e.abs());
            }
            last_shift = sigma;
            lu.factor(self, sigma);

            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let mut x: Vec<f64> = (0..n).map(|_| (rng.next_u64() >> 11) as f64 * 2f64.powi(-53) - 0.5).collect();
            normalize(&mut x);
            let mut ok = false;
            for _ in 0..MAX_ITERS {
                lu.solve(&mut x);
                for v in &vectors[cluster_start..k] {
                    let p = dot(v, &x);
                    x.iter_mut().zip(v).for_each(|(xi, vi)| *xi -= p * vi);
                }
                if !normalize(&mut x) {
                    return Err(Error::Solver(format!("inverse iteration collapsed at eigenvalue {e}")));
                }
                for (new, &old) in self.order.iter().enumerate() {
                    x_old[old] = x[new];
                }
                self.h.mul_vec(&x_old, &mut hx);
                let rho = dot(&hx, &x_old);
                let r: f64 = hx.iter().zip(&x_old).map(|(a, b)| (a - rho * b).powi(2)).sum::<f64>().sqrt();
                if r <= residual_tol {
                    ok = true;
                    break;
                }
            }
            if !ok {
                return Err(Error::Solver(format!("inverse iteration did not converge at eigenvalue {e}")));
            }
            vectors.push(x);
        }
        Ok(vectors
            .into_iter()
            .map(|x| {
                let mut out = vec![0.0; n];
                for (new, &old) in self.order.iter().enumerate() {
                    out[old] = x[new];
                }
                out
            })
            .collect())
    }

    /// `LDLᵀ` factorization of `H - σ` on the envelope; returns the number of
    /// negative pivots. Pivots smaller than `pivmin` are replaced by `-pivmin`.
    fn factor(&mut self, sigma: f64) -> usize {
        let mut negatives = 0;
        for i in 0..self.n {
            let fi = self.first[i];
            let row = self.offsets[i];
            let width = i - fi;
            self.u.clear();
            self.u.extend_from_slice(&self.lower[row..row + width]);
            let mut d = self.diag[i] - sigma;
            for jj in 0..width {
                let j = fi + jj;
                let fj = self.first[j];
                let k0 = fi.max(fj);
                let mut s = self.u[jj];
                let lj = &self.l[self.offsets[j] + (k0 - fj)..self.offsets[j] + (j - fj)];
                let ui = &self.u[k0 - fi..jj];
                for (a, b) in ui.iter().zip(lj) {
                    s -= a * b;
                }
                self.u[jj] = s;
                let lij = s / self.d[j];
                self.l[row + jj] = lij;
                d -= s * lij;
            }
            if d.abs() < self.pivmin {
                d = -self.pivmin;
            }
            if d < 0.0 {
                negatives += 1;
            }
            self.d[i] = d;
        }
        negatives
    }
}

/// Site order with every periodic axis folded; Dirichlet axes keep their
/// natural order.
fn folded_order(cube: &LatticeCube) -> Vec<usize> {
    let side = cube.side();
    let axis: Vec<usize> = match cube.boundary() {
        Boundary::Dirichlet => (0..side).collect(),
        Boundary::Periodic => (0..side).map(|p| if p % 2 == 0 { p / 2 } else { side - 1 - p / 2 }).collect(),
    };
    let mut coords = vec![0; cube.dim()];
    (0..cube.volume())
        .map(|mut r| {
            for c in coords.iter_mut().rev() {
                *c = axis[r % side];
                r /= side;
            }
            cube.index(&coords)
        })
        .collect()
}

/// LU factorization with partial pivoting of a banded matrix, stored by rows
/// over columns `i - p ..= i + 2p` to hold the fill from row interchanges.
struct BandLu {
    n: usize,
    p: usize,
    width: usize,
    a: Vec<f64>,
    piv: Vec<usize>,
}

impl BandLu {
    fn new(n: usize, p: usize) -> Self {
        let width = 3 * p + 1;
        BandLu { n, p, width, a: vec![0.0; n * width], piv: vec![0; n] }
    }

    fn at(&self, i: usize, c: usize) -> usize {
        i * self.width + (c + self.p - i)
    }

    fn factor(&mut self, s: &EnvelopeSolver<'_>, sigma: f64) {
        let (n, p) = (self.n, self.p);
        self.a.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..n {
            let ii = self.at(i, i);
            self.a[ii] = s.diag[i] - sigma;
            for j in s.first[i]..i {
                let v = s.lower[s.offsets[i] + j - s.first[i]];
                let ij = self.at(i, j);
                let ji = self.at(j, i);
                self.a[ij] = v;
                self.a[ji] = v;
            }
        }
        let tiny = s.pivmin;
        for k in 0..n {
            let last_row = (k + p).min(n - 1);
            let last_col = (k + 2 * p).min(n - 1);
            let mut best = k;
            for j in k + 1..=last_row {
                if self.a[self.at(j, k)].abs() > self.a[self.at(best, k)].abs() {
                    best = j;
                }
            }
            self.piv[k] = best;
            if best != k {
                for c in k..=last_col {
                    let (x, y) = (self.at(k, c), self.at(best, c));
                    self.a.swap(x, y);
                }
            }
            let kk = self.at(k, k);
            if self.a[kk].abs() < tiny {
                self.a[kk] = if self.a[kk] < 0.0 { -tiny } else { tiny };
            }
            let pivot = self.a[kk];
            for j in k + 1..=last_row {
                let jk = self.at(j, k);
                let m = self.a[jk] / pivot;
                self.a[jk] = m;
                if m != 0.0 {
                    for c in k + 1..=last_col {
                        let (x, y) = (self.at(j, c), self.at(k, c));
                        self.a[x] -= m * self.a[y];
                    }
                }
            }
        }
    }

    fn solve(&self, b: &mut [f64]) {
        let (n, p) = (self.n, self.p);
        for k in 0..n {
            b.swap(k, self.piv[k]);
            let bk = b[k];
            for j in k + 1..=(k + p).min(n - 1) {
                b[j] -= self.a[self.at(j, k)] * bk;
            }
        }
        for k in (0..n).rev() {
            let mut s = b[k];
            for c in k + 1..=(k + 2 * p).min(n - 1) {
                s -= self.a[self.at(k, c)] * b[c];
            }
            b[k] = s / self.a[self.at(k, k)];
        }
    }
}

fn count_chain(c: &Chain, sigma: f64, pivmin: f64) -> usize {
    let fix = |d: f64| if d.abs() < pivmin { -pivmin } else { d };
    let mut d = fix(c.diag[0] - sigma);
    let mut count = usize::from(d < 0.0);
    for (a, o) in c.diag[1..].iter().zip(&c.off) {
        d = fix(a - sigma - o * o / d);
        count += usize::from(d < 0.0);
    }
    count
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(x: &mut [f64]) -> bool {
    let s = dot(x, x).sqrt();
    if !(s.is_finite() && s > 0.0) {
        return false;
    }
    x.iter_mut().for_each(|v| *v /= s);
    true
}
