//! Dense real symmetric eigensolver: Householder reduction to tridiagonal
//! form followed by the implicit-shift QL iteration (tred2 / tql2 of the
//! EISPACK family, via the public-domain JAMA formulation).

use crate::error::{Error, Result};

/// Full spectral decomposition with eigenvalues in ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    n: usize,
    values: Vec<f64>,
    /// Row `j` holds the eigenvector of `values[j]`.
    vectors: Vec<f64>,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vector(&self, j: usize) -> &[f64] {
        &self.vectors[j * self.n..(j + 1) * self.n]
    }

    pub fn pairs(&self) -> impl Iterator<Item = (f64, &[f64])> + '_ {
        self.values.iter().copied().zip(self.vectors.chunks_exact(self.n))
    }
}

const MAX_SWEEPS_PER_VALUE: usize = 60;

fn check_input(n: usize, a: &[f64]) -> Result<()> {
    if a.len() != n * n {
        return Err(Error::BadMatrix(format!("expected {} entries, got {}", n * n, a.len())));
    }
    if n == 0 {
        return Err(Error::BadMatrix("empty matrix".into()));
    }
    for i in 0..n {
        for j in 0..i {
            let (x, y) = (a[i * n + j], a[j * n + i]);
            if !x.is_finite() || !y.is_finite() {
                return Err(Error::BadMatrix(format!("non-finite entry at ({i}, {j})")));
            }
            if x != y {
                return Err(Error::BadMatrix(format!("asymmetric at ({i}, {j}): {x} != {y}")));
            }
        }
        if !a[i * n + i].is_finite() {
            return Err(Error::BadMatrix(format!("non-finite entry at ({i}, {i})")));
        }
    }
    Ok(())
}

/// Eigenvalues and orthonormal eigenvectors of the symmetric `n x n`
/// row-major matrix `a`.
pub fn symmetric_eigen(n: usize, a: &[f64]) -> Result<Spectrum> {
    check_input(n, a)?;
    let mut v = a.to_vec();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    householder(n, &mut v, &mut d, &mut e, true);
    // eigenvectors become rows so QL rotations touch contiguous memory
    let mut z = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            z[i * n + k] = v[k * n + i];
        }
    }
    implicit_ql(n, &mut d, &mut e, Some(&mut z))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let values = order.iter().map(|&i| d[i]).collect();
    let mut vectors = Vec::with_capacity(n * n);
    for &i in &order {
        vectors.extend_from_slice(&z[i * n..(i + 1) * n]);
    }
    Ok(Spectrum { n, values, vectors })
}

/// Eigenvalues only, ascending. Skips eigenvector accumulation.
pub fn symmetric_eigenvalues(n: usize, a: &[f64]) -> Result<Vec<f64>> {
    check_input(n, a)?;
    let mut v = a.to_vec();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    householder(n, &mut v, &mut d, &mut e, false);
    implicit_ql(n, &mut d, &mut e, None)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// All eigenvalues (ascending) plus orthonormal eigenvectors for those with
/// `|lambda| < cutoff`, in ascending order of eigenvalue.
///
/// The vectors come from block inverse iteration on the tridiagonal form,
/// followed by Rayleigh-Ritz and the Householder back-transformation, so the
/// cost stays close to the eigenvalue-only path when few values qualify.
/// Selections that are not well separated from the rest of the spectrum fall
/// back to the full decomposition.
pub fn symmetric_eigen_near_zero(n: usize, a: &[f64], cutoff: f64) -> Result<(Vec<f64>, Vec<(f64, Vec<f64>)>)> {
    check_input(n, a)?;
    let mut v = a.to_vec();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    reduce(n, &mut v, &mut d, &mut e);
    let hs = d.clone();
    let diag: Vec<f64> = (0..n).map(|i| v[i * n + i]).collect();
    let sub: Vec<f64> = e[1..].to_vec();

    let mut values = diag.clone();
    let mut work = e.clone();
    work[0] = 0.0;
    implicit_ql(n, &mut values, &mut work, None)?;
    values.sort_by(f64::total_cmp);

    let selected: Vec<f64> = values.iter().copied().filter(|x| x.abs() < cutoff).collect();
    let k = selected.len();
    if k == 0 {
        return Ok((values, Vec::new()));
    }
    let inside = selected.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let outside = values
        .iter()
        .filter(|x| x.abs() >= cutoff)
        .fold(f64::INFINITY, |m, x| m.min(x.abs()));

    // each pass shrinks unwanted components by inside / outside
    let sweeps = if inside == 0.0 {
        2
    } else {
        ((f64::EPSILON * 1e-2).ln() / (inside / outside).ln()).ceil() as usize + 1
    };
    let lu = TridiagonalLu::new(&diag, &sub);
    let mut block: Vec<Vec<f64>> = (0..k)
        .map(|j| {
            (0..n)
                .map(|i| (((i + 1) * (2 * j + 3)) as f64 * 0.618_033_988_749_894_9).fract() - 0.5)
                .collect()
        })
        .collect();
    orthonormalize(&mut block);
    if k == n || inside >= SEPARATION * outside {
        return near_zero_from_full(n, a, cutoff);
    }
    for _ in 0..sweeps.clamp(2, 40) {
        for x in &mut block {
            // keep the solve far from overflow when pivots are tiny
            let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for xi in x.iter_mut() {
                *xi /= scale;
            }
            lu.solve(x);
        }
        orthonormalize(&mut block);
        if block.iter().flatten().any(|v| !v.is_finite()) {
            return near_zero_from_full(n, a, cutoff);
        }
    }

    // Rayleigh-Ritz inside the converged subspace
    let tx: Vec<Vec<f64>> = block.iter().map(|x| tridiagonal_mul(&diag, &sub, x)).collect();
    let mut small = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..=i {
            let s = 0.5 * (dot(&block[i], &tx[j]) + dot(&block[j], &tx[i]));
            small[i * k + j] = s;
            small[j * k + i] = s;
        }
    }
    let ritz = symmetric_eigen(k, &small)?;
    let tol = 1e3 * f64::EPSILON * lu.norm + cutoff;
    let mut pairs = Vec::with_capacity(k);
    for (lambda, (_, w)) in selected.iter().zip(ritz.pairs()) {
        let mut y = vec![0.0; n];
        for (wj, x) in w.iter().zip(&block) {
            for (yi, xi) in y.iter_mut().zip(x) {
                *yi += wj * xi;
            }
        }
        let ty = tridiagonal_mul(&diag, &sub, &y);
        let res = ty.iter().zip(&y).map(|(a, b)| (a - lambda * b).powi(2)).sum::<f64>().sqrt();
        if !(res <= tol) {
            return near_zero_from_full(n, a, cutoff);
        }
        for i in 0..n - 1 {
            let h = hs[i + 1];
            if h != 0.0 {
                let g: f64 = (0..=i).map(|r| v[r * n + i + 1] * y[r]).sum();
                for r in 0..=i {
                    y[r] -= g * v[r * n + i + 1] / h;
                }
            }
        }
        let norm = dot(&y, &y).sqrt();
        for yi in &mut y {
            *yi /= norm;
        }
        pairs.push((*lambda, y));
    }
    Ok((values, pairs))
}

fn near_zero_from_full(n: usize, a: &[f64], cutoff: f64) -> Result<(Vec<f64>, Vec<(f64, Vec<f64>)>)> {
    let full = symmetric_eigen(n, a)?;
    let pairs = full
        .pairs()
        .filter(|(x, _)| x.abs() < cutoff)
        .map(|(x, v)| (x, v.to_vec()))
        .collect();
    Ok((full.values().to_vec(), pairs))
}

/// Largest ratio of selected to unselected magnitudes for inverse iteration.
const SEPARATION: f64 = 1e-2;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Modified Gram-Schmidt, applied twice.
fn orthonormalize(block: &mut [Vec<f64>]) {
    for _ in 0..2 {
        for j in 0..block.len() {
            let (done, rest) = block.split_at_mut(j);
            let x = &mut rest[0];
            for q in done.iter() {
                let c = dot(q, x);
                for (xi, qi) in x.iter_mut().zip(q) {
                    *xi -= c * qi;
                }
            }
            let norm = dot(x, x).sqrt();
            for xi in x.iter_mut() {
                *xi /= norm;
            }
        }
    }
}

fn tridiagonal_mul(diag: &[f64], sub: &[f64], x: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut y: Vec<f64> = diag.iter().zip(x).map(|(d, xi)| d * xi).collect();
    for i in 0..n - 1 {
        y[i] += sub[i] * x[i + 1];
        y[i + 1] += sub[i] * x[i];
    }
    y
}

/// LU factorization of a symmetric tridiagonal matrix with partial pivoting;
/// zero pivots are replaced by a tiny multiple of the matrix norm so that
/// singular matrices still drive inverse iteration.
struct TridiagonalLu {
    norm: f64,
    l: Vec<f64>,
    u0: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagonalLu {
    fn new(diag: &[f64], sub: &[f64]) -> Self {
        let n = diag.len();
        let norm = (0..n)
            .map(|i| {
                diag[i].abs()
                    + if i > 0 { sub[i - 1].abs() } else { 0.0 }
                    + if i + 1 < n { sub[i].abs() } else { 0.0 }
            })
            .fold(0.0f64, f64::max);
        let tiny = (f64::EPSILON * norm).max(f64::MIN_POSITIVE);
        let mut u0 = diag.to_vec();
        let mut u1: Vec<f64> = sub.to_vec();
        u1.push(0.0);
        let mut u2 = vec![0.0; n];
        let mut l = vec![0.0; n];
        let mut swapped = vec![false; n];
        let mut low: Vec<f64> = sub.to_vec();
        for i in 0..n - 1 {
            if low[i].abs() > u0[i].abs() {
                // swap rows i and i+1
                swapped[i] = true;
                let (a0, a1, a2) = (u0[i], u1[i], u2[i]);
                u0[i] = low[i];
                u1[i] = u0[i + 1];
                u2[i] = if i + 1 < n - 1 { u1[i + 1] } else { 0.0 };
                let m = a0 / u0[i];
                l[i] = m;
                u0[i + 1] = a1 - m * u1[i];
                if i + 1 < n - 1 {
                    u1[i + 1] = a2 - m * u2[i];
                }
            } else {
                if u0[i] == 0.0 {
                    u0[i] = tiny;
                }
                let m = low[i] / u0[i];
                l[i] = m;
                u0[i + 1] -= m * u1[i];
            }
            low[i] = 0.0;
        }
        if u0[n - 1] == 0.0 {
            u0[n - 1] = tiny;
        }
        TridiagonalLu { norm, l, u0, u1, u2, swapped }
    }

    fn solve(&self, x: &mut [f64]) {
        let n = x.len();
        for i in 0..n - 1 {
            if self.swapped[i] {
                x.swap(i, i + 1);
            }
            x[i + 1] -= self.l[i] * x[i];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            if i + 1 < n {
                s -= self.u1[i] * x[i + 1];
            }
            if i + 2 < n {
                s -= self.u2[i] * x[i + 2];
            }
            x[i] = s / self.u0[i];
        }
    }
}

/// Reduce `v` (row-major, overwritten) to tridiagonal form. On return `d`
/// holds the diagonal and `e[1..]` the subdiagonal. With `accumulate`, `v`
/// holds the orthogonal transformation (columns).
fn householder(n: usize, v: &mut [f64], d: &mut [f64], e: &mut [f64], accumulate: bool) {
    let at = |i: usize, j: usize| i * n + j;
    reduce(n, v, d, e);

    if !accumulate {
        for i in 0..n {
            d[i] = v[at(i, i)];
        }
        e[0] = 0.0;
        return;
    }

    for i in 0..n - 1 {
        v[at(n - 1, i)] = v[at(i, i)];
        v[at(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[at(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[at(k, i + 1)] * v[at(k, j)];
                }
                for k in 0..=i {
                    v[at(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[at(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
        v[at(n - 1, j)] = 0.0;
    }
    v[at(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

/// Householder reduction proper. Afterwards the diagonal sits on the
/// diagonal of `v`, reflector `i` (for `i >= 1`) in column `i` rows `0..i`
/// with its normalization in `d[i]`, and `e[1..]` holds the subdiagonal.
fn reduce(n: usize, v: &mut [f64], d: &mut [f64], e: &mut [f64]) {
    let at = |i: usize, j: usize| i * n + j;
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = 0.0;
                v[at(j, i)] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[at(j, i)] = f;
                g = e[j] + v[at(j, j)] * f;
                for k in j + 1..i {
                    g += v[at(k, j)] * d[k];
                    e[k] += v[at(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[at(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }
}

/// Diagonalize the symmetric tridiagonal matrix `(d, e)`; `z` rows are rotated
/// along when given.
fn implicit_ql(n: usize, d: &mut [f64], e: &mut [f64], mut z: Option<&mut [f64]>) -> Result<()> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_SWEEPS_PER_VALUE {
                    return Err(Error::NoConvergence { index: l, iterations: iter - 1 });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(z) = z.as_deref_mut() {
                        let (lo, hi) = z.split_at_mut((i + 1) * n);
                        let zi = &mut lo[i * n..];
                        let zi1 = &mut hi[..n];
                        for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                            let t = *b;
                            *b = s * *a + c * t;
                            *a = c * *a - s * t;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// Largest `|A v - lambda v|` over all eigenpairs.
pub fn max_residual(n: usize, a: &[f64], spectrum: &Spectrum) -> f64 {
    let mut worst: f64 = 0.0;
    for (lambda, v) in spectrum.pairs() {
        let mut norm2 = 0.0;
        for i in 0..n {
            let row = &a[i * n..(i + 1) * n];
            let av: f64 = row.iter().zip(v).map(|(x, y)| x * y).sum();
            let r = av - lambda * v[i];
            norm2 += r * r;
        }
        worst = worst.max(norm2.sqrt());
    }
    worst
}

/// Largest `|<v_i, v_j> - delta_ij|`.
pub fn orthonormality_error(spectrum: &Spectrum) -> f64 {
    let n = spectrum.dim();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..=i {
            let dot: f64 = spectrum.vector(i).iter().zip(spectrum.vector(j)).map(|(a, b)| a * b).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot - target).abs());
        }
    }
    worst
}
