//! Dense reference implementations shared by the integration tests. Nothing
//! here goes through the crate's block assembly or Cholesky code.
#![allow(dead_code)]

use sgek::kernels::{corr_nd, corr_nd_d1, corr_nd_d2};
use sgek::{KernelParams, SampleSet, SliceLayout};

pub type Dense = Vec<Vec<f64>>;

/// Solves `a x = b` by Gaussian elimination with partial pivoting and returns
/// `(x, ln |det a|)`.
pub fn solve_logdet(a: &Dense, b: &[f64]) -> (Vec<f64>, f64) {
    let n = a.len();
    let mut m: Dense = a.clone();
    let mut rhs = b.to_vec();
    let mut logdet = 0.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        let p = m[col][col];
        logdet += p.abs().ln();
        for row in col + 1..n {
            let factor = m[row][col] / p;
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                m[row][k] -= factor * m[col][k];
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| m[row][k] * x[k]).sum();
        x[row] = (rhs[row] - s) / m[row][row];
    }
    (x, logdet)
}

/// Observation index of `(site, obs)` in the conventional order
/// `[values; d/dx_1; ...; d/dx_n]`.
pub fn conventional(site: usize, obs: usize, sites: usize) -> usize {
    obs * sites + site
}

/// Correlation matrix built entry by entry from the scalar kernel functions.
pub fn kernel_matrix(data: &SampleSet, params: &KernelParams, gradients: bool) -> Dense {
    let n_sites = data.len();
    let width = if gradients { data.dim() + 1 } else { 1 };
    let size = n_sites * width;
    let mut r = vec![vec![0.0; size]; size];
    for i in 0..n_sites {
        for j in 0..n_sites {
            let (xi, xj) = (data.site(i), data.site(j));
            for p in 0..width {
                for q in 0..width {
                    let v = match (p, q) {
                        (0, 0) => corr_nd(xi, xj, params).unwrap(),
                        // derivative with respect to the second argument
                        (0, q) => -corr_nd_d1(xi, xj, params, q - 1).unwrap(),
                        (p, 0) => corr_nd_d1(xi, xj, params, p - 1).unwrap(),
                        (p, q) => corr_nd_d2(xi, xj, params, p - 1, q - 1).unwrap(),
                    };
                    r[conventional(i, p, n_sites)][conventional(j, q, n_sites)] = v;
                }
            }
        }
    }
    r
}

/// Central finite-difference version of [`kernel_matrix`] using only the
/// kernel value.
pub fn kernel_matrix_fd(data: &SampleSet, params: &KernelParams, h: f64) -> Dense {
    let n_sites = data.len();
    let n = data.dim();
    let width = n + 1;
    let size = n_sites * width;
    let corr = |a: &[f64], b: &[f64]| corr_nd(a, b, params).unwrap();
    let shift = |x: &[f64], k: usize, s: f64| {
        let mut y = x.to_vec();
        y[k] += s;
        y
    };
    let mut r = vec![vec![0.0; size]; size];
    for i in 0..n_sites {
        for j in 0..n_sites {
            let (xi, xj) = (data.site(i), data.site(j));
            for p in 0..width {
                for q in 0..width {
                    let v = match (p, q) {
                        (0, 0) => corr(xi, xj),
                        (0, q) => {
                            (corr(xi, &shift(xj, q - 1, h)) - corr(xi, &shift(xj, q - 1, -h)))
                                / (2.0 * h)
                        }
                        (p, 0) => {
                            (corr(&shift(xi, p - 1, h), xj) - corr(&shift(xi, p - 1, -h), xj))
                                / (2.0 * h)
                        }
                        (p, q) => {
                            let (k, l) = (p - 1, q - 1);
                            let f = |sa: f64, sb: f64| corr(&shift(xi, k, sa), &shift(xj, l, sb));
                            (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4.0 * h * h)
                        }
                    };
                    r[conventional(i, p, n_sites)][conventional(j, q, n_sites)] = v;
                }
            }
        }
    }
    r
}

/// Responses and constant-trend regressors in the conventional order.
pub fn responses(data: &SampleSet, gradients: bool) -> (Vec<f64>, Vec<f64>) {
    let n_sites = data.len();
    let width = if gradients { data.dim() + 1 } else { 1 };
    let mut y = vec![0.0; n_sites * width];
    let mut f = vec![0.0; n_sites * width];
    for i in 0..n_sites {
        y[conventional(i, 0, n_sites)] = data.value(i);
        f[conventional(i, 0, n_sites)] = 1.0;
        if gradients {
            for (k, g) in data.gradient(i).unwrap().iter().enumerate() {
                y[conventional(i, k + 1, n_sites)] = *g;
            }
        }
    }
    (y, f)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sub(m: &Dense, idx: &[usize]) -> Dense {
    idx.iter()
        .map(|&i| idx.iter().map(|&j| m[i][j]).collect())
        .collect()
}

fn pick(v: &[f64], idx: &[usize]) -> Vec<f64> {
    idx.iter().map(|&i| v[i]).collect()
}

/// `(F'R^-1 y, F'R^-1 F, y'R^-1 y, ln det R)` of the sub-system on `idx`.
fn moments(r: &Dense, y: &[f64], f: &[f64], idx: &[usize]) -> (f64, f64, f64, f64) {
    let rs = sub(r, idx);
    let (ys, fs) = (pick(y, idx), pick(f, idx));
    let (ry, logdet) = solve_logdet(&rs, &ys);
    let (rf, _) = solve_logdet(&rs, &fs);
    (dot(&fs, &ry), dot(&fs, &rf), dot(&ys, &ry), logdet)
}

/// Reference profile `(beta0, sigma2, concentrated likelihood)` for a signed
/// combination of sub-systems.
pub fn combined_profile(
    r: &Dense,
    y: &[f64],
    f: &[f64],
    parts: &[(f64, Vec<usize>)],
) -> (f64, f64, f64) {
    let (mut fy, mut ff, mut yy, mut logdet) = (0.0, 0.0, 0.0, 0.0);
    for (sign, idx) in parts {
        let (a, b, c, d) = moments(r, y, f, idx);
        fy += sign * a;
        ff += sign * b;
        yy += sign * c;
        logdet += sign * d;
    }
    let beta = fy / ff;
    // (y - beta f)' R^-1 (y - beta f) summed over the signed parts
    let quad = yy - 2.0 * beta * fy + beta * beta * ff;
    let count = y.len() as f64;
    let sigma2 = quad / count;
    (beta, sigma2, count * sigma2.ln() + logdet)
}

/// Reference full-model profile.
pub fn full_profile(data: &SampleSet, params: &KernelParams, gradients: bool) -> (f64, f64, f64) {
    let r = kernel_matrix(data, params, gradients);
    let (y, f) = responses(data, gradients);
    let all: Vec<usize> = (0..y.len()).collect();
    combined_profile(&r, &y, &f, &[(1.0, all)])
}

/// Observation indices of every site in `sites`.
fn observation_indices(sites: &[usize], n_sites: usize, width: usize) -> Vec<usize> {
    let mut idx = Vec::new();
    for &s in sites {
        for obs in 0..width {
            idx.push(conventional(s, obs, n_sites));
        }
    }
    idx
}

/// Reference k-appendant profile: the product of the densities of every run
/// of `k` consecutive slices, divided by the densities of the `k - 1`
/// slices shared by consecutive runs.
pub fn sliced_profile(
    data: &SampleSet,
    params: &KernelParams,
    layout: &SliceLayout,
    k: usize,
) -> (f64, f64, f64) {
    let gradients = data.has_gradients();
    let r = kernel_matrix(data, params, gradients);
    let (y, f) = responses(data, gradients);
    let width = if gradients { data.dim() + 1 } else { 1 };
    let members = layout.members();
    let m = members.len();
    let gather = |from: usize, to: usize| {
        let sites: Vec<usize> = members[from..to].iter().flatten().copied().collect();
        observation_indices(&sites, data.len(), width)
    };
    let mut parts = Vec::new();
    if m <= k {
        parts.push((1.0, gather(0, m)));
    } else {
        for i in 0..=m - k {
            parts.push((1.0, gather(i, i + k)));
        }
        for i in 1..=m - k {
            parts.push((-1.0, gather(i, i + k - 1)));
        }
    }
    combined_profile(&r, &y, &f, &parts)
}

/// Values and gradients of a smooth quadratic-plus-sine response used to
/// build synthetic instances.
pub fn synthetic(dim: usize, count: usize, seed: u64) -> SampleSet {
    let sites = sgek::sampling::lhs(dim, count, seed).unwrap();
    let mut values = Vec::new();
    let mut grads = Vec::new();
    for x in &sites {
        let mut v = 0.0;
        let mut g = vec![0.0; dim];
        for k in 0..dim {
            let w = (k + 1) as f64;
            v += w * x[k] * x[k] + (3.0 * x[k]).sin();
            g[k] = 2.0 * w * x[k] + 3.0 * (3.0 * x[k]).cos();
        }
        values.push(v);
        grads.push(g);
    }
    SampleSet::from_unit(
        sgek::DomainBox::unit(dim).unwrap(),
        &sites,
        values,
        Some(&grads),
    )
    .unwrap()
}

pub fn max_abs_diff(a: &Dense, b: &[Vec<f64>]) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
