//! Symmetric eigendecomposition.
//!
//! [`symmetric_eigen`] reduces to tridiagonal form with Householder
//! reflections and finishes with the implicit QL iteration (the EISPACK
//! `tred2`/`tql2` pair). [`jacobi_eigen`] is a cyclic Jacobi solver kept as
//! an independent cross-check.

use alloc::vec;
use alloc::vec::Vec;

use libm::{fabs, hypot, sqrt};

use crate::{Error, Result};

/// Eigenvalues in ascending order and, optionally, the matching orthonormal
/// eigenvectors stored column-major (column `i` pairs with `values[i]`).
#[derive(Clone, Debug)]
pub struct SymmetricEigen {
    pub dim: usize,
    pub values: Vec<f64>,
    pub vectors: Option<Vec<f64>>,
}

impl SymmetricEigen {
    /// Eigenvector `i`, if vectors were requested.
    pub fn vector(&self, i: usize) -> Option<&[f64]> {
        self.vectors
            .as_deref()
            .map(|v| &v[i * self.dim..(i + 1) * self.dim])
    }
}

fn check_symmetric(a: &[f64], n: usize) -> Result<f64> {
    if a.len() != n * n {
        return Err(Error::Dimension {
            expected: n * n,
            found: a.len(),
        });
    }
    let scale = a.iter().fold(1.0f64, |m, &x| m.max(fabs(x)));
    for i in 0..n {
        for j in 0..i {
            if fabs(a[i * n + j] - a[j * n + i]) > 1e-9 * scale {
                return Err(Error::domain(alloc::format!(
                    "matrix is not symmetric at ({i}, {j})"
                )));
            }
        }
    }
    Ok(scale)
}

/// Eigendecomposition of the symmetric `n x n` row-major matrix `a`.
pub fn symmetric_eigen(a: &[f64], n: usize, want_vectors: bool) -> Result<SymmetricEigen> {
    check_symmetric(a, n)?;
    if n == 0 {
        return Ok(SymmetricEigen {
            dim: 0,
            values: Vec::new(),
            vectors: want_vectors.then(Vec::new),
        });
    }
    // Column-major working copy; `a` is symmetric so the layouts agree up to
    // the asymmetry tolerance, and only the lower triangle is read.
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let x = 0.5 * (a[i * n + j] + a[j * n + i]);
            v[j * n + i] = x;
            v[i * n + j] = x;
        }
    }
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(&mut v, &mut d, &mut e, n, want_vectors);
    tridiagonal_ql(&mut v, &mut d, &mut e, n, want_vectors)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let values = order.iter().map(|&i| d[i]).collect();
    let vectors = want_vectors.then(|| {
        let mut out = Vec::with_capacity(n * n);
        for &i in &order {
            out.extend_from_slice(&v[i * n..(i + 1) * n]);
        }
        out
    });
    Ok(SymmetricEigen {
        dim: n,
        values,
        vectors,
    })
}

// Element (r, c) of the column-major matrix.
macro_rules! at {
    ($v:expr, $n:expr, $r:expr, $c:expr) => {
        $v[($c) * $n + ($r)]
    };
}

fn tridiagonalize(v: &mut [f64], d: &mut [f64], e: &mut [f64], n: usize, accumulate: bool) {
    for j in 0..n {
        d[j] = at!(v, n, n - 1, j);
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for k in 0..i {
            scale += fabs(d[k]);
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = at!(v, n, i - 1, j);
                at!(v, n, i, j) = 0.0;
                at!(v, n, j, i) = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = sqrt(h);
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for item in e.iter_mut().take(i) {
                *item = 0.0;
            }
            for j in 0..i {
                f = d[j];
                at!(v, n, j, i) = f;
                g = e[j] + at!(v, n, j, j) * f;
                for k in (j + 1)..i {
                    let vkj = at!(v, n, k, j);
                    g += vkj * d[k];
                    e[k] += vkj * f;
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
                let col = &mut v[j * n..(j + 1) * n];
                for k in j..i {
                    col[k] -= f * e[k] + g * d[k];
                }
                d[j] = at!(v, n, i - 1, j);
                at!(v, n, i, j) = 0.0;
            }
        }
        d[i] = h;
    }

    if !accumulate {
        for j in 0..n {
            d[j] = at!(v, n, j, j);
        }
        e[0] = 0.0;
        return;
    }

    for i in 0..n - 1 {
        at!(v, n, n - 1, i) = at!(v, n, i, i);
        at!(v, n, i, i) = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = at!(v, n, k, i + 1) / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += at!(v, n, k, i + 1) * at!(v, n, k, j);
                }
                for k in 0..=i {
                    at!(v, n, k, j) -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            at!(v, n, k, i + 1) = 0.0;
        }
    }
    for j in 0..n {
        d[j] = at!(v, n, n - 1, j);
        at!(v, n, n - 1, j) = 0.0;
    }
    at!(v, n, n - 1, n - 1) = 1.0;
    e[0] = 0.0;
}

fn tridiagonal_ql(
    v: &mut [f64],
    d: &mut [f64],
    e: &mut [f64],
    n: usize,
    vectors: bool,
) -> Result<()> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(fabs(d[l]) + fabs(e[l]));
        let mut m = l;
        while m < n {
            if fabs(e[m]) <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 60 {
                    return Err(Error::Convergence { estimate: d[l] });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = hypot(p, 1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for item in d.iter_mut().take(n).skip(l + 2) {
                    *item -= h;
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
                    r = hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if vectors {
                        let (lo, hi) = v.split_at_mut((i + 1) * n);
                        let vi = &mut lo[i * n..];
                        let vi1 = &mut hi[..n];
                        for k in 0..n {
                            let t = vi1[k];
                            vi1[k] = s * vi[k] + c * t;
                            vi[k] = c * vi[k] - s * t;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if fabs(e[l]) <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// Cyclic Jacobi eigendecomposition of the symmetric `n x n` row-major `a`.
///
/// Slower than [`symmetric_eigen`] (every sweep is O(n^3)) but computed by
/// a completely different route, which makes it a useful oracle.
pub fn jacobi_eigen(a: &[f64], n: usize, want_vectors: bool) -> Result<SymmetricEigen> {
    check_symmetric(a, n)?;
    let mut m = a.to_vec();
    // row-major here; vectors end up as columns of `q`
    let mut q = vec![0.0; n * n];
    for i in 0..n {
        q[i * n + i] = 1.0;
    }
    let norm = sqrt(m.iter().map(|x| x * x).sum::<f64>());
    let mut converged = n < 2;
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i * n + j] * m[i * n + j])
            .sum();
        if sqrt(off) <= 1e-15 * norm.max(f64::MIN_POSITIVE) {
            converged = true;
            break;
        }
        for p in 0..n {
            for r in (p + 1)..n {
                let apr = m[p * n + r];
                if apr == 0.0 {
                    continue;
                }
                let theta = (m[r * n + r] - m[p * n + p]) / (2.0 * apr);
                let t = libm::copysign(1.0, theta) / (fabs(theta) + sqrt(theta * theta + 1.0));
                let c = 1.0 / sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkr = m[k * n + r];
                    m[k * n + p] = c * mkp - s * mkr;
                    m[k * n + r] = s * mkp + c * mkr;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mrk = m[r * n + k];
                    m[p * n + k] = c * mpk - s * mrk;
                    m[r * n + k] = s * mpk + c * mrk;
                }
                if want_vectors {
                    for k in 0..n {
                        let qkp = q[k * n + p];
                        let qkr = q[k * n + r];
                        q[k * n + p] = c * qkp - s * qkr;
                        q[k * n + r] = s * qkp + c * qkr;
                    }
                }
            }
        }
    }
    if !converged {
        return Err(Error::Convergence { estimate: m[0] });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i * n + i].total_cmp(&m[j * n + j]));
    let values = order.iter().map(|&i| m[i * n + i]).collect();
    let vectors = want_vectors.then(|| {
        let mut out = Vec::with_capacity(n * n);
        for &i in &order {
            out.extend((0..n).map(|k| q[k * n + i]));
        }
        out
    });
    Ok(SymmetricEigen {
        dim: n,
        values,
        vectors,
    })
}
