//! Brute-force ground truth: direct finite-difference solves of the coupled
//! problem in x, a one-sided Jacobi SVD and adaptive Simpson quadrature.

use crate::error::{Error, Result};
use crate::matfun::{lu_factor, vec_norm2, vec_sub, ComplexMatrix, C64, ZERO};

/// Which condition the x = 0 row encodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryKind {
    Robin,
    Dirichlet,
}

/// A row replacing the tridiagonal row at `node`, allowed to reach one block
/// further than the band (the one-sided Robin stencil touches u₀, u₁, u₂).
#[derive(Clone, Debug)]
pub struct BoundaryRow {
    pub node: usize,
    /// `(column node, block)` pairs.
    pub blocks: Vec<(usize, ComplexMatrix)>,
    pub rhs: Vec<C64>,
}

/// Block tridiagonal system over the x-grid `x_i = i/(nx-1)`.
///
/// Row `i` reads `sub[i] u_{i-1} + diag[i] u_i + sup[i] u_{i+1} = rhs[i]`;
/// rows listed in `boundary_rows` override the band.
#[derive(Clone, Debug)]
pub struct BlockTridiagonalSystem {
    pub nx: usize,
    pub block_dim: usize,
    pub sub: Vec<ComplexMatrix>,
    pub diag: Vec<ComplexMatrix>,
    pub sup: Vec<ComplexMatrix>,
    pub rhs: Vec<Vec<C64>>,
    pub boundary_rows: Vec<BoundaryRow>,
}

impl BlockTridiagonalSystem {
    fn validate(&self) -> Result<()> {
        let n = self.block_dim;
        let ok_len = self.sub.len() == self.nx
            && self.diag.len() == self.nx
            && self.sup.len() == self.nx
            && self.rhs.len() == self.nx;
        if self.nx < 2 || !ok_len {
            return Err(Error::DimensionMismatch("block counts disagree with nx".into()));
        }
        let blocks = self.sub.iter().chain(&self.diag).chain(&self.sup);
        if blocks.into_iter().any(|b| b.rows() != n || b.cols() != n) || self.rhs.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch("block shapes disagree with block_dim".into()));
        }
        for row in &self.boundary_rows {
            if row.node >= self.nx || row.rhs.len() != n {
                return Err(Error::DimensionMismatch("bad boundary row".into()));
            }
        }
        Ok(())
    }

    /// Folds boundary rows into the band. A row reaching two nodes away is
    /// reduced with the adjacent band row, which must couple to that node.
    fn banded(
        &self,
    ) -> Result<(
        Vec<ComplexMatrix>,
        Vec<ComplexMatrix>,
        Vec<ComplexMatrix>,
        Vec<Vec<C64>>,
    )> {
        let n = self.block_dim;
        let mut sub = self.sub.clone();
        let mut diag = self.diag.clone();
        let mut sup = self.sup.clone();
        let mut rhs = self.rhs.clone();
        for row in &self.boundary_rows {
            let i = row.node;
            let mut s = ComplexMatrix::zeros(n, n);
            let mut d = ComplexMatrix::zeros(n, n);
            let mut u = ComplexMatrix::zeros(n, n);
            let mut r = row.rhs.clone();
            for (col, block) in &row.blocks {
                let offset = *col as isize - i as isize;
                match offset {
                    -1 => s = &s + block,
                    0 => d = &d + block,
                    1 => u = &u + block,
                    2 | -2 => {
                        // eliminate the far node with band row k = i ± 1,
                        // whose coupling to the far node is sup[k] (resp. sub[k])
                        let k = (i as isize + offset / 2) as usize;
                        let link = if offset == 2 { &self.sup[k] } else { &self.sub[k] };
                        let factor = lu_factor(link)
                            .map_err(|_| Error::BlockSingular(k))?
                            .solve(&ComplexMatrix::identity(n));
                        let c = block * &factor;
                        // row_i -= c * row_k
                        let near_i = &c
                            * &(if offset == 2 {
                                self.sub[k].clone()
                            } else {
                                self.sup[k].clone()
                            });
                        let at_k = &c * &self.diag[k];
                        d = &d - &near_i;
                        if offset == 2 {
                            u = &u - &at_k;
                        } else {
                            s = &s - &at_k;
                        }
                        r = vec_sub(&r, &c.mul_vec(&self.rhs[k]));
                    }
                    _ => {
                        return Err(Error::InvalidArgument(format!(
                            "boundary row at node {i} reaches node {col}"
                        )))
                    }
                }
            }
            sub[i] = s;
            diag[i] = d;
            sup[i] = u;
            rhs[i] = r;
        }
        Ok((sub, diag, sup, rhs))
    }
}

/// Block Thomas elimination with a per-block LU. A residual check guards
/// against breakdown; small systems then fall back to a dense LU.
pub fn solve_block_tridiag(system: &BlockTridiagonalSystem) -> Result<Vec<Vec<C64>>> {
    system.validate()?;
    let (sub, diag, sup, rhs) = system.banded()?;
    let nx = system.nx;
    let thomas = block_thomas(&sub, &diag, &sup, &rhs);
    if let Ok(u) = &thomas {
        let (res, scale) = band_residual(&sub, &diag, &sup, &rhs, u);
        if res <= 1e-9 * scale {
            return thomas;
        }
    }
    if nx * system.block_dim <= 2048 {
        let u = dense_solve(&sub, &diag, &sup, &rhs)?;
        let (res, scale) = band_residual(&sub, &diag, &sup, &rhs, &u);
        if res <= 1e-9 * scale {
            return Ok(u);
        }
    }
    match thomas {
        Err(e) => Err(e),
        Ok(_) => Err(Error::BlockSingular(nx)),
    }
}

fn block_thomas(
    sub: &[ComplexMatrix],
    diag: &[ComplexMatrix],
    sup: &[ComplexMatrix],
    rhs: &[Vec<C64>],
) -> Result<Vec<Vec<C64>>> {
    let nx = diag.len();
    let mut g: Vec<ComplexMatrix> = Vec::with_capacity(nx);
    let mut y: Vec<Vec<C64>> = Vec::with_capacity(nx);
    let mut d_prev: Option<(ComplexMatrix, Vec<C64>)> = None;
    for i in 0..nx {
        let (d, r) = match &d_prev {
            None => (diag[0].clone(), rhs[0].clone()),
            Some((gp, yp)) => (&diag[i] - &(&sub[i] * gp), vec_sub(&rhs[i], &sub[i].mul_vec(yp))),
        };
        let lu = lu_factor(&d).map_err(|_| Error::BlockSingular(i))?;
        let gi = if i + 1 < nx {
            lu.solve(&sup[i])
        } else {
            ComplexMatrix::zeros(1, 1)
        };
        let yi = lu.solve_vec(&r);
        g.push(gi.clone());
        y.push(yi.clone());
        d_prev = Some((gi, yi));
    }
    let mut u = vec![Vec::new(); nx];
    u[nx - 1] = y[nx - 1].clone();
    for i in (0..nx - 1).rev() {
        u[i] = vec_sub(&y[i], &g[i].mul_vec(&u[i + 1]));
    }
    Ok(u)
}

fn band_residual(
    sub: &[ComplexMatrix],
    diag: &[ComplexMatrix],
    sup: &[ComplexMatrix],
    rhs: &[Vec<C64>],
    u: &[Vec<C64>],
) -> (f64, f64) {
    let nx = diag.len();
    let mut res: f64 = 0.0;
    let mut scale: f64 = 0.0;
    let umax = u.iter().map(|v| vec_norm2(v)).fold(0.0, f64::max);
    for i in 0..nx {
        let mut r = diag[i].mul_vec(&u[i]);
        let mut block_norm = diag[i].norm_fro();
        if i > 0 {
            r = crate::matfun::vec_add(&r, &sub[i].mul_vec(&u[i - 1]));
            block_norm += sub[i].norm_fro();
        }
        if i + 1 < nx {
            r = crate::matfun::vec_add(&r, &sup[i].mul_vec(&u[i + 1]));
            block_norm += sup[i].norm_fro();
        }
        res = res.max(vec_norm2(&vec_sub(&r, &rhs[i])));
        scale = scale.max(block_norm * umax + vec_norm2(&rhs[i]));
    }
    (res, scale.max(f64::MIN_POSITIVE))
}

fn dense_solve(
    sub: &[ComplexMatrix],
    diag: &[ComplexMatrix],
    sup: &[ComplexMatrix],
    rhs: &[Vec<C64>],
) -> Result<Vec<Vec<C64>>> {
    let nx = diag.len();
    let n = diag[0].rows();
    let size = nx * n;
    let mut m = ComplexMatrix::zeros(size, size);
    let mut b = ComplexMatrix::zeros(size, 1);
    for i in 0..nx {
        let mut place = |block: &ComplexMatrix, col_node: usize| {
            for r in 0..n {
                for c in 0..n {
                    m[(i * n + r, col_node * n + c)] += block[(r, c)];
                }
            }
        };
        place(&diag[i], i);
        if i > 0 {
            place(&sub[i], i - 1);
        }
        if i + 1 < nx {
            place(&sup[i], i + 1);
        }
        for r in 0..n {
            b[(i * n + r, 0)] = rhs[i][r];
        }
    }
    let x = lu_factor(&m).map_err(|_| Error::BlockSingular(0))?.solve(&b);
    Ok((0..nx).map(|i| (0..n).map(|r| x[(i * n + r, 0)]).collect()).collect())
}

/// Finite-difference discretization in x of
/// `u'' + Au − λu = f`, `u(1) = u₁` and either
/// `u'(0) − (H + μI)u(0) = d₀` (one-sided second-order difference) or
/// `u(0) = d₀` (Dirichlet, `h_op` and `mu` ignored).
///
/// `f` holds samples on `x_i = i/(nx − 1)`, endpoints included.
#[allow(clippy::too_many_arguments)]
pub fn assemble_abstract_bvp(
    a: &ComplexMatrix,
    h_op: &ComplexMatrix,
    lambda: C64,
    mu: C64,
    f: &[Vec<C64>],
    d0: &[C64],
    u1: &[C64],
    bc: BoundaryKind,
) -> Result<BlockTridiagonalSystem> {
    let n = a.rows();
    let nx = f.len();
    if nx < 3 {
        return Err(Error::InvalidArgument("the x-grid needs at least 3 nodes".into()));
    }
    if !a.is_square()
        || f.iter().any(|v| v.len() != n)
        || d0.len() != n
        || u1.len() != n
        || (bc == BoundaryKind::Robin && (h_op.rows() != n || h_op.cols() != n))
    {
        return Err(Error::DimensionMismatch("boundary-value problem data".into()));
    }
    let hx = 1.0 / (nx - 1) as f64;
    let inv_h2 = C64::new(1.0 / (hx * hx), 0.0);
    let eye = ComplexMatrix::identity(n);
    let zero = ComplexMatrix::zeros(n, n);
    let coupling = eye.scale(inv_h2);
    let centre = a.shift(-lambda - 2.0 * inv_h2);

    let mut sub = vec![coupling.clone(); nx];
    let mut diag = vec![centre; nx];
    let mut sup = vec![coupling; nx];
    let mut rhs = f.to_vec();
    sub[0] = zero.clone();
    sup[nx - 1] = zero.clone();

    // x = 1 pins the value
    sub[nx - 1] = zero.clone();
    diag[nx - 1] = eye.clone();
    rhs[nx - 1] = u1.to_vec();

    let mut boundary_rows = Vec::new();
    match bc {
        BoundaryKind::Dirichlet => {
            diag[0] = eye.clone();
            sup[0] = zero;
            rhs[0] = d0.to_vec();
        }
        BoundaryKind::Robin => {
            let c = 1.0 / (2.0 * hx);
            let c0 = &eye.scale_real(-3.0 * c) - &h_op.shift(mu);
            boundary_rows.push(BoundaryRow {
                node: 0,
                blocks: vec![(0, c0), (1, eye.scale_real(4.0 * c)), (2, eye.scale_real(-c))],
                rhs: d0.to_vec(),
            });
        }
    }
    Ok(BlockTridiagonalSystem {
        nx,
        block_dim: n,
        sub,
        diag,
        sup,
        rhs,
        boundary_rows,
    })
}

/// Singular values in descending order by one-sided (Hestenes) Jacobi.
pub fn svd_full(m: &ComplexMatrix) -> Result<Vec<f64>> {
    if !m.is_finite() {
        return Err(Error::NonFinite("svd input"));
    }
    // work on the orientation with fewer columns
    let work = if m.cols() > m.rows() { m.adjoint() } else { m.clone() };
    let rows = work.rows();
    let cols = work.cols();
    let mut columns: Vec<Vec<C64>> = (0..cols).map(|j| work.column(j)).collect();
    let eps = 1e-15;
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha: f64 = columns[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = columns[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma: C64 = columns[p]
                    .iter()
                    .zip(&columns[q])
                    .fold(ZERO, |acc, (x, y)| acc + x.conj() * y);
                let g = gamma.norm();
                if g <= eps * (alpha * beta).sqrt() || g == 0.0 {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for k in 0..rows {
                    let xp = columns[p][k];
                    // rotate against the phase-aligned q column
                    let xq = columns[q][k] * phase.conj();
                    columns[p][k] = xp * c - xq * s;
                    columns[q][k] = (xp * s + xq * c) * phase;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = columns.iter().map(|c| vec_norm2(c)).collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}

const QUAD_TOL: f64 = 1e-10;
const QUAD_MAX_DEPTH: usize = 60;
const QUAD_MAX_EVALS: usize = 2_000_000;

/// Adaptive Simpson quadrature of `f` over `[a, b]`, where either end may be
/// infinite (mapped by `t = s/(1 − s)`).
///
/// A quintic change of variables flattens both ends so integrable endpoint
/// singularities are never sampled. The distance to the upper end is carried
/// separately, so semi-infinite tails keep full relative precision; a
/// singularity at a finite endpoint is resolved best when that endpoint is 0.
pub fn quad_adaptive(f: impl Fn(f64) -> f64, a: f64, b: f64) -> Result<f64> {
    if a.is_nan() || b.is_nan() {
        return Err(Error::NonFinite("quadrature limits"));
    }
    if a == b {
        return Ok(0.0);
    }
    if a > b {
        return quad_adaptive(f, b, a).map(|v| -v);
    }
    let smooth = |w: f64| w * w * w * (10.0 - 15.0 * w + 6.0 * w * w);
    // (s, 1 − s) with both parts accurate
    let split = |w: f64| {
        if w <= 0.5 {
            let s = smooth(w);
            (s, 1.0 - s)
        } else {
            let c = smooth(1.0 - w);
            (1.0 - c, c)
        }
    };
    let g = |w: f64| {
        let (s, c) = split(w);
        let jac = 30.0 * w * w * (1.0 - w) * (1.0 - w);
        let v = match (a.is_finite(), b.is_finite()) {
            (true, true) => {
                let x = if w <= 0.5 { a + (b - a) * s } else { b - (b - a) * c };
                f(x) * (b - a) * jac
            }
            (true, false) => f(a + s / c) * jac / (c * c),
            (false, true) => f(b - s / c) * jac / (c * c),
            (false, false) => {
                // u = 2s − 1 on (−1, 1), t = u/(1 − u²), 1 − u² = 4sc
                let u = s - c;
                let one_minus_u2 = 4.0 * s * c;
                f(u / one_minus_u2) * (1.0 + u * u) / (one_minus_u2 * one_minus_u2) * 2.0 * jac
            }
        };
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    simpson_adaptive(&g, 0.0, 1.0)
}

fn simpson_adaptive(g: &dyn Fn(f64) -> f64, a: f64, b: f64) -> Result<f64> {
    struct Panel {
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    }
    let simpson = |a: f64, b: f64, fa: f64, fm: f64, fb: f64| (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    // seed with a coarse composite grid so narrow features are seen
    let seeds = 16;
    let mut stack: Vec<Panel> = Vec::new();
    let mut evals = 0usize;
    let mut scale = 0.0;
    for k in 0..seeds {
        let pa = a + (b - a) * k as f64 / seeds as f64;
        let pb = a + (b - a) * (k + 1) as f64 / seeds as f64;
        let (fa, fm, fb) = (g(pa), g(0.5 * (pa + pb)), g(pb));
        evals += 3;
        let whole = simpson(pa, pb, fa, fm, fb);
        scale += whole.abs();
        stack.push(Panel {
            a: pa,
            b: pb,
            fa,
            fm,
            fb,
            whole,
            tol: 0.0,
            depth: 0,
        });
    }
    let tol_abs = QUAD_TOL * scale.max(1e-300);
    for p in &mut stack {
        p.tol = tol_abs / seeds as f64;
    }
    let mut total = 0.0;
    let mut comp = 0.0;
    let mut unresolved = 0.0;
    while let Some(p) = stack.pop() {
        let m = 0.5 * (p.a + p.b);
        let lm = 0.5 * (p.a + m);
        let rm = 0.5 * (m + p.b);
        let (flm, frm) = (g(lm), g(rm));
        evals += 2;
        let left = simpson(p.a, m, p.fa, flm, p.fm);
        let right = simpson(m, p.b, p.fm, frm, p.fb);
        let diff = left + right - p.whole;
        let local_tol = p.tol;
        if diff.abs() <= 15.0 * local_tol || p.depth >= QUAD_MAX_DEPTH || evals > QUAD_MAX_EVALS {
            if diff.abs() > 15.0 * local_tol {
                unresolved += diff.abs() / 15.0;
            }
            // Kahan summation keeps the accumulated rounding below the target
            let y = left + right + diff / 15.0 - comp;
            let t = total + y;
            comp = (t - total) - y;
            total = t;
        } else {
            stack.push(Panel {
                a: p.a,
                b: m,
                fa: p.fa,
                fm: flm,
                fb: p.fm,
                whole: left,
                tol: 0.5 * p.tol,
                depth: p.depth + 1,
            });
            stack.push(Panel {
                a: m,
                b: p.b,
                fa: p.fm,
                fm: frm,
                fb: p.fb,
                whole: right,
                tol: 0.5 * p.tol,
                depth: p.depth + 1,
            });
        }
    }
    if unresolved > 1e3 * tol_abs.max(QUAD_TOL * total.abs()) {
        return Err(Error::NoConvergence {
            iterations: evals,
            lower: total - unresolved,
            upper: total + unresolved,
        });
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matfun::{opnorm2, ONE};
    use std::f64::consts::PI;

    #[test]
    fn identity_blocks_return_rhs() {
        let nx = 4;
        let n = 3;
        let rhs: Vec<Vec<C64>> = (0..nx)
            .map(|i| (0..n).map(|k| C64::new(i as f64, k as f64)).collect())
            .collect();
        let sys = BlockTridiagonalSystem {
            nx,
            block_dim: n,
            sub: vec![ComplexMatrix::zeros(n, n); nx],
            diag: vec![ComplexMatrix::identity(n); nx],
            sup: vec![ComplexMatrix::zeros(n, n); nx],
            rhs: rhs.clone(),
            boundary_rows: vec![],
        };
        assert_eq!(solve_block_tridiag(&sys).unwrap(), rhs);
    }

    fn scalar_cosh_error(nx: usize) -> f64 {
        let a = ComplexMatrix::scalar(C64::new(-1.0, 0.0));
        let h = ComplexMatrix::zeros(1, 1);
        let f = vec![vec![ZERO]; nx];
        let sys = assemble_abstract_bvp(&a, &h, ZERO, ZERO, &f, &[ZERO], &[ONE], BoundaryKind::Robin).unwrap();
        let u = solve_block_tridiag(&sys).unwrap();
        (0..nx)
            .map(|i| {
                let x = i as f64 / (nx - 1) as f64;
                (u[i][0].re - x.cosh() / 1f64.cosh()).abs()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn scalar_robin_ode_second_order() {
        let e1 = scalar_cosh_error(33);
        let e2 = scalar_cosh_error(65);
        assert!(e1 < 1e-3);
        let order = (e1 / e2).log2();
        assert!((1.8..=2.2).contains(&order), "order {order}");
    }

    #[test]
    fn zero_data_gives_zero_solution() {
        let n = 4;
        let a = crate::operators::dirichlet_laplacian_1d(n);
        let h = a.scale_real(-1.0);
        let f = vec![vec![ZERO; n]; 9];
        let sys = assemble_abstract_bvp(
            &a,
            &h,
            C64::new(10.0, 0.0),
            C64::new(10.0, 0.0),
            &f,
            &[ZERO; 4],
            &[ZERO; 4],
            BoundaryKind::Robin,
        )
        .unwrap();
        let u = solve_block_tridiag(&sys).unwrap();
        assert!(u.iter().all(|v| v.iter().all(|z| *z == ZERO)));
    }

    #[test]
    fn robin_row_carries_the_boundary_operator() {
        let n = 3;
        let a = crate::operators::dirichlet_laplacian_1d(n);
        let h = crate::operators::volterra_h(n, &|y, xi| (1.0 - y) * xi).unwrap();
        let f = vec![vec![ZERO; n]; 5];
        let sys = assemble_abstract_bvp(&a, &h, ONE, ZERO, &f, &[ZERO; 3], &[ZERO; 3], BoundaryKind::Robin).unwrap();
        let row = &sys.boundary_rows[0];
        let c0 = &row.blocks[0].1;
        let expected = &ComplexMatrix::identity(n).scale_real(-3.0 * 2.0) - &h;
        assert!((c0 - &expected).norm_max() < 1e-14);
    }

    #[test]
    fn svd_unit_cases() {
        let s = svd_full(&ComplexMatrix::identity(4)).unwrap();
        assert!(s.iter().all(|v| (v - 1.0).abs() < 1e-15));
        let d = ComplexMatrix::from_diag(&[C64::new(3.0, 0.0), C64::new(0.0, -4.0)]);
        let s = svd_full(&d).unwrap();
        assert!((s[0] - 4.0).abs() < 1e-15 && (s[1] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn svd_matches_power_iteration() {
        let n = 40;
        let m = ComplexMatrix::from_fn(n, n, |i, j| {
            let x = ((i * 31 + j * 17) % 23) as f64 / 23.0 - 0.5;
            let y = ((i * 7 + j * 13) % 19) as f64 / 19.0 - 0.5;
            C64::new(x, y)
        });
        let s = svd_full(&m).unwrap();
        let p = opnorm2(&m).unwrap();
        assert!((s[0] - p).abs() <= 1e-9 * p);
    }

    #[test]
    fn quadrature_cases() {
        let v = quad_adaptive(|x| x * x, 0.0, 1.0).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-12);
        let v = quad_adaptive(|r| r.sqrt() / ((r + 1.0) * (r + 1.0)), 0.0, f64::INFINITY).unwrap();
        assert!((v - PI / 2.0).abs() < 1e-8, "{v}");
        let v = quad_adaptive(|r| r.sqrt() / ((r + 4.0) * (r + 9.0)), 0.0, f64::INFINITY).unwrap();
        assert!((v - PI / 5.0).abs() < 1e-8, "{v}");
        let v = quad_adaptive(|x| (-x * x).exp(), f64::NEG_INFINITY, f64::INFINITY).unwrap();
        assert!((v - PI.sqrt()).abs() < 1e-9, "{v}");
    }

    #[test]
    fn quadrature_endpoint_singularity() {
        // ∫₀¹ σ^{-1/2} dσ = 2
        let v = quad_adaptive(|t| t.powf(-0.5), 0.0, 1.0).unwrap();
        assert!((v - 2.0).abs() < 1e-9, "{v}");
    }
}
