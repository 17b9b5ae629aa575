//! Finite-volume oracle for the regular part H on a box.
//!
//! H solves ΔH = −1/|Ω| with ∂_νH = ∂_νK on the boundary and ∫H = ∫K, so the grid never
//! sees the singularity at Q. The cell-centered Neumann Laplacian is diagonalized by
//! DCT-II along every axis.

use linni_core::green::{DomainSpec, Shape};
use linni_core::quad::integrate;
use linni_core::{Error, Pt, Result};
use rustdct::DctPlanner;

pub struct GridH {
    pub n: usize,
    pub cells: usize,
    pub h: Pt,
    pub q: Pt,
    pub values: Vec<f64>,
}

impl GridH {
    pub fn index(&self, cell: &[usize]) -> usize {
        let mut idx = 0;
        for k in (0..self.n).rev() {
            idx = idx * self.cells + cell[k];
        }
        idx
    }

    pub fn center_of(&self, cell: &[usize]) -> Pt {
        let mut x = [0.0; 6];
        for k in 0..self.n {
            x[k] = (cell[k] as f64 + 0.5) * self.h[k];
        }
        x
    }

    pub fn at(&self, cell: &[usize]) -> f64 {
        self.values[self.index(cell)]
    }
}

/// ∫_box 1/(c_n|x−q|^{n−2}) dx from 1/r^{2m} = Γ(m)^{-1}∫ s^{m−1}e^{−sr²} ds, which splits into erfs.
pub fn box_mean_k(domain: &DomainSpec, q: &Pt) -> Result<f64> {
    let Shape::Box { lengths } = domain.shape else {
        return Err(Error::Domain("grid oracle needs a box"));
    };
    let n = domain.n;
    let m = (n as f64 - 2.0) / 2.0;
    let f = |u: f64| {
        let s = u.exp();
        let rs = s.sqrt();
        let mut prod = s.powf(m);
        for i in 0..n {
            prod *= 0.5 * std::f64::consts::PI.sqrt() / rs * (libm::erf(rs * (lengths[i] - q[i])) + libm::erf(rs * q[i]));
        }
        prod
    };
    let total = integrate(f, -60.0, 60.0, 1e-15, 1e-12).value / (domain.cn * libm::tgamma(m));
    Ok(total / domain.volume)
}

fn transform_axis(values: &mut [f64], cells: usize, axis: usize, apply: &dyn Fn(&mut [f64])) {
    let stride = cells.pow(axis as u32);
    let block = stride * cells;
    let mut buf = vec![0.0; cells];
    for outer in (0..values.len()).step_by(block) {
        for inner in 0..stride {
            let base = outer + inner;
            for j in 0..cells {
                buf[j] = values[base + j * stride];
            }
            apply(&mut buf);
            for j in 0..cells {
                values[base + j * stride] = buf[j];
            }
        }
    }
}

/// Solves for H(·, q) on `cells`ⁿ cells. Memory is 8·cellsⁿ bytes.
pub fn solve_h(domain: &DomainSpec, q: &Pt, cells: usize) -> Result<GridH> {
    let Shape::Box { lengths } = domain.shape else {
        return Err(Error::Domain("grid oracle needs a box"));
    };
    if !domain.contains(q) {
        return Err(Error::Domain("Q must lie inside the box"));
    }
    if cells < 4 {
        return Err(Error::Domain("need at least 4 cells per axis"));
    }
    let n = domain.n;
    let total = cells.checked_pow(n as u32).filter(|t| *t <= 1 << 27).ok_or(Error::Domain("grid too large"))?;
    let mut h = [0.0; 6];
    for k in 0..n {
        h[k] = lengths[k] / cells as f64;
    }
    let nm2 = n as f64 - 2.0;
    let inv_vol = 1.0 / domain.volume;

    // right-hand side: −1/|Ω| minus boundary fluxes ∂_νK / h
    let mut f = vec![0.0; total];
    let mut cell = [0usize; 6];
    for (idx, v) in f.iter_mut().enumerate() {
        let mut rest = idx;
        for k in 0..n {
            cell[k] = rest % cells;
            rest /= cells;
        }
        let mut acc = -inv_vol;
        for k in 0..n {
            let side = if cell[k] == 0 {
                -1.0
            } else if cell[k] == cells - 1 {
                1.0
            } else {
                continue;
            };
            let mut r2 = 0.0;
            let mut x = [0.0; 6];
            for i in 0..n {
                x[i] = if i == k {
                    if side < 0.0 { 0.0 } else { lengths[i] }
                } else {
                    (cell[i] as f64 + 0.5) * h[i]
                };
                r2 += (x[i] - q[i]) * (x[i] - q[i]);
            }
            let g = -nm2 * (x[k] - q[k]) * side / (domain.cn * r2.powf(n as f64 / 2.0));
            acc -= g / h[k];
        }
        *v = acc;
    }

    let mut planner = DctPlanner::new();
    let dct2 = planner.plan_dct2(cells);
    let dct3 = planner.plan_dct3(cells);
    for axis in 0..n {
        transform_axis(&mut f, cells, axis, &|b| dct2.process_dct2(b));
    }
    // eigenvalues of the Neumann 3-point Laplacian
    let eig: Vec<Vec<f64>> = (0..n)
        .map(|k| (0..cells).map(|j| -(2.0 - 2.0 * (std::f64::consts::PI * j as f64 / cells as f64).cos()) / (h[k] * h[k])).collect())
        .collect();
    for (idx, v) in f.iter_mut().enumerate() {
        if idx == 0 {
            // compatibility: drop the mean of the data
            *v = 0.0;
            continue;
        }
        let mut rest = idx;
        let mut lam = 0.0;
        for e in eig.iter() {
            lam += e[rest % cells];
            rest /= cells;
        }
        *v /= lam;
    }
    for axis in 0..n {
        transform_axis(&mut f, cells, axis, &|b| dct3.process_dct3(b));
    }
    let scale = (2.0 / cells as f64).powi(n as i32);
    let mean_target = box_mean_k(domain, q)?;
    let mut mean = 0.0;
    for v in f.iter_mut() {
        *v *= scale;
        mean += *v;
    }
    mean /= total as f64;
    for v in f.iter_mut() {
        *v += mean_target - mean;
    }
    Ok(GridH { n, cells, h, q: *q, values: f })
}

impl GridH {
    /// Average of the 2ⁿ cells around grid vertex `v` (vertex k sits at x = k·h).
    pub fn vertex(&self, v: &[usize]) -> f64 {
        let n = self.n;
        let mut acc = 0.0;
        let mut cell = [0usize; 6];
        for corner in 0..(1usize << n) {
            for k in 0..n {
                cell[k] = v[k] - 1 + ((corner >> k) & 1);
            }
            acc += self.at(&cell[..n]);
        }
        acc / (1usize << n) as f64
    }
}

pub struct GridComparison {
    pub cells: usize,
    /// (point, grid H on cellsⁿ, extrapolated H, series H, series error)
    pub rows: Vec<(Pt, f64, f64, f64, f64)>,
    /// worst relative gap of the raw and the extrapolated grid values
    pub max_rel_raw: f64,
    pub max_rel: f64,
}

/// Compares grid and series H at vertices shared by the cellsⁿ grid and the half-resolution
/// grid. The two O(h²) solutions are Richardson-combined, (4H_h − H_{2h})/3.
pub fn compare_with_series(domain: &DomainSpec, q: &Pt, cells: usize) -> Result<GridComparison> {
    if cells % 4 != 0 {
        return Err(Error::Domain("cells per axis must be a multiple of 4"));
    }
    let fine = solve_h(domain, q, cells)?;
    let coarse = solve_h(domain, q, cells / 2)?;
    let n = domain.n;
    // vertex indices on the coarse grid
    let m = cells / 2;
    let mid = m / 2;
    let mut picks: Vec<[usize; 6]> = Vec::new();
    let mut c = [0usize; 6];
    c[..n].fill(mid);
    picks.push(c);
    for (axis, off) in [(0usize, 1isize), (1, -2), (n - 1, 2)] {
        let mut d = c;
        d[axis] = (mid as isize + off).clamp(1, m as isize - 1) as usize;
        picks.push(d);
    }
    let mut lo = [0usize; 6];
    lo[..n].fill(1);
    picks.push(lo);
    let mut hi = [0usize; 6];
    hi[..n].fill(m - 1);
    picks.push(hi);
    let mut rows = Vec::new();
    let (mut max_raw, mut max_rel) = (0.0f64, 0.0f64);
    for p in &picks {
        let mut x = [0.0; 6];
        let mut pf = [0usize; 6];
        for k in 0..n {
            x[k] = p[k] as f64 * coarse.h[k];
            pf[k] = 2 * p[k];
        }
        let s = domain.h_est(&x, q)?;
        let vf = fine.vertex(&pf[..n]);
        let vc = coarse.vertex(&p[..n]);
        let ex = (4.0 * vf - vc) / 3.0;
        max_raw = max_raw.max((vf - s.value).abs() / s.value.abs());
        max_rel = max_rel.max((ex - s.value).abs() / s.value.abs());
        rows.push((x, vf, ex, s.value, s.error));
    }
    Ok(GridComparison { cells, rows, max_rel_raw: max_raw, max_rel })
}
