//! Zero location for the secular detector on a k-window.
//!
//! The scan samples the smallest singular value on a uniform grid, promotes
//! interior grid local minima to brackets, refines each bracket by
//! golden-section minimization and accepts a root once the residual passes
//! the acceptance threshold. Grid evaluation and refinement fan out over
//! rayon; results are merged by sorting, so identical inputs give identical
//! spectra regardless of thread count.

use crate::secular::{SecularError, SecularSystem};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RootfindError {
    #[error("invalid window [{0}, {1}]: need 0 < k_min < k_max")]
    InvalidWindow(f64, f64),
    #[error(transparent)]
    Secular(#[from] SecularError),
    #[error("null space dimension {found} disagrees with stored multiplicity {stored} at k={k}")]
    MultiplicityMismatch { k: f64, stored: usize, found: usize },
}

/// Scan and refinement controls; the defaults are the tested configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScanOptions {
    /// Grid spacing of the coarse sweep.
    pub scan_step: f64,
    /// A refined minimum at or below this residual is an eigenvalue.
    pub tol_accept: f64,
    /// A refined minimum below this (but above `tol_accept`) counts as a
    /// non-converged bracket and is reported, not accepted.
    pub promote_tol: f64,
    /// Entries closer than this merge into one record.
    pub merge_tol: f64,
    /// Iteration cap for one golden-section refinement.
    pub max_refine_iters: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            scan_step: 0.005,
            tol_accept: 1e-8,
            promote_tol: 1e-3,
            merge_tol: 1e-7,
            max_refine_iters: 200,
        }
    }
}

/// One accepted eigenvalue record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Eigenvalue {
    /// Square root of the energy.
    pub k: f64,
    pub multiplicity: usize,
    /// sigma_min of the row-normalized matrix at `k`.
    pub residual: f64,
    /// Final bracketing interval, width <= 1e-9.
    pub window: (f64, f64),
    /// Set when nearby zeros were absorbed into this record's count.
    pub cluster: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScanStats {
    pub grid_points: usize,
    pub brackets: usize,
    pub accepted: usize,
    /// Brackets whose refined minimum stayed above `promote_tol` (grid
    /// noise, dropped silently).
    pub rejected_spurious: usize,
    /// k of refined minima caught between `tol_accept` and `promote_tol`:
    /// the solver flags these as non-convergence.
    pub rejected_promote: Vec<f64>,
}

/// A sorted eigenvalue list over one window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<Eigenvalue>,
    pub window: (f64, f64),
    pub scan_step: f64,
    pub stats: ScanStats,
}

impl Spectrum {
    pub fn total_multiplicity(&self) -> usize {
        self.eigenvalues.iter().map(|e| e.multiplicity).sum()
    }

    pub fn positions(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|e| e.k).collect()
    }
}

const GOLDEN: f64 = 0.618033988749894848;
/// Golden-section target width in k.
const REFINE_WIDTH: f64 = 1e-12;
/// Duplicate detections of one root land within this distance.
const DEDUPE_TOL: f64 = 1e-11;
/// Windows are closed up to this slop at both ends.
pub const WINDOW_EPS: f64 = 1e-9;

/// Golden-section minimization of `f` on `[a, b]` down to `width`.
pub fn golden_min<F: FnMut(f64) -> f64>(
    mut f: F,
    mut a: f64,
    mut b: f64,
    width: f64,
    max_iters: usize,
) -> (f64, f64) {
    let mut x1 = b - GOLDEN * (b - a);
    let mut x2 = a + GOLDEN * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut iters = 0;
    while b - a > width && iters < max_iters {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - GOLDEN * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + GOLDEN * (b - a);
            f2 = f(x2);
        }
        iters += 1;
    }
    let mid = 0.5 * (a + b);
    let fm = f(mid);
    (mid, fm)
}

enum Refined {
    Accepted(Eigenvalue),
    /// Deep minimum that missed acceptance: solver non-convergence signal.
    Promote(f64),
    Spurious,
}

fn refine_bracket(
    system: &SecularSystem,
    k_lo: f64,
    k_hi: f64,
    opts: &ScanOptions,
) -> Result<Refined, RootfindError> {
    let sm = |k: f64| system.sigma_min(k).unwrap_or(f64::INFINITY);
    let (k, _) = golden_min(sm, k_lo, k_hi, REFINE_WIDTH, opts.max_refine_iters);
    let stats = system.sigma(k)?;
    if stats.sigma_min <= opts.tol_accept {
        let half = REFINE_WIDTH.max(1e-13);
        Ok(Refined::Accepted(Eigenvalue {
            k,
            multiplicity: stats.near_zero_count.max(1),
            residual: stats.sigma_min,
            window: (k - half, k + half),
            cluster: stats.near_zero_count > stats.accept_count,
        }))
    } else if stats.sigma_min <= opts.promote_tol {
        Ok(Refined::Promote(k))
    } else {
        Ok(Refined::Spurious)
    }
}

/// Refines one externally supplied bracket. Returns `Ok(Some(ev))` on
/// acceptance and `Ok(None)` when the bracket holds no eigenvalue.
pub fn refine_root(
    system: &SecularSystem,
    k_lo: f64,
    k_hi: f64,
    opts: &ScanOptions,
) -> Result<Option<Eigenvalue>, RootfindError> {
    if !(0.0 < k_lo && k_lo < k_hi) {
        return Err(RootfindError::InvalidWindow(k_lo, k_hi));
    }
    match refine_bracket(system, k_lo, k_hi, opts)? {
        Refined::Accepted(ev) => Ok(Some(ev)),
        _ => Ok(None),
    }
}

fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).ceil() as usize + 1;
    (0..=n).map(|i| lo + i as f64 * step).collect()
}

/// Scans one window. The grid extends two steps beyond both edges (clamped
/// away from the k=0 basis degeneracy) so roots at the window boundary are
/// still bracketed by interior minima.
pub fn scan_spectrum(
    system: &SecularSystem,
    k_min: f64,
    k_max: f64,
    opts: &ScanOptions,
) -> Result<Spectrum, RootfindError> {
    scan_windows(system, &[(k_min, k_max)], opts)
}

/// Scans a union of sub-windows and merges the results into one spectrum
/// spanning their hull. Windows may overlap; duplicates are merged.
pub fn scan_windows(
    system: &SecularSystem,
    windows: &[(f64, f64)],
    opts: &ScanOptions,
) -> Result<Spectrum, RootfindError> {
    for &(lo, hi) in windows {
        if !(0.0 < lo && lo < hi) {
            return Err(RootfindError::InvalidWindow(lo, hi));
        }
    }
    let hull = (
        windows.iter().map(|w| w.0).fold(f64::INFINITY, f64::min),
        windows.iter().map(|w| w.1).fold(0.0f64, f64::max),
    );
    let mut accepted: Vec<Eigenvalue> = Vec::new();
    let mut stats = ScanStats::default();
    for &(lo, hi) in windows {
        let glo = (lo - 2.0 * opts.scan_step).max(0.02_f64.min(lo));
        let ghi = hi + 2.0 * opts.scan_step;
        let ks = grid(glo, ghi, opts.scan_step);
        let vals: Vec<f64> = ks
            .par_iter()
            .map(|&k| system.sigma_min(k).unwrap_or(f64::INFINITY))
            .collect();
        stats.grid_points += ks.len();
        let mut brackets = Vec::new();
        for i in 1..ks.len() - 1 {
            if vals[i] <= vals[i - 1] && vals[i] <= vals[i + 1] && vals[i] < 0.25 {
                brackets.push((ks[i - 1], ks[i + 1]));
            }
        }
        stats.brackets += brackets.len();
        let refined: Vec<Refined> = brackets
            .par_iter()
            .map(|&(a, b)| refine_bracket(system, a, b, opts))
            .collect::<Result<_, _>>()?;
        for r in refined {
            match r {
                Refined::Accepted(ev) => {
                    if ev.k >= lo - WINDOW_EPS && ev.k <= hi + WINDOW_EPS {
                        accepted.push(ev);
                    }
                }
                Refined::Promote(k) => {
                    if k >= lo - WINDOW_EPS && k <= hi + WINDOW_EPS {
                        stats.rejected_promote.push(k);
                    }
                }
                Refined::Spurious => stats.rejected_spurious += 1,
            }
        }
    }
    accepted.sort_by(|a, b| a.k.partial_cmp(&b.k).unwrap());
    let eigenvalues = merge_records(accepted, opts.merge_tol);
    stats.accepted = eigenvalues.len();
    stats.rejected_promote.sort_by(|a, b| a.partial_cmp(b).unwrap());
    stats.rejected_promote.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
    Ok(Spectrum { eigenvalues, window: hull, scan_step: opts.scan_step, stats })
}

/// Collapses records closer than `merge_tol`. Distances below the duplicate
/// threshold are re-detections of one root from overlapping brackets and
/// keep the better residual; genuinely distinct-but-unresolved positions
/// keep the larger near-zero count and are flagged as clusters (the count
/// already includes the neighbor's singular values, so counts are not
/// summed).
fn merge_records(sorted: Vec<Eigenvalue>, merge_tol: f64) -> Vec<Eigenvalue> {
    let mut out: Vec<Eigenvalue> = Vec::with_capacity(sorted.len());
    for ev in sorted {
        if let Some(last) = out.last_mut() {
            if ev.k - last.k <= merge_tol {
                let distinct = ev.k - last.k > DEDUPE_TOL;
                let keep_mult = last.multiplicity.max(ev.multiplicity);
                if ev.residual < last.residual {
                    let cluster = last.cluster;
                    *last = ev;
                    last.cluster |= cluster;
                }
                last.multiplicity = keep_mult;
                last.cluster |= distinct;
                continue;
            }
        }
        out.push(ev);
    }
    out
}

/// Orthonormal null-space basis (one entry per multiplicity) at an accepted
/// eigenvalue, as per-edge `(a_e, b_e)` coefficients. Fails if the numerical
/// null-space dimension disagrees with the stored multiplicity.
pub fn eigenfunction_coefficients(
    system: &SecularSystem,
    ev: &Eigenvalue,
) -> Result<Vec<Vec<(crate::coupling::C64, crate::coupling::C64)>>, RootfindError> {
    let stats = system.sigma(ev.k)?;
    if stats.near_zero_count != ev.multiplicity {
        return Err(RootfindError::MultiplicityMismatch {
            k: ev.k,
            stored: ev.multiplicity,
            found: stats.near_zero_count,
        });
    }
    Ok(system.null_space(ev.k, ev.multiplicity)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::CouplingSpec;
    use crate::graph::{build_platonic, single_edge, Solid};
    use crate::secular::uniform_system;
    use std::f64::consts::PI;

    fn dirichlet_edge() -> SecularSystem {
        uniform_system(single_edge(), &CouplingSpec::Dirichlet).unwrap()
    }

    #[test]
    fn dirichlet_interval_spectrum() {
        let sys = dirichlet_edge();
        let spec = scan_spectrum(&sys, 0.05, 10.0, &ScanOptions::default()).unwrap();
        let ks = spec.positions();
        assert_eq!(ks.len(), 3);
        for (have, want) in ks.iter().zip([PI, 2.0 * PI, 3.0 * PI]) {
            assert!((have - want).abs() < 1e-9, "{have} vs {want}");
        }
        assert!(spec.eigenvalues.iter().all(|e| e.multiplicity == 1));
        assert!(spec.eigenvalues.iter().all(|e| e.residual <= 1e-8));
        assert!(spec.stats.rejected_promote.is_empty());
    }

    #[test]
    fn golden_finds_parabola_minimum() {
        let (x, _) = golden_min(|x| (x - 0.2) * (x - 0.2), -1.0, 1.0, 1e-12, 200);
        assert!((x - 0.2).abs() < 1e-9);
    }

    #[test]
    fn refine_root_bracket_examples() {
        let tetra = uniform_system(
            build_platonic(Solid::Tetrahedron),
            &CouplingSpec::PreferredOrientation,
        )
        .unwrap();
        let opts = ScanOptions::default();
        let ev = refine_root(&tetra, 6.20, 6.36, &opts).unwrap().expect("eigenvalue at 2pi");
        assert!((ev.k - 2.0 * PI).abs() < 1e-10);
        assert!(ev.window.1 - ev.window.0 <= 1e-9);

        let edge = dirichlet_edge();
        let ev = refine_root(&edge, 3.0, 3.3, &opts).unwrap().expect("eigenvalue at pi");
        assert!((ev.k - PI).abs() < 1e-10);

        // nearest zeros are pi and 2 pi, so this bracket is empty
        assert!(refine_root(&edge, 4.9, 5.1, &opts).unwrap().is_none());
        assert!(refine_root(&edge, 5.1, 4.9, &opts).is_err());
    }

    #[test]
    fn tetrahedron_po_window_contents() {
        let sys = uniform_system(
            build_platonic(Solid::Tetrahedron),
            &CouplingSpec::PreferredOrientation,
        )
        .unwrap();
        let spec = scan_spectrum(&sys, 0.05, 7.0, &ScanOptions::default()).unwrap();
        let has = |k0: f64| spec.eigenvalues.iter().find(|e| (e.k - k0).abs() < 1e-8);
        let two_pi = has(2.0 * PI).expect("2pi present");
        assert_eq!(two_pi.multiplicity, 4);
        // a root within 0.5 of pi from the k^2 cos^2(k/2)+3cos^2(k/2)-1 factor
        assert!(spec.eigenvalues.iter().any(|e| (e.k - PI).abs() < 0.5));
        // frozen reference positions (independent python model)
        let want = [
            (1.630921202825, 1),
            (2.464868416150, 3),
            (3.642666998881, 3),
            (5.692442444503, 1),
            (6.283185307180, 4),
            (6.783190281039, 1),
        ];
        assert_eq!(spec.eigenvalues.len(), want.len());
        for (ev, (k, m)) in spec.eigenvalues.iter().zip(want) {
            assert!((ev.k - k).abs() < 1e-8, "{} vs {k}", ev.k);
            assert_eq!(ev.multiplicity, m, "at k={k}");
        }
    }

    #[test]
    fn octahedron_po_window_contents() {
        let sys = uniform_system(
            build_platonic(Solid::Octahedron),
            &CouplingSpec::PreferredOrientation,
        )
        .unwrap();
        let spec = scan_spectrum(&sys, 0.05, 7.0, &ScanOptions::default()).unwrap();
        let want = [
            (1.807375379183, 3),
            (2.0943951023932, 2),
            (2.634262934486, 3),
            (3.529527226085, 3),
            (4.1887902047864, 2),
            (4.668505519150, 3),
            (6.2831853071796, 8),
        ];
        assert_eq!(spec.eigenvalues.len(), want.len());
        for (ev, (k, m)) in spec.eigenvalues.iter().zip(want) {
            assert!((ev.k - k).abs() < 1e-8, "{} vs {k}", ev.k);
            assert_eq!(ev.multiplicity, m, "at k={k}");
            assert!(ev.residual <= 1e-8);
        }
    }

    #[test]
    fn determinism_bit_for_bit() {
        let sys =
            uniform_system(build_platonic(Solid::Cube), &CouplingSpec::Delta { alpha: 1.0 }).unwrap();
        let a = scan_spectrum(&sys, 0.05, 8.0, &ScanOptions::default()).unwrap();
        let b = scan_spectrum(&sys, 0.05, 8.0, &ScanOptions::default()).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn null_space_dimension_matches_multiplicity() {
        let sys = uniform_system(
            build_platonic(Solid::Octahedron),
            &CouplingSpec::PreferredOrientation,
        )
        .unwrap();
        let spec = scan_spectrum(&sys, 0.05, 7.0, &ScanOptions::default()).unwrap();
        for ev in &spec.eigenvalues {
            let basis = eigenfunction_coefficients(&sys, ev).unwrap();
            assert_eq!(basis.len(), ev.multiplicity);
            for v in &basis {
                assert!(sys.residual(ev.k, v).unwrap() <= 1e-7);
            }
        }
    }

    #[test]
    fn single_edge_eigenfunction_is_pure_sine() {
        let sys = dirichlet_edge();
        let spec = scan_spectrum(&sys, 0.05, 4.0, &ScanOptions::default()).unwrap();
        let ev = &spec.eigenvalues[0];
        let basis = eigenfunction_coefficients(&sys, ev).unwrap();
        let (a, b) = basis[0][0];
        // f = a cos(kx) + b sin(kx) with f(0) = f(1) = 0 forces a = 0
        assert!(a.norm() < 1e-9, "cos coefficient {a}");
        assert!((b.norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn weyl_count_tetrahedron() {
        let sys = uniform_system(
            build_platonic(Solid::Tetrahedron),
            &CouplingSpec::Delta { alpha: 1.0 },
        )
        .unwrap();
        let kmax = 20.0 * PI;
        let spec = scan_spectrum(&sys, 0.05, kmax, &ScanOptions::default()).unwrap();
        let n = sys.graph().edge_count() as f64;
        let weyl = n * kmax / PI;
        let count = spec.total_multiplicity() as f64;
        assert!((count - weyl).abs() <= 2.0 * n, "count {count} vs weyl {weyl}");
    }

    #[test]
    fn scan_step_halving_stable() {
        let sys = uniform_system(
            build_platonic(Solid::Tetrahedron),
            &CouplingSpec::PreferredOrientation,
        )
        .unwrap();
        let base = scan_spectrum(&sys, 0.05, 4.0 * PI, &ScanOptions::default()).unwrap();
        let fine = scan_spectrum(
            &sys,
            0.05,
            4.0 * PI,
            &ScanOptions { scan_step: 0.0025, ..ScanOptions::default() },
        )
        .unwrap();
        assert_eq!(base.eigenvalues.len(), fine.eigenvalues.len());
        for (a, b) in base.eigenvalues.iter().zip(&fine.eigenvalues) {
            assert!((a.k - b.k).abs() < 1e-9);
            assert_eq!(a.multiplicity, b.multiplicity);
        }
    }
}
