//! Acceptance gate for the solver stack.
//!
//! Each test is one numbered criterion with a hard tolerance and a runtime
//! budget; it prints a single `criterion NN: PASS` line (visible with
//! `--nocapture`) once its assertions hold. Reference values come from
//! independent routes: recomputed residuals, hard-coded block matrices,
//! the static lab-frame solution, and direct time-domain integration.

use floqlyap::crosscheck::{
    compare_cooling, first_unstable_index, rwa_equivalence, time_domain_probe, CoolingSweep,
};
use floqlyap::floquet::{build_drift, FloquetError, FloquetSystem, Truncation};
use floqlyap::gaussian::{steady_state, to_decibels, Covariance, PeriodicSystem};
use floqlyap::linalg::{solve_lyapunov, spectral_abscissa};
use floqlyap::models::{
    cooling_lab_frame, cooling_periodic, levitated_periodic, two_tone_periodic, CoolingParams,
    LevitatedParams, TwoToneParams,
};
use floqlyap::Mat;
use nalgebra::dmatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::FRAC_1_SQRT_2;
use std::time::Instant;

/// Prints the per-criterion verdict and enforces the runtime budget.
fn finish(criterion: &str, started: Instant, budget_s: f64, detail: &str) {
    let elapsed = started.elapsed().as_secs_f64();
    println!("{criterion}: PASS ({elapsed:.2} s / {budget_s:.0} s budget) - {detail}");
    assert!(
        elapsed < budget_s,
        "{criterion}: runtime {elapsed:.2} s exceeds the {budget_s:.0} s budget"
    );
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

/// dc covariance of the sector solve at order `k`, or `None` when the
/// embedded drift is not Hurwitz there.
fn dc_covariance_at(sys: &PeriodicSystem, k: usize) -> Option<Covariance> {
    match FloquetSystem::build(sys, Truncation::new(k)).solve_steady() {
        Ok(fc) => Some(fc.dc_covariance().expect("dc sector present")),
        Err(FloquetError::Unstable { .. }) => None,
        Err(e) => panic!("sector solve failed: {e}"),
    }
}

fn v_sq_at(sys: &PeriodicSystem, k: usize) -> Option<f64> {
    dc_covariance_at(sys, k).map(|cov| cov.squeezing_variances(1).expect("mechanical block").0)
}

#[test]
fn criterion_01_lyapunov_residual_and_positivity() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst_residual = 0.0_f64;
    let mut min_eig_seen = f64::INFINITY;
    for trial in 0..1000 {
        let d = rng.gen_range(1..=32);
        let margin = rng.gen_range(0.05..0.6);
        let raw = Mat::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0));
        let shift = spectral_abscissa(&raw).unwrap() + margin;
        let a = &raw - Mat::identity(d, d) * shift;
        let scale = 1.0 / (d as f64).sqrt();
        let b = Mat::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0) * scale);
        let n = &b * b.transpose();

        let sol = solve_lyapunov(&a, &n).unwrap();
        assert!(sol.stable, "trial {trial}: shifted drift must be Hurwitz");
        // Residual recomputed here, independent of the solver's own report.
        let residual = (&a * &sol.gamma + &sol.gamma * a.transpose() + &n).norm();
        let tol = 1e-10 * n.norm().max(1.0);
        assert!(
            residual <= tol,
            "trial {trial} (dim {d}): residual {residual:.3e} exceeds {tol:.3e}"
        );
        worst_residual = worst_residual.max(residual / tol);
        let min_eig = sol
            .gamma
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        assert!(
            min_eig >= -1e-10,
            "trial {trial} (dim {d}): min eigenvalue {min_eig:.3e} below -1e-10"
        );
        min_eig_seen = min_eig_seen.min(min_eig);
    }
    finish(
        "criterion 01",
        started,
        10.0,
        &format!(
            "1000 random solves to dim 32; worst residual at {:.1e} of tolerance, min eigenvalue {min_eig_seen:.1e}",
            worst_residual
        ),
    );
}

fn lad4(value: f64) -> Mat {
    Mat::identity(4, 4) * value
}

fn assemble(rows: &[Vec<Mat>]) -> Mat {
    let dim = rows[0][0].nrows();
    let n = rows.len();
    let mut out = Mat::zeros(dim * n, dim * n);
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row.len(), n, "block row {i} has the wrong length");
        for (j, block) in row.iter().enumerate() {
            out.view_mut((i * dim, j * dim), (dim, dim)).copy_from(block);
        }
    }
    out
}

/// Entry-exact comparison (`==`, no tolerance) with a readable diagnostic.
fn assert_exact(label: &str, actual: &Mat, expected: &Mat) {
    assert_eq!(actual.shape(), expected.shape(), "{label}: shape");
    for i in 0..actual.nrows() {
        for j in 0..actual.ncols() {
            assert!(
                actual[(i, j)] == expected[(i, j)],
                "{label}: entry ({i}, {j}) is {:e}, expected {:e}",
                actual[(i, j)],
                expected[(i, j)],
            );
        }
    }
}

/// Hand-written sector drift of the cooling model at order one: the block
/// pattern and every coefficient spelled out, independent of the assembly
/// code under test.
fn expected_cooling_drift(p: &CoolingParams) -> Mat {
    let (g, k, gm) = (p.g, p.kappa, p.gamma);
    let a0 = dmatrix![
        -k, 0.0, 0.0, g;
        0.0, -k, -g, 0.0;
        0.0, g, -gm, 0.0;
        -g, 0.0, 0.0, -gm
    ];
    let sc = -(g) * FRAC_1_SQRT_2;
    let c1 = dmatrix![
        0.0, 0.0, 0.0, sc;
        0.0, 0.0, sc, 0.0;
        0.0, sc, 0.0, 0.0;
        sc, 0.0, 0.0, 0.0
    ];
    let ss = g * FRAC_1_SQRT_2;
    let s1 = dmatrix![
        0.0, 0.0, ss, 0.0;
        0.0, 0.0, 0.0, -ss;
        ss, 0.0, 0.0, 0.0;
        0.0, -ss, 0.0, 0.0
    ];
    let w = 2.0;
    assemble(&[
        vec![a0.clone(), c1.clone(), s1.clone()],
        vec![c1.clone(), a0.clone(), lad4(-w)],
        vec![s1, lad4(w), a0],
    ])
}

/// Same for the two-tone model at order two; with one stored harmonic the
/// outer sector pairs couple through the fundamental scaled by 1/sqrt(2).
fn expected_two_tone_drift(p: &TwoToneParams) -> Mat {
    let (gm_, gp, k, ga) = (p.g_minus, p.g_plus, p.kappa, p.gamma);
    let a0 = dmatrix![
        -k, 0.0, 0.0, gm_ - gp;
        0.0, -k, -gm_ - gp, 0.0;
        0.0, gm_ - gp, -ga, 0.0;
        -gm_ - gp, 0.0, 0.0, -ga
    ];
    let c1a = -(gm_) * FRAC_1_SQRT_2;
    let c1b = gp * FRAC_1_SQRT_2;
    let c1 = dmatrix![
        0.0, 0.0, 0.0, c1a + c1b;
        0.0, 0.0, c1a - c1b, 0.0;
        0.0, c1a + c1b, 0.0, 0.0;
        c1a - c1b, 0.0, 0.0, 0.0
    ];
    let s1a = gm_ * FRAC_1_SQRT_2;
    let s1b = gp * FRAC_1_SQRT_2;
    let s1 = dmatrix![
        0.0, 0.0, s1a - s1b, 0.0;
        0.0, 0.0, 0.0, -s1a - s1b;
        s1a + s1b, 0.0, 0.0, 0.0;
        0.0, s1b - s1a, 0.0, 0.0
    ];
    let f = FRAC_1_SQRT_2;
    let z = Mat::zeros(4, 4);
    let w = 2.0;
    assemble(&[
        vec![a0.clone(), c1.clone(), s1.clone(), z.clone(), z.clone()],
        vec![c1.clone(), a0.clone(), lad4(-w), &c1 * f, &s1 * f],
        vec![s1.clone(), lad4(w), a0.clone(), &s1 * (-f), &c1 * f],
        vec![z.clone(), &c1 * f, &s1 * (-f), a0.clone(), lad4(-2.0 * w)],
        vec![z, &s1 * f, &c1 * f, lad4(2.0 * w), a0],
    ])
}

/// Same for the levitated model at order three, where all three stored
/// harmonics appear and neighbouring sectors mix through sums and
/// differences of harmonic indices.
fn expected_levitated_drift(p: &LevitatedParams) -> Mat {
    let (g, a, k, gm) = (p.g, p.alpha, p.kappa, p.gamma);
    let jm0 = -(g) * FRAC_1_SQRT_2;
    let jp0 = g * a * FRAC_1_SQRT_2 / 2.0;
    let mm0 = a * a / 4.0;
    let mp0 = -(a) / 2.0;
    let a0 = dmatrix![
        -k, 0.0, 0.0, jm0 + jp0;
        0.0, -k, jp0 - jm0, 0.0;
        0.0, jm0 + jp0, -gm, mm0 + mp0;
        jp0 - jm0, 0.0, mp0 - mm0, -gm
    ];
    let cp = g / 2.0;
    let cm = -(g * a) / 2.0;
    let cmm = a * FRAC_1_SQRT_2;
    let cmp = -(3.0 * a * a) * FRAC_1_SQRT_2 / 8.0;
    let c1 = dmatrix![
        0.0, 0.0, 0.0, cp + cm;
        0.0, 0.0, cp - cm, 0.0;
        0.0, cp + cm, 0.0, cmm + cmp;
        cp - cm, 0.0, cmp - cmm, 0.0
    ];
    let sg = -(g) / 2.0;
    let sm = a * a * FRAC_1_SQRT_2 / 8.0;
    let s1 = dmatrix![
        0.0, 0.0, sg, 0.0;
        0.0, 0.0, 0.0, -sg;
        sg, 0.0, sm, 0.0;
        0.0, -sg, 0.0, -sm
    ];
    let c2p = g * a / 4.0;
    let c2mp = -(a) * FRAC_1_SQRT_2 / 2.0;
    let c2mm = a * a * FRAC_1_SQRT_2 / 4.0;
    let c2 = dmatrix![
        0.0, 0.0, 0.0, c2p;
        0.0, 0.0, c2p, 0.0;
        0.0, c2p, 0.0, c2mp + c2mm;
        c2p, 0.0, c2mp - c2mm, 0.0
    ];
    let s2g = -(g * a) / 4.0;
    let s2m = a * FRAC_1_SQRT_2 / 2.0;
    let s2 = dmatrix![
        0.0, 0.0, s2g, 0.0;
        0.0, 0.0, 0.0, -s2g;
        s2g, 0.0, s2m, 0.0;
        0.0, -s2g, 0.0, -s2m
    ];
    let c3v = -(a * a) * FRAC_1_SQRT_2 / 8.0;
    let c3 = dmatrix![
        0.0, 0.0, 0.0, 0.0;
        0.0, 0.0, 0.0, 0.0;
        0.0, 0.0, 0.0, c3v;
        0.0, 0.0, c3v, 0.0
    ];
    let s3v = a * a * FRAC_1_SQRT_2 / 8.0;
    let s3 = dmatrix![
        0.0, 0.0, 0.0, 0.0;
        0.0, 0.0, 0.0, 0.0;
        0.0, 0.0, s3v, 0.0;
        0.0, 0.0, 0.0, -s3v
    ];
    let f = FRAC_1_SQRT_2;
    let w = 2.0;
    assemble(&[
        vec![
            a0.clone(),
            c1.clone(),
            s1.clone(),
            c2.clone(),
            s2.clone(),
            c3.clone(),
            s3.clone(),
        ],
        vec![
            c1.clone(),
            &a0 + &c2 * f,
            lad4(-w) + &s2 * f,
            (&c1 + &c3) * f,
            (&s1 + &s3) * f,
            &c2 * f,
            &s2 * f,
        ],
        vec![
            s1.clone(),
            lad4(w) + &s2 * f,
            &a0 - &c2 * f,
            (&s3 - &s1) * f,
            (&c1 - &c3) * f,
            &s2 * (-f),
            &c2 * f,
        ],
        vec![
            c2.clone(),
            (&c1 + &c3) * f,
            (&s3 - &s1) * f,
            a0.clone(),
            lad4(-2.0 * w),
            &c1 * f,
            &s1 * f,
        ],
        vec![
            s2.clone(),
            (&s1 + &s3) * f,
            (&c1 - &c3) * f,
            lad4(2.0 * w),
            a0.clone(),
            &s1 * (-f),
            &c1 * f,
        ],
        vec![
            c3.clone(),
            &c2 * f,
            &s2 * (-f),
            &c1 * f,
            &s1 * (-f),
            a0.clone(),
            lad4(-3.0 * w),
        ],
        vec![s3, &s2 * f, &c2 * f, &s1 * f, &c1 * f, lad4(3.0 * w), a0],
    ])
}

#[test]
fn criterion_02_golden_drift_assembly() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for draw in 0..5 {
        let cp = CoolingParams {
            g: rng.gen_range(0.01..0.8),
            kappa: rng.gen_range(0.05..1.2),
            gamma: rng.gen_range(1e-6..0.05),
            nbar: rng.gen_range(0.0..1e4),
            delta: 1.0,
        };
        assert_exact(
            &format!("cooling drift, draw {draw}"),
            &build_drift(&cooling_periodic(&cp), Truncation::new(1)),
            &expected_cooling_drift(&cp),
        );

        let tp = TwoToneParams {
            g_minus: rng.gen_range(0.01..0.6),
            g_plus: rng.gen_range(0.01..0.6),
            kappa: rng.gen_range(0.05..1.2),
            gamma: rng.gen_range(1e-6..0.05),
            nbar: rng.gen_range(0.0..1e4),
        };
        assert_exact(
            &format!("two-tone drift, draw {draw}"),
            &build_drift(&two_tone_periodic(&tp), Truncation::new(2)),
            &expected_two_tone_drift(&tp),
        );

        let lp = LevitatedParams {
            g: rng.gen_range(0.01..0.8),
            alpha: rng.gen_range(0.01..0.95),
            kappa: rng.gen_range(0.05..1.2),
            gamma: rng.gen_range(1e-6..0.05),
            nbar: rng.gen_range(0.0..1e4),
        };
        assert_exact(
            &format!("levitated drift, draw {draw}"),
            &build_drift(&levitated_periodic(&lp), Truncation::new(3)),
            &expected_levitated_drift(&lp),
        );
    }
    finish(
        "criterion 02",
        started,
        1.0,
        "all three assembled drifts match hard-coded blocks exactly at 5 random draws",
    );
}

#[test]
fn criterion_03_cooling_three_route_agreement() {
    let started = Instant::now();
    let base = CoolingParams {
        g: 0.1,
        kappa: 0.2,
        gamma: 1e-6,
        nbar: 1e3,
        delta: 1.0,
    };
    let sweeps = [
        (CoolingSweep::Kappa, linspace(0.01, 1.0, 100)),
        (CoolingSweep::G, linspace(0.01, 0.5, 200)),
    ];
    let mut details = Vec::new();
    for (sweep, grid) in sweeps {
        let report = compare_cooling(&base, sweep, &grid).unwrap();
        let max_rel = report
            .max_rel_discrepancy
            .expect("jointly stable points exist");
        assert!(
            max_rel <= 1e-2,
            "{} sweep: sector vs lab occupation differs by {max_rel:.3e}",
            report.variable
        );
        // The single-sector route must visibly miss the counterrotating
        // heating somewhere on each sweep.
        let rwa_dev = report
            .lab
            .iter()
            .zip(&report.rwa)
            .filter_map(|(l, r)| match (l.value, r.value) {
                (Some(l), Some(r)) => Some(((r - l) / l).abs()),
                _ => None,
            })
            .fold(0.0_f64, f64::max);
        assert!(
            rwa_dev > 0.05,
            "{} sweep: single-sector deviation peaks at {rwa_dev:.3e}, expected > 5%",
            report.variable
        );
        if sweep == CoolingSweep::G {
            let lab_onset = first_unstable_index(&report.lab);
            let sector_onset = first_unstable_index(&report.floquet);
            match (lab_onset, sector_onset) {
                (None, None) => {}
                (Some(i), Some(j)) => assert!(
                    i.abs_diff(j) <= 1,
                    "instability onsets {i} and {j} differ by more than one grid step"
                ),
                other => panic!("only one route flags an instability onset: {other:?}"),
            }
        }
        details.push(format!(
            "{}: sector-lab {max_rel:.1e}, single-sector off by {:.0}%",
            report.variable,
            rwa_dev * 100.0
        ));
    }
    finish("criterion 03", started, 30.0, &details.join("; "));
}

#[test]
fn criterion_04_time_domain_occupation_oracle() {
    let started = Instant::now();
    let p = CoolingParams {
        g: 0.1,
        kappa: 0.2,
        gamma: 1e-6,
        nbar: 1e3,
        delta: 1.0,
    };
    let probe = time_domain_probe(&cooling_periodic(&p), 500, 64).unwrap();
    let lab = steady_state(&cooling_lab_frame(&p))
        .unwrap()
        .occupation(1)
        .unwrap();
    let occupations: Vec<f64> = (0..probe.samples().len())
        .map(|i| probe.sample_covariance(i).unwrap().occupation(1).unwrap())
        .collect();
    let min = occupations.iter().copied().fold(f64::INFINITY, f64::min);
    let max = occupations.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let spread = (max - min) / min;
    assert!(
        spread < 1e-3,
        "occupation varies by {spread:.3e} relative over one period"
    );
    let worst = occupations
        .iter()
        .map(|n| ((n - lab) / lab).abs())
        .fold(0.0_f64, f64::max);
    assert!(
        worst < 1e-3,
        "time-domain occupation deviates from the lab frame by {worst:.3e}"
    );
    finish(
        "criterion 04",
        started,
        60.0,
        &format!(
            "64 samples after {} settling periods: period spread {spread:.1e}, lab-frame deviation {worst:.1e}",
            probe.periods_used()
        ),
    );
}

#[test]
fn criterion_05_stripped_harmonics_equivalence() {
    let started = Instant::now();
    let systems = [
        (
            "cooling",
            cooling_periodic(&CoolingParams {
                g: 0.3,
                kappa: 0.5,
                gamma: 1e-2,
                nbar: 10.0,
                delta: 1.0,
            }),
        ),
        (
            "two-tone",
            two_tone_periodic(&TwoToneParams {
                g_minus: 0.3,
                g_plus: 0.15,
                kappa: 0.5,
                gamma: 1e-2,
                nbar: 10.0,
            }),
        ),
        (
            "levitated",
            levitated_periodic(&LevitatedParams {
                g: 0.5,
                alpha: 0.2,
                kappa: 0.7,
                gamma: 1e-2,
                nbar: 10.0,
            }),
        ),
    ];
    let mut worst = 0.0_f64;
    for (name, sys) in systems {
        let diff = rwa_equivalence(&sys, 3).unwrap();
        assert!(
            diff <= 1e-12,
            "{name}: order-3 dc block differs from the single-sector solve by {diff:.3e}"
        );
        worst = worst.max(diff);
    }
    finish(
        "criterion 05",
        started,
        5.0,
        &format!("all three models; worst max-abs dc difference {worst:.1e}"),
    );
}

#[test]
fn criterion_06_two_tone_truncation_convergence() {
    let started = Instant::now();
    let grid = linspace(0.05, 0.55, 20);
    let mut max_high = 0.0_f64;
    let mut max_low = 0.0_f64;
    let mut stable_points = 0;
    for &g_minus in &grid {
        let p = TwoToneParams {
            g_minus,
            g_plus: 0.7 * g_minus,
            kappa: 0.7,
            gamma: 2e-6,
            nbar: 1e4,
        };
        let sys = two_tone_periodic(&p);
        let (v0, v1) = (v_sq_at(&sys, 0), v_sq_at(&sys, 1));
        let (v2, v3) = (v_sq_at(&sys, 2), v_sq_at(&sys, 3));
        if let (Some(v2), Some(v3)) = (v2, v3) {
            stable_points += 1;
            let rel = ((v3 - v2) / v3).abs();
            assert!(
                rel <= 1e-3,
                "g_minus = {g_minus}: orders 2 and 3 differ by {rel:.3e} on V_sq"
            );
            max_high = max_high.max(rel);
        }
        if let (Some(v0), Some(v1)) = (v0, v1) {
            max_low = max_low.max(((v1 - v0) / v1).abs());
        }
    }
    assert_eq!(
        stable_points,
        grid.len(),
        "ratio-locked sweep has unstable points"
    );
    assert!(
        max_low > 1e-2,
        "orders 0 and 1 already agree to {max_low:.3e}; expected a visible counterrotating shift"
    );
    finish(
        "criterion 06",
        started,
        60.0,
        &format!(
            "{stable_points} stable points: orders 2/3 within {max_high:.1e}, orders 0/1 split by up to {:.0}%",
            max_low * 100.0
        ),
    );
}

#[test]
fn criterion_07_levitated_truncation_convergence() {
    let started = Instant::now();
    let grid = linspace(0.05, 0.30, 11);
    let mut max_high = 0.0_f64;
    let mut max_mid = 0.0_f64;
    for &alpha in &grid {
        let p = LevitatedParams {
            g: 0.5,
            alpha,
            kappa: 0.7,
            gamma: 1e-9,
            nbar: 2e7,
        };
        let sys = levitated_periodic(&p);
        let v1 = v_sq_at(&sys, 1);
        let v2 = v_sq_at(&sys, 2).expect("order 2 stable across the modulation sweep");
        let v3 = v_sq_at(&sys, 3).expect("order 3 stable across the modulation sweep");
        let rel = ((v3 - v2) / v3).abs();
        assert!(
            rel <= 1e-3,
            "alpha = {alpha}: orders 2 and 3 differ by {rel:.3e} on V_sq"
        );
        max_high = max_high.max(rel);
        if let Some(v1) = v1 {
            max_mid = max_mid.max(((v2 - v1) / v2).abs());
        }
    }
    assert!(
        max_mid > 1e-3,
        "orders 1 and 2 already agree to {max_mid:.3e}; the second stored harmonic should matter"
    );
    finish(
        "criterion 07",
        started,
        120.0,
        &format!(
            "{} points: orders 2/3 within {max_high:.1e}, orders 1/2 split by up to {max_mid:.1e}",
            grid.len()
        ),
    );
}

#[test]
fn criterion_08_squeezing_witnesses() {
    let started = Instant::now();
    // Sub-vacuum mechanical variance under the two-tone drive.
    let tt = TwoToneParams {
        g_minus: 0.3,
        g_plus: 0.21,
        kappa: 0.2,
        gamma: 2e-6,
        nbar: 1e4,
    };
    let cov = dc_covariance_at(&two_tone_periodic(&tt), 2).expect("two-tone witness is stable");
    let (v_sq_tt, _) = cov.squeezing_variances(1).unwrap();
    assert!(
        v_sq_tt < 1.0,
        "two-tone witness point is not squeezed: V_sq = {v_sq_tt}"
    );

    // Documented levitated squeezing point, pinned in repro/fig3_point.json.
    let lv = LevitatedParams {
        g: 0.3,
        alpha: 0.3,
        kappa: 0.2,
        gamma: 1e-9,
        nbar: 2e7,
    };
    let cov = dc_covariance_at(&levitated_periodic(&lv), 3).expect("levitated point is stable");
    let (v_sq, v_asq) = cov.squeezing_variances(1).unwrap();
    let sq_db = to_decibels(v_sq).unwrap();
    let asq_db = 10.0 * v_asq.log10();
    assert!(
        (sq_db - 2.0).abs() <= 0.5,
        "squeezing {sq_db:.3} dB outside 2 +/- 0.5 dB"
    );
    assert!(
        (asq_db - 11.0).abs() <= 1.5,
        "antisqueezing {asq_db:.3} dB outside 11 +/- 1.5 dB"
    );
    finish(
        "criterion 08",
        started,
        60.0,
        &format!("two-tone V_sq = {v_sq_tt:.3}; levitated point {sq_db:.2} dB / {asq_db:.2} dB"),
    );
}

fn assert_physical_point(cov: &Covariance, label: &str) -> f64 {
    assert!(cov.is_physical(), "{label}: uncertainty bound violated");
    let (v_sq, v_asq) = cov.squeezing_variances(1).unwrap();
    let product = v_sq * v_asq;
    assert!(
        product >= 1.0 - 1e-9,
        "{label}: V_sq * V_asq = {product} dips below the uncertainty floor"
    );
    product
}

#[test]
fn criterion_09_physicality_across_sweeps() {
    let started = Instant::now();
    let mut checked = 0_usize;
    let mut min_product = f64::INFINITY;

    // Condensed versions of the checked-in repro sweeps, one per protocol.
    for &kappa in &linspace(0.01, 1.0, 12) {
        let p = CoolingParams {
            g: 0.1,
            kappa,
            gamma: 1e-6,
            nbar: 1e3,
            delta: 1.0,
        };
        if let Some(cov) = dc_covariance_at(&cooling_periodic(&p), 1) {
            min_product =
                min_product.min(assert_physical_point(&cov, &format!("cooling kappa={kappa}")));
            checked += 1;
        }
    }
    for &g in &linspace(0.01, 0.5, 12) {
        let p = CoolingParams {
            g,
            kappa: 0.2,
            gamma: 1e-6,
            nbar: 1e3,
            delta: 1.0,
        };
        if let Some(cov) = dc_covariance_at(&cooling_periodic(&p), 1) {
            min_product = min_product.min(assert_physical_point(&cov, &format!("cooling g={g}")));
            checked += 1;
        }
    }
    for &g_minus in &linspace(0.15, 0.6, 10) {
        let p = TwoToneParams {
            g_minus,
            g_plus: 0.14,
            kappa: 0.2,
            gamma: 2e-6,
            nbar: 1e4,
        };
        if let Some(cov) = dc_covariance_at(&two_tone_periodic(&p), 2) {
            min_product = min_product
                .min(assert_physical_point(&cov, &format!("two-tone g_minus={g_minus}")));
            checked += 1;
        }
    }
    for &g_plus in &linspace(0.0, 0.285, 10) {
        let p = TwoToneParams {
            g_minus: 0.3,
            g_plus,
            kappa: 0.2,
            gamma: 2e-6,
            nbar: 1e4,
        };
        if let Some(cov) = dc_covariance_at(&two_tone_periodic(&p), 2) {
            min_product =
                min_product.min(assert_physical_point(&cov, &format!("two-tone g_plus={g_plus}")));
            checked += 1;
        }
    }
    for &g in &linspace(0.05, 0.8, 9) {
        let p = LevitatedParams {
            g,
            alpha: 0.3,
            kappa: 0.2,
            gamma: 1e-9,
            nbar: 2e7,
        };
        if let Some(cov) = dc_covariance_at(&levitated_periodic(&p), 3) {
            min_product = min_product.min(assert_physical_point(&cov, &format!("levitated g={g}")));
            checked += 1;
        }
    }
    for &alpha in &linspace(0.0, 0.6, 9) {
        let p = LevitatedParams {
            g: 0.3,
            alpha,
            kappa: 0.2,
            gamma: 1e-9,
            nbar: 2e7,
        };
        if let Some(cov) = dc_covariance_at(&levitated_periodic(&p), 3) {
            min_product =
                min_product.min(assert_physical_point(&cov, &format!("levitated alpha={alpha}")));
            checked += 1;
        }
    }
    assert!(
        checked >= 40,
        "only {checked} stable points exercised; grids drifted"
    );
    finish(
        "criterion 09",
        started,
        60.0,
        &format!("{checked} stable solves physical; min V_sq*V_asq = {min_product:.6}"),
    );
}

#[test]
fn criterion_10_deterministic_parallel_output() {
    let started = Instant::now();
    let bin = env!("CARGO_BIN_EXE_floqlyap");
    let config = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../repro/fig1a.json");
    let run = |args: &[&str], env_workers: Option<&str>| -> Vec<u8> {
        let mut cmd = std::process::Command::new(bin);
        cmd.arg("scan").arg("--config").arg(&config).args(args);
        cmd.env_remove("FLOQUET_WORKERS");
        if let Some(w) = env_workers {
            cmd.env("FLOQUET_WORKERS", w);
        }
        let out = cmd.output().expect("spawn scan");
        assert!(
            out.status.success(),
            "scan failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        out.stdout
    };
    let reference = run(&["--workers", "1"], None);
    assert!(!reference.is_empty(), "scan produced no output");
    let variants: [(&[&str], Option<&str>); 3] = [
        (&["--workers", "2"], None),
        (&["--workers", "4"], None),
        (&[], Some("3")),
    ];
    for (args, env_workers) in variants {
        let other = run(args, env_workers);
        assert!(
            reference == other,
            "scan output changed with workers {args:?} / FLOQUET_WORKERS {env_workers:?}"
        );
    }
    let lines = reference.iter().filter(|&&b| b == b'\n').count();
    finish(
        "criterion 10",
        started,
        10.0,
        &format!("{lines} CSV lines byte-identical across --workers 1/2/4 and FLOQUET_WORKERS=3"),
    );
}
