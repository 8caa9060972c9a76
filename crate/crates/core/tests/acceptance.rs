//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};
use std::process::ExitCode;

use cepdbs::blockade_analytic::analytic_observables;
use cepdbs::entanglement::{analytic_coefficients, concurrence, evolve_two_qubit};
use cepdbs::linalg::{inner, norm2};
use cepdbs::lindblad::{
    blockade_observables, blockade_scan, build_collective_generator, build_generator, emission_spectrum, integrate,
    BlockadeOptions, CavityModel, DensityMatrix, HilbertSpace,
};
use cepdbs::model::{DriveParams, SystemParams};
use cepdbs::single_excitation::{
    build_mc, eigensystem, evolve, fw_solutions, fw_solve, populations, to_standing_basis, vacancy_condition, Branch,
};
use cepdbs::spectra::{default_grid, linspace, local_coupling, local_coupling_closed, se_spectrum, spectral_density};
use cepdbs::C64;
use rand::{rngs::StdRng, Rng, SeedableRng};

struct Outcome {
    pass: bool,
    detail: String,
}

type Check = fn() -> Outcome;

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn e1() -> [C64; 3] {
    [C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]
}

fn vacancy_bound_state() -> Outcome {
    let mut worst_im: f64 = 0.0;
    let mut worst_vec: f64 = 0.0;
    for &g in &[0.5, 1.0, 2.0] {
        let p = SystemParams { omega_c: 0.3, omega_0: 0.3, g, ..SystemParams::default() };
        let es = eigensystem(&to_standing_basis(&build_mc(&p)).unwrap()).unwrap();
        let k = (0..3)
            .min_by(|&a, &b| (es.eigenvalues[a] - p.omega_c).norm().total_cmp(&(es.eigenvalues[b] - p.omega_c).norm()))
            .unwrap();
        let lambda = es.eigenvalues[k];
        worst_im = worst_im.max(lambda.im.abs()).max((lambda.re - p.omega_c).abs());
        let r = &es.right_vectors[k];
        let expected = vacancy_condition(&p).eigenstate;
        let overlap = inner(&expected, r);
        let phase = overlap / overlap.norm() / norm2(r);
        let err = (0..3).map(|i| (r[i] / phase - expected[i]).norm()).fold(0.0, f64::max);
        worst_vec = worst_vec.max(err);
    }
    outcome(
        worst_im < 1e-10 && worst_vec < 1e-8,
        format!("vacancy eigenvalue at omega_c: max deviation {worst_im:.2e}, eigenvector error {worst_vec:.2e}"),
    )
}

fn spectral_density_null() -> Outcome {
    let p = SystemParams { omega_c: 0.7, ..SystemParams::default() };
    let at = spectral_density(&[p.omega_c - 1.0, p.omega_c, p.omega_c + 1.0], &p).unwrap().real_values()[1];
    let grid = default_grid(&p);
    let j = spectral_density(&grid, &p).unwrap().real_values();
    let gamma: Vec<f64> = grid.iter().map(|&w| local_coupling_closed(w, &p)).collect();
    let peak = j.iter().cloned().fold(0.0, f64::max);
    let rel = gamma
        .iter()
        .zip(&j)
        .map(|(g, j)| (g - 2.0 * PI * j).abs() / (2.0 * PI * j).abs().max(1e-300))
        .filter(|r| r.is_finite())
        .fold(0.0, f64::max);
    let zero_ok = gamma.iter().zip(&j).all(|(g, j)| *j > 1e-14 * peak || g.abs() <= 1e-12 * 2.0 * PI * peak);
    outcome(
        at == 0.0 && rel < 1e-12 && zero_ok,
        format!("J(omega_c) = {at:e}, max |Gamma - 2 pi J| / (2 pi J) = {rel:.2e} on {} points", grid.len()),
    )
}

fn fw_closure() -> Outcome {
    let mut worst: f64 = 0.0;
    for &g in &[1.0 / SQRT_2, 1.0, 2.0, 5.0] {
        for fw in fw_solutions(g, 1.0, 0.0).unwrap() {
            let p = SystemParams { g, phi: fw.phi_fw, ..SystemParams::default() };
            let es = eigensystem(&build_mc(&p)).unwrap();
            let d = es.eigenvalues.iter().map(|l| (l - fw.omega_fw).norm()).fold(f64::INFINITY, f64::min);
            worst = worst.max(d);
        }
    }
    let plus = fw_solve(0.5, 1.0, 0.0, Branch::Plus).unwrap();
    let minus = fw_solve(0.5, 1.0, 0.0, Branch::Minus).unwrap();
    let mut phis = [plus.phi_fw, minus.phi_fw];
    phis.sort_by(f64::total_cmp);
    let half = (phis[0] - FRAC_PI_2)
        .abs()
        .max((phis[1] - 3.0 * FRAC_PI_2).abs())
        .max((plus.omega_fw - 0.5).abs())
        .max((minus.omega_fw + 0.5).abs());
    outcome(
        worst < 1e-10 && half < 1e-12,
        format!("max |lambda - omega_FW| = {worst:.2e}; at g = kappa/2 phases/energies off by {half:.2e}"),
    )
}

fn fw_trapping() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for &g in &[0.5, 1.0, 2.0] {
        for branch in [Branch::Plus, Branch::Minus] {
            let fw = fw_solve(g, 1.0, 0.0, branch).unwrap();
            let p = SystemParams { g, phi: fw.phi_fw, ..SystemParams::default() };
            let amp = evolve(&build_mc(&p), &e1(), &[100.0]).unwrap();
            let n = populations(&amp[0]);
            let total: f64 = n.iter().sum();
            pass &= (n[0] - 0.25).abs() <= 1e-3 && (total - 0.5).abs() <= 1e-3;
            if branch == Branch::Plus {
                parts.push(format!("g={g}: qe {:.5}, total {:.5}", n[0], total));
            }
        }
    }
    outcome(pass, format!("t = 100/kappa, {}", parts.join("; ")))
}

fn concurrence_check() -> Outcome {
    let mut worst: f64 = 0.0;
    let times = linspace(0.0, 30.0, 601);
    for &g in &[0.25, 0.5, 1.0, 2.0] {
        let p = SystemParams { g, ..SystemParams::default() };
        for (t, a) in times.iter().zip(evolve_two_qubit(&p, &times).unwrap()) {
            let (eg, ge) = analytic_coefficients(&p, *t).unwrap();
            worst = worst.max((a.c_eg - eg).norm()).max((a.c_ge - ge).norm());
        }
    }
    let late = evolve_two_qubit(&SystemParams::default(), &[200.0]).unwrap()[0];
    let c = concurrence(&late);
    outcome(
        worst < 1e-8 && (c - 144.0 / 289.0).abs() <= 1e-6 && (c - 0.5).abs() <= 0.002,
        format!(
            "max amplitude error {worst:.2e}; steady concurrence at g = kappa {c:.7} (144/289 = {:.7})",
            144.0 / 289.0
        ),
    )
}

fn spectrum_cross_check() -> Outcome {
    let mut worst: f64 = 0.0;
    for &phi in &[0.0, FRAC_PI_2, PI] {
        for &g in &[0.5, 1.0] {
            let p = SystemParams { g, phi, ..SystemParams::default() };
            let grid = default_grid(&p);
            let a = se_spectrum(&grid, &p).unwrap().real_values();
            let b = emission_spectrum(&p, &grid).unwrap().real_values();
            let floor = 1e-12 * a.iter().cloned().fold(0.0, f64::max);
            for (x, y) in a.iter().zip(&b) {
                let scale = x.abs().max(y.abs());
                if scale > floor {
                    worst = worst.max((x - y).abs() / scale);
                }
            }
        }
    }
    outcome(worst < 1e-3, format!("max relative deviation analytic vs regression spectrum {worst:.2e}"))
}

fn master_equation_structure() -> Outcome {
    let mut rng = StdRng::seed_from_u64(7);
    let space = HilbertSpace::new(1, 2).unwrap();
    let mut worst_entry: f64 = 0.0;
    let mut worst_trace: f64 = 0.0;
    for _ in 0..20 {
        let p = SystemParams {
            omega_c: rng.gen_range(-1.0..1.0),
            omega_0: rng.gen_range(-1.0..1.0),
            g: rng.gen_range(0.0..2.0),
            kappa: rng.gen_range(0.1..2.0),
            phi: rng.gen_range(0.0..2.0 * PI),
            gamma: rng.gen_range(0.0..0.5),
        };
        let drive = DriveParams { amplitude: rng.gen_range(0.0..0.5), omega_l: rng.gen_range(-1.0..1.0) };
        let a = build_generator(&p, Some(&drive), &space).unwrap();
        let b = build_collective_generator(&p, Some(&drive), &space).unwrap();
        let diff = a.matrix() - b.matrix();
        let n = diff.nrows();
        for i in 0..n {
            for j in 0..n {
                worst_entry = worst_entry.max(diff[(i, j)].norm());
            }
        }
        let d = space.total_dim();
        let psi: Vec<C64> = (0..d).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let n = norm2(&psi);
        let psi: Vec<C64> = psi.iter().map(|z| z / n).collect();
        let rho0 = DensityMatrix::pure(&psi).unwrap();
        let traj = integrate(&a, &rho0, &linspace(0.0, 10.0, 21)).unwrap();
        worst_trace = worst_trace.max(traj.max_trace_deviation);
    }
    outcome(
        worst_entry <= 1e-12 && worst_trace <= 1e-10,
        format!("max generator entry difference {worst_entry:.2e}; max trace drift {worst_trace:.2e} over 20 draws"),
    )
}

fn blockade_reproduction() -> Outcome {
    let fw = fw_solve(0.5, 1.0, 0.0, Branch::Minus).unwrap();
    let p = SystemParams { g: 0.5, gamma: 0.05, phi: fw.phi_fw, ..SystemParams::default() };
    let amplitude = 1e-2 * p.gamma;
    let grid = linspace(-2.0, 2.0, 81);
    let step = grid[1] - grid[0];
    let opts = |model| BlockadeOptions { n_max: 3, model, check_convergence: false };
    let cep = blockade_scan(&p, amplitude, &grid, &opts(CavityModel::Cep)).unwrap();
    let lor = blockade_scan(&p, amplitude, &grid, &opts(CavityModel::Lorentz)).unwrap();
    let k = (0..grid.len()).min_by(|&a, &b| cep[a].observables.g2.total_cmp(&cep[b].observables.g2)).unwrap();
    let at = grid[k];
    let located = (at + 0.5).abs() <= step || (at - 0.5).abs() <= step;
    let ic_gain = cep[k].observables.i_c / lor[k].observables.i_c;
    let g2_gain = lor[k].observables.g2 / cep[k].observables.g2;
    let mut ic_dev: f64 = 0.0;
    for (w, c) in grid.iter().zip(&cep) {
        let a = analytic_observables(&p, &DriveParams { amplitude, omega_l: *w }).unwrap();
        ic_dev = ic_dev.max((a.i_c - c.observables.i_c).abs() / c.observables.i_c);
    }
    let conv = blockade_observables(
        &p,
        &DriveParams { amplitude, omega_l: at },
        &BlockadeOptions { n_max: 3, model: CavityModel::Cep, check_convergence: true },
    )
    .unwrap()
    .truncation_change
    .unwrap();
    outcome(
        located && ic_gain >= 100.0 && g2_gain >= 100.0 && ic_dev < 1e-2,
        format!(
            "g2 minimum at omega_L = {at:.3} (step {step:.3}); improvement I_c x{ic_gain:.1}, g2(0) x{g2_gain:.1}; \
             perturbative I_c deviation {ic_dev:.2e}; truncation change {conv:.1e}"
        ),
    )
}

/// Decay rate of the narrower of the two leaky modes at the FW phase.
fn surviving_width(g: f64) -> (f64, f64) {
    let fw = fw_solve(g, 1.0, 0.0, Branch::Minus).unwrap();
    let p = SystemParams { g, phi: fw.phi_fw, ..SystemParams::default() };
    let es = eigensystem(&build_mc(&p)).unwrap();
    let width = es
        .eigenvalues
        .iter()
        .filter(|l| (**l - fw.omega_fw).norm() > 1e-8)
        .map(|l| -l.im)
        .fold(f64::INFINITY, f64::min);
    (width, (1.0 + fw.phi_fw.cos()) / 2.0)
}

fn linewidth_narrowing() -> Outcome {
    let gs = linspace(1.0, 10.0, 91);
    let widths: Vec<(f64, f64)> = gs.iter().map(|&g| surviving_width(g)).collect();
    let monotone = widths.windows(2).all(|w| w[1].0 < w[0].0);
    // proportionality: the ratio to the predicted form settles to a constant
    let ratio = |i: usize| widths[i].0 / widths[i].1;
    let (r5, r10) = (ratio(40), ratio(90));
    let proportional = (r10 / r5 - 1.0).abs() <= 0.2;
    outcome(
        monotone && proportional,
        format!(
            "monotone decrease over g/kappa in [1, 10]: {monotone}; -Im(lambda) / [kappa(1 + cos phi_FW)/2] = {r5:.3} at g = 5 kappa, {r10:.3} at g = 10 kappa"
        ),
    )
}

fn full_wave_substitute() -> Outcome {
    let p = SystemParams::default();
    let grid = default_grid(&p);
    let j = spectral_density(&grid, &p).unwrap().real_values();
    let peak = j.iter().cloned().fold(0.0, f64::max);
    let via_chi = grid.iter().zip(&j).map(|(&w, j)| (local_coupling(w, &p) - 2.0 * PI * j).abs()).fold(0.0, f64::max)
        / (2.0 * PI * peak);
    let null = spectral_density(&[-1.0, 0.0, 1.0], &p).unwrap().real_values()[1];
    let positive = j.iter().zip(&grid).all(|(j, w)| *j > 0.0 || *w == p.omega_c);
    outcome(
        null == 0.0 && positive && via_chi < 1e-12,
        format!(
            "full-wave ring curves not reproduced; analytic J(omega) has null {null:e} at resonance, \
             response-function route agrees to {via_chi:.1e} of peak"
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 10] = [
        ("vacancy bound state", vacancy_bound_state),
        ("spectral density null", spectral_density_null),
        ("FW condition closure", fw_closure),
        ("FW population trapping", fw_trapping),
        ("concurrence", concurrence_check),
        ("analytic vs numeric spectrum", spectrum_cross_check),
        ("master equation structure", master_equation_structure),
        ("blockade reproduction", blockade_reproduction),
        ("FW linewidth narrowing", linewidth_narrowing),
        ("spectral density substitute", full_wave_substitute),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!("criterion {:>2} {} {name}: {}", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
