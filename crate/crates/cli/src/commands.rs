use cepdbs::blockade_analytic::analytic_observables;
use cepdbs::entanglement::{concurrence, evolve_two_qubit};
use cepdbs::lindblad::{blockade_scan, BlockadeOptions, CavityModel};
use cepdbs::model::DriveParams;
use cepdbs::single_excitation::{build_mc, evolve, fw_solutions, populations, vacancy_condition};
use cepdbs::spectra::se_spectrum;
use cepdbs::C64;
use rayon::prelude::*;
use serde_json::json;

use crate::config::{resolve_params, Failure, RunConfig};

/// CSV text with the resolved config as a leading `# {json}` line.
fn table(config: &RunConfig, header: &[&str], rows: &[Vec<f64>]) -> Result<String, Failure> {
    let mut out = String::from("# ");
    out.push_str(&serde_json::to_string(config).map_err(|e| Failure::Io(e.to_string()))?);
    out.push('\n');
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Failure::Io(e.to_string());
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(row.iter().map(|x| x.to_string())).map_err(io)?;
    }
    let body = w.into_inner().map_err(|e| Failure::Io(e.to_string()))?;
    out.push_str(&String::from_utf8(body).map_err(|e| Failure::Io(e.to_string()))?);
    Ok(out)
}

fn times(t_max: f64, count: usize) -> Vec<f64> {
    cepdbs::spectra::linspace(0.0, t_max, count)
}

/// `S(ω)` per sweep value. Columns `detuning, omega, S`, preceded by the
/// swept field when it is not itself a detuning.
pub fn spectrum(config: &RunConfig) -> Result<String, Failure> {
    let grid = config.spectrum.omega.points();
    let sweep = config.spectrum.sweep.as_ref();
    let values = sweep.map(|s| s.values()).unwrap_or_else(|| vec![f64::NAN]);
    let blocks = values
        .par_iter()
        .map(|&v| {
            let mut p = config.params;
            if let Some(s) = sweep {
                p.set_field(&s.name, v);
            }
            let p = resolve_params(p, config.phi_preset)?;
            let s = se_spectrum(&grid, &p).map_err(Failure::numeric)?.real_values();
            Ok((v, p.omega_0 - p.omega_c, s))
        })
        .collect::<Result<Vec<_>, Failure>>()?;
    let extra = sweep.map(|s| s.name.as_str()).filter(|n| !matches!(*n, "omega_0" | "omega_c"));
    let mut header = Vec::new();
    header.extend(extra);
    header.extend(["detuning", "omega", "S"]);
    let mut rows = Vec::new();
    for (v, detuning, s) in blocks {
        for (w, y) in grid.iter().zip(s) {
            let mut row = Vec::with_capacity(4);
            if extra.is_some() {
                row.push(v);
            }
            row.extend([detuning, *w, y]);
            rows.push(row);
        }
    }
    table(config, &header, &rows)
}

/// Traveling-basis populations after exciting the emitter.
pub fn dynamics(config: &RunConfig) -> Result<String, Failure> {
    let t = times(config.dynamics.t_max, config.dynamics.count);
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let traj = evolve(&build_mc(&config.params), &[one, zero, zero], &t).map_err(Failure::numeric)?;
    let rows: Vec<Vec<f64>> = t
        .iter()
        .zip(&traj)
        .map(|(t, p)| {
            let n = populations(p);
            vec![*t, n[0], n[1], n[2], n.iter().sum()]
        })
        .collect();
    table(config, &["t", "qe", "ccw", "cw", "total"], &rows)
}

/// Vacancy state and both FW solutions (or `"none"`) as JSON.
pub fn dbs_find(config: &RunConfig) -> Result<String, Failure> {
    let p = &config.params;
    let fw = fw_solutions(p.g, p.kappa, p.omega_c).map_err(Failure::numeric)?;
    let fw = if fw.is_empty() { json!("none") } else { json!(fw) };
    let doc = json!({ "config": config, "vacancy": vacancy_condition(p), "fw": fw });
    let mut s = serde_json::to_string_pretty(&doc).map_err(|e| Failure::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Two-emitter concurrence after exciting the first emitter.
pub fn entangle(config: &RunConfig) -> Result<String, Failure> {
    let t = times(config.entangle.t_max, config.entangle.count);
    let traj = evolve_two_qubit(&config.params, &t).map_err(Failure::numeric)?;
    let rows: Vec<Vec<f64>> = t
        .iter()
        .zip(&traj)
        .map(|(t, a)| {
            vec![*t, concurrence(a), a.c_eg.norm_sqr(), a.c_ge.norm_sqr(), a.c_10.norm_sqr() + a.c_01.norm_sqr()]
        })
        .collect();
    table(config, &["t", "concurrence", "pop_eg", "pop_ge", "cavity"], &rows)
}

/// CW-mode flux and `g²(0)` versus laser frequency.
pub fn blockade(config: &RunConfig) -> Result<String, Failure> {
    let b = &config.blockade;
    let amplitude =
        config.drive.map(|d| d.amplitude).ok_or_else(|| Failure::Config("blockade needs drive.Omega".into()))?;
    let grid = b.omega_l.points();
    let opts = |model| BlockadeOptions { n_max: b.n_max, model, check_convergence: b.check_convergence };
    let cep = blockade_scan(&config.params, amplitude, &grid, &opts(CavityModel::Cep)).map_err(Failure::numeric)?;
    let lorentz = if b.lorentz_baseline {
        Some(blockade_scan(&config.params, amplitude, &grid, &opts(CavityModel::Lorentz)).map_err(Failure::numeric)?)
    } else {
        None
    };
    let analytic = if b.analytic {
        let a = grid
            .iter()
            .map(|&omega_l| analytic_observables(&config.params, &DriveParams { amplitude, omega_l }))
            .collect::<Result<Vec<_>, _>>()
            .map_err(Failure::numeric)?;
        Some(a)
    } else {
        None
    };

    let mut header = vec!["omega_L", "I_c", "g2"];
    if lorentz.is_some() {
        header.extend(["I_c_lorentz", "g2_lorentz"]);
    }
    if analytic.is_some() {
        header.extend(["I_c_analytic", "g2_analytic"]);
    }
    if b.check_convergence {
        header.push("truncation_change");
    }
    let rows: Vec<Vec<f64>> = (0..grid.len())
        .map(|i| {
            let o = &cep[i].observables;
            let mut row = vec![grid[i], o.i_c, o.g2];
            if let Some(l) = &lorentz {
                row.extend([l[i].observables.i_c, l[i].observables.g2]);
            }
            if let Some(a) = &analytic {
                row.extend([a[i].i_c, a[i].g2_normal_ordered]);
            }
            if let Some(c) = o.truncation_change {
                row.push(c);
            }
            row
        })
        .collect();
    table(config, &header, &rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(csv: &str) -> Vec<Vec<f64>> {
        csv.lines().skip(2).map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect()
    }

    #[test]
    fn header_line_carries_config() {
        let c = RunConfig::default();
        let out = dynamics(&c).unwrap();
        let first = out.lines().next().unwrap();
        let back: RunConfig = serde_json::from_str(first.strip_prefix("# ").unwrap()).unwrap();
        assert_eq!(back, c);
        assert_eq!(out.lines().nth(1).unwrap(), "t,qe,ccw,cw,total");
    }

    #[test]
    fn uncoupled_emitter_stays_excited() {
        let mut c = RunConfig::default();
        c.params.g = 0.0;
        for r in rows(&dynamics(&c).unwrap()) {
            assert!((r[1] - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn entanglement_starts_at_zero() {
        let r = rows(&entangle(&RunConfig::default()).unwrap());
        assert_eq!(r[0][1], 0.0);
        assert!((r.last().unwrap()[1] - 144.0 / 289.0).abs() < 1e-6);
    }

    #[test]
    fn sweep_over_coupling_adds_column() {
        let mut c = RunConfig::from_json(
            r#"{"spectrum": {"omega": {"start": -1, "stop": 1, "count": 5}, "sweep": {"name": "g", "start": 0.5, "stop": 1, "count": 2}}}"#,
        )
        .unwrap();
        c = c.resolve().unwrap();
        let out = spectrum(&c).unwrap();
        assert_eq!(out.lines().nth(1).unwrap(), "g,detuning,omega,S");
        assert_eq!(rows(&out).len(), 10);
    }

    #[test]
    fn blockade_without_drive_is_config_error() {
        assert!(matches!(blockade(&RunConfig::default()), Err(Failure::Config(_))));
    }
}
