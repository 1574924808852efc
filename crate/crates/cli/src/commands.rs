use std::path::Path;

use wgauss::measure::DiscreteMeasure;
use wgauss::ou::{simulate_path_indexed, Init};
use wgauss::spectral::{heat_kernel_sq_bound, mode_trace_bound, mode_trace_exact};
use wgauss::stats::{Welford, MC_CSV_HEADER};
use wgauss::wasserstein::{w1d, w_exact, w_sinkhorn, DEFAULT_EXACT_CAP};

use crate::config::Settings;
use crate::report::{Report, Row};
use crate::{read_file, write_file, CliError};

/// Modes whose stationary variance is checked after a simulation.
const CHECKED_MODES: usize = 3;

pub fn simulate(s: &Settings, out: &Path) -> Result<Report, CliError> {
    let spectrum = s.spectrum()?;
    let basis = s.basis()?;
    let seed = s.seed()?;
    let grid: Vec<f64> = s.parse_list("simulate.t_grid")?;
    let paths: usize = s.parse("simulate.paths")?;
    if paths < 2 {
        return Err(CliError::Config("simulate.paths must be at least 2".into()));
    }
    let init = match s.str("simulate.init") {
        "stationary" => Init::Stationary,
        "anchor" => Init::Coeffs(vec![0.0; spectrum.len()]),
        other => return Err(CliError::Config(format!("unknown simulate.init `{other}`"))),
    };
    let functions = s.functions("functions")?;

    let last = grid.len().saturating_sub(1);
    let mut stats = vec![vec![Welford::default(); grid.len()]; functions.len()];
    let modes = spectrum.len().min(CHECKED_MODES);
    let mut coeff_mean = vec![Welford::default(); modes];
    let mut coeff_sq = vec![Welford::default(); modes];
    for j in 0..paths {
        let path = simulate_path_indexed(&spectrum, &basis, &grid, &init, seed, j as u64)?;
        if j == 0 {
            write_file(out, "path.csv", &path.to_csv())?;
            write_file(out, "snapshot.csv", &path.pushed(&basis, last)?.to_csv())?;
        }
        for k in 0..grid.len() {
            let mu = path.pushed(&basis, k)?;
            for (f, acc) in functions.iter().zip(stats.iter_mut()) {
                acc[k].push(f.eval(&mu));
            }
        }
        for n in 0..modes {
            let c = path.states()[last][n];
            coeff_mean[n].push(c);
            coeff_sq[n].push(c * c);
        }
    }

    let mut summary = format!("{MC_CSV_HEADER}\n");
    for (f, acc) in functions.iter().zip(&stats) {
        for (t, w) in grid.iter().zip(acc) {
            summary.push_str(&w.estimate(seed).csv_row(&format!("\"{f}[t={t}]\"")));
            summary.push('\n');
        }
    }
    write_file(out, "summary.csv", &summary)?;

    let t_end = grid[last];
    let mut report = Report::default();
    for n in 0..modes {
        let m = coeff_mean[n].estimate(seed);
        report.push(
            Row::new(format!("mean[c{},t={t_end}]", n + 1), m.value, 0.0, m.within(0.0, 4.0), seed)
                .std_error(m.std_error)
                .tolerance(4.0 * m.std_error),
        );
        if init == Init::Stationary {
            let v = coeff_sq[n].estimate(seed);
            let target = 1.0 / spectrum.alphas()[n];
            report.push(
                Row::new(format!("var[c{},t={t_end}]", n + 1), v.value, target, v.within(target, 4.0), seed)
                    .std_error(v.std_error)
                    .tolerance(4.0 * v.std_error),
            );
        }
    }
    write_file(out, "report.csv", &report.to_csv())?;
    Ok(report)
}

pub fn heat_bound(s: &Settings, out: &Path) -> Result<Report, CliError> {
    let spectrum = s.spectrum()?;
    let t = s.positive("heat.t")?;
    let seed = s.seed()?;
    let mut report = Report::default();
    for (n, &a) in spectrum.alphas().iter().enumerate() {
        let (exact, bound) = (mode_trace_exact(a, t)?, mode_trace_bound(a, t)?);
        report.push(Row::new(format!("mode_trace[{}]", n + 1), exact, bound, exact <= bound, seed));
    }
    let h = heat_kernel_sq_bound(&spectrum, t)?;
    report.push(Row::new("log_trace_product", h.log_exact, h.log_bound(), h.log_exact <= h.log_bound(), seed));
    write_file(out, "heat_bound.csv", &report.to_csv())?;
    Ok(report)
}

fn load_measure(path: &Path) -> Result<DiscreteMeasure, CliError> {
    DiscreteMeasure::from_csv(&read_file(path)?).map_err(|e| CliError::Io(format!("{}: malformed measure CSV: {e}", path.display())))
}

pub fn wasserstein(s: &Settings, out: &Path, mu: &Path, nu: &Path) -> Result<String, CliError> {
    let (a, b) = (load_measure(mu)?, load_measure(nu)?);
    let p = s.parse::<f64>("solver.p")?;
    let method = match s.str("solver.method") {
        "auto" if a.dim() == 1 => "line",
        "auto" if a.len() <= DEFAULT_EXACT_CAP && b.len() <= DEFAULT_EXACT_CAP => "exact",
        "auto" => "sinkhorn",
        m @ ("exact" | "line" | "sinkhorn") => m,
        other => return Err(CliError::Config(format!("unknown solver.method `{other}`"))),
    };
    let (distance, converged) = match method {
        "exact" => (w_exact(&a, &b, p)?.0, true),
        "line" => (w1d(&a, &b, p)?.0, true),
        _ => {
            let eps = s.positive("solver.epsilon")? * a.diameter_with(&b).powf(p);
            let r = w_sinkhorn(&a, &b, p, eps.max(f64::MIN_POSITIVE), s.parse("solver.max_iter")?)?;
            (r.distance, r.converged)
        }
    };
    let csv = format!("distance,p,solver,atoms_mu,atoms_nu\n{distance:e},{p},{method},{},{}\n", a.len(), b.len());
    write_file(out, "wasserstein.csv", &csv)?;
    if !converged {
        return Err(CliError::NoConvergence(format!("sinkhorn stopped at {distance:e} within solver.max_iter")));
    }
    Ok(format!("W_{p} = {distance:e} ({method}, {} vs {} atoms)", a.len(), b.len()))
}
