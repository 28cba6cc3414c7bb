//! Acceptance suite. Prints one line per criterion and exits nonzero if any fails.
//!
//! `MBL_ACCEPTANCE=1,5,7` restricts the run to the listed criteria.

use faer::Mat;
use mbl_otto::analytics::{gap_densities, power_estimate, predicted_cycle, PowerInput, PredictionInput};
use mbl_otto::basis::{build_hamiltonian, sector_traces, HamiltonianParams, SectorBasis};
use mbl_otto::cli::{execute, CompareJob, Job, OutputFile};
use mbl_otto::competitors::{compare_worst_case, sample_ensemble_trials};
use mbl_otto::cycle::partial_swap;
use mbl_otto::ensemble::{
    fit_diabatic, level_statistics, realization, run_ensemble, with_threads, EngineVariant, LevelStatsConfig,
    RunConfig, Sweep, SweepParam,
};
use std::process::ExitCode;
use std::time::Instant;

type Outcome = Result<(bool, String), String>;

const SEED: u64 = 7;
const WB_FRACTIONS: [f64; 4] = [1.0 / 64.0, 1.0 / 32.0, 1.0 / 16.0, 1.0 / 8.0];
const SPEEDS: [f64; 7] = [1e-2, 3e-2, 1e-1, 3e-1, 1.0, 3.0, 10.0];

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn trace(m: &Mat<f64>) -> f64 {
    (0..m.nrows()).map(|i| m[(i, i)]).sum()
}

fn half_line(f: impl Fn(f64) -> f64) -> f64 {
    quadrature::integrate(
        |t| {
            if t >= 1.0 {
                return 0.0;
            }
            let x = t / (1.0 - t);
            f(x) / ((1.0 - t) * (1.0 - t))
        },
        0.0,
        1.0,
        1e-12,
    )
    .integral
}

fn bandwidth_config() -> RunConfig {
    let mut c = RunConfig::new(10, 500, SEED);
    c.sweep = Some(Sweep { param: SweepParam::Wb, grid: WB_FRACTIONS.to_vec() });
    c
}

fn compare_job() -> CompareJob {
    CompareJob {
        sites: 10,
        h_eth: 2.0,
        h_mbl: 20.0,
        wb_fractions: vec![1.0 / 8.0],
        beta_c: f64::INFINITY,
        beta_h: 0.0,
        realizations: 100,
        trials_per_realization: 1000,
        master_seed: SEED,
        samples: true,
    }
}

fn exact_identities() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for sites in [4, 6, 8] {
        let basis = SectorBasis::new(sites).map_err(err)?;
        let t = sector_traces(sites).map_err(err)?;
        let s = |state: u32, j: usize| SectorBasis::spin(state, j);
        for j in 0..sites - 1 {
            let zz: f64 = basis.states().iter().map(|&x| s(x, j) * s(x, j + 1)).sum();
            let ud = basis.states().iter().filter(|&&x| s(x, j) > 0.0 && s(x, j + 1) < 0.0).count() as f64;
            ok &= zz == t.zz && ud == t.up_down;
        }
        let four: f64 = basis.states().iter().map(|&x| (0..4).map(|k| s(x, k)).product::<f64>()).sum();
        ok &= Some(four) == t.four_point;
    }
    notes.push(format!("traces {}", if ok { "exact" } else { "mismatch" }));

    let mut worst_trace = 0f64;
    for sites in [8, 10] {
        let basis = SectorBasis::new(sites).map_err(err)?;
        let n = basis.dim() as f64;
        for k in 0..50 {
            let dr = realization(SEED, k, sites, 2.0, 20.0);
            for alpha in [0.0, 0.5, 1.0] {
                let h = build_hamiltonian(&basis, &dr, &HamiltonianParams { energy_unit: 1.0, alpha, rescale: false })
                    .map_err(err)?;
                worst_trace = worst_trace.max((trace(&h) + n).abs() / n);
            }
        }
    }
    ok &= worst_trace < 1e-12;
    notes.push(format!("max |Tr H + N|/N = {worst_trace:.1e}"));

    let mut c = RunConfig::new(10, 200, SEED);
    c.sweep = Some(Sweep { param: SweepParam::BetaC, grid: vec![10.0, 100.0, 1000.0, f64::INFINITY] });
    c.cycle.beta_h = 0.5;
    let mut worst_law = 0f64;
    let mut cycles = 0;
    for run in [run_ensemble(&c).map_err(err)?, run_ensemble(&bandwidth_config()).map_err(err)?] {
        for r in run.records.iter().flatten() {
            worst_law = worst_law.max(((r.w1 + r.w3) - (r.q2 + r.q4)).abs());
            cycles += 1;
        }
    }
    ok &= worst_law < 1e-9;
    notes.push(format!("first law over {cycles} cycles, max residual {worst_law:.1e}"));
    Ok((ok, notes.join("; ")))
}

fn spectral_variance() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for h in [2.0, 20.0] {
        let s = level_statistics(&LevelStatsConfig { sites: 10, h, realizations: 200, master_seed: SEED, window: 0.5, bins: 40 })
            .map_err(err)?;
        ok &= (s.spectral_variance - 1.0).abs() < 0.05;
        notes.push(format!("h={h}: variance {:.4}", s.spectral_variance));
    }
    Ok((ok, notes.join("; ")))
}

fn bandwidth_linearity() -> Outcome {
    let run = run_ensemble(&bandwidth_config()).map_err(err)?;
    let g = run.summary.metadata.mean_gap;
    let x: Vec<f64> = run.summary.points.iter().map(|p| p.wb).collect();
    let y: Vec<f64> = run.summary.points.iter().map(|p| p.w_tot.mean).collect();
    let fit = mbl_otto::stats::linear_fit(&x, &y).map_err(err)?;
    let excluded = run.summary.metadata.excluded.len();
    let ok = (0.7..=1.6).contains(&fit.slope) && fit.intercept.abs() < 0.1 * g && excluded == 0;
    Ok((ok, format!("slope {:.4}, intercept {:.3e} = {:.4} <delta>, excluded {excluded}", fit.slope, fit.intercept, fit.intercept / g)))
}

fn bandwidth_efficiency() -> Outcome {
    let run = run_ensemble(&bandwidth_config()).map_err(err)?;
    let g = run.summary.metadata.mean_gap;
    let mut ok = true;
    let mut notes = Vec::new();
    for p in &run.summary.points {
        let target = 1.0 - p.wb / (2.0 * g);
        match &p.eta {
            Some(eta) => {
                ok &= (eta.mean - target).abs() <= 0.05;
                notes.push(format!("{:.4}: eta {:.4} vs {:.4}", p.wb / g, eta.mean, target));
            }
            None => {
                ok = false;
                notes.push(format!("{:.4}: eta undefined", p.wb / g));
            }
        }
    }
    Ok((ok, notes.join("; ")))
}

fn level_statistics_phases() -> Outcome {
    let ks = |h: f64| {
        level_statistics(&LevelStatsConfig { sites: 8, h, realizations: 10_000, master_seed: SEED, window: 0.5, bins: 40 })
            .map_err(err)?
            .ks
            .ok_or_else(|| "no KS distances".to_string())
    };
    let (mbl, eth) = (ks(20.0)?, ks(2.0)?);
    let ok = mbl.ks_poisson < mbl.ks_wigner && eth.ks_wigner < eth.ks_poisson;
    Ok((
        ok,
        format!(
            "h=20: KS(P) {:.4} KS(W) {:.4}; h=2: KS(P) {:.4} KS(W) {:.4}",
            mbl.ks_poisson, mbl.ks_wigner, eth.ks_poisson, eth.ks_wigner
        ),
    ))
}

fn diabatic_trends() -> Outcome {
    let mut c = RunConfig::new(8, 300, SEED);
    c.sweep = Some(Sweep { param: SweepParam::Speed, grid: SPEEDS.to_vec() });
    let run = run_ensemble(&c).map_err(err)?;
    let m = &run.summary.metadata;
    let pts = &run.summary.points;
    let mut ok = m.excluded.is_empty();
    let mut notes = vec![format!("<delta> {:.5}", m.mean_gap)];
    for p in pts {
        notes.push(format!("v={}: {:.4e}±{:.1e}", p.speed, p.w_tot.mean, p.w_tot.stderr.unwrap_or(f64::NAN)));
    }
    for pair in pts.windows(2) {
        let (a, b) = (&pair[0].w_tot, &pair[1].w_tot);
        let se = (a.stderr.unwrap_or(0.0).powi(2) + b.stderr.unwrap_or(0.0).powi(2)).sqrt();
        if b.mean > a.mean + 2.0 * se {
            ok = false;
            notes.push(format!("rise at v={}", pair[1].speed));
        }
    }
    let dm = m.delta_minus.ok_or_else(|| "delta_minus unavailable".to_string())?;
    let speeds: Vec<f64> = pts.iter().map(|p| p.speed).collect();
    let w: Vec<f64> = pts.iter().map(|p| p.w_tot.mean).collect();
    let fit = fit_diabatic(&speeds, &w, dm, pts[0].wb).map_err(err)?;
    ok &= (0.2..=0.5).contains(&fit.exponent);
    notes.push(format!("delta_- {dm:.3e}, fitted p {:.3}, W1 {:.3e}", fit.exponent, fit.w1));
    Ok((ok, notes.join("; ")))
}

fn analytics_oracles() -> Outcome {
    let mut ok = true;
    let mut worst_density = 0f64;
    for g in [0.01, 0.1, 1.0, 4.0] {
        let m = |d: f64| gap_densities(d, g).map(|x| x.p_mbl).unwrap_or(f64::NAN);
        let w = |d: f64| gap_densities(d, g).map(|x| x.p_goe).unwrap_or(f64::NAN);
        for dev in [
            half_line(m) - 1.0,
            half_line(w) - 1.0,
            (half_line(|d| d * m(d)) - g) / g,
            (half_line(|d| d * w(d)) - g) / g,
        ] {
            worst_density = worst_density.max(dev.abs());
        }
    }
    ok &= worst_density < 1e-6;

    let input = |wb: f64, beta_c: f64, g: f64| PredictionInput { wb, beta_c, beta_h: 0.0, mean_gap: g, sites: 12, eps: 1.0 };
    let example = predicted_cycle(&input(0.01, 1000.0, 0.1)).map_err(err)?.w_tot;
    ok &= (example - 0.008_891_0).abs() < 1e-7;

    let gibbs = [0.5, 0.3, 0.15, 0.05];
    let mut worst_swap = 0f64;
    for p in [0.0, 0.1, 0.5, 1.0] {
        let m = partial_swap(p, &gibbs).map_err(err)?;
        for i in 0..4 {
            let image: f64 = (0..4).map(|j| m[(i, j)] * gibbs[j]).sum();
            worst_swap = worst_swap.max((image - gibbs[i]).abs());
            for j in 0..4 {
                if i != j {
                    worst_swap = worst_swap.max((m[(i, j)] * gibbs[j] - m[(j, i)] * gibbs[i]).abs());
                }
            }
        }
    }
    ok &= worst_swap < 1e-12;

    let mut worst_eta = 0f64;
    for (wb, g) in [(0.01, 0.1), (0.003, 0.05), (1e-4, 2.0), (0.02, 0.3)] {
        let eta = predicted_cycle(&input(wb, f64::INFINITY, g)).map_err(err)?.eta;
        worst_eta = worst_eta.max((eta - (1.0 - wb / (2.0 * g))).abs());
    }
    ok &= worst_eta <= 2.0 * f64::EPSILON;
    Ok((
        ok,
        format!(
            "densities {worst_density:.1e}; example {example:.7}; swap {worst_swap:.1e}; eta limit {worst_eta:.1e}"
        ),
    ))
}

fn trial_sampler() -> Outcome {
    let c = RunConfig::new(10, 100, SEED);
    let per = 1000;
    let (trials, _) = sample_ensemble_trials(&c, per).map_err(err)?;
    let exact = run_ensemble(&c).map_err(err)?.summary.points[0].w_tot.mean;
    let n = trials.len() as f64;
    let mean = trials.iter().sum::<f64>() / n;
    // Realizations are shared, so only the within-realization spread is sampling noise.
    let within: f64 = trials
        .chunks(per)
        .map(|w| {
            let m = w.iter().sum::<f64>() / per as f64;
            w.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (per as f64 - 1.0) * per as f64
        })
        .sum();
    let stderr = within.sqrt() / n;
    let z = (mean - exact) / stderr;
    Ok((z.abs() < 3.0, format!("{} trials: mean {mean:.5e}, density matrix {exact:.5e}, z = {z:.2}", trials.len())))
}

fn worst_case_ordering() -> Outcome {
    let job = compare_job();
    let mut run = RunConfig::new(job.sites, job.realizations, job.master_seed);
    run.cycle.wb = job.wb_fractions[0];
    let (standard, g) = sample_ensemble_trials(&run, job.trials_per_realization).map_err(err)?;
    run.variant = EngineVariant::EqualDisorder;
    run.cycle.wb = job.wb_fractions[0] * g;
    run.cycle.wb_absolute = true;
    let (tilde, _) = sample_ensemble_trials(&run, job.trials_per_realization).map_err(err)?;
    let r = compare_worst_case(&standard, &tilde, job.master_seed).map_err(err)?;
    let ok = r.ordered && r.intervals_disjoint && r.variance_confidence >= 0.95;
    Ok((
        ok,
        format!(
            "p_worst {:.4} {:?} vs {:.4} {:?}; var {:.3e} vs {:.3e} at confidence {:.3}",
            r.standard.p_worst,
            r.standard.p_worst_interval,
            r.tilde.p_worst,
            r.tilde.p_worst_interval,
            r.standard.variance,
            r.tilde.variance,
            r.variance_confidence
        ),
    ))
}

fn power_scale() -> Outcome {
    let p = power_estimate(&PowerInput::preset("si-p").map_err(err)?).map_err(err)?;
    let ok = (1e-3..=0.1).contains(&p.mean_gap_ev)
        && (1e-17..=1e-15).contains(&p.power_w)
        && (1e4..=1e6).contains(&p.power_density_w_per_m3);
    Ok((
        ok,
        format!("<delta> {:.2} meV, P {:.2e} W, P/V {:.2e} W/m^3", p.mean_gap_ev * 1e3, p.power_w, p.power_density_w_per_m3),
    ))
}

fn reproducibility() -> Outcome {
    let mut diabatic = RunConfig::new(6, 12, SEED);
    diabatic.sweep = Some(Sweep { param: SweepParam::Speed, grid: vec![0.1, 1.0] });
    let spacings = LevelStatsConfig { sites: 8, h: 20.0, realizations: 1000, master_seed: SEED, window: 0.5, bins: 40 };
    let jobs = [
        ("sweep", Job::Sweep { run: bandwidth_config(), records: true }),
        ("diabatic", Job::Sweep { run: diabatic, records: true }),
        ("spacings", Job::Spacings(spacings.clone())),
        ("delta-minus", Job::DeltaMinus(LevelStatsConfig { realizations: 2000, ..spacings })),
        ("compare", Job::Compare(compare_job())),
    ];
    let mut ok = true;
    let mut notes = Vec::new();
    for (name, job) in &jobs {
        let run = |t: usize| -> Result<Vec<OutputFile>, String> { with_threads(Some(t), || execute(job)).map_err(err)?.map_err(err) };
        let (a, b, c) = (run(1)?, run(4)?, run(1)?);
        let same = a == b && a == c;
        ok &= same;
        let bytes: usize = a.iter().map(|f| f.bytes.len()).sum();
        notes.push(format!("{name} ({} files, {bytes} bytes) {}", a.len(), if same { "identical" } else { "DIFFER" }));
    }
    Ok((ok, notes.join("; ")))
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, fn() -> Outcome); 11] = [
        (1, "exact identities", exact_identities),
        (2, "spectral variance", spectral_variance),
        (3, "work linear in bandwidth", bandwidth_linearity),
        (4, "efficiency vs bandwidth", bandwidth_efficiency),
        (5, "level statistics", level_statistics_phases),
        (6, "diabatic trends", diabatic_trends),
        (7, "analytics oracles", analytics_oracles),
        (8, "trial sampler", trial_sampler),
        (9, "worst-case ordering", worst_case_ordering),
        (10, "power estimate", power_scale),
        (11, "reproducibility", reproducibility),
    ];
    let only: Option<Vec<u32>> =
        std::env::var("MBL_ACCEPTANCE").ok().map(|s| s.split(',').filter_map(|t| t.trim().parse().ok()).collect());
    let mut failed = 0;
    for (id, name, check) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let start = Instant::now();
        let (pass, detail) = match check() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!pass);
        println!(
            "criterion {id} ({name}): {} [{:.1} s] {detail}",
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    }
}
