use std::io::Write;
use std::path::PathBuf;

use anyhow::{Context, Result};
use fourier_pricing::bench::{
    self, alpha_verdict, blowup_matrix, convergence_curves, only_attari_feasible,
    reference_quotes, search_min_domain, search_min_n, time_batches, BlowupConfig,
    ConvergenceReport, OptionQuote, TimingConfig,
};
use fourier_pricing::models::{check_avg_measure, ModelFile, ModelParams};
use fourier_pricing::pricers::{self, EngineConfig, PricingRequest};
use fourier_pricing::reference::{dual_method_references, Partner, ReferenceCache};
use fourier_pricing::report::{self, CurveRow, PlotRow, TimingRow};
use fourier_pricing::transforms::FourierGrid;
use fourier_pricing::PricingError;
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{BenchArgs, ConvergeArgs, DiagnoseArgs, PriceArgs, Selection, UsageError};

pub enum Status {
    Done,
    /// Artifacts were written but some search or oracle did not converge.
    Unconverged,
}

fn unconverged(e: &PricingError) -> bool {
    matches!(
        e,
        PricingError::NoConvergence { .. } | PricingError::AgreementFailure { .. }
    )
}

fn emit<T: Serialize>(out: &Option<PathBuf>, rows: &[T]) -> Result<()> {
    match out {
        Some(path) => report::write_csv_file(path, rows)
            .with_context(|| format!("writing {}", path.display()))?,
        None => report::write_csv(std::io::stdout().lock(), rows)?,
    }
    Ok(())
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    if jobs == 0 {
        return Err(UsageError("--jobs must be at least 1".into()).into());
    }
    Ok(rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?)
}

fn quotes_for(sel: &Selection, file: &ModelFile) -> Result<Vec<OptionQuote>> {
    let mut cache = ReferenceCache::from_env()?;
    let strikes = sel.strikes(file.market.s0);
    Ok(reference_quotes(
        &file.model,
        &file.market,
        &strikes,
        &sel.tenors,
        cache.as_mut(),
    )?)
}

pub fn price(a: &PriceArgs) -> Result<Status> {
    let file = a.sel.load()?;
    let strikes = a.sel.strikes(file.market.s0);
    let mut rows = Vec::new();
    for method in a.sel.methods()? {
        let cfg = a.grid.engine(method, file.model.kind());
        for &t in &a.sel.tenors {
            let req = PricingRequest::new(t, strikes.clone())?;
            let pv = pricers::price(&file.model, &file.market, &req, &cfg)?;
            rows.extend(report::price_rows(&pv));
        }
    }
    emit(&a.out, &rows)?;
    Ok(Status::Done)
}

struct ConvergeOutcome {
    cfg: EngineConfig,
    report: ConvergenceReport,
    min_n: Option<std::result::Result<usize, PricingError>>,
    min_domain: Option<std::result::Result<f64, PricingError>>,
}

pub fn converge(a: &ConvergeArgs) -> Result<Status> {
    if a.dmin > a.dmax || a.dmax > 24 {
        return Err(UsageError(format!("need dmin <= dmax <= 24, got {}..{}", a.dmin, a.dmax)).into());
    }
    let file = a.sel.load()?;
    let (model, market) = (&file.model, &file.market);
    let methods = a.sel.methods()?;
    let quotes = quotes_for(&a.sel, &file)?;

    let outcomes: Vec<Result<ConvergeOutcome, PricingError>> = pool(a.jobs)?.install(|| {
        methods
            .par_iter()
            .map(|&m| {
                let cfg = a.grid.engine(m, model.kind());
                let report = convergence_curves(model, market, &quotes, &cfg, a.dmin..=a.dmax, a.tol)?;
                let min_n = a
                    .min_n
                    .then(|| search_min_n(model, market, &quotes, &cfg, a.tol));
                let min_domain = a
                    .min_domain
                    .then(|| search_min_domain(model, market, &quotes, &cfg, a.tol, a.nsat));
                Ok(ConvergeOutcome {
                    cfg,
                    report,
                    min_n,
                    min_domain,
                })
            })
            .collect()
    });

    let mut status = Status::Done;
    let mut curves: Vec<CurveRow> = Vec::new();
    for outcome in outcomes {
        let o = outcome?;
        let mut line = format!(
            "method={} domain={} min_n_at_tol={}",
            o.cfg.method,
            o.cfg.domain,
            o.report
                .min_n_at_tol
                .map_or_else(|| "none".to_string(), |n| n.to_string())
        );
        for (label, value) in [
            ("min_n", o.min_n.map(|r| r.map(|n| n.to_string()))),
            ("min_domain", o.min_domain.map(|r| r.map(|d| d.to_string()))),
        ] {
            match value {
                Some(Ok(v)) => line.push_str(&format!(" {label}={v}")),
                Some(Err(e)) if unconverged(&e) => {
                    line.push_str(&format!(" {label}=unconverged"));
                    eprintln!("{}: {e}", o.cfg.method);
                    status = Status::Unconverged;
                }
                Some(Err(e)) => return Err(e.into()),
                None => {}
            }
        }
        println!("{line}");
        curves.extend(o.report.rows);
    }
    if let Some(path) = &a.out {
        report::write_csv_file(path, &curves)?;
    }
    if let Some(path) = &a.plot {
        let plot: Vec<PlotRow> = curves.iter().map(PlotRow::from).collect();
        report::write_csv_file(path, &plot)?;
    }
    Ok(status)
}

pub fn bench(a: &BenchArgs) -> Result<Status> {
    let file = a.sel.load()?;
    let (model, market) = (&file.model, &file.market);
    let methods = a.sel.methods()?;
    let quotes = quotes_for(&a.sel, &file)?;
    let t_timed = *a
        .sel
        .tenors
        .first()
        .ok_or_else(|| UsageError("at least one tenor is needed".into()))?;

    // searches may run side by side, timings may not
    let configs: Vec<Result<EngineConfig, PricingError>> = pool(a.jobs)?.install(|| {
        methods
            .par_iter()
            .map(|&m| {
                let mut cfg = a.grid.engine(m, model.kind());
                if a.search_domain {
                    cfg.domain = search_min_domain(model, market, &quotes, &cfg, a.domain_tol, a.nsat)?;
                }
                let n = match a.grid.n {
                    Some(n) => n,
                    None => search_min_n(model, market, &quotes, &cfg, a.tol)?,
                };
                Ok(cfg.with_n(n))
            })
            .collect()
    });

    let timing = TimingConfig {
        runs: a.runs,
        warmup: a.warmup,
        seed: a.seed,
    };
    let mut status = Status::Done;
    let mut rows: Vec<TimingRow> = Vec::new();
    let mut table = std::io::stdout().lock();
    writeln!(table, "method    domain      n  {}", header(&a.sizes))?;
    for (method, cfg) in methods.iter().zip(configs) {
        let cfg = match cfg {
            Ok(cfg) => cfg,
            Err(e) if unconverged(&e) => {
                eprintln!("{method}: {e}");
                status = Status::Unconverged;
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let r = time_batches(model, market, t_timed, &cfg, a.tol, &a.sizes, &timing)?;
        let cells: Vec<String> = r.rows.iter().map(|row| format!("{:>10.4}", row.mean_ms)).collect();
        writeln!(
            table,
            "{:<8} {:>7} {:>6}  {}",
            method.tag(),
            cfg.domain,
            cfg.n,
            cells.join(" ")
        )?;
        rows.extend(r.rows);
    }
    if let Some(path) = &a.out {
        report::write_csv_file(path, &rows)?;
    }
    Ok(status)
}

fn header(sizes: &[usize]) -> String {
    sizes
        .iter()
        .map(|s| format!("{s:>10}"))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn diagnose(a: &DiagnoseArgs) -> Result<Status> {
    let file = ModelFile::load(&a.model)?;
    let (model, market) = (&file.model, &file.market);
    let measure_ok = match model {
        ModelParams::Avg(p) => {
            let m = check_avg_measure(p)?;
            println!("measure_ok={} alpha_max={}", m.measure_ok, m.alpha_max);
            m.measure_ok
        }
        other => {
            println!("measure_ok=true model={}", other.kind());
            true
        }
    };

    let cfg = BlowupConfig {
        n: a.n,
        domain: a.domain,
        l_scale: a.l_scale,
        alpha: a.alpha,
    };
    let rows = blowup_matrix(model, market, &a.strikes, &a.tenors, &cfg)?;
    println!("blow-up matrix, n={} domain={} L={}", a.n, a.domain, a.l_scale);
    for r in &rows {
        println!(
            "  {:<8} t={:<4} k={:<6} {:>14.6e}  {}",
            r.method.tag(),
            r.t,
            r.k,
            r.value,
            r.feasibility
        );
    }
    println!("only_at_opt_feasible={}", only_attari_feasible(&rows));
    if let Some(path) = &a.out {
        report::write_csv_file(path, &rows)?;
    }

    // AT-OPT against DPD-OPT on the same grid
    let mut quotes = Vec::new();
    let mut agreed = true;
    for &t in &a.tenors {
        let refs = dual_method_references(model, market, &a.strikes, t, a.domain, a.n, Partner::DpdOpt)?;
        for (&k, q) in a.strikes.iter().zip(refs) {
            match q {
                Ok(q) => {
                    println!("reference t={t} k={k} value={} agreement={:e}", q.value, q.agreement);
                    quotes.push(OptionQuote {
                        k,
                        t,
                        reference: q.value,
                    });
                }
                Err(e) => {
                    println!("reference t={t} k={k} agreement_failure: {e}");
                    agreed = false;
                }
            }
        }
    }

    if measure_ok && agreed {
        let grid = FourierGrid::new(a.domain, a.n)?;
        let sweep = bench::alpha_sweep(model, market, &quotes, &a.alphas, &grid, a.tol)?;
        for &alpha in &a.alphas {
            let verdict = alpha_verdict(&sweep, alpha).expect("every alpha was swept");
            let worst = sweep
                .iter()
                .filter(|r| r.alpha == alpha)
                .map(|r| r.error)
                .fold(0.0, f64::max);
            println!("alpha={alpha} class={verdict:?} max_error={worst:e}");
        }
        if let Some(path) = &a.sweep_out {
            report::write_csv_file(path, &sweep)?;
        }
    } else {
        println!("alpha sweep skipped: no trusted reference for this parameter set");
    }
    Ok(Status::Done)
}
